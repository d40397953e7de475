"""Scene-graph generation evaluation toolkit.

Parsing of generated scene graphs, open-vocabulary alignment,
recall/precision metrics under label-only and grounded tasks, triplet
importance ranking with capped nDCG, grounding-query generation, prompt
emission, and synthetic corpora for metric validation.
"""

from .align import AlignmentConfig, align_document, align_label
from .core import (
    BoundingBox,
    DocumentKind,
    EmbeddingTable,
    FrameGraph,
    SceneGraphDocument,
    ScoredTriplet,
    Triplet,
    Vocabulary,
    cosine,
    frame_key,
    iou,
    normalize_label,
    triplet_sentence,
)
from .errors import DataError, SgevalError
from .grounding import GroundingQuery, assemble_grounded, make_queries
from .importance import (
    ImportanceConfig,
    ScoredEntry,
    diversity,
    informativeness,
    ndcg_at,
    ndcg_report,
    rank_by_importance,
    triplet_importance,
)
from .ingest import (
    DetectionRecord,
    dump_scene_graphs,
    load_detections,
    load_embeddings,
    load_scene_graphs,
    load_vocabulary,
)
from .metrics import (
    EvalTask,
    MatchResult,
    MetricReport,
    TaskVariant,
    aggregate_iou_match,
    entity_breakdown,
    evaluate,
    match_frame,
    per_class_means,
    pr_curve,
    recall_precision_at,
)
from .parser import ParseReport, parse_generation, serialize_frames
from .promptgen import PromptMode, PromptSpec, build_prompt
from .synth import generate

__version__ = "0.1.0"

__all__ = [
    "AlignmentConfig",
    "BoundingBox",
    "DataError",
    "DetectionRecord",
    "DocumentKind",
    "EmbeddingTable",
    "EvalTask",
    "FrameGraph",
    "GroundingQuery",
    "ImportanceConfig",
    "MatchResult",
    "MetricReport",
    "ParseReport",
    "PromptMode",
    "PromptSpec",
    "SceneGraphDocument",
    "ScoredEntry",
    "ScoredTriplet",
    "SgevalError",
    "TaskVariant",
    "Triplet",
    "Vocabulary",
    "aggregate_iou_match",
    "align_document",
    "align_label",
    "assemble_grounded",
    "build_prompt",
    "cosine",
    "diversity",
    "dump_scene_graphs",
    "entity_breakdown",
    "evaluate",
    "frame_key",
    "generate",
    "informativeness",
    "iou",
    "load_detections",
    "load_embeddings",
    "load_scene_graphs",
    "load_vocabulary",
    "make_queries",
    "match_frame",
    "ndcg_at",
    "ndcg_report",
    "normalize_label",
    "parse_generation",
    "per_class_means",
    "pr_curve",
    "rank_by_importance",
    "recall_precision_at",
    "serialize_frames",
    "triplet_importance",
    "triplet_sentence",
]
