"""Triplet importance scoring, importance-greedy ranking, and capped nDCG.

Importance blends informativeness (cosine between the frame embedding and
the triplet's sentence embedding) with diversity (complement of the mean
similarity to previously ranked triplets):

    TI = lambda * T_I + (1 - lambda) * T_D

with T_D fixed at 1 for the first triplet. Ranking quality is measured by
nDCG with gains 2^rel - 1, normalized by the ideal DCG of the ground truth
and capped at 1 because sparse annotations let predictions out-score the
ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    EmbeddingTable,
    FrameGraph,
    SceneGraphDocument,
    ScoredTriplet,
    Triplet,
    frame_key,
    triplet_sentence,
)
from .errors import DataError
from .metrics import pair_documents


@dataclass(frozen=True)
class ImportanceConfig:
    """Blend weight and clamping for importance scores. The default weight
    favors informativeness because diversity swings on a larger scale."""

    lambda_: float = 0.75
    clamp_to_unit: bool = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.lambda_ <= 1.0):
            raise DataError(f"lambda {self.lambda_} outside [0, 1]")


@dataclass(frozen=True)
class ScoredEntry:
    triplet: ScoredTriplet
    importance: float


ScoredRanking = tuple[ScoredEntry, ...]


def _clamp(value: float, cfg: ImportanceConfig) -> float:
    if cfg.clamp_to_unit:
        return min(1.0, max(0.0, value))
    return value


def informativeness(
    t: Triplet,
    frame_id_key: str,
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> float:
    """Cosine between the frame embedding and the triplet sentence embedding."""
    return _clamp(table.similarity(frame_id_key, triplet_sentence(t)), cfg)


def diversity(
    t: Triplet,
    previous: Sequence[Triplet],
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> float:
    """1 minus the mean sentence similarity to previously ranked triplets;
    1.0 when nothing came before."""
    if not previous:
        return 1.0
    sentence = triplet_sentence(t)
    mean_similarity = sum(
        table.similarity(triplet_sentence(prev), sentence) for prev in previous
    ) / len(previous)
    return _clamp(1.0 - mean_similarity, cfg)


def triplet_importance(
    t: Triplet,
    previous: Sequence[Triplet],
    frame_id_key: str,
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> float:
    return cfg.lambda_ * informativeness(t, frame_id_key, table, cfg) + (
        1.0 - cfg.lambda_
    ) * diversity(t, previous, table, cfg)


def rank_by_importance(
    frame: FrameGraph,
    frame_id_key: str,
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> ScoredRanking:
    """Greedy diversity-aware ordering of one frame's triplets.

    Repeatedly selects the remaining triplet with the highest importance
    given the already-selected list, breaking ties by original rank, and
    records each triplet's importance at selection time.
    """
    remaining = list(frame.triplets)
    selected: list[ScoredEntry] = []
    chosen: list[Triplet] = []
    while remaining:
        best_index = 0
        best_score = -math.inf
        for index, item in enumerate(remaining):
            score = triplet_importance(
                item.triplet, chosen, frame_id_key, table, cfg
            )
            if score > best_score:
                best_index = index
                best_score = score
        item = remaining.pop(best_index)
        selected.append(ScoredEntry(triplet=item, importance=best_score))
        chosen.append(item.triplet)
    return tuple(selected)


def score_generation_order(
    frame: FrameGraph,
    frame_id_key: str,
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> ScoredRanking:
    """Importance of each triplet in its generated order, with ``previous``
    the triplets generated before it."""
    entries: list[ScoredEntry] = []
    previous: list[Triplet] = []
    for item in frame.triplets:
        score = triplet_importance(item.triplet, previous, frame_id_key, table, cfg)
        entries.append(ScoredEntry(triplet=item, importance=score))
        previous.append(item.triplet)
    return tuple(entries)


def ndcg_at(pred: ScoredRanking, gt: ScoredRanking, p: int) -> float:
    """Capped nDCG of a prediction ranking against the ground-truth ideal.

    DCG sums (2^rel - 1) / log2(i + 1) over the first p prediction
    entries; the ideal DCG re-sorts the ground-truth importances in
    descending order. An empty or zero-importance ground truth imposes no
    constraint, so the result is 1.
    """
    if p < 1:
        raise ValueError(f"nDCG position must be >= 1, got {p}")
    dcg = _dcg(entry.importance for entry in pred[:p])
    ideal = _dcg(sorted((entry.importance for entry in gt), reverse=True)[:p])
    if ideal == 0.0:
        return 1.0
    return min(dcg / ideal, 1.0)


def _dcg(rels) -> float:
    return sum(
        (2.0 ** rel - 1.0) / math.log2(i + 1) for i, rel in enumerate(rels, start=1)
    )


def missing_keys(
    docs: Sequence[SceneGraphDocument], table: EmbeddingTable
) -> list[str]:
    """All frame and sentence keys the table lacks, for error reporting."""
    needed: set[str] = set()
    for doc in docs:
        for frame in doc.frames:
            if frame.triplets:
                needed.add(frame_key(doc.video_id, frame.frame_id))
            for item in frame.triplets:
                needed.add(triplet_sentence(item.triplet))
    return sorted(key for key in needed if key not in table)


def ndcg_report(
    pred_docs,
    gt_docs,
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
    p: int = 5,
    text_table: Optional[EmbeddingTable] = None,
) -> float:
    """Corpus nDCG: per-frame nDCG averaged frame -> video -> corpus.

    Prediction importances are computed in generation order; the ideal
    comes from the greedy importance ranking of the ground truth. When a
    separate text table is given it is merged with the frame table. Raises
    with the full list of absent embedding keys.
    """
    if text_table is not None:
        table = table.merged(text_table)
    pairs = pair_documents(pred_docs, gt_docs)
    absent = missing_keys(
        [doc for pair in pairs for doc in pair], table
    )
    if absent:
        raise DataError("missing embedding keys: " + ", ".join(absent))
    video_values = []
    for pred_doc, gt_doc in pairs:
        pred_ids = [frame.frame_id for frame in pred_doc.frames]
        gt_ids = [frame.frame_id for frame in gt_doc.frames]
        if pred_ids != gt_ids:
            raise DataError(
                f"frame id mismatch for video {pred_doc.video_id}: "
                f"prediction {pred_ids} vs ground truth {gt_ids}"
            )
        frame_values = []
        for frame, gt_frame in zip(pred_doc.frames, gt_doc.frames):
            key = frame_key(pred_doc.video_id, frame.frame_id)
            predicted = score_generation_order(frame, key, table, cfg)
            ideal = rank_by_importance(gt_frame, key, table, cfg)
            frame_values.append(ndcg_at(predicted, ideal, p))
        if frame_values:
            video_values.append(sum(frame_values) / len(frame_values))
    if not video_values:
        return 0.0
    return sum(video_values) / len(video_values)
