"""Matching and retrieval metrics for scene-graph evaluation.

Three task variants share one engine: label-only matching with predicted
boxes ignored (sgcls_star), frame-wise label + IoU matching (sgdet), and
temporally aggregated volume-IoU matching over triplet tracks (sgdet_agg).
Matching is greedy in prediction rank order under the No-Constraints
regime: several predictions sharing a subject-object pair may each match
distinct ground-truth predicates, and each ground-truth triplet is consumed
at most once.

Averaging is frame -> video -> corpus, unweighted at each level; a micro
switch pools counts across the corpus instead.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .core import (
    BoundingBox,
    FrameGraph,
    SceneGraphDocument,
    Triplet,
    intersection_area,
    iou,
)
from .errors import DataError

ROLES = ("subject", "predicate", "object")


class TaskVariant(str, Enum):
    SGCLS_STAR = "sgcls_star"
    SGDET = "sgdet"
    SGDET_AGG = "sgdet_agg"


@dataclass(frozen=True)
class EvalTask:
    """Evaluation task; sgcls_star always runs at IoU threshold 0, removing
    the grounding criterion. Thresholds compare with >=."""

    variant: TaskVariant
    iou_threshold: Optional[float] = None

    def __post_init__(self) -> None:
        variant = TaskVariant(self.variant)
        object.__setattr__(self, "variant", variant)
        threshold = self.iou_threshold
        if variant is TaskVariant.SGCLS_STAR:
            threshold = 0.0
        elif threshold is None:
            threshold = 0.5
        if not (0.0 <= threshold <= 1.0):
            raise DataError(f"iou_threshold {threshold} outside [0, 1]")
        object.__setattr__(self, "iou_threshold", float(threshold))


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome: (prediction rank, ground-truth index) pairs.

    Ranks are 1-based; ground-truth indices are 0-based list positions.
    Each rank and each index appears at most once.
    """

    pairs: tuple[tuple[int, int], ...]

    def hits_within(self, k: int) -> int:
        return sum(1 for rank, _ in self.pairs if rank <= k)


def match_frame(pred: FrameGraph, gt: FrameGraph, task: EvalTask) -> MatchResult:
    """Match predictions against one frame's ground truth.

    A prediction matches the first unconsumed ground-truth triplet with
    equal labels and, when the task threshold is positive, subject and
    object box IoU both >= threshold. Predictions without boxes cannot
    match under a positive threshold.
    """
    threshold = task.iou_threshold
    if threshold > 0:
        for item in gt.triplets:
            if not item.has_boxes:
                raise DataError(
                    f"frame {gt.frame_id}: ground truth missing boxes at "
                    f"rank {item.rank} but task threshold is {threshold}"
                )
    consumed = [False] * len(gt.triplets)
    pairs: list[tuple[int, int]] = []
    for item in pred.triplets:
        if threshold > 0 and not item.has_boxes:
            continue
        for index, target in enumerate(gt.triplets):
            if consumed[index] or target.triplet != item.triplet:
                continue
            if threshold > 0:
                if iou(item.subject_box, target.subject_box) < threshold:
                    continue
                if iou(item.object_box, target.object_box) < threshold:
                    continue
            consumed[index] = True
            pairs.append((item.rank, index))
            break
    return MatchResult(pairs=tuple(pairs))


# --- temporal aggregation (sgdet_agg) ---


@dataclass(frozen=True)
class Track:
    """Maximal run of consecutive frames in which one triplet occurs."""

    triplet: Triplet
    start: int
    rank: int
    frames: tuple[int, ...]
    subject_boxes: tuple[Optional[BoundingBox], ...]
    object_boxes: tuple[Optional[BoundingBox], ...]


def build_tracks(doc: SceneGraphDocument) -> list[Track]:
    """Group identical triplets into tracks, ordered by (first frame, rank).

    When a triplet occurs more than once within a frame, the occurrence
    with the lowest rank carries the track's boxes for that frame.
    """

    class _Builder:
        __slots__ = ("triplet", "start", "rank", "frames", "sboxes", "oboxes")

        def __init__(self, triplet: Triplet, start: int, rank: int):
            self.triplet = triplet
            self.start = start
            self.rank = rank
            self.frames: list[int] = []
            self.sboxes: list[Optional[BoundingBox]] = []
            self.oboxes: list[Optional[BoundingBox]] = []

        def finish(self) -> Track:
            return Track(
                triplet=self.triplet,
                start=self.start,
                rank=self.rank,
                frames=tuple(self.frames),
                subject_boxes=tuple(self.sboxes),
                object_boxes=tuple(self.oboxes),
            )

    done: list[Track] = []
    open_tracks: dict[Triplet, _Builder] = {}
    for index, frame in enumerate(doc.frames):
        present: dict[Triplet, object] = {}
        for item in frame.triplets:
            present.setdefault(item.triplet, item)
        for triplet in list(open_tracks):
            if triplet not in present:
                done.append(open_tracks.pop(triplet).finish())
        for triplet, item in present.items():
            builder = open_tracks.get(triplet)
            if builder is None:
                builder = _Builder(triplet, index, item.rank)
                open_tracks[triplet] = builder
            builder.frames.append(index)
            builder.sboxes.append(item.subject_box)
            builder.oboxes.append(item.object_box)
    done.extend(builder.finish() for builder in open_tracks.values())
    done.sort(key=lambda t: (t.start, t.rank))
    return done


def _role_viou(
    a_frames: dict[int, Optional[BoundingBox]],
    b_frames: dict[int, Optional[BoundingBox]],
) -> float:
    inter = 0.0
    union = 0.0
    for frame in set(a_frames) | set(b_frames):
        box_a = a_frames.get(frame)
        box_b = b_frames.get(frame)
        if box_a is not None and box_b is not None:
            overlap = intersection_area(box_a, box_b)
            inter += overlap
            union += box_a.area + box_b.area - overlap
        elif box_a is not None:
            union += box_a.area
        elif box_b is not None:
            union += box_b.area
    if union <= 0:
        return 0.0
    return inter / union


def track_viou(a: Track, b: Track) -> float:
    """Volume IoU over the union of two tracks' frame spans.

    Frames where only one track is present contribute that side's area to
    the union only; the combined score is the minimum of the subject and
    object volume IoUs. Unboxed occurrences contribute nothing.
    """
    subject = _role_viou(
        dict(zip(a.frames, a.subject_boxes)), dict(zip(b.frames, b.subject_boxes))
    )
    obj = _role_viou(
        dict(zip(a.frames, a.object_boxes)), dict(zip(b.frames, b.object_boxes))
    )
    return min(subject, obj)


def aggregate_iou_match(
    pred_doc: SceneGraphDocument, gt_doc: SceneGraphDocument, threshold: float
) -> MatchResult:
    """Greedy track matching for one video.

    Pairs are (1-based prediction track position, 0-based ground-truth
    track index) over the orderings of :func:`build_tracks`. A prediction
    track matches the first unconsumed ground-truth track with equal
    labels and combined volume IoU >= threshold.
    """
    pred_tracks = build_tracks(pred_doc)
    gt_tracks = build_tracks(gt_doc)
    consumed = [False] * len(gt_tracks)
    pairs: list[tuple[int, int]] = []
    for position, track in enumerate(pred_tracks, start=1):
        for index, target in enumerate(gt_tracks):
            if consumed[index] or target.triplet != track.triplet:
                continue
            if threshold > 0 and track_viou(track, target) < threshold:
                continue
            consumed[index] = True
            pairs.append((position, index))
            break
    return MatchResult(pairs=tuple(pairs))


# --- tallies and averaging ---


@dataclass(frozen=True)
class _Tally:
    """Hit counts for one retrieval unit (a frame, or a video of tracks)."""

    hits: dict[int, int]
    returned: int
    gt_count: int
    matched_pred_classes: dict[int, Counter]
    returned_classes: dict[int, Counter]
    gt_classes: Counter


def _frame_tally(
    pred: FrameGraph, gt: FrameGraph, task: EvalTask, ks: Sequence[int]
) -> _Tally:
    result = match_frame(pred, gt, task)
    matched_ranks = [rank for rank, _ in result.pairs]
    predicate_by_rank = {item.rank: item.triplet.predicate for item in pred.triplets}
    hits = {k: sum(1 for rank in matched_ranks if rank <= k) for k in ks}
    matched_classes = {
        k: Counter(predicate_by_rank[r] for r in matched_ranks if r <= k) for k in ks
    }
    returned_classes = {
        k: Counter(
            item.triplet.predicate for item in pred.triplets if item.rank <= k
        )
        for k in ks
    }
    return _Tally(
        hits=hits,
        returned=len(pred.triplets),
        gt_count=len(gt.triplets),
        matched_pred_classes=matched_classes,
        returned_classes=returned_classes,
        gt_classes=Counter(item.triplet.predicate for item in gt.triplets),
    )


def _video_tallies(
    pred_doc: SceneGraphDocument,
    gt_doc: SceneGraphDocument,
    task: EvalTask,
    ks: Sequence[int],
) -> list[_Tally]:
    pred_ids = [frame.frame_id for frame in pred_doc.frames]
    gt_ids = [frame.frame_id for frame in gt_doc.frames]
    if pred_ids != gt_ids:
        raise DataError(
            f"frame id mismatch for video {pred_doc.video_id}: "
            f"prediction {pred_ids} vs ground truth {gt_ids}"
        )
    if task.variant is TaskVariant.SGDET_AGG:
        pred_tracks = build_tracks(pred_doc)
        gt_tracks = build_tracks(gt_doc)
        result = aggregate_iou_match(pred_doc, gt_doc, task.iou_threshold)
        positions = [position for position, _ in result.pairs]
        hits = {k: sum(1 for p in positions if p <= k) for k in ks}
        class_of = {i + 1: t.triplet.predicate for i, t in enumerate(pred_tracks)}
        matched_classes = {
            k: Counter(class_of[p] for p in positions if p <= k) for k in ks
        }
        returned_classes = {
            k: Counter(
                t.triplet.predicate for i, t in enumerate(pred_tracks) if i + 1 <= k
            )
            for k in ks
        }
        return [
            _Tally(
                hits=hits,
                returned=len(pred_tracks),
                gt_count=len(gt_tracks),
                matched_pred_classes=matched_classes,
                returned_classes=returned_classes,
                gt_classes=Counter(t.triplet.predicate for t in gt_tracks),
            )
        ]
    return [
        _frame_tally(pred, gt, task, ks)
        for pred, gt in zip(pred_doc.frames, gt_doc.frames)
    ]


def _as_documents(
    docs: SceneGraphDocument | Sequence[SceneGraphDocument],
) -> list[SceneGraphDocument]:
    if isinstance(docs, SceneGraphDocument):
        return [docs]
    return list(docs)


def pair_documents(
    pred_docs: SceneGraphDocument | Sequence[SceneGraphDocument],
    gt_docs: SceneGraphDocument | Sequence[SceneGraphDocument],
) -> list[tuple[SceneGraphDocument, SceneGraphDocument]]:
    """Pair prediction and ground-truth documents by video_id."""
    preds = _as_documents(pred_docs)
    gts = _as_documents(gt_docs)
    gt_by_id = {doc.video_id: doc for doc in gts}
    if len(gt_by_id) != len(gts):
        raise DataError("duplicate video_id in ground-truth documents")
    missing = [doc.video_id for doc in preds if doc.video_id not in gt_by_id]
    if missing:
        raise DataError(f"predictions without ground truth: {missing}")
    extra = sorted(set(gt_by_id) - {doc.video_id for doc in preds})
    if extra:
        raise DataError(f"ground-truth videos without predictions: {extra}")
    return [(doc, gt_by_id[doc.video_id]) for doc in preds]


def _corpus_tallies(
    pred_docs,
    gt_docs,
    task: EvalTask,
    ks: Sequence[int],
    jobs: Optional[int] = None,
) -> list[list[_Tally]]:
    pairs = pair_documents(pred_docs, gt_docs)
    if jobs is not None and jobs > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(
                pool.map(lambda pg: _video_tallies(pg[0], pg[1], task, ks), pairs)
            )
    return [_video_tallies(pred, gt, task, ks) for pred, gt in pairs]


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _macro_average(videos: list[list[_Tally]], ks: Sequence[int]):
    recall_at: dict[int, float] = {}
    precision_at: dict[int, float] = {}
    for k in ks:
        video_recalls = []
        video_precisions = []
        for tallies in videos:
            recalls = []
            precisions = []
            for tally in tallies:
                if tally.gt_count > 0:
                    recalls.append(tally.hits[k] / tally.gt_count)
                elif tally.returned == 0:
                    recalls.append(1.0)
                if tally.returned > 0:
                    precisions.append(tally.hits[k] / min(k, tally.returned))
            if recalls:
                video_recalls.append(_mean(recalls))
            if precisions:
                video_precisions.append(_mean(precisions))
        recall_at[k] = _mean(video_recalls) if video_recalls else 0.0
        precision_at[k] = _mean(video_precisions) if video_precisions else 0.0
    return recall_at, precision_at


def _micro_average(videos: list[list[_Tally]], ks: Sequence[int]):
    recall_at: dict[int, float] = {}
    precision_at: dict[int, float] = {}
    for k in ks:
        hit_total = 0
        gt_total = 0
        returned_total = 0
        for tallies in videos:
            for tally in tallies:
                hit_total += tally.hits[k]
                gt_total += tally.gt_count
                returned_total += min(k, tally.returned)
        recall_at[k] = hit_total / gt_total if gt_total else 0.0
        precision_at[k] = hit_total / returned_total if returned_total else 0.0
    return recall_at, precision_at


@dataclass
class MetricReport:
    """Recall/precision values indexed by task, K, class, and role."""

    task: str
    ks: tuple[int, ...]
    recall_at: dict[int, float]
    precision_at: dict[int, float]
    mean_recall_at: dict[int, float] = field(default_factory=dict)
    mean_precision_at: dict[int, float] = field(default_factory=dict)
    per_class: dict[str, dict[str, dict[int, float]]] = field(default_factory=dict)
    entity: dict[str, dict[str, float]] = field(default_factory=dict)
    ndcg: dict[int, float] = field(default_factory=dict)


def recall_precision_at(
    pred_docs,
    gt_docs,
    task: EvalTask,
    ks: Sequence[int],
    micro: bool = False,
    jobs: Optional[int] = None,
) -> MetricReport:
    """Recall@K and Precision@K over aligned corpora.

    Per frame, predictions are truncated to the first K by rank; recall is
    hits / |gt| and precision is hits / min(K, returned). Frames without
    ground truth count as recall 1.0 when the model returned nothing and
    are skipped otherwise; frames without predictions are skipped for
    precision.
    """
    ks = _checked_ks(ks)
    videos = _corpus_tallies(pred_docs, gt_docs, task, ks, jobs=jobs)
    average = _micro_average if micro else _macro_average
    recall_at, precision_at = average(videos, ks)
    return MetricReport(
        task=task.variant.value,
        ks=tuple(ks),
        recall_at=recall_at,
        precision_at=precision_at,
    )


def _checked_ks(ks: Sequence[int]) -> list[int]:
    values = sorted(set(int(k) for k in ks))
    if not values or values[0] < 1:
        raise ValueError(f"K values must be positive integers, got {list(ks)}")
    return values


def per_class_means(
    pred_docs,
    gt_docs,
    task: EvalTask,
    ks: Sequence[int],
    jobs: Optional[int] = None,
):
    """Per-predicate-class metrics plus unweighted macro means.

    Counts are pooled over the whole corpus per class; recall covers
    classes present in ground truth and precision classes present in the
    top-K predictions.
    """
    ks = _checked_ks(ks)
    videos = _corpus_tallies(pred_docs, gt_docs, task, ks, jobs=jobs)
    gt_totals: Counter = Counter()
    matched: dict[int, Counter] = {k: Counter() for k in ks}
    returned: dict[int, Counter] = {k: Counter() for k in ks}
    for tallies in videos:
        for tally in tallies:
            gt_totals.update(tally.gt_classes)
            for k in ks:
                matched[k].update(tally.matched_pred_classes[k])
                returned[k].update(tally.returned_classes[k])

    per_class: dict[str, dict[str, dict[int, float]]] = {}
    classes = sorted(set(gt_totals) | set().union(*(set(returned[k]) for k in ks)))
    for cls in classes:
        entry: dict[str, dict[int, float]] = {}
        if gt_totals[cls] > 0:
            entry["recall"] = {k: matched[k][cls] / gt_totals[cls] for k in ks}
        precision = {
            k: matched[k][cls] / returned[k][cls] for k in ks if returned[k][cls] > 0
        }
        if precision:
            entry["precision"] = precision
        per_class[cls] = entry

    mean_recall = {}
    mean_precision = {}
    for k in ks:
        recall_values = [
            matched[k][cls] / gt_totals[cls] for cls in gt_totals if gt_totals[cls] > 0
        ]
        precision_values = [
            matched[k][cls] / returned[k][cls]
            for cls in returned[k]
            if returned[k][cls] > 0
        ]
        mean_recall[k] = _mean(recall_values) if recall_values else 0.0
        mean_precision[k] = _mean(precision_values) if precision_values else 0.0
    return per_class, mean_recall, mean_precision


def entity_breakdown(pred_docs, gt_docs) -> dict[str, dict[str, float]]:
    """Per-role precision/recall over full generations (no K cutoff).

    Role labels are multiset-matched per frame, then averaged frame ->
    video -> corpus with the same empty-frame conventions as
    recall_precision_at.
    """
    pairs = pair_documents(pred_docs, gt_docs)
    out: dict[str, dict[str, float]] = {}
    for role in ROLES:
        video_precisions = []
        video_recalls = []
        for pred_doc, gt_doc in pairs:
            pred_ids = [frame.frame_id for frame in pred_doc.frames]
            gt_ids = [frame.frame_id for frame in gt_doc.frames]
            if pred_ids != gt_ids:
                raise DataError(
                    f"frame id mismatch for video {pred_doc.video_id}"
                )
            precisions = []
            recalls = []
            for pred, gt in zip(pred_doc.frames, gt_doc.frames):
                pred_labels = Counter(
                    getattr(item.triplet, role) for item in pred.triplets
                )
                gt_labels = Counter(getattr(item.triplet, role) for item in gt.triplets)
                hit = sum((pred_labels & gt_labels).values())
                if sum(gt_labels.values()) > 0:
                    recalls.append(hit / sum(gt_labels.values()))
                elif not pred_labels:
                    recalls.append(1.0)
                if sum(pred_labels.values()) > 0:
                    precisions.append(hit / sum(pred_labels.values()))
            if precisions:
                video_precisions.append(_mean(precisions))
            if recalls:
                video_recalls.append(_mean(recalls))
        out[role] = {
            "precision": _mean(video_precisions) if video_precisions else 0.0,
            "recall": _mean(video_recalls) if video_recalls else 0.0,
        }
    return out


def pr_curve(
    pred_docs, gt_docs, task: EvalTask, ks: Sequence[int], micro: bool = False
) -> list[tuple[int, float, float]]:
    """(K, precision, recall) points for precision-recall trade-off charts."""
    fragment = recall_precision_at(pred_docs, gt_docs, task, ks, micro=micro)
    return [(k, fragment.precision_at[k], fragment.recall_at[k]) for k in fragment.ks]


def evaluate(
    pred_docs,
    gt_docs,
    task: EvalTask,
    ks: Sequence[int],
    per_class: bool = False,
    entity: bool = False,
    micro: bool = False,
    jobs: Optional[int] = None,
) -> MetricReport:
    """Full metric report for one task over aligned corpora."""
    report = recall_precision_at(pred_docs, gt_docs, task, ks, micro=micro, jobs=jobs)
    if per_class:
        classes, mean_recall, mean_precision = per_class_means(
            pred_docs, gt_docs, task, ks, jobs=jobs
        )
        report.per_class = classes
        report.mean_recall_at = mean_recall
        report.mean_precision_at = mean_precision
    if entity:
        report.entity = entity_breakdown(pred_docs, gt_docs)
    return report
