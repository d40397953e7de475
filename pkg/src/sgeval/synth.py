"""Synthetic corpora with controllable correctness for metric validation.

Each frame gets a fixed number of distinct ground-truth triplets; the
prediction stream repeats the first ``correct_k`` of them (optionally with
jittered boxes) and then pads with fillers whose label combinations occur
nowhere in the video's ground truth, so filler triplets can never match
under any task. With gt_per_frame=7 and a long filler tail the corpus
reproduces the precision decay P@K = 7/K analytically.
"""

from __future__ import annotations

import dataclasses
import random
from typing import Sequence

from .core import (
    BoundingBox,
    DocumentKind,
    FrameGraph,
    SceneGraphDocument,
    ScoredTriplet,
    Triplet,
    Vocabulary,
)
from .errors import DataError

_CANVAS = 1000.0
_MIN_SIDE = 20.0
_MAX_SIDE = 200.0
_MAX_DRAWS = 1000


def _random_box(rng: random.Random) -> BoundingBox:
    width = rng.uniform(_MIN_SIDE, _MAX_SIDE)
    height = rng.uniform(_MIN_SIDE, _MAX_SIDE)
    x1 = rng.uniform(0.0, _CANVAS - width)
    y1 = rng.uniform(0.0, _CANVAS - height)
    return BoundingBox(x1=x1, y1=y1, x2=x1 + width, y2=y1 + height)


def _jittered(box: BoundingBox, fraction: float, rng: random.Random) -> BoundingBox:
    if fraction == 0.0:
        return box
    width = box.x2 - box.x1
    height = box.y2 - box.y1
    x1 = box.x1 + rng.uniform(-fraction * width, fraction * width)
    x2 = box.x2 + rng.uniform(-fraction * width, fraction * width)
    y1 = box.y1 + rng.uniform(-fraction * height, fraction * height)
    y2 = box.y2 + rng.uniform(-fraction * height, fraction * height)
    if x2 < x1:
        x1, x2 = x2, x1
    if y2 < y1:
        y1, y2 = y2, y1
    return BoundingBox(x1=x1, y1=y1, x2=x2, y2=y2)


def _draw_triplet(
    rng: random.Random,
    objects: Sequence[str],
    predicates: Sequence[str],
    excluded: set[Triplet],
) -> Triplet:
    for _ in range(_MAX_DRAWS):
        candidate = Triplet(
            subject=rng.choice(objects),
            predicate=rng.choice(predicates),
            object=rng.choice(objects),
        )
        if candidate not in excluded:
            return candidate
    raise DataError(
        "vocabulary too small to generate distinct triplets "
        f"({len(objects)} objects, {len(predicates)} predicates)"
    )


def generate(
    seed: int,
    videos: int,
    frames_per_video: int,
    gt_per_frame: int,
    correct_k: int,
    filler_k: int,
    vocab: Vocabulary,
    box_jitter: float = 0.0,
) -> tuple[list[SceneGraphDocument], list[SceneGraphDocument]]:
    """Deterministic (ground truth, prediction) corpora for one seed."""
    if correct_k > gt_per_frame:
        raise DataError(
            f"correct_k {correct_k} exceeds gt_per_frame {gt_per_frame}"
        )
    if min(videos, frames_per_video, gt_per_frame) < 1 or filler_k < 0:
        raise DataError("corpus shape parameters must be positive")
    if box_jitter < 0:
        raise DataError(f"box_jitter must be >= 0, got {box_jitter}")
    objects = sorted(vocab.objects)
    predicates = sorted(vocab.predicates)
    if len(objects) * len(objects) * len(predicates) <= gt_per_frame:
        raise DataError("vocabulary too small to generate distinct triplets")

    rng = random.Random(seed)
    gt_docs = []
    pred_docs = []
    for video_index in range(videos):
        video_id = f"synth{seed}_v{video_index}"
        video_gt_labels: list[set[Triplet]] = []
        gt_frames_triplets: list[list[tuple[Triplet, BoundingBox, BoundingBox]]] = []
        for _ in range(frames_per_video):
            frame_set: set[Triplet] = set()
            rows = []
            for _ in range(gt_per_frame):
                triplet = _draw_triplet(rng, objects, predicates, frame_set)
                frame_set.add(triplet)
                rows.append((triplet, _random_box(rng), _random_box(rng)))
            video_gt_labels.append(frame_set)
            gt_frames_triplets.append(rows)
        all_video_gt = set().union(*video_gt_labels)

        gt_frames = []
        pred_frames = []
        for frame_index, rows in enumerate(gt_frames_triplets):
            frame_id = f"f{frame_index}"
            gt_items = tuple(
                ScoredTriplet(
                    triplet=triplet, rank=rank, subject_box=sbox, object_box=obox
                )
                for rank, (triplet, sbox, obox) in enumerate(rows, start=1)
            )
            gt_frames.append(FrameGraph(frame_id=frame_id, triplets=gt_items))

            pred_items = []
            for triplet, sbox, obox in rows[:correct_k]:
                pred_items.append(
                    (triplet, _jittered(sbox, box_jitter, rng), _jittered(obox, box_jitter, rng))
                )
            for _ in range(filler_k):
                filler = _draw_triplet(rng, objects, predicates, all_video_gt)
                pred_items.append((filler, _random_box(rng), _random_box(rng)))
            pred_frames.append(
                FrameGraph(
                    frame_id=frame_id,
                    triplets=tuple(
                        ScoredTriplet(
                            triplet=triplet,
                            rank=rank,
                            subject_box=sbox,
                            object_box=obox,
                        )
                        for rank, (triplet, sbox, obox) in enumerate(
                            pred_items, start=1
                        )
                    ),
                )
            )
        gt_docs.append(
            SceneGraphDocument(
                video_id=video_id,
                frames=tuple(gt_frames),
                kind=DocumentKind.GROUND_TRUTH,
            )
        )
        pred_docs.append(
            SceneGraphDocument(
                video_id=video_id,
                frames=tuple(pred_frames),
                kind=DocumentKind.PREDICTION,
            )
        )
    return gt_docs, pred_docs
