from __future__ import annotations

import math

import pytest

from sgeval.core import (
    BoundingBox,
    DocumentKind,
    EmbeddingTable,
    FrameGraph,
    SceneGraphDocument,
    ScoredTriplet,
    Triplet,
    Vocabulary,
    triplet_sentence,
)


def box(x1=0.0, y1=0.0, x2=10.0, y2=10.0) -> BoundingBox:
    return BoundingBox(x1=x1, y1=y1, x2=x2, y2=y2)


def make_frame(frame_id, triples, boxed=False):
    """FrameGraph from (s, p, o) tuples; boxed attaches distinct unit boxes."""
    items = []
    for rank, (s, p, o) in enumerate(triples, start=1):
        kwargs = {}
        if boxed:
            offset = float(rank) * 20.0
            kwargs["subject_box"] = box(offset, 0.0, offset + 10.0, 10.0)
            kwargs["object_box"] = box(offset, 20.0, offset + 10.0, 30.0)
        items.append(
            ScoredTriplet(
                triplet=Triplet(subject=s, predicate=p, object=o),
                rank=rank,
                **kwargs,
            )
        )
    return FrameGraph(frame_id=frame_id, triplets=tuple(items))


def make_doc(video_id, kind, frames):
    return SceneGraphDocument(video_id=video_id, frames=tuple(frames), kind=kind)


def pred_doc(video_id, frames_triples, boxed=False):
    frames = [
        make_frame(f"f{i}", triples, boxed=boxed)
        for i, triples in enumerate(frames_triples)
    ]
    return make_doc(video_id, DocumentKind.PREDICTION, frames)


def gt_doc(video_id, frames_triples):
    frames = [
        make_frame(f"f{i}", triples, boxed=True)
        for i, triples in enumerate(frames_triples)
    ]
    return make_doc(video_id, DocumentKind.GROUND_TRUTH, frames)


def sentence_table(frame_keys, triplets, angles, dim_pairs=None):
    """2-D embedding table with chosen angles (radians) per key.

    ``angles`` maps a frame key or a triplet to its angle; cosines between
    keys are cos(angle difference), which makes hand-computed similarities
    exact up to float rounding.
    """
    entries = {}
    for key in frame_keys:
        theta = angles[key]
        entries[key] = [math.cos(theta), math.sin(theta)]
    for t in triplets:
        theta = angles[t]
        entries[triplet_sentence(t)] = [math.cos(theta), math.sin(theta)]
    return EmbeddingTable.from_vectors(entries)


@pytest.fixture
def small_vocab():
    return Vocabulary(
        objects=frozenset({"person", "cup", "chair", "dog", "cat", "closet", "floor"}),
        predicates=frozenset(
            {"holding", "sit on", "looking at", "chase", "beneath", "next to"}
        ),
    )
