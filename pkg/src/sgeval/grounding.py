"""Referring-expression queries and detector-output assembly.

Each triplet yields two queries for an external open-vocabulary detector:
one specifying the subject by the relation, one the object. Detector boxes
are joined back onto triplets by exact query text.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .core import FrameGraph, SceneGraphDocument, Triplet
from .ingest import DetectionRecord


class QueryRole(str, Enum):
    SUBJECT = "subject"
    OBJECT = "object"


@dataclass(frozen=True)
class GroundingQuery:
    triplet: Triplet
    role: QueryRole
    text: str


def make_queries(t: Triplet) -> tuple[GroundingQuery, GroundingQuery]:
    """Subject and object queries for one triplet.

    The predicate is inserted verbatim, without inflection. Symmetric
    triplets (subject label equals object label) share the subject-form
    text for both roles; downstream assembly takes the top-2 boxes for
    that one query.
    """
    subject_text = f"The {t.subject} {t.predicate} {t.object}."
    if t.subject == t.object:
        object_text = subject_text
    else:
        object_text = f"The {t.object} being {t.predicate} by {t.subject}."
    return (
        GroundingQuery(triplet=t, role=QueryRole.SUBJECT, text=subject_text),
        GroundingQuery(triplet=t, role=QueryRole.OBJECT, text=object_text),
    )


def assemble_grounded(
    frame: FrameGraph, detections: Sequence[DetectionRecord]
) -> FrameGraph:
    """Attach detector boxes to a frame's triplets by query text.

    Every triplet takes the highest-confidence box for each of its
    queries; symmetric triplets take the top-2 boxes of the shared query,
    higher confidence to the subject. Triplets whose query has no
    detection are left as they were. Never removes or reorders triplets.
    """
    by_query: dict[str, list[DetectionRecord]] = {}
    for record in detections:
        by_query.setdefault(record.query, []).append(record)
    for bucket in by_query.values():
        bucket.sort(key=lambda r: -r.confidence)

    items = []
    for item in frame.triplets:
        subject_query, object_query = make_queries(item.triplet)
        if subject_query.text == object_query.text:
            hits = by_query.get(subject_query.text, [])
            subject_box = hits[0].box if len(hits) >= 1 else None
            object_box = hits[1].box if len(hits) >= 2 else None
        else:
            subject_hits = by_query.get(subject_query.text, [])
            object_hits = by_query.get(object_query.text, [])
            subject_box = subject_hits[0].box if subject_hits else None
            object_box = object_hits[0].box if object_hits else None
        replacements = {}
        if subject_box is not None:
            replacements["subject_box"] = subject_box
        if object_box is not None:
            replacements["object_box"] = object_box
        items.append(dataclasses.replace(item, **replacements) if replacements else item)
    return FrameGraph(frame_id=frame.frame_id, triplets=tuple(items))


def ground_document(
    doc: SceneGraphDocument, detections: Iterable[DetectionRecord]
) -> SceneGraphDocument:
    """Assemble detector boxes onto every frame of a document."""
    per_frame: dict[str, list[DetectionRecord]] = {}
    for record in detections:
        if record.video_id == doc.video_id:
            per_frame.setdefault(record.frame_id, []).append(record)
    frames = tuple(
        assemble_grounded(frame, per_frame.get(frame.frame_id, []))
        for frame in doc.frames
    )
    return SceneGraphDocument(video_id=doc.video_id, frames=frames, kind=doc.kind)


def write_query_manifest(
    docs: Sequence[SceneGraphDocument], path: str | Path
) -> int:
    """Write the line-delimited query manifest for an external detector.

    One record per distinct (video_id, frame_id, query), order preserved.
    Returns the number of records written.
    """
    seen: set[tuple[str, str, str]] = set()
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            for frame in doc.frames:
                for item in frame.triplets:
                    for query in make_queries(item.triplet):
                        row = (doc.video_id, frame.frame_id, query.text)
                        if row in seen:
                            continue
                        seen.add(row)
                        handle.write(
                            json.dumps(
                                {
                                    "video_id": doc.video_id,
                                    "frame_id": frame.frame_id,
                                    "query": query.text,
                                },
                                sort_keys=True,
                            )
                            + "\n"
                        )
                        count += 1
    return count
