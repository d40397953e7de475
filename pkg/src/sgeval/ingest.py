"""Loaders and serializers for the canonical file formats.

Scene graphs and vocabularies are single JSON documents; embeddings and
detections are line-delimited JSON. Loading validates invariants and names
the offending video/frame/key in every error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import (
    BoundingBox,
    DocumentKind,
    EmbeddingTable,
    FrameGraph,
    SceneGraphDocument,
    ScoredTriplet,
    Triplet,
    Vocabulary,
)
from .errors import DataError


@dataclass(frozen=True)
class DetectionRecord:
    """One detector hit for a referring-expression query on one frame."""

    video_id: str
    frame_id: str
    query: str
    box: BoundingBox
    confidence: float

    def __post_init__(self) -> None:
        if not self.query:
            raise DataError("detection record with empty query")
        if not (0.0 <= self.confidence <= 1.0):
            raise DataError(
                f"confidence {self.confidence} outside [0, 1] "
                f"(video {self.video_id}, frame {self.frame_id}, query {self.query!r})"
            )


def _read_json(path: str | Path) -> object:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {path}: {exc}") from exc


def _require(mapping: object, field: str, context: str) -> object:
    if not isinstance(mapping, dict) or field not in mapping:
        raise DataError(f"{context}: missing field {field!r}")
    return mapping[field]


def _parse_box(raw: object, context: str) -> BoundingBox:
    if (
        not isinstance(raw, (list, tuple))
        or len(raw) != 4
        or not all(isinstance(v, (int, float)) for v in raw)
    ):
        raise DataError(f"{context}: box must be a [x1, y1, x2, y2] number list")
    try:
        return BoundingBox(*(float(v) for v in raw))
    except DataError as exc:
        raise DataError(f"{context}: {exc}") from None


def load_scene_graphs(
    path: str | Path, kind: DocumentKind | str
) -> list[SceneGraphDocument]:
    """Load a scene-graph file into one document per video.

    Labels are normalized and ranks assigned from list order. Ground-truth
    documents reject triplets without both boxes.
    """
    kind = DocumentKind(kind)
    payload = _read_json(path)
    videos = _require(payload, "videos", str(path))
    if not isinstance(videos, list):
        raise DataError(f"{path}: 'videos' must be a list")

    documents = []
    for video in videos:
        video_id = _require(video, "video_id", str(path))
        context = f"video {video_id}"
        raw_frames = _require(video, "frames", context)
        if not isinstance(raw_frames, list):
            raise DataError(f"{context}: 'frames' must be a list")
        frames = []
        for raw_frame in raw_frames:
            frame_id = _require(raw_frame, "frame_id", context)
            fcontext = f"video {video_id}, frame {frame_id}"
            raw_triplets = _require(raw_frame, "triplets", fcontext)
            if not isinstance(raw_triplets, list):
                raise DataError(f"{fcontext}: 'triplets' must be a list")
            scored = []
            for position, raw in enumerate(raw_triplets, start=1):
                tcontext = f"{fcontext}, triplet {position}"
                labels = {}
                for field in ("subject", "predicate", "object"):
                    value = _require(raw, field, tcontext)
                    if not isinstance(value, str):
                        raise DataError(f"{tcontext}: field {field!r} must be a string")
                    labels[field] = value
                try:
                    triplet = Triplet(**labels)
                except DataError as exc:
                    raise DataError(f"{tcontext}: {exc}") from None
                score = raw.get("score")
                if score is not None and (
                    not isinstance(score, (int, float)) or not math.isfinite(score)
                ):
                    raise DataError(f"{tcontext}: score must be a finite number")
                boxes = {}
                for field in ("subject_box", "object_box"):
                    raw_box = raw.get(field)
                    boxes[field] = (
                        None
                        if raw_box is None
                        else _parse_box(raw_box, f"{tcontext}, {field}")
                    )
                scored.append(
                    ScoredTriplet(
                        triplet=triplet,
                        rank=position,
                        score=None if score is None else float(score),
                        subject_box=boxes["subject_box"],
                        object_box=boxes["object_box"],
                    )
                )
            frames.append(FrameGraph(frame_id=str(frame_id), triplets=tuple(scored)))
        documents.append(
            SceneGraphDocument(video_id=str(video_id), frames=tuple(frames), kind=kind)
        )
    return documents


def scene_graphs_to_obj(
    docs: Sequence[SceneGraphDocument],
    ti: Optional[Mapping[tuple[str, str], Sequence[float]]] = None,
) -> dict:
    """Canonical JSON object for documents; ``ti`` optionally attaches a
    per-triplet importance value keyed by (video_id, frame_id)."""
    videos = []
    for doc in docs:
        frames = []
        for frame in doc.frames:
            scores = None if ti is None else ti.get((doc.video_id, frame.frame_id))
            triplets = []
            for index, item in enumerate(frame.triplets):
                entry: dict = {
                    "subject": item.triplet.subject,
                    "predicate": item.triplet.predicate,
                    "object": item.triplet.object,
                }
                if item.score is not None:
                    entry["score"] = item.score
                if item.subject_box is not None:
                    entry["subject_box"] = item.subject_box.as_list()
                if item.object_box is not None:
                    entry["object_box"] = item.object_box.as_list()
                if scores is not None:
                    entry["ti"] = scores[index]
                triplets.append(entry)
            frames.append({"frame_id": frame.frame_id, "triplets": triplets})
        videos.append({"video_id": doc.video_id, "frames": frames})
    return {"videos": videos}


def dump_scene_graphs(
    docs: Sequence[SceneGraphDocument],
    path: str | Path,
    ti: Optional[Mapping[tuple[str, str], Sequence[float]]] = None,
) -> None:
    """Write documents as a canonical scene-graph file."""
    payload = scene_graphs_to_obj(docs, ti=ti)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Load and normalize the closed object/predicate label sets."""
    payload = _read_json(path)
    objects = _require(payload, "objects", str(path))
    predicates = _require(payload, "predicates", str(path))
    if not isinstance(objects, list) or not objects:
        raise DataError(f"{path}: 'objects' must be a non-empty list")
    if not isinstance(predicates, list) or not predicates:
        raise DataError(f"{path}: 'predicates' must be a non-empty list")
    return Vocabulary(objects=frozenset(objects), predicates=frozenset(predicates))


def _iter_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    """Yield (line number, record) pairs, skipping blanks and '#' comments."""
    try:
        with open(path, encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                try:
                    record = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{number}: invalid JSON: {exc}") from exc
                if not isinstance(record, dict):
                    raise DataError(f"{path}:{number}: record must be an object")
                yield number, record
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load a line-delimited embedding file, re-normalizing to unit length.

    The first record fixes the dimension; later records must match it.
    """
    entries: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for number, record in _iter_jsonl(path):
        context = f"{path}:{number}"
        key = _require(record, "key", context)
        vector = _require(record, "vector", context)
        if not isinstance(key, str) or not key:
            raise DataError(f"{context}: 'key' must be a non-empty string")
        if not isinstance(vector, list) or not all(
            isinstance(v, (int, float)) for v in vector
        ):
            raise DataError(f"{context}: 'vector' must be a number list (key {key!r})")
        arr = np.asarray(vector, dtype=float)
        if dimension is None:
            dimension = len(vector)
        if len(vector) != dimension:
            raise DataError(
                f"{context}: vector for key {key!r} has length {len(vector)}, "
                f"expected {dimension}"
            )
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{context}: non-finite value in vector for key {key!r}")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise DataError(f"{context}: degenerate embedding (zero norm) for key {key!r}")
        if key in entries:
            raise DataError(f"{context}: duplicate key {key!r}")
        entries[key] = arr / norm
    if dimension is None:
        raise DataError(f"{path}: embedding file has no records")
    return EmbeddingTable(dimension, entries)


def load_detections(path: str | Path) -> list[DetectionRecord]:
    """Load detector outputs; an empty file is a valid empty list."""
    records = []
    for number, record in _iter_jsonl(path):
        context = f"{path}:{number}"
        video_id = _require(record, "video_id", context)
        frame_id = _require(record, "frame_id", context)
        query = _require(record, "query", context)
        box = _parse_box(_require(record, "box", context), context)
        confidence = _require(record, "confidence", context)
        if not isinstance(confidence, (int, float)):
            raise DataError(f"{context}: 'confidence' must be a number")
        records.append(
            DetectionRecord(
                video_id=str(video_id),
                frame_id=str(frame_id),
                query=str(query),
                box=box,
                confidence=float(confidence),
            )
        )
    return records


def group_detections(
    records: Iterable[DetectionRecord],
) -> dict[tuple[str, str, str], list[DetectionRecord]]:
    """Group records by (video_id, frame_id, query), best confidence first."""
    grouped: dict[tuple[str, str, str], list[DetectionRecord]] = {}
    for record in records:
        grouped.setdefault(
            (record.video_id, record.frame_id, record.query), []
        ).append(record)
    for bucket in grouped.values():
        bucket.sort(key=lambda r: -r.confidence)
    return grouped
