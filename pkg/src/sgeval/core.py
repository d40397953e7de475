"""Shared data model: boxes, triplets, frame graphs, vocabularies, embeddings.

All types are immutable after construction and safe to share across
concurrent evaluation workers.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DataError

_WHITESPACE = re.compile(r"\s+")
_TRAILING_PUNCT = ".,;:!?\"'"


def normalize_label(raw: str) -> str:
    """Canonical label form: lowercase, underscores to spaces, internal
    whitespace collapsed, trailing punctuation stripped."""
    text = raw.replace("_", " ").lower()
    text = _WHITESPACE.sub(" ", text).strip()
    return text.rstrip(_TRAILING_PUNCT).strip()


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, corner pair (x1, y1) top-left to (x2, y2) in pixels."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DataError(f"non-finite box coordinate {name}={value!r}")
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise DataError(
                f"inverted box corners ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Overlap area of two boxes (0 when disjoint)."""
    width = min(a.x2, b.x2) - max(a.x1, b.x1)
    height = min(a.y2, b.y2) - max(a.y1, b.y1)
    if width <= 0 or height <= 0:
        return 0.0
    return width * height


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union in [0, 1]; 0 when the union has zero area."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


@dataclass(frozen=True)
class Triplet:
    """A ``subject, predicate, object`` relation with normalized labels."""

    subject: str
    predicate: str
    object: str

    def __post_init__(self) -> None:
        for role in ("subject", "predicate", "object"):
            label = normalize_label(getattr(self, role))
            if not label:
                raise DataError(f"empty {role} label in triplet")
            object.__setattr__(self, role, label)


def triplet_sentence(t: Triplet) -> str:
    """Natural-language form of a triplet, used as its text-embedding key."""
    return f"a {t.subject} is {t.predicate} {t.object}"


def frame_key(video_id: str, frame_id: str) -> str:
    """Embedding-table key for a frame image."""
    return f"frame://{video_id}/{frame_id}"


@dataclass(frozen=True)
class ScoredTriplet:
    """A triplet at a 1-based rank position, optionally boxed and scored.

    Rank order (not score) is authoritative for top-K truncation: model
    output is consumed in generation order.
    """

    triplet: Triplet
    rank: int
    score: Optional[float] = None
    subject_box: Optional[BoundingBox] = None
    object_box: Optional[BoundingBox] = None

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise DataError(f"rank must be >= 1, got {self.rank}")
        if self.score is not None and not math.isfinite(self.score):
            raise DataError(f"non-finite score {self.score!r}")

    @property
    def has_boxes(self) -> bool:
        return self.subject_box is not None and self.object_box is not None


@dataclass(frozen=True)
class FrameGraph:
    """Ordered triplets of one frame; list order is the rank order."""

    frame_id: str
    triplets: tuple[ScoredTriplet, ...] = ()

    def __post_init__(self) -> None:
        if not self.frame_id:
            raise DataError("empty frame_id")
        object.__setattr__(self, "triplets", tuple(self.triplets))
        for position, item in enumerate(self.triplets, start=1):
            if item.rank != position:
                raise DataError(
                    f"frame {self.frame_id}: rank {item.rank} at position {position}; "
                    "ranks must be contiguous from 1 in list order"
                )

    @classmethod
    def from_triplets(cls, frame_id: str, triplets: Iterable[Triplet]) -> "FrameGraph":
        """Build a frame from bare triplets, assigning ranks from order."""
        scored = tuple(
            ScoredTriplet(triplet=t, rank=i) for i, t in enumerate(triplets, start=1)
        )
        return cls(frame_id=frame_id, triplets=scored)


def reranked(frame_id: str, items: Sequence[ScoredTriplet]) -> FrameGraph:
    """Rebuild a frame from scored triplets, re-assigning ranks 1..n from order."""
    compacted = tuple(
        dataclasses.replace(item, rank=i) for i, item in enumerate(items, start=1)
    )
    return FrameGraph(frame_id=frame_id, triplets=compacted)


class DocumentKind(str, Enum):
    GROUND_TRUTH = "ground_truth"
    PREDICTION = "prediction"


@dataclass(frozen=True)
class SceneGraphDocument:
    """Per-video scene graphs, one FrameGraph per frame in temporal order."""

    video_id: str
    frames: tuple[FrameGraph, ...]
    kind: DocumentKind

    def __post_init__(self) -> None:
        if not self.video_id:
            raise DataError("empty video_id")
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "kind", DocumentKind(self.kind))
        seen: set[str] = set()
        for frame in self.frames:
            if frame.frame_id in seen:
                raise DataError(
                    f"video {self.video_id}: duplicate frame_id {frame.frame_id!r}"
                )
            seen.add(frame.frame_id)
        if self.kind is DocumentKind.GROUND_TRUTH:
            for frame in self.frames:
                for item in frame.triplets:
                    if not item.has_boxes:
                        raise DataError(
                            "ground truth requires boxes "
                            f"(video {self.video_id}, frame {frame.frame_id}, "
                            f"rank {item.rank})"
                        )


@dataclass(frozen=True)
class Vocabulary:
    """Closed object and predicate label sets of a dataset."""

    objects: frozenset[str]
    predicates: frozenset[str]

    def __post_init__(self) -> None:
        for field_name in ("objects", "predicates"):
            labels = frozenset(
                filter(None, (normalize_label(s) for s in getattr(self, field_name)))
            )
            if not labels:
                raise DataError(f"vocabulary has no valid {field_name}")
            object.__setattr__(self, field_name, labels)


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; rejects zero-norm inputs."""
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("degenerate embedding: zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class EmbeddingTable:
    """Immutable map from key strings to unit-norm vectors of one dimension."""

    def __init__(self, dimension: int, entries: Mapping[str, np.ndarray]):
        if dimension < 1:
            raise DataError(f"embedding dimension must be positive, got {dimension}")
        store: dict[str, np.ndarray] = {}
        for key, vector in entries.items():
            arr = np.asarray(vector, dtype=float)
            if arr.shape != (dimension,):
                raise DataError(
                    f"embedding for key {key!r} has length {arr.shape}, "
                    f"expected ({dimension},)"
                )
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite embedding for key {key!r}")
            norm = float(np.linalg.norm(arr))
            if abs(norm - 1.0) > 1e-4:
                raise DataError(
                    f"embedding for key {key!r} has norm {norm:.6f}, expected 1.0"
                )
            arr.setflags(write=False)
            store[key] = arr
        self._dimension = dimension
        self._entries = store

    @classmethod
    def from_vectors(cls, entries: Mapping[str, Sequence[float]]) -> "EmbeddingTable":
        """Build a table from raw vectors, unit-normalizing each one."""
        normalized: dict[str, np.ndarray] = {}
        dimension: int | None = None
        for key, vector in entries.items():
            arr = np.asarray(vector, dtype=float)
            if dimension is None:
                dimension = int(arr.shape[0]) if arr.ndim == 1 else -1
            if arr.ndim != 1 or arr.shape[0] != dimension:
                raise DataError(
                    f"embedding for key {key!r} has inconsistent dimension"
                )
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite embedding for key {key!r}")
            norm = float(np.linalg.norm(arr))
            if norm == 0.0:
                raise DataError(f"degenerate embedding (zero norm) for key {key!r}")
            normalized[key] = arr / norm
        if dimension is None:
            raise DataError("embedding table has no entries")
        return cls(dimension, normalized)

    @property
    def dimension(self) -> int:
        return self._dimension

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def keys(self):
        return self._entries.keys()

    def vector(self, key: str) -> np.ndarray:
        try:
            return self._entries[key]
        except KeyError:
            raise DataError(f"missing embedding key {key!r}") from None

    def similarity(self, key_a: str, key_b: str) -> float:
        """Cosine between two stored unit vectors."""
        return float(
            np.clip(np.dot(self.vector(key_a), self.vector(key_b)), -1.0, 1.0)
        )

    def merged(self, other: "EmbeddingTable") -> "EmbeddingTable":
        """Union of two tables; shared keys must agree, dimensions must match."""
        if other.dimension != self.dimension:
            raise DataError(
                f"cannot merge tables of dimension {self.dimension} and "
                f"{other.dimension}"
            )
        entries = dict(self._entries)
        for key in other.keys():
            vector = other.vector(key)
            if key in entries and not np.allclose(entries[key], vector, atol=1e-6):
                raise DataError(f"conflicting embeddings for key {key!r}")
            entries[key] = vector
        return EmbeddingTable(self.dimension, entries)
