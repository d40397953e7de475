"""Open-vocabulary label alignment onto a closed dataset vocabulary.

Generated labels that are not already in the closed sets are mapped to the
most cosine-similar target over a text-embedding table. Triplets with any
unalignable component are dropped; survivors keep their relative order with
ranks re-compacted, so "first K" afterwards means "first K valid triplets".
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import AbstractSet, Optional

from .core import (
    DocumentKind,
    EmbeddingTable,
    SceneGraphDocument,
    Triplet,
    reranked,
)
from .errors import DataError


@dataclass(frozen=True)
class AlignmentConfig:
    """min_similarity rejects weak best matches; ties always break to the
    lexicographically smallest target."""

    min_similarity: float = 0.0

    def __post_init__(self) -> None:
        if not (-1.0 <= self.min_similarity <= 1.0):
            raise DataError(
                f"min_similarity {self.min_similarity} outside [-1, 1]"
            )


def align_label(
    label: str,
    targets: AbstractSet[str],
    table: EmbeddingTable,
    cfg: AlignmentConfig = AlignmentConfig(),
) -> Optional[tuple[str, float]]:
    """Best closed-vocabulary target for a label, or None when rejected.

    Exact membership short-circuits with similarity 1.0 and never touches
    the table. Rejection means the label has no embedding or its best
    similarity falls below the configured floor.
    """
    if not label:
        raise DataError("cannot align an empty label")
    if not targets:
        raise DataError("alignment target set is empty")
    if label in targets:
        return label, 1.0
    if label not in table:
        return None
    best: Optional[tuple[str, float]] = None
    for target in sorted(targets):
        if target not in table:
            raise DataError(f"target label {target!r} has no embedding")
        similarity = table.similarity(label, target)
        if best is None or similarity > best[1]:
            best = (target, similarity)
    if best[1] < cfg.min_similarity:
        return None
    return best


def align_document(
    doc: SceneGraphDocument,
    vocab,
    table: EmbeddingTable,
    cfg: AlignmentConfig = AlignmentConfig(),
) -> tuple[SceneGraphDocument, int]:
    """Align all triplets of a prediction document onto the vocabulary.

    Subjects and objects align against the object set, predicates against
    the predicate set. Returns the aligned document and the number of
    triplets dropped because a component was rejected.
    """
    if doc.kind is not DocumentKind.PREDICTION:
        raise DataError("alignment applies to prediction documents only")
    rejected = 0
    frames = []
    for frame in doc.frames:
        survivors = []
        for item in frame.triplets:
            subject = align_label(item.triplet.subject, vocab.objects, table, cfg)
            predicate = align_label(
                item.triplet.predicate, vocab.predicates, table, cfg
            )
            obj = align_label(item.triplet.object, vocab.objects, table, cfg)
            if subject is None or predicate is None or obj is None:
                rejected += 1
                continue
            survivors.append(
                dataclasses.replace(
                    item,
                    triplet=Triplet(
                        subject=subject[0], predicate=predicate[0], object=obj[0]
                    ),
                )
            )
        frames.append(reranked(frame.frame_id, survivors))
    aligned = SceneGraphDocument(
        video_id=doc.video_id, frames=tuple(frames), kind=doc.kind
    )
    return aligned, rejected
