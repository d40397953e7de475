"""Prompt assembly for zero-shot and fine-tuning scene-graph generation.

Prompt wording lives in versioned template files shipped with the package;
this module only fills in vocabulary lists, few-shot examples (rendered in
the exact response grammar of :mod:`sgeval.parser`), and the
importance-ordering instruction. Output is deterministic: identical specs
produce byte-identical prompts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Mapping, Optional, Sequence

from .core import EmbeddingTable, FrameGraph, SceneGraphDocument, Vocabulary, frame_key, reranked
from .errors import DataError
from .importance import ImportanceConfig, rank_by_importance
from .parser import serialize_frames

_IMPORTANCE_NOTE = (
    "List the relations of each frame in order of importance: "
    "the most important relation first."
)


class PromptMode(str, Enum):
    ZERO_SHOT_TRIPLET = "zero_shot_triplet"
    ZERO_SHOT_QUADRUPLET = "zero_shot_quadruplet"
    FINETUNE_TRIPLET = "finetune_triplet"


_TEMPLATE_FILES = {
    PromptMode.ZERO_SHOT_TRIPLET: "zero_shot_triplet.txt",
    PromptMode.ZERO_SHOT_QUADRUPLET: "zero_shot_quadruplet.txt",
    PromptMode.FINETUNE_TRIPLET: "finetune_triplet.txt",
}

FewshotExample = tuple[FrameGraph, ...]


@dataclass(frozen=True)
class PromptSpec:
    """What goes into one prompt: mode, vocabulary, few-shot examples.

    Quadruplet mode additionally needs ``predicate_split`` mapping every
    vocabulary predicate to its (action, spatial) parts.
    """

    mode: PromptMode
    vocab: Vocabulary
    fewshot: tuple[FewshotExample, ...] = ()
    importance_ordered: bool = False
    predicate_split: Optional[Mapping[str, tuple[str, str]]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", PromptMode(self.mode))
        object.__setattr__(
            self, "fewshot", tuple(tuple(example) for example in self.fewshot)
        )
        if (
            self.mode is not PromptMode.FINETUNE_TRIPLET
            and self.importance_ordered
            and not self.fewshot
        ):
            raise DataError(
                "importance-ordered zero-shot prompts need at least one "
                "few-shot example"
            )
        if self.mode is PromptMode.ZERO_SHOT_QUADRUPLET:
            if self.predicate_split is None:
                raise DataError(
                    "quadruplet prompts require a predicate action/spatial split"
                )
            missing = sorted(
                p for p in self.vocab.predicates if p not in self.predicate_split
            )
            if missing:
                raise DataError(
                    f"predicate split missing entries for: {', '.join(missing)}"
                )


def _format_mode(mode: PromptMode) -> str:
    return (
        "quadruplet" if mode is PromptMode.ZERO_SHOT_QUADRUPLET else "triplet"
    )


def example_blocks(spec: PromptSpec) -> list[str]:
    """The serialized response-grammar block for each few-shot example."""
    return [
        serialize_frames(
            example,
            format=_format_mode(spec.mode),
            predicate_split=spec.predicate_split,
        )
        for example in spec.fewshot
    ]


def _template(mode: PromptMode) -> str:
    name = _TEMPLATE_FILES[mode]
    return (resources.files("sgeval") / "templates" / name).read_text(
        encoding="utf-8"
    )


def build_prompt(spec: PromptSpec) -> str:
    """Fill the mode's template with vocabulary lists and examples."""
    if not spec.vocab.objects or not spec.vocab.predicates:
        raise DataError("cannot build a prompt from an empty vocabulary")
    objects = sorted(spec.vocab.objects)
    predicates = sorted(spec.vocab.predicates)
    values: dict[str, str] = {}
    if spec.mode is PromptMode.ZERO_SHOT_QUADRUPLET:
        values["objects"] = "\n".join(
            f"{i}. {label}" for i, label in enumerate(objects, start=1)
        )
        actions = sorted(
            {spec.predicate_split[p][0] for p in predicates}
            - {""}
        )
        spatials = sorted(
            {spec.predicate_split[p][1] for p in predicates}
            - {""}
        )
        values["action_predicates"] = ", ".join(actions)
        values["spatial_predicates"] = ", ".join(spatials)
    else:
        values["objects"] = ", ".join(objects)
        values["predicates"] = ", ".join(predicates)
    values["importance_note"] = (
        "\n" + _IMPORTANCE_NOTE + "\n" if spec.importance_ordered else ""
    )
    blocks = example_blocks(spec)
    values["examples"] = "".join(
        f"\nExample response:\n{block}\n" for block in blocks
    )
    text = _template(spec.mode).format(**values)
    return re.sub(r"\n{3,}", "\n\n", text)


def rank_fewshot(
    docs: Sequence[SceneGraphDocument],
    table: EmbeddingTable,
    cfg: ImportanceConfig = ImportanceConfig(),
) -> tuple[FewshotExample, ...]:
    """Reorder each example video's frames by greedy triplet importance.

    Each document becomes one few-shot example whose triplets appear in
    rank_by_importance order.
    """
    examples = []
    for doc in docs:
        frames = []
        for frame in doc.frames:
            ranking = rank_by_importance(
                frame, frame_key(doc.video_id, frame.frame_id), table, cfg
            )
            frames.append(
                reranked(frame.frame_id, [entry.triplet for entry in ranking])
            )
        examples.append(tuple(frames))
    return tuple(examples)
