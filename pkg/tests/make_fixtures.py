#!/usr/bin/env python3
"""Write the checked-in pipeline fixtures (inputs only, no sgeval imports).

Regenerate with: python tests/make_fixtures.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"

OBJECTS = ["person", "cup", "chair", "dog", "cat", "closet", "floor"]
PREDICATES = ["holding", "sit on", "looking at", "chase", "beneath", "next to"]

# open-vocabulary words: (word, closed target, cosine, spare dimension)
OPEN_WORDS = [
    ("mug", "cup", 0.9, 13),
    ("sits on", "sit on", 0.8, 14),
    ("puppy", "dog", 0.95, 15),
    ("watching", "looking at", 0.85, 13),
]

GENERATION = """The scene graphs for each frame follow.
(person, holding, mug)
(person, sits on, chair)
(Person, holding, mug)
(floor, beneath, person)
#frameid
(puppy, chase, cat)
(person, watching, closet)
(person, holding, unknownword)
#frameid
(cat, next to, dog)
(dog, next to, cat)
(person, looking at, closet)
#sgend
Trailing prose that the parser must ignore.
"""

GT_FRAMES = {
    "f0": [
        ("person", "holding", "cup"),
        ("person", "sit on", "chair"),
        ("person", "looking at", "closet"),
    ],
    "f1": [
        ("dog", "chase", "cat"),
        ("floor", "beneath", "person"),
    ],
    "f2": [
        ("cat", "next to", "dog"),
        ("dog", "next to", "cat"),
        ("person", "looking at", "closet"),
        ("person", "holding", "cup"),
    ],
}


def one_hot(index: int, dim: int = 16) -> list[float]:
    vector = [0.0] * dim
    vector[index] = 1.0
    return vector


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)

    (FIXTURES / "vocab.json").write_text(
        json.dumps({"objects": OBJECTS, "predicates": PREDICATES}, indent=2) + "\n"
    )
    (FIXTURES / "generation.txt").write_text(GENERATION)
    (FIXTURES / "frames.txt").write_text("f0\nf1\nf2\n")

    labels = sorted(OBJECTS + PREDICATES)
    rows = []
    for index, label in enumerate(labels):
        rows.append({"key": label, "vector": one_hot(index)})
    for word, target, cosine, spare in OPEN_WORDS:
        vector = [0.0] * 16
        vector[labels.index(target)] = cosine
        vector[spare] = math.sqrt(1.0 - cosine * cosine)
        rows.append({"key": word, "vector": vector})
    (FIXTURES / "align_emb.jsonl").write_text(
        "\n".join(json.dumps(row) for row in rows) + "\n"
    )

    videos = []
    frames = []
    for frame_index, (frame_id, triples) in enumerate(GT_FRAMES.items()):
        triplets = []
        for j, (s, p, o) in enumerate(triples):
            triplets.append(
                {
                    "subject": s,
                    "predicate": p,
                    "object": o,
                    "subject_box": [10.0 * j, 10.0 * frame_index, 10.0 * j + 8.0, 10.0 * frame_index + 8.0],
                    "object_box": [10.0 * j + 1.0, 10.0 * frame_index + 1.0, 10.0 * j + 9.0, 10.0 * frame_index + 9.0],
                }
            )
        frames.append({"frame_id": frame_id, "triplets": triplets})
    videos.append({"video_id": "fixture_v0", "frames": frames})
    (FIXTURES / "gt.json").write_text(
        json.dumps({"videos": videos}, indent=2) + "\n"
    )
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
