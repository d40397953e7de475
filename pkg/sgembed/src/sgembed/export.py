"""Embedding-file export: key collection, encoding, and the file writer.

Output files follow the evaluation toolkit's embedding schema: one
``{"key": ..., "vector": [...]}`` JSON record per line, preceded by a
``# model=<id> dim=<d>`` comment recording provenance. Records are sorted
by key and vectors unit-normalized, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

log = logging.getLogger("sgembed")


class ExportError(RuntimeError):
    """Invalid input or nothing exportable."""


@dataclass(frozen=True)
class FrameSpec:
    video_id: str
    frame_id: str
    path: str

    @property
    def key(self) -> str:
        return f"frame://{self.video_id}/{self.frame_id}"


def write_embedding_file(
    records: Sequence[tuple[str, np.ndarray]], path: str | Path, model_id: str
) -> None:
    """Write (key, vector) records sorted by key with a provenance comment.

    Vectors are unit-normalized here; zero or non-finite vectors and
    duplicate keys are rejected.
    """
    if not records:
        raise ExportError("nothing to write: no records")
    seen: set[str] = set()
    normalized: list[tuple[str, np.ndarray]] = []
    dim = len(records[0][1])
    for key, vector in records:
        if key in seen:
            raise ExportError(f"duplicate key {key!r}")
        seen.add(key)
        arr = np.asarray(vector, dtype=float)
        if arr.shape != (dim,):
            raise ExportError(f"inconsistent dimension for key {key!r}")
        if not np.all(np.isfinite(arr)):
            raise ExportError(f"non-finite embedding for key {key!r}")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ExportError(f"zero-norm embedding for key {key!r}")
        normalized.append((key, arr / norm))
    normalized.sort(key=lambda pair: pair[0])
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# model={model_id} dim={dim}\n")
        for key, arr in normalized:
            handle.write(
                json.dumps({"key": key, "vector": arr.tolist()}, sort_keys=True)
                + "\n"
            )


def read_text_keys(path: str | Path) -> list[str]:
    """One key per line; blanks dropped, order preserved, duplicates folded."""
    keys: list[str] = []
    seen: set[str] = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        text = line.strip()
        if not text or text in seen:
            continue
        seen.add(text)
        keys.append(text)
    if not keys:
        raise ExportError(f"no keys found in {path}")
    return keys


def read_frame_specs(path: str | Path) -> list[FrameSpec]:
    """Line-delimited {"video_id", "frame_id", "path"} records."""
    specs: list[FrameSpec] = []
    for number, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        record = json.loads(text)
        for field in ("video_id", "frame_id", "path"):
            if field not in record:
                raise ExportError(f"{path}:{number}: missing field {field!r}")
        specs.append(
            FrameSpec(
                video_id=str(record["video_id"]),
                frame_id=str(record["frame_id"]),
                path=str(record["path"]),
            )
        )
    if not specs:
        raise ExportError(f"no frame records found in {path}")
    return specs


def export_text_embeddings(
    keys: Sequence[str], encoder, out_path: str | Path
) -> int:
    """Encode text keys and write the embedding file. Returns record count.

    Keys are used verbatim: callers pass already-normalized vocabulary
    labels or triplet sentences so that downstream joins are exact.
    """
    vectors = encoder.encode(list(keys))
    records = list(zip(keys, vectors))
    write_embedding_file(records, out_path, encoder.model_id)
    return len(records)


def export_frame_embeddings(
    specs: Sequence[FrameSpec],
    encoder,
    out_path: str | Path,
    skip_report_path: Optional[str | Path] = None,
) -> tuple[int, list[dict]]:
    """Encode frame images and write the embedding file.

    Unreadable images are skipped with a warning and listed in the sidecar
    skip report. Returns (written, skipped records).
    """
    from PIL import Image, UnidentifiedImageError

    usable: list[tuple[FrameSpec, "Image.Image"]] = []
    skipped: list[dict] = []
    for spec in specs:
        try:
            with Image.open(spec.path) as image:
                usable.append((spec, image.convert("RGB")))
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            log.warning("skipping %s (%s): %s", spec.key, spec.path, exc)
            skipped.append(
                {
                    "video_id": spec.video_id,
                    "frame_id": spec.frame_id,
                    "path": spec.path,
                    "error": str(exc),
                }
            )
    if skip_report_path is not None:
        Path(skip_report_path).write_text(
            json.dumps({"skipped": skipped}, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    if not usable:
        raise ExportError("no readable images to encode")
    vectors = encoder.encode([image for _, image in usable])
    records = [(spec.key, vector) for (spec, _), vector in zip(usable, vectors)]
    write_embedding_file(records, out_path, encoder.model_id)
    return len(records), skipped
