"""Parser and serializer for the sentinel-delimited scene-graph response format.

Generated text is split into frame segments on ``#frameid`` and cut at the
first ``#sgend``. Within a segment each line is either a triplet
``(subject, predicate, object)`` or a quadruplet
``(subject, action, spatial, object)`` whose two predicate parts are merged
with a space. Anything else is a rejected line. Parsing is total: malformed
input is reported, never raised.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .core import FrameGraph, ScoredTriplet, Triplet, normalize_label
from .errors import DataError

FRAME_TOKEN = "#frameid"
END_TOKEN = "#sgend"

_FRAME_RE = re.compile(r"(?<![\w#])#frameid(?!\w)")
_END_RE = re.compile(r"(?<![\w#])#sgend(?!\w)")

# Optional list index, then a single parenthesized, comma-separated field list.
# Fields may not contain commas or parentheses.
_LINE_RE = re.compile(r"^\s*(?:\d+\s*[.):]?\s*)?\(([^()]*)\)\s*$")

FORMATS = ("triplet", "quadruplet")


@dataclass(frozen=True)
class ParseReport:
    """Observability counters for one parse_generation call.

    ``triplets_parsed`` counts grammar-valid triplet lines in mapped
    segments, before duplicate dropping; retained triplets equal
    ``triplets_parsed - duplicates_dropped``.
    """

    frames_found: int = 0
    triplets_parsed: int = 0
    lines_rejected: int = 0
    duplicates_dropped: int = 0
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "frames_found": self.frames_found,
            "triplets_parsed": self.triplets_parsed,
            "lines_rejected": self.lines_rejected,
            "duplicates_dropped": self.duplicates_dropped,
            "truncated": self.truncated,
        }


def _parse_line(line: str, format: str) -> Optional[Triplet]:
    match = _LINE_RE.match(line)
    if match is None:
        return None
    fields = [normalize_label(part) for part in match.group(1).split(",")]
    if format == "triplet":
        if len(fields) != 3 or not all(fields):
            return None
        subject, predicate, obj = fields
    else:
        if len(fields) != 4:
            return None
        subject, action, spatial, obj = fields
        predicate = " ".join(part for part in (action, spatial) if part)
        if not (subject and predicate and obj):
            return None
    return Triplet(subject=subject, predicate=predicate, object=obj)


def parse_generation(
    text: str, format: str, frame_ids: Sequence[str]
) -> tuple[list[FrameGraph], ParseReport]:
    """Parse free-form generation text into one FrameGraph per frame id.

    Never raises on malformed text: unparseable lines, surplus segments and
    duplicates are counted in the report. Returns exactly
    ``len(frame_ids)`` frames; segments missing from the text yield empty
    frames.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    if not frame_ids:
        raise ValueError("frame_ids must be non-empty")

    end = _END_RE.search(text)
    truncated = end is None
    body = text if end is None else text[: end.start()]
    segments = _FRAME_RE.split(body)

    parsed = 0
    rejected = 0
    duplicates = 0
    frames: list[FrameGraph] = []

    for index, fid in enumerate(frame_ids):
        segment = segments[index] if index < len(segments) else ""
        seen: set[Triplet] = set()
        kept: list[Triplet] = []
        for line in segment.splitlines():
            if not line.strip():
                continue
            triplet = _parse_line(line, format)
            if triplet is None:
                rejected += 1
                continue
            parsed += 1
            if triplet in seen:
                duplicates += 1
                continue
            seen.add(triplet)
            kept.append(triplet)
        frames.append(FrameGraph.from_triplets(fid, kept))

    for segment in segments[len(frame_ids):]:
        rejected += sum(1 for line in segment.splitlines() if line.strip())

    report = ParseReport(
        frames_found=sum(1 for f in frames if f.triplets),
        triplets_parsed=parsed,
        lines_rejected=rejected,
        duplicates_dropped=duplicates,
        truncated=truncated,
    )
    return frames, report


def serialize_frames(
    frames: Sequence[FrameGraph],
    format: str = "triplet",
    predicate_split: Optional[Mapping[str, tuple[str, str]]] = None,
) -> str:
    """Render frames in the response grammar, terminated by the end sentinel.

    Quadruplet output needs every predicate tagged with its action/spatial
    split via ``predicate_split``.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    lines: list[str] = []
    for index, frame in enumerate(frames):
        if index:
            lines.append(FRAME_TOKEN)
        for item in frame.triplets:
            t = item.triplet
            if format == "triplet":
                lines.append(f"({t.subject}, {t.predicate}, {t.object})")
            else:
                if predicate_split is None or t.predicate not in predicate_split:
                    raise DataError(
                        f"predicate {t.predicate!r} has no action/spatial split; "
                        "quadruplet serialization requires one"
                    )
                action, spatial = predicate_split[t.predicate]
                lines.append(f"({t.subject}, {action}, {spatial}, {t.object})")
    lines.append(END_TOKEN)
    return "\n".join(lines)
