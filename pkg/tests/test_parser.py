from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgeval.core import FrameGraph, Triplet
from sgeval.errors import DataError
from sgeval.parser import parse_generation, serialize_frames

from conftest import make_frame


def triples(frames):
    return [
        [(t.triplet.subject, t.triplet.predicate, t.triplet.object) for t in f.triplets]
        for f in frames
    ]


class TestParse:
    def test_minimal_wellformed(self):
        frames, report = parse_generation(
            "(person, holding, cup)\n#sgend", "triplet", ["f1"]
        )
        assert triples(frames) == [[("person", "holding", "cup")]]
        assert report.truncated is False
        assert report.frames_found == 1
        assert report.lines_rejected == 0

    def test_quadruplet_merges_action_and_spatial(self):
        frames, _ = parse_generation(
            "(dog, chase, in front of, cat)", "quadruplet", ["f1"]
        )
        assert triples(frames) == [[("dog", "chase in front of", "cat")]]

    def test_quadruplet_empty_component_dropped(self):
        frames, _ = parse_generation("(dog, , behind, cat)", "quadruplet", ["f1"])
        assert triples(frames) == [[("dog", "behind", "cat")]]

    def test_grammar_walk_with_duplicates_and_garbage(self):
        text = (
            "(person, holding, cup)\n(person, holding, cup)\ngarbage line\n"
            "#frameid\n(person, sit on, chair)\n#sgend"
        )
        frames, report = parse_generation(text, "triplet", ["f1", "f2"])
        assert triples(frames) == [
            [("person", "holding", "cup")],
            [("person", "sit on", "chair")],
        ]
        assert report.duplicates_dropped == 1
        assert report.lines_rejected == 1
        assert report.triplets_parsed == 3
        assert report.truncated is False

    def test_missing_end_sentinel_sets_truncated(self):
        frames, report = parse_generation("(a, b, c)", "triplet", ["f1"])
        assert triples(frames) == [[("a", "b", "c")]]
        assert report.truncated is True

    def test_text_after_end_sentinel_ignored(self):
        frames, report = parse_generation(
            "(a, b, c)\n#sgend\n(d, e, f)\ntrailing prose", "triplet", ["f1", "f2"]
        )
        assert triples(frames) == [[("a", "b", "c")], []]
        assert report.lines_rejected == 0

    def test_fewer_segments_give_empty_frames(self):
        frames, report = parse_generation("(a, b, c)\n#sgend", "triplet", ["f1", "f2"])
        assert triples(frames) == [[("a", "b", "c")], []]
        assert report.frames_found == 1

    def test_surplus_segments_counted_rejected(self):
        text = "(a, b, c)\n#frameid\n(d, e, f)\n(g, h, i)\n#sgend"
        frames, report = parse_generation(text, "triplet", ["f1"])
        assert triples(frames) == [[("a", "b", "c")]]
        assert report.lines_rejected == 2

    def test_optional_list_index_accepted(self):
        text = "1. (a, b, c)\n2) (d, e, f)\n3: (g, h, i)\n4 (j, k, l)"
        frames, _ = parse_generation(text, "triplet", ["f1"])
        assert len(frames[0].triplets) == 4

    def test_markdown_bullets_rejected(self):
        frames, report = parse_generation("- (a, b, c)\n* (d, e, f)", "triplet", ["f1"])
        assert triples(frames) == [[]]
        assert report.lines_rejected == 2

    def test_wrong_arity_rejected_per_format(self):
        _, report = parse_generation("(a, b, c, d)", "triplet", ["f1"])
        assert report.lines_rejected == 1
        _, report = parse_generation("(a, b, c)", "quadruplet", ["f1"])
        assert report.lines_rejected == 1

    def test_labels_normalized(self):
        frames, _ = parse_generation("(Person, LOOKING_AT, closet.)", "triplet", ["f1"])
        assert triples(frames) == [[("person", "looking at", "closet")]]

    def test_sentinel_requires_token_boundary(self):
        frames, report = parse_generation(
            "(a, b, c)\n#sgendless prose\n#sgend", "triplet", ["f1"]
        )
        assert report.truncated is False
        assert report.lines_rejected == 1

    def test_empty_frame_ids_rejected(self):
        with pytest.raises(ValueError):
            parse_generation("anything", "triplet", [])

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            parse_generation("anything", "pair", ["f1"])

    def test_totality_on_junk(self):
        for text in ("", "\n\n\n", "((((", "()", "(,,)", "#frameid#frameid", "\x00\x01"):
            frames, report = parse_generation(text, "triplet", ["f1"])
            assert len(frames) == 1
            assert report.duplicates_dropped == 0


class TestSerialize:
    def test_single_frame_single_triplet(self):
        frame = make_frame("f1", [("a", "b", "c")])
        assert serialize_frames([frame]) == "(a, b, c)\n#sgend"

    def test_two_frames_separator_placement(self):
        frames = [make_frame("f1", [("a", "b", "c")]), make_frame("f2", [("d", "e", "f")])]
        assert serialize_frames(frames) == "(a, b, c)\n#frameid\n(d, e, f)\n#sgend"

    def test_quadruplet_requires_split(self):
        frame = make_frame("f1", [("dog", "chase in front of", "cat")])
        with pytest.raises(DataError, match="split"):
            serialize_frames([frame], format="quadruplet")

    def test_quadruplet_roundtrip_with_split(self):
        frame = make_frame("f1", [("dog", "chase in front of", "cat")])
        split = {"chase in front of": ("chase", "in front of")}
        text = serialize_frames([frame], format="quadruplet", predicate_split=split)
        assert text == "(dog, chase, in front of, cat)\n#sgend"
        parsed, _ = parse_generation(text, "quadruplet", ["f1"])
        assert parsed == [frame]


_label = st.text(
    alphabet="abcdefghijklmnopqrstuvwxyz ", min_size=1, max_size=12
).filter(lambda s: s.strip(" ") and "#" not in s)


def _valid_frames(draw):
    n_frames = draw(st.integers(1, 4))
    frames = []
    for i in range(n_frames):
        n = draw(st.integers(0, 5))
        seen = set()
        rows = []
        for _ in range(n):
            t = (draw(_label), draw(_label), draw(_label))
            t = tuple(" ".join(part.split()) for part in t)
            if not all(t) or t in seen:
                continue
            seen.add(t)
            rows.append(t)
        frames.append(make_frame(f"f{i}", rows))
    return frames


frames_strategy = st.composite(_valid_frames)()


class TestProperties:
    @given(frames_strategy)
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_identity(self, frames):
        text = serialize_frames(frames)
        parsed, report = parse_generation(
            text, "triplet", [f.frame_id for f in frames]
        )
        assert parsed == frames
        assert report.lines_rejected == 0
        assert report.duplicates_dropped == 0
        assert report.truncated is False

    @given(st.text(max_size=300))
    @settings(max_examples=80, deadline=None)
    def test_parse_never_raises(self, text):
        frames, report = parse_generation(text, "triplet", ["f1", "f2"])
        assert len(frames) == 2
        assert report.lines_rejected >= 0

    @given(frames_strategy)
    @settings(max_examples=30, deadline=None)
    def test_reparse_has_no_duplicates(self, frames):
        text = serialize_frames(frames)
        parsed, _ = parse_generation(text, "triplet", [f.frame_id for f in frames])
        _, report = parse_generation(
            serialize_frames(parsed), "triplet", [f.frame_id for f in frames]
        )
        assert report.duplicates_dropped == 0

    def test_prefix_monotonicity(self):
        lines = [f"(subj{i}, pred{i}, obj{i})" for i in range(6)]
        text = "\n".join(lines)
        full, _ = parse_generation(text, "triplet", ["f1"])
        for cut in range(1, 6):
            prefix = "\n".join(lines[:cut])
            part, _ = parse_generation(prefix, "triplet", ["f1"])
            assert part[0].triplets == full[0].triplets[:cut]
