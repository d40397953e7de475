from __future__ import annotations

import json

import numpy as np
import pytest

from sgeval.core import DocumentKind
from sgeval.errors import DataError
from sgeval.ingest import (
    dump_scene_graphs,
    group_detections,
    load_detections,
    load_embeddings,
    load_scene_graphs,
    load_vocabulary,
)

from conftest import gt_doc, pred_doc


def write(tmp_path, name, payload):
    path = tmp_path / name
    if isinstance(payload, str):
        path.write_text(payload, encoding="utf-8")
    else:
        path.write_text(json.dumps(payload), encoding="utf-8")
    return path


SCENE = {
    "videos": [
        {
            "video_id": "v1",
            "frames": [
                {
                    "frame_id": "f1",
                    "triplets": [
                        {"subject": "person", "predicate": "holding", "object": "cup"},
                        {"subject": "person", "predicate": "sit on", "object": "chair"},
                        {"subject": "dog", "predicate": "chase", "object": "cat"},
                    ],
                },
                {
                    "frame_id": "f2",
                    "triplets": [
                        {"subject": "cat", "predicate": "next to", "object": "dog"},
                        {"subject": "person", "predicate": "looking at", "object": "closet"},
                        {"subject": "floor", "predicate": "beneath", "object": "person"},
                    ],
                },
            ],
        }
    ]
}


class TestSceneGraphs:
    def test_direct_load(self, tmp_path):
        path = write(tmp_path, "p.json", SCENE)
        docs = load_scene_graphs(path, DocumentKind.PREDICTION)
        assert len(docs) == 1
        assert [f.frame_id for f in docs[0].frames] == ["f1", "f2"]
        assert [len(f.triplets) for f in docs[0].frames] == [3, 3]

    def test_ground_truth_requires_boxes(self, tmp_path):
        path = write(tmp_path, "gt.json", SCENE)
        with pytest.raises(DataError, match="ground truth requires boxes"):
            load_scene_graphs(path, DocumentKind.GROUND_TRUTH)

    def test_rank_is_list_order_not_score_order(self, tmp_path):
        payload = {
            "videos": [
                {
                    "video_id": "v1",
                    "frames": [
                        {
                            "frame_id": "f1",
                            "triplets": [
                                {"subject": "a", "predicate": "b", "object": "c", "score": 0.9},
                                {"subject": "d", "predicate": "e", "object": "f", "score": 0.7},
                                {"subject": "g", "predicate": "h", "object": "i", "score": 0.8},
                            ],
                        }
                    ],
                }
            ]
        }
        path = write(tmp_path, "p.json", payload)
        docs = load_scene_graphs(path, "prediction")
        ranks = [(t.rank, t.score) for t in docs[0].frames[0].triplets]
        assert ranks == [(1, 0.9), (2, 0.7), (3, 0.8)]

    def test_duplicate_frame_id_rejected(self, tmp_path):
        payload = {
            "videos": [
                {
                    "video_id": "v1",
                    "frames": [
                        {"frame_id": "f1", "triplets": []},
                        {"frame_id": "f1", "triplets": []},
                    ],
                }
            ]
        }
        path = write(tmp_path, "p.json", payload)
        with pytest.raises(DataError, match="duplicate frame_id"):
            load_scene_graphs(path, "prediction")

    def test_missing_field_names_entities(self, tmp_path):
        payload = {
            "videos": [
                {
                    "video_id": "vX",
                    "frames": [
                        {"frame_id": "fY", "triplets": [{"subject": "a", "object": "c"}]}
                    ],
                }
            ]
        }
        path = write(tmp_path, "p.json", payload)
        with pytest.raises(DataError, match=r"vX.*fY.*predicate"):
            load_scene_graphs(path, "prediction")

    def test_roundtrip_structural_identity(self, tmp_path):
        original = [
            gt_doc("v1", [[("a", "b", "c")], [("d", "e", "f"), ("a", "b", "c")]]),
            gt_doc("v2", [[("x", "y", "z")]]),
        ]
        path = tmp_path / "roundtrip.json"
        dump_scene_graphs(original, path)
        loaded = load_scene_graphs(path, DocumentKind.GROUND_TRUTH)
        assert loaded == original

    def test_roundtrip_preserves_scores(self, tmp_path):
        docs = pred_doc("v1", [[("a", "b", "c")]])
        path = tmp_path / "p.json"
        dump_scene_graphs([docs], path)
        again = load_scene_graphs(path, "prediction")
        assert again == [docs]


class TestVocabulary:
    def test_normalization(self, tmp_path):
        path = write(
            tmp_path, "v.json", {"objects": ["Person", "CUP"], "predicates": ["holding"]}
        )
        vocab = load_vocabulary(path)
        assert vocab.objects == frozenset({"person", "cup"})
        assert vocab.predicates == frozenset({"holding"})

    def test_action_genome_sized_vocabulary(self, tmp_path):
        payload = {
            "objects": [f"object_{i}" for i in range(35)],
            "predicates": [f"relation_{i}" for i in range(25)],
        }
        vocab = load_vocabulary(write(tmp_path, "ag.json", payload))
        assert (len(vocab.objects), len(vocab.predicates)) == (35, 25)

    def test_vidvrd_sized_vocabulary(self, tmp_path):
        payload = {
            "objects": [f"entity_{i}" for i in range(35)],
            "predicates": [f"predicate_{i}" for i in range(132)],
        }
        vocab = load_vocabulary(write(tmp_path, "vrd.json", payload))
        assert (len(vocab.objects), len(vocab.predicates)) == (35, 132)

    def test_empty_list_rejected(self, tmp_path):
        path = write(tmp_path, "v.json", {"objects": [], "predicates": ["holding"]})
        with pytest.raises(DataError):
            load_vocabulary(path)


class TestEmbeddings:
    def test_basic_load(self, tmp_path):
        lines = "\n".join(
            json.dumps({"key": k, "vector": v})
            for k, v in [("a", [1, 0, 0, 0]), ("b", [0, 1, 0, 0]), ("c", [0, 0, 1, 0])]
        )
        table = load_embeddings(write(tmp_path, "e.jsonl", lines))
        assert table.dimension == 4
        assert len(table) == 3

    def test_dimension_mismatch_names_key(self, tmp_path):
        lines = (
            json.dumps({"key": "a", "vector": [1, 0]})
            + "\n"
            + json.dumps({"key": "bad", "vector": [1, 0, 0]})
        )
        with pytest.raises(DataError, match="bad"):
            load_embeddings(write(tmp_path, "e.jsonl", lines))

    def test_renormalized(self, tmp_path):
        lines = json.dumps({"key": "a", "vector": [2.0, 0.0]})
        table = load_embeddings(write(tmp_path, "e.jsonl", lines))
        assert np.linalg.norm(table.vector("a")) == pytest.approx(1.0, abs=1e-4)

    def test_nonfinite_rejected(self, tmp_path):
        lines = '{"key": "a", "vector": [1.0, NaN]}'
        with pytest.raises(DataError):
            load_embeddings(write(tmp_path, "e.jsonl", lines))

    def test_comment_lines_skipped(self, tmp_path):
        lines = "# model=test dim=2\n" + json.dumps({"key": "a", "vector": [1, 0]})
        table = load_embeddings(write(tmp_path, "e.jsonl", lines))
        assert "a" in table

    def test_duplicate_key_rejected(self, tmp_path):
        lines = (
            json.dumps({"key": "a", "vector": [1, 0]})
            + "\n"
            + json.dumps({"key": "a", "vector": [0, 1]})
        )
        with pytest.raises(DataError, match="duplicate"):
            load_embeddings(write(tmp_path, "e.jsonl", lines))

    def test_empty_file_rejected(self, tmp_path):
        with pytest.raises(DataError, match="no records"):
            load_embeddings(write(tmp_path, "e.jsonl", ""))


class TestDetections:
    def test_retrieval_sorted_by_confidence(self, tmp_path):
        lines = "\n".join(
            json.dumps(
                {
                    "video_id": "v",
                    "frame_id": "f",
                    "query": "The person holding cup.",
                    "box": [0, 0, 10, 10],
                    "confidence": c,
                }
            )
            for c in (0.4, 0.9)
        )
        records = load_detections(write(tmp_path, "d.jsonl", lines))
        assert len(records) == 2
        grouped = group_detections(records)
        bucket = grouped[("v", "f", "The person holding cup.")]
        assert [r.confidence for r in bucket] == [0.9, 0.4]

    def test_out_of_range_confidence_rejected(self, tmp_path):
        line = json.dumps(
            {
                "video_id": "v",
                "frame_id": "f",
                "query": "q",
                "box": [0, 0, 1, 1],
                "confidence": 1.5,
            }
        )
        with pytest.raises(DataError):
            load_detections(write(tmp_path, "d.jsonl", line))

    def test_empty_file_is_valid(self, tmp_path):
        assert load_detections(write(tmp_path, "d.jsonl", "")) == []
