from __future__ import annotations

import pytest

from sgeval.core import Vocabulary
from sgeval.errors import DataError
from sgeval.metrics import EvalTask, TaskVariant, match_frame, recall_precision_at
from sgeval.synth import generate


@pytest.fixture
def vocab():
    return Vocabulary(
        objects=frozenset(f"o{i}" for i in range(10)),
        predicates=frozenset(f"p{i}" for i in range(10)),
    )


class TestDeterminism:
    def test_same_seed_identical(self, vocab):
        a = generate(5, 2, 3, 4, 2, 3, vocab, box_jitter=0.1)
        b = generate(5, 2, 3, 4, 2, 3, vocab, box_jitter=0.1)
        assert a == b

    def test_different_seed_differs(self, vocab):
        a = generate(5, 1, 2, 3, 2, 1, vocab)
        b = generate(6, 1, 2, 3, 2, 1, vocab)
        assert a != b


class TestConstruction:
    def test_perfect_construction(self, vocab):
        gt_docs, pred_docs = generate(1, 1, 4, 7, 7, 0, vocab)
        task = EvalTask(variant=TaskVariant.SGCLS_STAR)
        report = recall_precision_at(pred_docs, gt_docs, task, [7])
        assert report.recall_at[7] == 1.0
        assert report.precision_at[7] == 1.0

    def test_filler_decay_shape(self, vocab):
        gt_docs, pred_docs = generate(1, 1, 10, 7, 7, 93, vocab)
        task = EvalTask(variant=TaskVariant.SGCLS_STAR)
        report = recall_precision_at(pred_docs, gt_docs, task, [10, 20, 50, 100])
        for k in (10, 20, 50, 100):
            assert report.precision_at[k] == pytest.approx(7 / k, abs=1e-9)
            assert report.recall_at[k] == 1.0

    def test_fillers_never_match(self, vocab):
        gt_docs, pred_docs = generate(2, 1, 6, 5, 3, 10, vocab)
        for task in (
            EvalTask(variant=TaskVariant.SGCLS_STAR),
            EvalTask(variant=TaskVariant.SGDET, iou_threshold=0.5),
        ):
            for pred, gt in zip(pred_docs[0].frames, gt_docs[0].frames):
                result = match_frame(pred, gt, task)
                assert all(rank <= 3 for rank, _ in result.pairs)

    def test_gt_distinct_within_frame(self, vocab):
        gt_docs, _ = generate(3, 1, 5, 7, 0, 0, vocab)
        for frame in gt_docs[0].frames:
            labels = [item.triplet for item in frame.triplets]
            assert len(set(labels)) == len(labels)

    def test_zero_jitter_sgdet_equals_sgcls(self, vocab):
        gt_docs, pred_docs = generate(4, 2, 5, 5, 4, 6, vocab, box_jitter=0.0)
        star = recall_precision_at(
            pred_docs, gt_docs, EvalTask(variant=TaskVariant.SGCLS_STAR), [1, 5, 10]
        )
        det = recall_precision_at(
            pred_docs, gt_docs, EvalTask(variant=TaskVariant.SGDET), [1, 5, 10]
        )
        assert star.recall_at == det.recall_at
        assert star.precision_at == det.precision_at


class TestValidation:
    def test_correct_k_bounded(self, vocab):
        with pytest.raises(DataError):
            generate(1, 1, 1, 3, 4, 0, vocab)

    def test_tiny_vocabulary_rejected(self):
        tiny = Vocabulary(
            objects=frozenset({"a"}), predicates=frozenset({"p"})
        )
        with pytest.raises(DataError, match="too small"):
            generate(1, 1, 1, 2, 0, 0, tiny)

    def test_negative_jitter_rejected(self, vocab):
        with pytest.raises(DataError):
            generate(1, 1, 1, 1, 0, 0, vocab, box_jitter=-0.1)
