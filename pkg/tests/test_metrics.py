import math

import numpy as np
import pytest

from mazeplan import metrics
from mazeplan.region import CLASS_FREE, CLASS_OBSTACLE, CLASS_PROMISING


def random_pair(rng, h=12, w=12):
    """Random prediction / ground-truth label pair with >= 1 gt promising."""
    pred = rng.integers(0, 3, size=(h, w))
    gt = rng.integers(0, 3, size=(h, w))
    gt[0, 0] = CLASS_PROMISING
    return pred, gt


class TestFocalLoss:
    def test_uniform_scores_hand_value(self):
        scores = np.zeros((4, 4, 3))
        gt = np.random.default_rng(0).integers(0, 3, size=(4, 4))
        grid, mean = metrics.focal_loss(scores, gt, metrics.LossParams(gamma=2.0))
        expected = (2.0 / 3.0) ** 2 * math.log(3.0)  # (4/9)·ln 3
        assert np.abs(grid - expected).max() < 1e-9
        assert abs(mean - expected) < 1e-9

    def test_gamma_zero_is_cross_entropy(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            scores = rng.normal(size=(3, 5, 3))
            gt = rng.integers(0, 3, size=(3, 5))
            grid, _ = metrics.focal_loss(scores, gt, metrics.LossParams(gamma=0.0))
            probs = metrics.softmax(scores)
            rows, cols = np.indices(gt.shape)
            ce = -np.log(probs[rows, cols, gt])
            assert np.array_equal(grid, ce)

    def test_confident_true_class_loss_vanishes(self):
        scores = np.zeros((1, 1, 3))
        scores[0, 0, 1] = 500.0
        grid, _ = metrics.focal_loss(scores, np.array([[1]]))
        assert grid[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_monotone_in_true_class_score(self):
        losses = []
        for s in (-1.0, 0.0, 1.0, 3.0):
            scores = np.zeros((1, 1, 3))
            scores[0, 0, 2] = s
            grid, _ = metrics.focal_loss(scores, np.array([[2]]))
            losses.append(grid[0, 0])
        assert all(a > b for a, b in zip(losses, losses[1:]))

    def test_weights_scale_per_class(self):
        scores = np.random.default_rng(2).normal(size=(2, 2, 3))
        gt = np.array([[0, 1], [2, 1]])
        base, _ = metrics.focal_loss(scores, gt)
        weighted, _ = metrics.focal_loss(
            scores, gt, metrics.LossParams(weights=(1.0, 2.0, 3.0))
        )
        w = np.array([1.0, 2.0, 3.0])[gt]
        assert np.allclose(weighted, base * w, rtol=0, atol=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            grid, _ = metrics.focal_loss(
                rng.normal(size=(4, 4, 3)) * 10, rng.integers(0, 3, size=(4, 4))
            )
            assert (grid >= 0).all()


class TestClassWeights:
    def test_balanced(self):
        grid = np.array([[0, 1, 2]] * 3)
        assert np.array_equal(metrics.class_weights([grid]), [1.0, 1.0, 1.0])

    def test_imbalanced_hand_value(self):
        labels = np.concatenate(
            [np.zeros(900, dtype=int), np.ones(50, dtype=int), np.full(50, 2)]
        ).reshape(10, 100)
        w = metrics.class_weights([labels])
        assert np.allclose(w, [1.0, 18.0, 18.0])

    def test_missing_class_errors(self):
        with pytest.raises(ValueError):
            metrics.class_weights([np.zeros((3, 3), dtype=int)])


class TestAccuracyRedundancy:
    def test_perfect(self):
        gt = np.random.default_rng(4).integers(0, 3, size=(8, 8))
        gt[0, 0] = CLASS_PROMISING
        assert metrics.accuracy(gt, gt) == 1.0
        assert metrics.redundancy(gt, gt) == 0.0

    def test_everything_free_prediction(self):
        gt = np.full((4, 4), CLASS_PROMISING)
        pred = np.full((4, 4), CLASS_FREE)
        assert metrics.accuracy(pred, gt) == 0.0
        assert metrics.redundancy(pred, gt) == 0.0

    def test_partial_hits_hand_count(self):
        gt = np.full((2, 4), CLASS_FREE)
        gt[0, :4] = CLASS_PROMISING  # 4 promising pixels
        pred = np.full((2, 4), CLASS_FREE)
        pred[0, :3] = CLASS_PROMISING  # hits 3 of them
        assert metrics.accuracy(pred, gt) == 0.75

    def test_redundancy_hand_count(self):
        gt = np.full((2, 4), CLASS_FREE)
        gt[0, :4] = CLASS_PROMISING
        pred = gt.copy()
        pred[1, 0] = pred[1, 1] = CLASS_PROMISING  # 2 spurious over 4 gt promising
        assert metrics.redundancy(pred, gt) == 0.5

    def test_obstacle_pixels_never_redundant(self):
        gt = np.full((2, 2), CLASS_OBSTACLE)
        gt[0, 0] = CLASS_PROMISING
        pred = np.full((2, 2), CLASS_PROMISING)
        assert metrics.redundancy(pred, gt) == 0.0

    def test_no_promising_gt_errors(self):
        gt = np.zeros((3, 3), dtype=int)
        with pytest.raises(ValueError):
            metrics.accuracy(gt, gt)


class TestCombinedMetric:
    def test_perfect_is_zero(self):
        gt = np.random.default_rng(5).integers(0, 3, size=(8, 8))
        gt[0, 0] = CLASS_PROMISING
        assert metrics.combined_metric(gt, gt).metric == 0.0

    def test_everything_free_is_one(self):
        gt = np.full((4, 4), CLASS_PROMISING)
        pred = np.full((4, 4), CLASS_FREE)
        assert metrics.combined_metric(pred, gt).metric == 1.0

    def test_everything_promising_hand_value(self):
        gt = np.full((4, 4), CLASS_FREE)
        gt[0, :2] = CLASS_PROMISING  # P = 2 promising, F = 14 free
        pred = np.full((4, 4), CLASS_PROMISING)
        report = metrics.combined_metric(pred, gt)
        assert report.metric == pytest.approx(14.0 / 2.0, abs=1e-12)

    def test_direct_form_agreement_random(self):
        # combined_metric asserts the two formulations agree within 1e-9;
        # exercise that internal check on many random pairs.
        rng = np.random.default_rng(6)
        for _ in range(200):
            pred, gt = random_pair(rng)
            report = metrics.combined_metric(pred, gt)
            assert report.metric == pytest.approx(
                (1.0 - report.accuracy) + report.redundancy, abs=1e-12
            )

    def test_confusion_counts_all_pixels(self):
        rng = np.random.default_rng(7)
        pred, gt = random_pair(rng)
        report = metrics.combined_metric(pred, gt)
        assert report.confusion.sum() == pred.size
