# -*- coding: utf-8 -*-
"""Latent class analysis tests."""
import io
import os

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from mcqdiff.errors import DataError, EmptyResultError, FitError, UsageError
from mcqdiff.lca.models import CurvePoint, LatentClassModel, LcaConfig, ModelSelectionCurve
from mcqdiff.lca.utils import (assign_classes, classification_entropy, fit_lca, information_criteria,
                               plot_model_selection, posterior, read_assignments, select_k, sweep_k,
                               write_assignments, write_curve)
from mcqdiff.synthetic.models import SyntheticWorldConfig
from mcqdiff.synthetic.utils import generate_lca_world

FAST = LcaConfig(n_restarts=5)


def lca_world(seed, n_students=600, n_items=40, **kwargs):
    return generate_lca_world(SyntheticWorldConfig(kind='lca', n_students=n_students, n_items=n_items,
                                                   seed=seed, k_true=3, **kwargs))


def curve(bics, ks=None):
    ks = ks or list(range(1, len(bics) + 1))
    return ModelSelectionCurve([CurvePoint(k, 0.0, 0, 0.0, b) for k, b in zip(ks, bics)])


class TestCriteria:
    """BIC, AIC and the choice of k."""

    def test_bic_aic(self):
        """logL -100, 10 parameters, 100 students."""
        model = LatentClassModel(k=1, class_weights=[1.0], rho=np.full((10, 1), 0.5), log_likelihood=-100.0)
        assert model.n_parameters == 10
        bic, aic = information_criteria(model, 100)
        assert bic == pytest.approx(200.0 + 10.0 * np.log(100.0))
        assert bic == pytest.approx(246.052, abs=1e-3)
        assert aic == pytest.approx(220.0)

    def test_argmin(self):
        """The lowest BIC wins."""
        assert select_k(curve([300.0, 250.0, 260.0])) == 2

    def test_tie_goes_to_smaller_k(self):
        """A tie between k=2 and k=4 picks 2."""
        assert select_k(curve([300.0, 250.0, 260.0, 250.0])) == 2

    def test_empty_curve(self):
        """No points to choose from."""
        with pytest.raises(EmptyResultError):
            select_k(ModelSelectionCurve())

    def test_gap_in_k(self):
        """The k range must be contiguous."""
        with pytest.raises(UsageError):
            select_k(curve([300.0, 250.0], ks=[1, 3]))


class TestFit:
    """EM fitting."""

    def test_single_class(self):
        """k=1 gives the observed per-item accuracy and weight 1."""
        rng = np.random.default_rng(0)
        matrix = (rng.random((50, 6)) < 0.6).astype(float)
        matrix[rng.random((50, 6)) < 0.2] = np.nan
        matrix[:, 0] = 1.0
        model = fit_lca(matrix, 1, FAST)
        np.testing.assert_allclose(model.class_weights, [1.0])
        expected = np.clip(np.nanmean(matrix, axis=0), FAST.epsilon, 1 - FAST.epsilon)
        np.testing.assert_allclose(model.rho[:, 0], expected, atol=1e-9)

    def test_separated_blocks(self):
        """All-correct and all-wrong blocks are recovered exactly."""
        matrix = np.vstack([np.ones((20, 8)), np.zeros((30, 8))])
        model = fit_lca(matrix, 2, FAST)
        assignment = assign_classes(model, matrix)
        assert list(assignment.classes[:20]) == [2] * 20
        assert list(assignment.classes[20:]) == [1] * 30

    def test_deterministic(self):
        """The same seed gives the same model."""
        world = lca_world(1, n_students=150, n_items=12)
        a = fit_lca(world.matrix, 3, FAST, seed=9)
        b = fit_lca(world.matrix, 3, FAST, seed=9)
        np.testing.assert_array_equal(a.rho, b.rho)
        assert a.log_likelihood == b.log_likelihood

    def test_history_non_decreasing(self):
        """EM log-likelihood never decreases."""
        world = lca_world(2, n_students=150, n_items=12)
        model = fit_lca(world.matrix, 3, FAST)
        assert np.all(np.diff(model.history) >= -1e-9)

    def test_classes_ascending(self):
        """Classes come back ordered by mean correctness."""
        world = lca_world(3, n_students=200, n_items=20)
        model = fit_lca(world.matrix, 3, FAST)
        means = model.class_mean_accuracy()
        assert list(means) == sorted(means)

    def test_too_many_classes(self):
        """k above the number of students cannot be fitted."""
        with pytest.raises(FitError):
            fit_lca(np.ones((2, 3)), 3, FAST)

    def test_empty_student(self):
        """A student without any observed response is a data error."""
        matrix = np.array([[1.0, 0.0], [np.nan, np.nan]])
        with pytest.raises(DataError):
            fit_lca(matrix, 1, FAST)

    def test_non_binary(self):
        """Only 0, 1 and NaN are accepted."""
        with pytest.raises(DataError):
            fit_lca(np.array([[1.0, 0.5]]), 1, FAST)

    @pytest.mark.slow
    @pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
    def test_recovery(self, seed):
        """3-class worlds of 600 x 40: ARI >= 0.9."""
        world = lca_world(seed)
        model = fit_lca(world.matrix, 3, FAST, seed=seed)
        assignment = assign_classes(model, world.matrix)
        assert adjusted_rand_score(world.assignments, assignment.classes) >= 0.9


class TestModelSelection:
    """Sweeping k."""

    @pytest.mark.slow
    def test_bic_finds_three(self):
        """BIC over k = 1..6 picks 3 in at least 4 of 5 seeds."""
        hits = 0
        for seed in range(5):
            world = lca_world(seed)
            sweep, _ = sweep_k(world.matrix, range(1, 7), FAST, seed=seed)
            hits += select_k(sweep) == 3
        assert hits >= 4

    def test_sweep_drops_large_k(self):
        """Candidates above the number of students are left out."""
        matrix = np.array([[1.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
        sweep, models = sweep_k(matrix, [1, 2, 3, 4, 5], FAST)
        assert sweep.ks == [1, 2, 3]
        assert sorted(models) == [1, 2, 3]

    def test_outputs(self, tmpdir):
        """The curve CSV carries the manifest hash and the plot is written."""
        world = lca_world(4, n_students=100, n_items=10)
        sweep, _ = sweep_k(world.matrix, [1, 2, 3], FAST)
        csv_path = str(tmpdir.join('model_selection.csv'))
        write_curve(sweep, csv_path, manifest_hash='abc123')
        with io.open(csv_path, encoding='utf-8') as fh:
            lines = fh.read().splitlines()
        assert lines[0] == '# manifest_hash=abc123'
        assert lines[1] == 'k,log_likelihood,n_parameters,aic,bic'
        assert len(lines) == 5
        html_path = plot_model_selection(sweep, str(tmpdir.join('model_selection.html')))
        assert os.path.isfile(html_path)


class TestPosterior:
    """Bayes-rule class posteriors and hard assignment."""

    weights = np.array([0.4, 0.6])
    rho = np.array([[0.2, 0.7], [0.5, 0.9], [0.1, 0.6]])

    def model(self):
        return LatentClassModel(k=2, class_weights=self.weights, rho=self.rho, log_likelihood=0.0,
                                item_ids=['q1', 'q2', 'q3'])

    def test_hand_computed(self):
        """Four students, three items, two classes."""
        matrix = np.array([
            [1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0],
            [1.0, np.nan, 0.0],
            [np.nan, 1.0, np.nan],
        ])
        expected = []
        for row in matrix:
            joint = []
            for c in range(2):
                p = self.weights[c]
                for i, y in enumerate(row):
                    if np.isnan(y):
                        continue
                    p *= self.rho[i, c] if y == 1.0 else 1.0 - self.rho[i, c]
                joint.append(p)
            expected.append([j / sum(joint) for j in joint])
        np.testing.assert_allclose(posterior(self.model(), matrix), expected, rtol=0, atol=1e-9)

    def test_dominance(self):
        """Responses impossible under class 2 put the student in class 1."""
        rho = np.array([[0.5, 1e-12], [0.5, 1e-12]])
        model = LatentClassModel(k=2, class_weights=[0.5, 0.5], rho=rho, log_likelihood=0.0)
        post = posterior(model, np.array([[1.0, 1.0]]))
        assert post[0, 0] == pytest.approx(1.0)
        assert post[0, 1] < 1e-9

    def test_single_class(self):
        """With k=1 everyone is in class 1 with posterior 1."""
        model = LatentClassModel(k=1, class_weights=[1.0], rho=[[0.3], [0.8]], log_likelihood=0.0)
        assignment = assign_classes(model, np.array([[1.0, 0.0], [0.0, np.nan], [1.0, 1.0]]))
        assert list(assignment.classes) == [1, 1, 1]
        np.testing.assert_allclose(assignment.posterior, np.ones((3, 1)))

    def test_relabel_by_assigned_accuracy(self):
        """Labels follow the pooled accuracy of assigned students."""
        model = self.model().permuted([1, 0])
        matrix = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
        assignment = assign_classes(model, matrix, ['strong', 'weak'])
        assert assignment.as_dict() == {'strong': 2, 'weak': 1}
        aligned = model.permuted(assignment.order)
        np.testing.assert_allclose(aligned.rho, self.rho)

    def test_entropy(self):
        """Crisp posteriors give 1, uniform ones 0."""
        assert classification_entropy(np.eye(3)) == pytest.approx(1.0)
        assert classification_entropy(np.full((4, 2), 0.5)) == pytest.approx(0.0)

    def test_assignments_file(self, tmpdir):
        """Assignments read back with their 1-based classes."""
        model = self.model()
        assignment = assign_classes(model, np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]), ['a', 'b'])
        path = str(tmpdir.join('assignments.jsonl'))
        write_assignments(assignment, path)
        back = read_assignments(path)
        assert back.as_dict() == assignment.as_dict()


class TestFittedProperties:
    """Posterior and labeling properties of a fitted three-class model."""

    @pytest.fixture(scope='class')
    def fitted(self):
        world = lca_world(5, n_students=200, n_items=15, missing_rate=0.2)
        return world.matrix, fit_lca(world.matrix, 3, FAST, seed=5)

    def test_posterior_rows_sum_to_one(self, fitted):
        """Every student's posterior sums to 1."""
        matrix, model = fitted
        post = posterior(model, matrix)
        assert post.shape == (matrix.shape[0], 3)
        assert np.max(np.abs(post.sum(axis=1) - 1.0)) <= 1e-9

    def test_labels_ascending(self, fitted):
        """After relabeling, class c is never more accurate than class c + 1."""
        matrix, model = fitted
        assignment = assign_classes(model, matrix)
        answered = ~np.isnan(matrix)
        pooled = []
        for c in (1, 2, 3):
            members = assignment.classes == c
            assert members.any()
            pooled.append(np.nansum(matrix[members]) / answered[members].sum())
        assert pooled == sorted(pooled)
        aligned = model.permuted(assignment.order)
        np.testing.assert_allclose(posterior(aligned, matrix), assignment.posterior, atol=1e-12)

    def test_row_permutation(self, fitted):
        """Shuffling the students shuffles their classes the same way."""
        matrix, model = fitted
        base = assign_classes(model, matrix)
        perm = np.random.default_rng(1).permutation(matrix.shape[0])
        shuffled = assign_classes(model, matrix[perm])
        np.testing.assert_array_equal(shuffled.classes, base.classes[perm])
        assert shuffled.order == base.order
