# -*- coding: utf-8 -*-
"""Synthetic world generator tests."""
import os

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from mcqdiff.data.utils import ingest, response_matrix
from mcqdiff.lca.models import ClassAssignment, LcaConfig
from mcqdiff.lca.utils import assign_classes, fit_lca
from mcqdiff.profiling.utils import cluster_accuracies, deviation_scores
from mcqdiff.synthetic.models import SyntheticWorldConfig
from mcqdiff.synthetic.utils import (generate, generate_irt_world, generate_lca_world, generate_persona_world,
                                     topic_offsets, write_world)
from mcqdiff.utils import read_json


def item_accuracy(records):
    matrix, _, questions = response_matrix(records)
    return np.nanmean(matrix, axis=0)


def true_assignment(world):
    k = int(world.assignments.max())
    return ClassAssignment(list(world.student_ids), world.assignments, np.eye(k)[world.assignments - 1])


class TestIrtWorld:
    """2PL worlds."""

    def test_zero_slope(self):
        """alpha 0 puts every item at one half within a binomial band."""
        config = SyntheticWorldConfig(kind='irt', n_students=400, n_items=20, seed=1, alpha_range=(0.0, 0.0))
        acc = item_accuracy(generate_irt_world(config).records)
        assert np.all(np.abs(acc - 0.5) <= 4 * np.sqrt(0.25 / 400))

    def test_very_easy(self):
        """beta -10 is answered correctly by essentially everyone."""
        config = SyntheticWorldConfig(kind='irt', n_students=300, n_items=5, seed=2, beta_range=(-10.0, -10.0))
        assert np.all(item_accuracy(generate_irt_world(config).records) > 0.98)

    def test_deterministic(self):
        """A fixed seed gives the same dataset."""
        config = SyntheticWorldConfig(kind='irt', n_students=50, n_items=8, seed=5)
        assert generate_irt_world(config).records == generate_irt_world(config).records
        other = SyntheticWorldConfig(kind='irt', n_students=50, n_items=8, seed=6)
        assert generate_irt_world(other).records != generate_irt_world(config).records

    def test_dense_without_missingness(self):
        """missing_rate 0 gives every student x item cell."""
        world = generate_irt_world(SyntheticWorldConfig(kind='irt', n_students=30, n_items=7, seed=0))
        matrix, students, questions = response_matrix(world.records)
        assert len(world.records) == 30 * 7
        assert not np.isnan(matrix).any()

    def test_missingness(self):
        """Missing cells are dropped but no student loses every response."""
        world = generate_irt_world(SyntheticWorldConfig(kind='irt', n_students=40, n_items=5, seed=0,
                                                        missing_rate=0.6))
        assert len(world.records) < 40 * 5
        assert len({r.student_id for r in world.records}) == 40


class TestLcaWorld:
    """Latent class worlds."""

    def test_full_separation(self):
        """rho in {0.05, 0.95} blocks is recovered exactly."""
        world = generate_lca_world(SyntheticWorldConfig(kind='lca', n_students=200, n_items=30, seed=4,
                                                        k_true=3, separation=1.0))
        assert set(np.round(world.model.rho.ravel(), 12)) == {0.05, 0.95}
        model = fit_lca(world.matrix, 3, LcaConfig(n_restarts=5))
        assignment = assign_classes(model, world.matrix)
        assert adjusted_rand_score(world.assignments, assignment.classes) == pytest.approx(1.0)

    def test_single_class(self):
        """With one true class the fitted model is the marginal accuracy."""
        world = generate_lca_world(SyntheticWorldConfig(kind='lca', n_students=100, n_items=10, seed=2, k_true=1))
        model = fit_lca(world.matrix, 1, LcaConfig(n_restarts=2))
        np.testing.assert_allclose(model.rho[:, 0], np.nanmean(world.matrix, axis=0), atol=1e-6)
        assert set(world.assignments) == {1}


class TestPersonaWorld:
    """Latent classes with abilities and topic offsets."""

    def test_topic_offsets(self):
        """Each class is strong on one topic and weak on the next."""
        offsets = topic_offsets(2, 0.5)
        assert offsets[0] == {'Number': 0.5, 'Algebra': -0.5, 'GeometryAndMeasure': 0.0}
        assert offsets[1] == {'Number': 0.0, 'Algebra': 0.5, 'GeometryAndMeasure': -0.5}
        assert topic_offsets(1, 0.5)[0] == {'Number': 0.0, 'Algebra': 0.0, 'GeometryAndMeasure': 0.0}

    def test_strong_and_weak_topics(self):
        """Deviation scores are positive on a class's strong topic and negative on its weak one."""
        config = SyntheticWorldConfig(kind='persona', n_students=600, n_items=60, seed=8, k_true=2,
                                      ability_spread=0.0, topic_effect=1.0)
        world = generate_persona_world(config)
        scores = deviation_scores(cluster_accuracies(world.records, true_assignment(world), min_support=5))
        topic = {q.question_id: q.topic for q in world.bank}
        for cluster, offsets in world.topic_offsets.items():
            strong = max(offsets, key=offsets.get)
            weak = min(offsets, key=offsets.get)
            deltas = {t: [s.delta for s in scores if s.cluster == cluster and topic[s.question_id] == t]
                      for t in (strong, weak)}
            assert np.mean(deltas[strong]) > 0
            assert np.mean(deltas[weak]) < 0

    def test_truth_matches_data(self, persona_world):
        """Reported class accuracies agree with the generated answers."""
        acc = cluster_accuracies(persona_world.records, true_assignment(persona_world), min_support=5)
        empirical = np.array([acc.row(q) for q in persona_world.item_ids])
        assert np.mean(np.abs(empirical - persona_world.class_item_accuracy)) < 0.06

    def test_classes_ascending(self, persona_world):
        """Class 1 is the weakest on average."""
        means = persona_world.class_item_accuracy.mean(axis=0)
        assert list(means) == sorted(means)

    def test_files(self, world_files, world_config):
        """The written world ingests cleanly and its truth covers every item."""
        assert all(os.path.isfile(p) for p in world_files.values())
        records, bank = ingest(world_files['interactions'], world_files['items'])
        assert len(bank) == world_config.n_items
        truth = read_json(world_files['truth'])
        assert truth['kind'] == 'persona'
        assert sorted(truth['class_item_accuracy']) == bank.ids()
        assert set(truth['class_item_accuracy'][bank.ids()[0]]) == {'1', '2', '3'}


class TestConfig:
    """Generator settings."""

    def test_dispatch(self):
        """generate picks the generator by kind."""
        world = generate(SyntheticWorldConfig(kind='lca', n_students=20, n_items=4, seed=0, k_true=2))
        assert world.truth()['kind'] == 'lca'

    def test_invalid(self):
        """Negative slopes and bad class weights are rejected."""
        with pytest.raises(ValueError):
            SyntheticWorldConfig(alpha_range=(-1.0, 1.0))
        with pytest.raises(ValueError):
            SyntheticWorldConfig(k_true=2, class_weights=(0.5, 0.4))

    def test_write_world(self, tmpdir):
        """write_world creates the output directory."""
        world = generate(SyntheticWorldConfig(kind='irt', n_students=10, n_items=3, seed=0))
        paths = write_world(world, str(tmpdir.join('new', 'world')))
        assert sorted(paths) == ['interactions', 'items', 'truth']
