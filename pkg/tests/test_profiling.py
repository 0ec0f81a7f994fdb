# -*- coding: utf-8 -*-
"""Cluster accuracy, deviation score and persona request tests."""
import numpy as np
import pytest

from mcqdiff.data.models import ItemBank
from mcqdiff.errors import DataError, ReferentialError
from mcqdiff.lca.models import ClassAssignment
from mcqdiff.profiling.models import AccuracyMatrix, DeviationScore, PersonaProfile
from mcqdiff.profiling.utils import (BUNDLED_PERSONAS, build_persona_request, cluster_accuracies,
                                     deviation_scores, load_personas, persona_report, read_requests,
                                     select_extremes, write_personas, write_requests)
from mcqdiff.utils import read_json

from .factories import InteractionRecordFactory, PersonaFactory, QuestionFactory


def assignment(classes):
    ids = sorted(classes)
    k = max(classes.values())
    return ClassAssignment(ids, [classes[s] for s in ids], np.eye(k)[[classes[s] - 1 for s in ids]])


def answer(student, question, correct):
    return InteractionRecordFactory(student_id=student, question_id=question,
                                    selected_option='A' if correct else 'C')


def accuracy_matrix(rows):
    qids = sorted(rows)
    acc = np.array([rows[q] for q in qids], dtype=float)
    return AccuracyMatrix(qids, list(range(1, acc.shape[1] + 1)), acc, np.full(acc.shape, 10))


def scores(deltas, cluster=1):
    return [DeviationScore(q, cluster, 0.5 + d, d, 10) for q, d in deltas.items()]


class TestClusterAccuracies:
    """Per-class accuracy with minimum support."""

    def test_ratio(self):
        """Three of four correct is 0.75."""
        records = [answer(s, 'q1', ok) for s, ok in (('s1', True), ('s2', True), ('s3', True), ('s4', False))]
        acc = cluster_accuracies(records, assignment({'s1': 1, 's2': 1, 's3': 1, 's4': 1}), min_support=4)
        assert acc.get('q1', 1) == pytest.approx(0.75)

    def test_empty_cell(self):
        """A class without attempts has a missing cell and zero support."""
        records = [answer('s1', 'q1', True), answer('s2', 'q2', False)]
        acc = cluster_accuracies(records, assignment({'s1': 1, 's2': 2}), min_support=1)
        assert np.isnan(acc.get('q1', 2))
        assert acc.support[acc.question_ids.index('q1'), 1] == 0

    def test_hand_tally(self):
        """Six records tallied by hand."""
        records = [
            answer('s1', 'q1', True), answer('s2', 'q1', False), answer('s3', 'q1', True),
            answer('s1', 'q2', True), answer('s2', 'q2', True), answer('s3', 'q2', False),
        ]
        acc = cluster_accuracies(records, assignment({'s1': 1, 's2': 1, 's3': 2}), min_support=1)
        assert acc.question_ids == ['q1', 'q2']
        np.testing.assert_allclose(acc.accuracy, [[0.5, 1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(acc.support, [[2, 1], [2, 1]])

    def test_min_support(self):
        """Cells under the minimum support are missing."""
        records = [answer('s{}'.format(i), 'q1', True) for i in range(4)]
        acc = cluster_accuracies(records, assignment({'s0': 1, 's1': 1, 's2': 1, 's3': 1}), min_support=5)
        assert np.isnan(acc.get('q1', 1))
        assert acc.support[0, 0] == 4

    def test_unassigned_student(self):
        """Every student needs a class."""
        records = [answer('s1', 'q1', True), answer('s9', 'q1', True)]
        with pytest.raises(DataError):
            cluster_accuracies(records, assignment({'s1': 1}), min_support=1)


class TestDeviationScores:
    """Deviation from the unweighted cross-cluster mean."""

    def deltas(self, row):
        return [s.delta for s in deviation_scores(accuracy_matrix({'q1': row}))]

    def test_two_clusters(self):
        """[0.8, 0.4] gives [+0.2, -0.2]."""
        assert self.deltas([0.8, 0.4]) == pytest.approx([0.2, -0.2], abs=1e-12)

    def test_equal_clusters(self):
        """Equal accuracies give zero."""
        assert self.deltas([0.6, 0.6, 0.6]) == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)

    def test_three_clusters(self):
        """[0.9, 0.6, 0.3] gives [+0.3, 0, -0.3]."""
        assert self.deltas([0.9, 0.6, 0.3]) == pytest.approx([0.3, 0.0, -0.3], abs=1e-12)

    def test_brute_force(self):
        """Random complete matrices match a loop and every question sums to 0."""
        rng = np.random.default_rng(5)
        rows = {'q{:02d}'.format(i): list(rng.random(4)) for i in range(20)}
        result = deviation_scores(accuracy_matrix(rows))
        by_question = {}
        for s in result:
            row = rows[s.question_id]
            assert s.delta == pytest.approx(row[s.cluster - 1] - sum(row) / len(row), abs=1e-12)
            by_question.setdefault(s.question_id, []).append(s.delta)
        assert len(by_question) == 20
        for deltas in by_question.values():
            assert abs(sum(deltas)) <= 1e-12

    def test_incomplete_rows_skipped(self):
        """Questions missing a cluster are not scored."""
        result = deviation_scores(accuracy_matrix({'q1': [0.5, np.nan], 'q2': [0.7, 0.3]}))
        assert {s.question_id for s in result} == {'q2'}

    def test_shift_invariant(self):
        """Adding a constant to every cluster's accuracy on a question leaves its deltas alone."""
        rng = np.random.default_rng(8)
        rows = {'q{:02d}'.format(i): list(0.5 * rng.random(3)) for i in range(10)}
        shifts = {q: float(c) for q, c in zip(sorted(rows), 0.4 * rng.random(10))}
        shifted = {q: [a + shifts[q] for a in row] for q, row in rows.items()}
        before = deviation_scores(accuracy_matrix(rows))
        after = deviation_scores(accuracy_matrix(shifted))
        assert [(s.question_id, s.cluster) for s in after] == [(s.question_id, s.cluster) for s in before]
        assert [s.delta for s in after] == pytest.approx([s.delta for s in before], abs=1e-12)


class TestSelectExtremes:
    """Strength and weakness selection."""

    def test_order_statistics(self):
        """Ten distinct deltas split into top five and bottom five."""
        deltas = {'q{:02d}'.format(i): d for i, d in enumerate(np.linspace(-0.45, 0.45, 10))}
        picked = select_extremes(scores(deltas), per_side=5)[1]
        assert picked.strengths == ['q09', 'q08', 'q07', 'q06', 'q05']
        assert picked.weaknesses == ['q00', 'q01', 'q02', 'q03', 'q04']

    def test_tie_at_cutoff(self):
        """A tie at fifth place goes to the lower question id."""
        deltas = {'q1': 0.5, 'q2': 0.4, 'q3': 0.3, 'q4': 0.2, 'q6': 0.1, 'q5': 0.1,
                  'q7': -0.1, 'q8': -0.2, 'q9': -0.3, 'q10': -0.4, 'q11': -0.5}
        picked = select_extremes(scores(deltas), per_side=5)[1]
        assert picked.strengths == ['q1', 'q2', 'q3', 'q4', 'q5']

    def test_full_sort(self):
        """Twelve scored questions match a full sort."""
        rng = np.random.default_rng(2)
        deltas = {'q{:02d}'.format(i): float(d) for i, d in enumerate(rng.normal(size=12))}
        picked = select_extremes(scores(deltas, cluster=3), per_side=5)[3]
        ranked = sorted(deltas, key=lambda q: (-deltas[q], q))
        assert picked.strengths == ranked[:5]
        assert picked.weaknesses == list(reversed(ranked))[:5]

    def test_shortfall(self):
        """Too few scored questions is an error naming the shortfall."""
        with pytest.raises(DataError) as e:
            select_extremes(scores({'q1': 0.1, 'q2': -0.1, 'q3': 0.0}), per_side=5)
        assert e.value.details['shortfall'] == 2

    def test_overlap_warns(self, caplog):
        """Between per_side and 2 * per_side questions the two lists overlap."""
        deltas = {'q{}'.format(i): 0.1 * i for i in range(7)}
        picked = select_extremes(scores(deltas), per_side=5)[1]
        assert set(picked.strengths) & set(picked.weaknesses)
        assert 'overlap' in caplog.text

    def test_input_order_irrelevant(self):
        """Shuffling the scores, ties included, never changes the selection."""
        rng = np.random.default_rng(6)
        pool = []
        for cluster in (1, 2, 3):
            deltas = {'q{:02d}'.format(i): float(d) for i, d in enumerate(np.round(rng.normal(size=14), 1))}
            pool.extend(scores(deltas, cluster=cluster))
        expected = select_extremes(pool, per_side=5)
        for _ in range(5):
            shuffled = [pool[i] for i in rng.permutation(len(pool))]
            assert select_extremes(shuffled, per_side=5) == expected


class TestPersonaRequest:
    """Question blocks for persona synthesis."""

    def fixture(self):
        bank = ItemBank([QuestionFactory(question_id='q{:02d}'.format(i),
                                         topic='Algebra' if i < 5 else 'Number') for i in range(10)])
        rows = {q: [0.9, 0.3] if int(q[1:]) < 5 else [0.2, 0.7] for q in bank.ids()}
        return bank, accuracy_matrix(rows)

    def test_ten_blocks(self):
        """Five strengths and five weaknesses give ten blocks."""
        bank, acc = self.fixture()
        request = build_persona_request(1, bank.ids()[:5], bank.ids()[5:], bank, acc)
        assert len(request.blocks) == 10
        assert request.strengths == bank.ids()[:5]
        assert request.weaknesses == bank.ids()[5:]
        assert request.blocks[0].delta == pytest.approx(0.3)
        assert request.blocks[0].accuracies == {1: 0.9, 2: 0.3}

    def test_topics_copied(self):
        """Strength topics and weakness topics appear verbatim."""
        bank, acc = self.fixture()
        request = build_persona_request(1, bank.ids()[:5], bank.ids()[5:], bank, acc)
        assert {b.topic for b in request.blocks if b.role == 'strength'} == {'Algebra'}
        assert {b.topic for b in request.blocks if b.role == 'weakness'} == {'Number'}
        assert 'cognitive gap' in request.instruction

    def test_missing_question(self):
        """A selected question outside the bank is a referential error."""
        bank, acc = self.fixture()
        with pytest.raises(ReferentialError):
            build_persona_request(1, ['zz'], bank.ids()[5:], bank, acc)

    def test_requests_file(self, tmpdir):
        """Requests read back block for block."""
        bank, acc = self.fixture()
        requests = [build_persona_request(c, bank.ids()[:5], bank.ids()[5:], bank, acc) for c in (1, 2)]
        path = str(tmpdir.join('persona_requests.json'))
        write_requests(requests, path, manifest_hash='abc')
        assert read_requests(path) == requests


class TestPersonas:
    """Persona files and the Markdown report."""

    def test_bundled(self):
        """The bundled set has five manual personas."""
        personas = load_personas(BUNDLED_PERSONAS, k=5)
        assert [p.cluster for p in personas] == [1, 2, 3, 4, 5]
        assert all(p.provenance == 'manual' for p in personas)
        assert personas[0].name == 'The Rule Memorizer'

    def test_cluster_mismatch(self):
        """A persona file must cover exactly the fitted classes."""
        with pytest.raises(DataError):
            load_personas(BUNDLED_PERSONAS, k=3)

    def test_duplicate_cluster(self, tmpdir):
        """Two personas for one cluster are rejected."""
        path = str(tmpdir.join('personas.json'))
        write_personas([PersonaFactory(cluster=1), PersonaFactory(cluster=2)], path)
        personas = load_personas(path, k=2)
        assert [p.name for p in personas] == ['Persona 1', 'Persona 2']
        write_personas([PersonaFactory(cluster=1), PersonaFactory(cluster=1)], path)
        with pytest.raises(DataError):
            load_personas(path)

    def test_stamped_file(self, tmpdir):
        """A persona file written with a manifest hash wraps the list and still loads."""
        path = str(tmpdir.join('personas.json'))
        write_personas([PersonaFactory(cluster=2), PersonaFactory(cluster=1)], path, manifest_hash='abc')
        raw = read_json(path)
        assert raw['manifest_hash'] == 'abc'
        assert [p['cluster'] for p in raw['personas']] == [1, 2]
        assert [p.cluster for p in load_personas(path, k=2)] == [1, 2]

    def test_generated_needs_questions(self):
        """Generated personas must list their strengths and weaknesses."""
        with pytest.raises(ValueError):
            PersonaProfile(cluster=1, name='X', description='y', provenance='llm_generated')

    def test_report(self):
        """One section per persona, in cluster order."""
        text = persona_report([PersonaFactory(cluster=2, name='Second'), PersonaFactory(cluster=1, name='First')])
        assert text.startswith('# Personas\n')
        assert text.index('## Cluster 1: First') < text.index('## Cluster 2: Second')

    def test_report_footer(self):
        """The manifest hash closes the report when given."""
        text = persona_report([PersonaFactory(cluster=1)], manifest_hash='abc')
        assert text.endswith('manifest_hash: `abc`\n')
