# -*- coding: utf-8 -*-
"""Option normalization and simulation matrix tests."""
import numpy as np
import pytest

from mcqdiff.errors import DataError, DegenerateResponseError, IncompleteMatrixError
from mcqdiff.simulation.models import ROW_TOLERANCE, SimulationMatrix
from mcqdiff.simulation.utils import assemble_matrix, build_matrices, normalize_row, read_matrices, write_matrices


def row(a, b, c, d):
    return {'A': a, 'B': b, 'C': c, 'D': d}


class TestNormalizeRow:
    """Raw weights to a distribution over A-D."""

    def test_uniform(self):
        """Equal weights give a quarter each."""
        assert normalize_row(row(1, 1, 1, 1)) == row(0.25, 0.25, 0.25, 0.25)

    def test_already_normalized(self):
        """A distribution comes back unchanged."""
        assert normalize_row(row(0.5, 0.3, 0.1, 0.1)) == row(0.5, 0.3, 0.1, 0.1)

    def test_arithmetic(self):
        """{2, 1, 1, 0} gives {0.5, 0.25, 0.25, 0}."""
        assert normalize_row(row(2, 1, 1, 0)) == row(0.5, 0.25, 0.25, 0.0)

    def test_idempotent(self):
        """Normalizing twice changes nothing."""
        once = normalize_row(row(0.7, 0.2, 0.05, 0.3))
        assert normalize_row(once) == once

    def test_all_zero(self):
        """An all-zero row is a degenerate response."""
        with pytest.raises(DegenerateResponseError):
            normalize_row(row(0, 0, 0, 0))

    def test_negative(self):
        """Negative weights are rejected."""
        with pytest.raises(DataError):
            normalize_row(row(0.5, -0.1, 0.3, 0.3))

    def test_missing_option(self):
        """Every option needs a weight."""
        with pytest.raises(DataError):
            normalize_row({'A': 1.0, 'B': 0.0, 'C': 0.0})


class TestMatrix:
    """K x 4 matrices."""

    rows = {c: row(c, 1, 1, 1) for c in range(1, 6)}

    def test_shape(self):
        """Five rows in, a 5 x 4 matrix out."""
        matrix = assemble_matrix('q1', self.rows, 5)
        assert matrix.probs.shape == (5, 4)
        assert matrix.clusters == [1, 2, 3, 4, 5]
        assert np.all(np.abs(matrix.probs.sum(axis=1) - 1.0) <= ROW_TOLERANCE)

    def test_canonical_order(self):
        """Row order in the input does not matter."""
        shuffled = {c: self.rows[c] for c in (3, 5, 1, 4, 2)}
        np.testing.assert_array_equal(assemble_matrix('q1', shuffled, 5).probs,
                                      assemble_matrix('q1', self.rows, 5).probs)

    def test_rows_follow_clusters(self):
        """Row c holds persona c."""
        matrix = assemble_matrix('q1', self.rows, 5)
        assert matrix.probs[4, 0] == pytest.approx(5.0 / 8.0)
        assert list(matrix.column('A')) == pytest.approx([c / (c + 3.0) for c in range(1, 6)])

    def test_tolerance_boundary(self):
        """0.999999 and 0.9 sums are normalized before the matrix is built."""
        matrix = assemble_matrix('q1', {1: row(0.499999, 0.3, 0.1, 0.1), 2: row(0.4, 0.3, 0.1, 0.1)}, 2)
        assert np.all(np.abs(matrix.probs.sum(axis=1) - 1.0) <= ROW_TOLERANCE)
        assert matrix.probs[1, 0] == pytest.approx(0.4 / 0.9)

    def test_unnormalized_rejected(self):
        """A matrix row summing to 0.9 is invalid on its own."""
        with pytest.raises(ValueError):
            SimulationMatrix('q1', [1], [[0.4, 0.3, 0.1, 0.1]])

    def test_missing_persona(self):
        """A missing persona row makes the matrix incomplete."""
        rows = dict(self.rows)
        del rows[4]
        with pytest.raises(IncompleteMatrixError) as e:
            assemble_matrix('q1', rows, 5)
        assert e.value.details['missing'] == [4]

    def test_unknown_cluster(self):
        """Rows for clusters beyond K are rejected."""
        rows = dict(self.rows)
        rows[6] = row(1, 1, 1, 1)
        with pytest.raises(DataError):
            assemble_matrix('q1', rows, 5)


class TestBuildMatrices:
    """Matrices for a whole batch."""

    def test_incomplete_questions_dropped(self):
        """Questions missing a persona are dropped and reported."""
        results = {(q, c): row(1, 2, 3, 4) for q in ('q1', 'q2', 'q3') for c in (1, 2)}
        del results[('q2', 2)]
        results[('q3', 1)] = row(0, 0, 0, 0)
        matrices, dropped = build_matrices(results, ['q3', 'q2', 'q1'], 2)
        assert [m.question_id for m in matrices] == ['q1']
        assert [d['question_id'] for d in dropped] == ['q2', 'q3']

    def test_file(self, tmpdir):
        """Matrices read back with the same probabilities."""
        matrices, _ = build_matrices({('q1', 1): row(1, 1, 2, 0), ('q1', 2): row(0.1, 0.2, 0.3, 0.4)}, ['q1'], 2)
        path = str(tmpdir.join('simulation_matrices.jsonl'))
        write_matrices(matrices, path)
        back = read_matrices(path)
        np.testing.assert_array_equal(back[0].probs, matrices[0].probs)
        assert back[0].clusters == [1, 2]
