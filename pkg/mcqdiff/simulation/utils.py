# -*- coding: utf-8 -*-
"""Normalize raw provider answers and assemble per-question matrices."""
import logging
import math

from mcqdiff.errors import DataError, DegenerateResponseError, IncompleteMatrixError
from mcqdiff.simulation.models import OPTIONS, SimulationMatrix
from mcqdiff.utils import iter_jsonl, write_jsonl

logger = logging.getLogger(__name__)


def normalize_row(raw):
    """Divide option weights by their sum.

    Rows already summing to 1 within 1e-12 are returned unchanged, which
    keeps normalization idempotent bit for bit.
    """
    values = []
    for option in OPTIONS:
        if option not in raw:
            raise DataError("Option {} missing from simulated row".format(option))
        value = float(raw[option])
        if not math.isfinite(value) or value < 0:
            raise DataError("Option {} has invalid weight {!r}".format(option, raw[option]))
        values.append(value)
    total = math.fsum(values)
    if total <= 0:
        raise DegenerateResponseError("All option weights are zero")
    if abs(total - 1.0) <= 1e-12:
        return dict(zip(OPTIONS, values))
    return dict(zip(OPTIONS, [v / total for v in values]))


def assemble_matrix(question_id, rows, k):
    """Stack ``{cluster: raw row}`` into a K x 4 matrix ordered by cluster."""
    missing = [c for c in range(1, k + 1) if c not in rows]
    if missing:
        raise IncompleteMatrixError("Question {} lacks personas {}".format(question_id, missing),
                                    question_id=question_id, missing=missing)
    extra = sorted(set(rows) - set(range(1, k + 1)))
    if extra:
        raise DataError("Question {} has rows for unknown clusters {}".format(question_id, extra))
    clusters = list(range(1, k + 1))
    probs = []
    for c in clusters:
        row = normalize_row(rows[c])
        probs.append([row[o] for o in OPTIONS])
    return SimulationMatrix(question_id, clusters, probs)


def build_matrices(results, question_ids, k):
    """Matrices for every question with all K rows; the rest are dropped.

    ``results`` maps ``(question_id, cluster)`` to a raw option map.
    Returns ``(matrices, dropped)`` where ``dropped`` lists
    ``{'question_id', 'reason'}`` entries.
    """
    by_question = {}
    for (qid, cluster), raw in results.items():
        by_question.setdefault(qid, {})[cluster] = raw
    matrices, dropped = [], []
    for qid in sorted(question_ids):
        try:
            matrices.append(assemble_matrix(qid, by_question.get(qid, {}), k))
        except DataError as e:
            dropped.append({'question_id': qid, 'reason': e.message})
    if dropped:
        logger.warning("Dropped {} questions with incomplete or degenerate persona rows: {}".format(
            len(dropped), ', '.join(d['question_id'] for d in dropped)))
    return matrices, dropped


def write_matrices(matrices, path, manifest_hash=None):
    write_jsonl((m.to_dict() for m in matrices), path, manifest_hash)


def read_matrices(path):
    return [SimulationMatrix.from_dict(obj) for _, obj in iter_jsonl(path)]
