# -*- coding: utf-8 -*-
"""Deviation scores, strength / weakness selection and persona requests."""
import io
import logging
import os

import numpy as np
import pandas as pd

from mcqdiff.data.utils import records_frame
from mcqdiff.errors import DataError, ReferentialError, SchemaError
from mcqdiff.profiling.models import (AccuracyMatrix, DeviationScore, ExtremeSelection, PersonaProfile,
                                      PersonaSynthesisRequest, QuestionBlock)
from mcqdiff.utils import read_json, write_json

logger = logging.getLogger(__name__)

BUNDLED_PERSONAS = os.path.join(os.path.dirname(__file__), 'personas_bundled.json')

PERSONA_INSTRUCTION = (
    "Below are the questions on which this group of students does best (strengths) and worst "
    "(weaknesses) relative to the other groups, with each question's topic, the accuracy of every "
    "group and this group's deviation from the cross-group mean. Write a persona name and "
    "description capturing the cognitive gap that separates the strengths from the weaknesses."
)


def cluster_accuracies(records, assignment, min_support=5):
    """Accuracy of each class on each question.

    Cells with fewer than ``min_support`` attempts are NaN; their counts are
    still reported in ``support``.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    classes = assignment.as_dict()
    frame = records_frame(records)
    frame['cluster'] = frame['student_id'].map(classes)
    unassigned = frame.loc[frame['cluster'].isnull(), 'student_id'].unique()
    if len(unassigned):
        raise DataError("{} students have no class assignment (e.g. {!r})".format(
            len(unassigned), sorted(unassigned)[0]))
    frame['cluster'] = frame['cluster'].astype(int)
    frame['is_correct'] = frame['is_correct'].astype(int)

    clusters = list(range(1, assignment.k + 1))
    grouped = frame.groupby(['question_id', 'cluster'])['is_correct'].agg(['sum', 'count'])
    counts = grouped['count'].unstack(fill_value=0).reindex(columns=clusters, fill_value=0).sort_index()
    correct = grouped['sum'].unstack(fill_value=0).reindex(columns=clusters, fill_value=0).sort_index()
    support = counts.values.astype(int)
    with np.errstate(invalid='ignore', divide='ignore'):
        accuracy = correct.values / support
    accuracy[support < min_support] = np.nan
    return AccuracyMatrix(list(counts.index), clusters, accuracy, support)


def deviation_scores(accuracy_matrix):
    """delta = a - unweighted mean over clusters, on complete rows only."""
    complete = accuracy_matrix.complete_rows()
    skipped = int((~complete).sum())
    if skipped:
        logger.info("Skipping {} questions without accuracy for every cluster".format(skipped))
    scores = []
    for i in np.flatnonzero(complete):
        qid = accuracy_matrix.question_ids[i]
        row = accuracy_matrix.accuracy[i]
        deltas = row - row.mean()
        for j, cluster in enumerate(accuracy_matrix.clusters):
            scores.append(DeviationScore(qid, cluster, float(row[j]), float(deltas[j]),
                                         int(accuracy_matrix.support[i, j])))
    return scores


def select_extremes(scores, per_side=5):
    """Top and bottom ``per_side`` questions by delta for every cluster.

    Ties break on question id. Returns ``{cluster: ExtremeSelection}``.
    """
    by_cluster = {}
    for s in scores:
        by_cluster.setdefault(s.cluster, []).append(s)
    selections = {}
    for cluster in sorted(by_cluster):
        cluster_scores = by_cluster[cluster]
        if len(cluster_scores) < per_side:
            raise DataError("Cluster {} has {} scored questions, needs {} (short by {})".format(
                cluster, len(cluster_scores), per_side, per_side - len(cluster_scores)),
                cluster=cluster, shortfall=per_side - len(cluster_scores))
        if len(cluster_scores) < 2 * per_side:
            logger.warning("Cluster {}: only {} scored questions, strengths and weaknesses overlap".format(
                cluster, len(cluster_scores)))
        strengths = sorted(cluster_scores, key=lambda s: (-s.delta, s.question_id))[:per_side]
        weaknesses = sorted(cluster_scores, key=lambda s: (s.delta, s.question_id))[:per_side]
        selections[cluster] = ExtremeSelection(
            cluster, [s.question_id for s in strengths], [s.question_id for s in weaknesses])
    return selections


def build_persona_request(cluster, strengths, weaknesses, item_bank, accuracy_matrix):
    blocks = []
    j = accuracy_matrix.clusters.index(cluster)
    for role, qids in (('strength', strengths), ('weakness', weaknesses)):
        for qid in qids:
            question = item_bank.get(qid)
            if question is None:
                raise ReferentialError("Question {!r} is not in the item bank".format(qid), question_id=qid)
            if not question.text.strip():
                raise DataError("Question {!r} has no text to show".format(qid), question_id=qid)
            row = accuracy_matrix.row(qid)
            blocks.append(QuestionBlock(
                question_id=qid,
                role=role,
                text=question.text,
                topic=question.topic,
                accuracies={c: float(a) for c, a in zip(accuracy_matrix.clusters, row)},
                delta=float(row[j] - np.nanmean(row)),
            ))
    return PersonaSynthesisRequest(cluster, PERSONA_INSTRUCTION, blocks)


def load_personas(path, k=None):
    """Read a persona file; clusters must be exactly 1..k when ``k`` is given."""
    try:
        raw = read_json(path)
    except (IOError, OSError):
        raise DataError("Persona file not found: {}".format(path))
    except ValueError as e:
        raise SchemaError(path, 1, '<file>', 'invalid JSON ({})'.format(e))
    if isinstance(raw, dict) and isinstance(raw.get('personas'), list):
        raw = raw['personas']
    if not isinstance(raw, list):
        raise SchemaError(path, 1, '<file>', 'expected a list of personas')
    personas = []
    for idx, d in enumerate(raw):
        try:
            personas.append(PersonaProfile.from_dict(d))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(path, idx + 1, 'persona', str(e))
    personas.sort(key=lambda p: p.cluster)
    clusters = [p.cluster for p in personas]
    if len(set(clusters)) != len(clusters):
        raise DataError("{} lists a cluster more than once".format(path))
    if k is not None and clusters != list(range(1, k + 1)):
        raise DataError("{} covers clusters {} but the class model has {}".format(path, clusters, k))
    return personas


def write_personas(personas, path, manifest_hash=None):
    rows = [p.to_dict() for p in sorted(personas, key=lambda p: p.cluster)]
    write_json({'personas': rows, 'manifest_hash': manifest_hash} if manifest_hash else rows, path)


def write_requests(requests, path, manifest_hash=None):
    d = {'requests': [r.to_dict() for r in requests]}
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)


def read_requests(path):
    return [PersonaSynthesisRequest.from_dict(r) for r in read_json(path)['requests']]


def deviations_frame(scores):
    return pd.DataFrame([s.to_dict() for s in scores],
                        columns=['question_id', 'cluster', 'a', 'delta', 'support'])


def write_deviations(scores, path, manifest_hash=None):
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fh:
        if manifest_hash:
            fh.write('# manifest_hash={}\n'.format(manifest_hash))
        deviations_frame(scores).to_csv(fh, index=False, float_format='%.10g')


def persona_report(personas, requests=(), manifest_hash=None):
    """Markdown with one section per persona and an optional manifest footer."""
    by_cluster = {r.cluster: r for r in requests}
    lines = ['# Personas', '']
    for persona in sorted(personas, key=lambda p: p.cluster):
        lines.append('## Cluster {}: {}'.format(persona.cluster, persona.name))
        lines.append('')
        lines.append('*Provenance: {}*'.format(persona.provenance))
        lines.append('')
        lines.append(persona.description)
        lines.append('')
        request = by_cluster.get(persona.cluster)
        if request is None:
            continue
        for role, title in (('strength', 'Strengths'), ('weakness', 'Weaknesses')):
            lines.append('### {}'.format(title))
            lines.append('')
            lines.append('| question | topic | accuracy | delta |')
            lines.append('|---|---|---|---|')
            for block in request.blocks:
                if block.role != role:
                    continue
                lines.append('| {} | {} | {:.3f} | {:+.3f} |'.format(
                    block.question_id, block.topic, block.accuracies[persona.cluster], block.delta))
            lines.append('')
    if manifest_hash:
        lines.extend(['---', '', 'manifest_hash: `{}`'.format(manifest_hash)])
    return '\n'.join(lines).rstrip('\n') + '\n'
