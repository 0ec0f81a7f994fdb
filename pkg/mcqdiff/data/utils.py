# -*- coding: utf-8 -*-
"""Ingest, dense-core filtering and the profiling / estimation partition."""
import hashlib
import logging
import os

import numpy as np
import pandas as pd

from mcqdiff.data.models import (OPTIONS, TOPICS, DatasetPartition, DatasetSummary, InteractionRecord,
                                 ItemBank, Question)
from mcqdiff.errors import DataError, EmptyResultError, ReferentialError, SchemaError, UsageError
from mcqdiff.utils import iter_jsonl, write_jsonl

logger = logging.getLogger(__name__)

RECORD_KEYS = ('student_id', 'question_id', 'selected_option', 'is_correct')
ITEM_KEYS = ('question_id', 'text', 'options', 'correct_option', 'topic')


def _require_str(obj, key, path, lineno, allow_empty=False):
    if key not in obj:
        raise SchemaError(path, lineno, key, 'missing')
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(path, lineno, key, 'expected a string, got {!r}'.format(value))
    if not allow_empty and not value:
        raise SchemaError(path, lineno, key, 'must not be empty')
    return value


def parse_record(obj, path='<records>', lineno=0):
    for key in obj:
        if key not in RECORD_KEYS:
            raise SchemaError(path, lineno, key, 'unexpected key')
    student_id = _require_str(obj, 'student_id', path, lineno)
    question_id = _require_str(obj, 'question_id', path, lineno)
    selected = _require_str(obj, 'selected_option', path, lineno)
    if selected not in OPTIONS:
        raise SchemaError(path, lineno, 'selected_option', '{!r} is not one of A, B, C, D'.format(selected))
    if 'is_correct' not in obj:
        raise SchemaError(path, lineno, 'is_correct', 'missing')
    if not isinstance(obj['is_correct'], bool):
        raise SchemaError(path, lineno, 'is_correct', 'expected true or false, got {!r}'.format(obj['is_correct']))
    return InteractionRecord(student_id, question_id, selected, obj['is_correct'])


def parse_question(obj, path='<items>', lineno=0):
    for key in obj:
        if key not in ITEM_KEYS + ('image_only',):
            raise SchemaError(path, lineno, key, 'unexpected key')
    question_id = _require_str(obj, 'question_id', path, lineno)
    text = _require_str(obj, 'text', path, lineno, allow_empty=True)
    options = obj.get('options')
    if not isinstance(options, dict):
        raise SchemaError(path, lineno, 'options', 'expected an object keyed A-D')
    if sorted(options) != list(OPTIONS):
        raise SchemaError(path, lineno, 'options', 'expected exactly the keys A, B, C, D, got {}'.format(
            ', '.join(sorted(options))))
    for key, value in options.items():
        if not isinstance(value, str):
            raise SchemaError(path, lineno, 'options.{}'.format(key), 'expected a string')
    correct = _require_str(obj, 'correct_option', path, lineno)
    if correct not in OPTIONS:
        raise SchemaError(path, lineno, 'correct_option', '{!r} is not one of A, B, C, D'.format(correct))
    topic = _require_str(obj, 'topic', path, lineno)
    if topic not in TOPICS:
        raise SchemaError(path, lineno, 'topic', '{!r} is not one of {}'.format(topic, ', '.join(TOPICS)))
    image_only = obj.get('image_only', False)
    if not isinstance(image_only, bool):
        raise SchemaError(path, lineno, 'image_only', 'expected true or false')
    # OCR found no text: the item is image-only
    if not text.strip():
        image_only = True
    return Question(question_id, text, dict(options), correct, topic, image_only)


def load_items(items_path):
    if not os.path.isfile(items_path):
        raise DataError("Items file not found: {}".format(items_path))
    usable, excluded, seen = [], [], set()
    for lineno, obj in iter_jsonl(items_path):
        question = parse_question(obj, items_path, lineno)
        if question.question_id in seen:
            raise SchemaError(items_path, lineno, 'question_id', 'duplicate id {!r}'.format(question.question_id))
        seen.add(question.question_id)
        (excluded if question.image_only else usable).append(question)
    if excluded:
        logger.info("Excluded {} image-only items from {}".format(len(excluded), items_path))
    return ItemBank(usable, excluded)


def ingest(records_path, items_path):
    """Parse and validate ``interactions.jsonl`` against ``items.jsonl``.

    Records on image-only items are dropped. Repeated (student, question)
    pairs keep the first attempt.
    """
    if not os.path.isfile(records_path):
        raise DataError("Interactions file not found: {}".format(records_path))
    bank = load_items(items_path)
    records, seen = [], set()
    n_image_only, n_duplicates = 0, 0
    for lineno, obj in iter_jsonl(records_path):
        record = parse_record(obj, records_path, lineno)
        if record.question_id in bank.excluded:
            n_image_only += 1
            continue
        if record.question_id not in bank:
            raise ReferentialError("{}:{}: question_id {!r} is not in the item bank".format(
                records_path, lineno, record.question_id), line=lineno, question_id=record.question_id)
        expected = record.selected_option == bank[record.question_id].correct_option
        if record.is_correct != expected:
            raise SchemaError(records_path, lineno, 'is_correct',
                              'is {} but selected option {} {} the correct option {}'.format(
                                  str(record.is_correct).lower(), record.selected_option,
                                  'is' if expected else 'is not', bank[record.question_id].correct_option))
        key = (record.student_id, record.question_id)
        if key in seen:
            n_duplicates += 1
            continue
        seen.add(key)
        records.append(record)
    if n_image_only:
        logger.info("Dropped {} records on image-only items".format(n_image_only))
    if n_duplicates:
        logger.info("Dropped {} repeated attempts (first attempt kept)".format(n_duplicates))
    logger.info("Ingested {} records on {} items".format(len(records), len(bank)))
    return records, bank


def write_records(records, path, manifest_hash=None):
    write_jsonl((r.to_dict() for r in records), path, manifest_hash)


def write_items(bank, path, manifest_hash=None):
    write_jsonl((q.to_dict() for q in bank.all_questions()), path, manifest_hash)


def records_frame(records):
    """Records as a DataFrame whose index is the position in ``records``."""
    if not records:
        return pd.DataFrame(columns=list(RECORD_KEYS))
    return pd.DataFrame.from_records([r.to_dict() for r in records], columns=list(RECORD_KEYS))


def dataset_summary(records, bank=None):
    frame = records_frame(records)
    n_students = frame['student_id'].nunique()
    n_questions = frame['question_id'].nunique()
    density = float(len(frame)) / (n_students * n_questions) if n_students and n_questions else 0.0
    topics = {}
    if bank is not None:
        for qid in sorted(frame['question_id'].unique()):
            topic = bank[qid].topic
            topics[topic] = topics.get(topic, 0) + 1
    return DatasetSummary(int(n_students), int(n_questions), len(frame), density, topics)


def filter_dense_core(records, min_responses_per_question=50, min_attempts_per_student=10):
    """Drop sparse questions and students until both thresholds hold at once.

    Removing students can push a question under its threshold and vice
    versa, so the removal repeats until nothing changes.
    """
    if min_responses_per_question < 1 or min_attempts_per_student < 1:
        raise UsageError("Dense-core thresholds must be >= 1")
    frame = records_frame(records)
    rounds = 0
    while len(frame):
        q_counts = frame['question_id'].map(frame['question_id'].value_counts())
        s_counts = frame['student_id'].map(frame['student_id'].value_counts())
        keep = (q_counts >= min_responses_per_question) & (s_counts >= min_attempts_per_student)
        if keep.all():
            break
        frame = frame[keep]
        rounds += 1
    if not len(frame):
        raise EmptyResultError(
            "Dense-core filtering (questions >= {}, students >= {}) removed every record".format(
                min_responses_per_question, min_attempts_per_student))
    logger.debug("Dense core reached after {} rounds: {} of {} records kept".format(
        rounds, len(frame), len(records)))
    return [records[i] for i in frame.index]


def _hash_to_estimation(question_id, seed):
    digest = hashlib.sha256('{}:{}'.format(seed, question_id).encode('utf-8')).digest()
    return digest[0] % 2 == 1


def partition(records, estimation_min_responses=20, min_responses_per_question=50,
              min_attempts_per_student=10, rule='profiling_first', seed=0):
    """Split questions into disjoint profiling and estimation sets.

    The profiling set is the dense core. The estimation candidates are the
    questions with at least ``estimation_min_responses`` responses. Under
    ``profiling_first`` a candidate already in the dense core stays in the
    profiling set; under ``hash`` shared questions are split by a seeded
    hash of their id.
    """
    if not records:
        raise EmptyResultError("Cannot partition an empty record set")
    core = filter_dense_core(records, min_responses_per_question, min_attempts_per_student)
    core_questions = frozenset(r.question_id for r in core)
    profiling_students = frozenset(r.student_id for r in core)

    counts = records_frame(records)['question_id'].value_counts()
    candidates = frozenset(counts[counts >= estimation_min_responses].index)

    if rule == 'profiling_first':
        profiling_questions = core_questions
        estimation_questions = candidates - core_questions
    elif rule == 'hash':
        shared = core_questions & candidates
        moved = frozenset(q for q in shared if _hash_to_estimation(q, seed))
        profiling_questions = core_questions - moved
        estimation_questions = (candidates - core_questions) | moved
    else:
        raise UsageError("Unknown partition rule {!r}".format(rule))

    if not profiling_questions:
        raise EmptyResultError("Profiling set is empty after applying rule '{}'".format(rule))
    if not estimation_questions:
        raise EmptyResultError(
            "Estimation set is empty: every question with >= {} responses is in the profiling set "
            "under rule '{}'. Try filtering.split: hash".format(estimation_min_responses, rule))
    logger.info("Partition ({}): {} profiling questions x {} students, {} estimation questions".format(
        rule, len(profiling_questions), len(profiling_students), len(estimation_questions)))
    return DatasetPartition(profiling_questions, profiling_students, estimation_questions, rule, seed)


def profiling_records(records, part):
    return [r for r in records
            if r.question_id in part.profiling_questions and r.student_id in part.profiling_students]


def estimation_records(records, part):
    return [r for r in records if r.question_id in part.estimation_questions]


def response_matrix(records, students=None, questions=None):
    """Students x questions correctness matrix, NaN where unobserved.

    Returns ``(matrix, student_ids, question_ids)`` with ids sorted unless
    given explicitly.
    """
    if students is None:
        students = sorted({r.student_id for r in records})
    if questions is None:
        questions = sorted({r.question_id for r in records})
    s_index = {s: i for i, s in enumerate(students)}
    q_index = {q: j for j, q in enumerate(questions)}
    matrix = np.full((len(students), len(questions)), np.nan)
    for r in records:
        i = s_index.get(r.student_id)
        j = q_index.get(r.question_id)
        if i is not None and j is not None:
            matrix[i, j] = 1.0 if r.is_correct else 0.0
    return matrix, list(students), list(questions)
