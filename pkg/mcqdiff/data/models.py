# -*- coding: utf-8 -*-
"""Interaction and item data model."""
from collections import OrderedDict
from dataclasses import dataclass, field

OPTIONS = ('A', 'B', 'C', 'D')
TOPICS = ('Number', 'Algebra', 'GeometryAndMeasure')
SPLIT_RULES = ('profiling_first', 'hash')


@dataclass(frozen=True)
class InteractionRecord:
    """One student x question attempt."""

    student_id: str
    question_id: str
    selected_option: str
    is_correct: bool

    def to_dict(self):
        return {
            'student_id': self.student_id,
            'question_id': self.question_id,
            'selected_option': self.selected_option,
            'is_correct': self.is_correct,
        }


@dataclass(frozen=True)
class Question:
    """An MCQ with exactly four options keyed A-D."""

    question_id: str
    text: str
    options: dict
    correct_option: str
    topic: str
    image_only: bool = False

    def to_dict(self):
        d = {
            'question_id': self.question_id,
            'text': self.text,
            'options': OrderedDict((o, self.options[o]) for o in OPTIONS),
            'correct_option': self.correct_option,
            'topic': self.topic,
        }
        if self.image_only:
            d['image_only'] = True
        return d


class ItemBank(object):
    """Usable questions keyed by id, in file order.

    Questions flagged ``image_only`` (or with empty text) are kept aside in
    ``excluded`` so the bank can be written back unchanged, but they are not
    visible through the mapping interface.
    """

    def __init__(self, questions=(), excluded=()):
        self._questions = OrderedDict((q.question_id, q) for q in questions)
        self.excluded = OrderedDict((q.question_id, q) for q in excluded)

    def __getitem__(self, question_id):
        return self._questions[question_id]

    def __contains__(self, question_id):
        return question_id in self._questions

    def __iter__(self):
        return iter(self._questions.values())

    def __len__(self):
        return len(self._questions)

    def get(self, question_id, default=None):
        return self._questions.get(question_id, default)

    def ids(self):
        return list(self._questions)

    def all_questions(self):
        """Usable and excluded questions, sorted by id (canonical file order)."""
        merged = dict(self._questions)
        merged.update(self.excluded)
        return [merged[k] for k in sorted(merged)]

    def __repr__(self):
        return '<ItemBank({} usable, {} excluded)>'.format(len(self), len(self.excluded))


@dataclass(frozen=True)
class DatasetPartition:
    """Disjoint profiling / estimation split of the questions."""

    profiling_questions: frozenset
    profiling_students: frozenset
    estimation_questions: frozenset
    rule: str = 'profiling_first'
    seed: int = 0

    def __post_init__(self):
        overlap = self.profiling_questions & self.estimation_questions
        if overlap:
            raise ValueError("Partition is not disjoint: {} shared questions".format(len(overlap)))

    def to_dict(self):
        return {
            'profiling_questions': sorted(self.profiling_questions),
            'profiling_students': sorted(self.profiling_students),
            'estimation_questions': sorted(self.estimation_questions),
            'rule': self.rule,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            profiling_questions=frozenset(d['profiling_questions']),
            profiling_students=frozenset(d['profiling_students']),
            estimation_questions=frozenset(d['estimation_questions']),
            rule=d.get('rule', 'profiling_first'),
            seed=d.get('seed', 0),
        )


@dataclass
class FilterConfig:
    min_responses_per_question: int = 50
    min_attempts_per_student: int = 10
    estimation_min_responses: int = 20
    split: str = 'profiling_first'

    def __post_init__(self):
        if self.split not in SPLIT_RULES:
            raise ValueError("filtering.split must be one of {}".format(', '.join(SPLIT_RULES)))
        for name in ('min_responses_per_question', 'min_attempts_per_student', 'estimation_min_responses'):
            if getattr(self, name) < 1:
                raise ValueError("filtering.{} must be >= 1".format(name))


@dataclass
class DatasetSummary:
    n_students: int
    n_questions: int
    n_interactions: int
    density: float
    topics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'n_students': self.n_students,
            'n_questions': self.n_questions,
            'n_interactions': self.n_interactions,
            'density': self.density,
            'topics': dict(self.topics),
        }
