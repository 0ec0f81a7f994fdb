# -*- coding: utf-8 -*-
"""Cluster accuracies, deviation scores and personas."""
from dataclasses import dataclass, field

import numpy as np

PROVENANCES = ('llm_generated', 'manual')
ROLES = ('strength', 'weakness')


@dataclass
class AccuracyMatrix:
    """Per question x cluster accuracy with attempt counts.

    ``accuracy`` is NaN where the cluster has less than the minimum support.
    Clusters are 1-based and listed in ``clusters``.
    """

    question_ids: list
    clusters: list
    accuracy: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        self.accuracy = np.asarray(self.accuracy, dtype=float)
        self.support = np.asarray(self.support, dtype=int)
        shape = (len(self.question_ids), len(self.clusters))
        if self.accuracy.shape != shape or self.support.shape != shape:
            raise ValueError("accuracy and support must be questions x clusters")
        self._index = {q: i for i, q in enumerate(self.question_ids)}

    @property
    def k(self):
        return len(self.clusters)

    def row(self, question_id):
        return self.accuracy[self._index[question_id]]

    def get(self, question_id, cluster):
        return float(self.accuracy[self._index[question_id], self.clusters.index(cluster)])

    def complete_rows(self):
        return ~np.isnan(self.accuracy).any(axis=1)


@dataclass(frozen=True)
class DeviationScore:
    question_id: str
    cluster: int
    accuracy: float
    delta: float
    support: int = 0

    def to_dict(self):
        return {'question_id': self.question_id, 'cluster': self.cluster, 'a': self.accuracy,
                'delta': self.delta, 'support': self.support}


@dataclass
class ExtremeSelection:
    cluster: int
    strengths: list
    weaknesses: list


@dataclass
class QuestionBlock:
    question_id: str
    role: str
    text: str
    topic: str
    accuracies: dict
    delta: float

    def to_dict(self):
        return {
            'question_id': self.question_id,
            'role': self.role,
            'text': self.text,
            'topic': self.topic,
            'accuracies': {str(c): a for c, a in sorted(self.accuracies.items())},
            'delta': self.delta,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            question_id=d['question_id'],
            role=d['role'],
            text=d['text'],
            topic=d['topic'],
            accuracies={int(c): a for c, a in d['accuracies'].items()},
            delta=d['delta'],
        )


@dataclass
class PersonaSynthesisRequest:
    """What a persona-writing model sees for one cluster."""

    cluster: int
    instruction: str
    blocks: list = field(default_factory=list)

    @property
    def strengths(self):
        return [b.question_id for b in self.blocks if b.role == 'strength']

    @property
    def weaknesses(self):
        return [b.question_id for b in self.blocks if b.role == 'weakness']

    def to_dict(self):
        return {'cluster': self.cluster, 'instruction': self.instruction,
                'blocks': [b.to_dict() for b in self.blocks]}

    @classmethod
    def from_dict(cls, d):
        return cls(cluster=d['cluster'], instruction=d['instruction'],
                   blocks=[QuestionBlock.from_dict(b) for b in d['blocks']])


@dataclass
class PersonaProfile:
    """A named learner persona tied to one latent class."""

    cluster: int
    name: str
    description: str
    strengths: list = field(default_factory=list)
    weaknesses: list = field(default_factory=list)
    provenance: str = 'llm_generated'

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError("provenance must be one of {}".format(', '.join(PROVENANCES)))
        if not self.name or not self.name.strip():
            raise ValueError("persona name must not be empty")
        if self.provenance != 'manual' and not (self.strengths and self.weaknesses):
            raise ValueError("generated personas need strength and weakness questions")

    def to_dict(self):
        return {
            'cluster': self.cluster,
            'name': self.name,
            'description': self.description,
            'strengths': list(self.strengths),
            'weaknesses': list(self.weaknesses),
            'provenance': self.provenance,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            cluster=int(d['cluster']),
            name=d['name'],
            description=d['description'],
            strengths=list(d.get('strengths', [])),
            weaknesses=list(d.get('weaknesses', [])),
            provenance=d.get('provenance', 'manual'),
        )
