# -*- coding: utf-8 -*-
"""Persona-conditioned option distributions."""
from dataclasses import dataclass

import numpy as np

OPTIONS = ('A', 'B', 'C', 'D')
ROW_TOLERANCE = 1e-9


@dataclass
class SimulationMatrix:
    """K x 4 option probabilities for one question, rows in cluster order 1..K."""

    question_id: str
    clusters: list
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (len(self.clusters), len(OPTIONS)):
            raise ValueError("probs must be K x 4")
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if np.any(np.abs(self.probs.sum(axis=1) - 1.0) > ROW_TOLERANCE):
            raise ValueError("every row must sum to 1")

    @property
    def k(self):
        return len(self.clusters)

    def column(self, option):
        return self.probs[:, OPTIONS.index(option)]

    def to_dict(self):
        return {
            'question_id': self.question_id,
            'personas': [{'cluster': c, 'probs': dict(zip(OPTIONS, row.tolist()))}
                         for c, row in zip(self.clusters, self.probs)],
        }

    @classmethod
    def from_dict(cls, d):
        personas = d['personas']
        return cls(
            question_id=d['question_id'],
            clusters=[p['cluster'] for p in personas],
            probs=[[p['probs'][o] for o in OPTIONS] for p in personas],
        )
