# -*- coding: utf-8 -*-
"""Synthetic world configuration and generated worlds."""
from dataclasses import dataclass, field

import numpy as np

from mcqdiff.irt.models import IrtParameters

KINDS = ('irt', 'lca', 'persona')


@dataclass
class SyntheticWorldConfig:
    kind: str = 'persona'
    n_students: int = 400
    n_items: int = 80
    seed: int = 0
    alpha_range: tuple = (0.5, 2.5)
    beta_range: tuple = (-2.0, 2.0)
    k_true: int = 3
    class_weights: tuple = None
    separation: float = 0.8
    ability_spread: float = 1.5
    within_class_sd: float = 0.2
    topic_effect: float = 0.5
    missing_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("synthetic.kind must be one of {}".format(', '.join(KINDS)))
        if self.n_students < 1 or self.n_items < 1:
            raise ValueError("synthetic.n_students and synthetic.n_items must be >= 1")
        for name in ('alpha_range', 'beta_range'):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError("synthetic.{} must be [low, high]".format(name))
            setattr(self, name, (float(lo), float(hi)))
        if self.alpha_range[0] < 0:
            raise ValueError("synthetic.alpha_range must be non-negative")
        if self.k_true < 1:
            raise ValueError("synthetic.k_true must be >= 1")
        if self.class_weights is not None:
            w = np.asarray(self.class_weights, dtype=float)
            if len(w) != self.k_true or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("synthetic.class_weights must be a simplex of length k_true")
            self.class_weights = tuple(w.tolist())
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError("synthetic.separation must be in [0, 1]")
        if self.within_class_sd < 0:
            raise ValueError("synthetic.within_class_sd must be >= 0")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("synthetic.missing_rate must be in [0, 1)")

    @property
    def weights(self):
        if self.class_weights is None:
            return np.full(self.k_true, 1.0 / self.k_true)
        return np.asarray(self.class_weights)


@dataclass
class IrtWorld:
    """Records drawn from a 2PL model with known parameters."""

    records: list
    bank: object
    item_ids: list
    alpha: np.ndarray
    beta: np.ndarray
    student_ids: list
    theta: np.ndarray

    def parameters(self):
        return IrtParameters(self.item_ids, self.alpha, self.beta, self.student_ids, self.theta)

    def truth(self):
        return {
            'kind': 'irt',
            'items': [{'question_id': q, 'alpha': float(a), 'beta': float(b)}
                      for q, a, b in zip(self.item_ids, self.alpha, self.beta)],
            'students': [{'student_id': s, 'theta': float(t)} for s, t in zip(self.student_ids, self.theta)],
        }


@dataclass
class LcaWorld:
    """A latent class mixture; ``assignments`` are 1-based."""

    matrix: np.ndarray
    assignments: np.ndarray
    model: object
    student_ids: list
    item_ids: list
    records: list = field(default_factory=list)
    bank: object = None

    def truth(self):
        return {
            'kind': 'lca',
            'k_true': self.model.k,
            'class_weights': self.model.class_weights.tolist(),
            'class_item_accuracy': {q: {str(c + 1): float(self.model.rho[i, c]) for c in range(self.model.k)}
                                    for i, q in enumerate(self.item_ids)},
            'assignments': dict(zip(self.student_ids, self.assignments.tolist())),
        }


@dataclass
class PersonaWorld:
    """Latent-class students with abilities and topic-specific offsets."""

    records: list
    bank: object
    assignments: np.ndarray
    student_ids: list
    theta: np.ndarray
    item_ids: list
    alpha: np.ndarray
    beta: np.ndarray
    class_item_accuracy: np.ndarray
    class_weights: np.ndarray
    topic_offsets: dict

    def truth(self):
        k = self.class_item_accuracy.shape[1]
        return {
            'kind': 'persona',
            'k_true': k,
            'class_weights': self.class_weights.tolist(),
            'items': [{'question_id': q, 'alpha': float(a), 'beta': float(b), 'topic': self.bank[q].topic}
                      for q, a, b in zip(self.item_ids, self.alpha, self.beta)],
            'class_item_accuracy': {q: {str(c + 1): float(self.class_item_accuracy[i, c]) for c in range(k)}
                                    for i, q in enumerate(self.item_ids)},
            'topic_offsets': {str(c): dict(v) for c, v in sorted(self.topic_offsets.items())},
            'assignments': dict(zip(self.student_ids, self.assignments.tolist())),
        }
