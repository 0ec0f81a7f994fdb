# -*- coding: utf-8 -*-
"""Latent class model types. Class labels exposed to users are 1-based."""
from dataclasses import dataclass, field

import numpy as np


@dataclass
class LcaConfig:
    k_min: int = 1
    k_max: int = 10
    n_restarts: int = 20
    max_iterations: int = 1000
    tolerance: float = 1e-6
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ValueError("lca.k_min must be >= 1 and <= lca.k_max")
        if self.n_restarts < 1:
            raise ValueError("lca.n_restarts must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("lca.epsilon must be in (0, 0.5)")

    @property
    def k_range(self):
        return list(range(self.k_min, self.k_max + 1))


@dataclass
class LatentClassModel:
    """Class weights and class-conditional correctness probabilities.

    ``rho`` is items x classes.
    """

    k: int
    class_weights: np.ndarray
    rho: np.ndarray
    log_likelihood: float
    item_ids: list = field(default_factory=list)
    converged: bool = True
    n_iterations: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.class_weights = np.asarray(self.class_weights, dtype=float)
        self.rho = np.asarray(self.rho, dtype=float)
        if self.class_weights.shape != (self.k,):
            raise ValueError("class_weights must have length k")
        if self.rho.ndim != 2 or self.rho.shape[1] != self.k:
            raise ValueError("rho must be items x k")
        if abs(self.class_weights.sum() - 1.0) > 1e-9:
            raise ValueError("class_weights must sum to 1")

    @property
    def n_items(self):
        return self.rho.shape[0]

    @property
    def n_parameters(self):
        return (self.k - 1) + self.k * self.n_items

    def class_mean_accuracy(self):
        return self.rho.mean(axis=0)

    def permuted(self, order):
        """Model with class ``order[j]`` moved to position ``j``."""
        order = list(order)
        return LatentClassModel(
            k=self.k,
            class_weights=self.class_weights[order],
            rho=self.rho[:, order],
            log_likelihood=self.log_likelihood,
            item_ids=list(self.item_ids),
            converged=self.converged,
            n_iterations=self.n_iterations,
            history=list(self.history),
        )

    def to_dict(self):
        return {
            'k': self.k,
            'class_weights': self.class_weights.tolist(),
            'rho': {qid: self.rho[i].tolist() for i, qid in enumerate(self.item_ids)},
            'item_ids': list(self.item_ids),
            'log_likelihood': self.log_likelihood,
            'n_parameters': self.n_parameters,
            'converged': self.converged,
            'n_iterations': self.n_iterations,
        }

    @classmethod
    def from_dict(cls, d):
        item_ids = d['item_ids']
        return cls(
            k=d['k'],
            class_weights=d['class_weights'],
            rho=np.array([d['rho'][qid] for qid in item_ids]).reshape(len(item_ids), d['k']),
            log_likelihood=d['log_likelihood'],
            item_ids=item_ids,
            converged=d.get('converged', True),
            n_iterations=d.get('n_iterations', 0),
        )


@dataclass
class ClassAssignment:
    """Hard classes (1..k) and posteriors per student."""

    student_ids: list
    classes: np.ndarray
    posterior: np.ndarray
    order: list = None

    def __post_init__(self):
        self.classes = np.asarray(self.classes, dtype=int)
        self.posterior = np.asarray(self.posterior, dtype=float)

    @property
    def k(self):
        return self.posterior.shape[1]

    def as_dict(self):
        return dict(zip(self.student_ids, self.classes.tolist()))

    def to_rows(self):
        return [{'student_id': sid, 'class': int(c), 'posterior': self.posterior[i].tolist()}
                for i, (sid, c) in enumerate(zip(self.student_ids, self.classes))]

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        return cls(
            student_ids=[r['student_id'] for r in rows],
            classes=[r['class'] for r in rows],
            posterior=[r['posterior'] for r in rows],
        )


@dataclass
class CurvePoint:
    k: int
    log_likelihood: float
    n_parameters: int
    aic: float
    bic: float

    def to_dict(self):
        return {'k': self.k, 'log_likelihood': self.log_likelihood, 'n_parameters': self.n_parameters,
                'aic': self.aic, 'bic': self.bic}


@dataclass
class ModelSelectionCurve:
    points: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def ks(self):
        return [p.k for p in self.points]

    @property
    def bic(self):
        return [p.bic for p in self.points]

    @property
    def aic(self):
        return [p.aic for p in self.points]
