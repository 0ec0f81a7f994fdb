# -*- coding: utf-8 -*-
"""2PL item and ability parameters."""
from dataclasses import dataclass, field

import numpy as np


@dataclass
class IrtFitConfig:
    n_nodes: int = 41
    tolerance: float = 1e-6
    max_iterations: int = 500
    degenerate_penalty: float = 1e-2
    newton_steps: int = 5

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("irt.n_nodes must be >= 2")
        if self.tolerance <= 0:
            raise ValueError("irt.tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("irt.max_iterations must be >= 1")
        if self.degenerate_penalty < 0:
            raise ValueError("irt.degenerate_penalty must be >= 0")


@dataclass
class IrtParameters:
    """Item (alpha, beta) and student theta on the logit scale.

    P(correct) = sigmoid(alpha * (theta - beta)); higher beta is harder.
    """

    item_ids: list
    alpha: np.ndarray
    beta: np.ndarray
    student_ids: list = field(default_factory=list)
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta_sd: np.ndarray = None

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta_sd is not None:
            self.theta_sd = np.asarray(self.theta_sd, dtype=float)
        if len(self.item_ids) != len(self.alpha) or len(self.alpha) != len(self.beta):
            raise ValueError("item_ids, alpha and beta must have the same length")
        if len(self.student_ids) != len(self.theta):
            raise ValueError("student_ids and theta must have the same length")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be positive for every item")

    def beta_by_item(self):
        return dict(zip(self.item_ids, self.beta.tolist()))

    def to_dict(self):
        students = []
        for idx, sid in enumerate(self.student_ids):
            row = {'student_id': sid, 'theta': float(self.theta[idx])}
            if self.theta_sd is not None:
                row['theta_sd'] = float(self.theta_sd[idx])
            students.append(row)
        return {
            'items': [{'question_id': qid, 'alpha': float(a), 'beta': float(b)}
                      for qid, a, b in zip(self.item_ids, self.alpha, self.beta)],
            'students': students,
        }

    @classmethod
    def from_dict(cls, d):
        items = d['items']
        students = d.get('students', [])
        theta_sd = None
        if students and all('theta_sd' in s for s in students):
            theta_sd = [s['theta_sd'] for s in students]
        return cls(
            item_ids=[i['question_id'] for i in items],
            alpha=[i['alpha'] for i in items],
            beta=[i['beta'] for i in items],
            student_ids=[s['student_id'] for s in students],
            theta=[s['theta'] for s in students],
            theta_sd=theta_sd,
        )


@dataclass
class IrtFitReport:
    log_likelihood: float
    n_iterations: int
    converged: bool
    tolerance_used: float
    history: list = field(default_factory=list)
    degenerate_items: list = field(default_factory=list)
    item_fit: list = field(default_factory=list)

    def to_dict(self):
        return {
            'log_likelihood': self.log_likelihood,
            'n_iterations': self.n_iterations,
            'converged': self.converged,
            'tolerance_used': self.tolerance_used,
            'history': list(self.history),
            'degenerate_items': list(self.degenerate_items),
            'item_fit': list(self.item_fit),
        }
