# -*- coding: utf-8 -*-
"""Item features, the standardizer, ridge models and evaluation reports."""
from dataclasses import dataclass, field

import numpy as np

from mcqdiff.data.models import TOPICS

TOPIC_PREFIX = 'topic_'


def feature_names(k):
    return (['p_correct_c{}'.format(c) for c in range(1, k + 1)]
            + ['p_mean', 'p_var', 'p_range']
            + [TOPIC_PREFIX + t for t in TOPICS])


def numeric_mask(names):
    """True for columns that get standardized; one-hot topics pass through."""
    return np.array([not n.startswith(TOPIC_PREFIX) for n in names])


@dataclass
class ItemFeatureVector:
    question_id: str
    p_correct: np.ndarray
    p_mean: float
    p_var: float
    p_range: float
    topic: np.ndarray

    @property
    def k(self):
        return len(self.p_correct)

    @property
    def names(self):
        return feature_names(self.k)

    def values(self):
        return np.concatenate([self.p_correct, [self.p_mean, self.p_var, self.p_range], self.topic])


@dataclass
class Standardizer:
    """Per-column centering and scaling learned from training rows.

    Non-numeric columns have mean 0 and scale 1. Zero-variance numeric
    columns are centered only and listed in ``flagged``.
    """

    mean: np.ndarray
    scale: np.ndarray
    numeric: np.ndarray
    flagged: list = field(default_factory=list)

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.mean):
            raise ValueError("Expected {} feature columns".format(len(self.mean)))
        return (X - self.mean) / self.scale

    def to_dict(self):
        return {'mean': self.mean.tolist(), 'scale': self.scale.tolist(),
                'numeric': self.numeric.tolist(), 'flagged': list(self.flagged)}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d['mean'], dtype=float), np.asarray(d['scale'], dtype=float),
                   np.asarray(d['numeric'], dtype=bool), list(d.get('flagged', [])))


@dataclass
class RidgeModel:
    """Weights on standardized features plus an unpenalized intercept."""

    weights: np.ndarray
    intercept: float
    lam: float
    standardizer: Standardizer = None
    feature_names: list = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return X @ self.weights + self.intercept

    def to_dict(self):
        return {
            'weights': self.weights.tolist(),
            'intercept': self.intercept,
            'lambda': self.lam,
            'feature_names': self.feature_names,
            'standardizer': None if self.standardizer is None else self.standardizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        std = d.get('standardizer')
        return cls(
            weights=d['weights'],
            intercept=d['intercept'],
            lam=d['lambda'],
            standardizer=None if std is None else Standardizer.from_dict(std),
            feature_names=d.get('feature_names'),
        )


@dataclass
class RegressionConfig:
    lambda_grid: tuple = (0.1, 1.0, 10.0, 100.0, 500.0)
    n_folds: int = 5
    inner_folds: int = 5

    def __post_init__(self):
        self.lambda_grid = tuple(float(g) for g in self.lambda_grid)
        if not self.lambda_grid:
            raise ValueError("regression.lambda_grid must not be empty")
        if any(g < 0 for g in self.lambda_grid):
            raise ValueError("regression.lambda_grid values must be >= 0")
        if self.n_folds < 2 or self.inner_folds < 2:
            raise ValueError("regression.n_folds and regression.inner_folds must be >= 2")


@dataclass
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    mse: float
    r2: float
    lam: float

    def to_dict(self):
        return {'fold': self.fold, 'n_train': self.n_train, 'n_test': self.n_test,
                'mse': self.mse, 'r2': self.r2, 'lambda': self.lam}


@dataclass
class EvaluationReport:
    model: str
    seed: int
    n_folds: int
    grid: tuple
    folds: list = field(default_factory=list)

    def _stat(self, name, fn):
        return float(fn([getattr(f, name) for f in self.folds]))

    def _defined_r2(self):
        return [f.r2 for f in self.folds if np.isfinite(f.r2)]

    @property
    def n_r2_folds(self):
        return len(self._defined_r2())

    @property
    def mse_mean(self):
        return self._stat('mse', np.mean)

    @property
    def mse_sd(self):
        return self._stat('mse', np.std)

    @property
    def r2_mean(self):
        values = self._defined_r2()
        return float(np.mean(values)) if values else float('nan')

    @property
    def r2_sd(self):
        values = self._defined_r2()
        return float(np.std(values)) if values else float('nan')

    def to_dict(self):
        return {
            'model': self.model,
            'seed': self.seed,
            'n_folds': self.n_folds,
            'grid': list(self.grid),
            'folds': [f.to_dict() for f in self.folds],
            'aggregate': {
                'mse_mean': self.mse_mean,
                'mse_sd': self.mse_sd,
                'r2_mean': self.r2_mean,
                'r2_sd': self.r2_sd,
                'n_r2_folds': self.n_r2_folds,
            },
            'lambda_per_fold': [f.lam for f in self.folds],
        }
