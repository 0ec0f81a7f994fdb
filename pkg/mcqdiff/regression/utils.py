# -*- coding: utf-8 -*-
"""Feature extraction, closed-form ridge and the nested cross-validation harness."""
import io
import logging

import numpy as np
import pandas as pd
import plotly.graph_objs as go
import plotly.offline as py
from sklearn.model_selection import KFold

from mcqdiff.data.models import TOPICS
from mcqdiff.errors import DataError, IncompleteMatrixError, SingularSystemError
from mcqdiff.regression.models import (EvaluationReport, FoldResult, ItemFeatureVector, RegressionConfig,
                                       RidgeModel, Standardizer, feature_names, numeric_mask)
from mcqdiff.utils import read_json, write_json

logger = logging.getLogger(__name__)


def extract_features(matrix, question, k=None):
    """Correct-option probabilities per persona, their spread and the topic."""
    if k is not None and matrix.k != k:
        raise IncompleteMatrixError("Question {} has {} persona rows, expected {}".format(
            matrix.question_id, matrix.k, k))
    if matrix.question_id != question.question_id:
        raise DataError("Matrix {} does not belong to question {}".format(
            matrix.question_id, question.question_id))
    p = matrix.column(question.correct_option).copy()
    topic = np.array([1.0 if t == question.topic else 0.0 for t in TOPICS])
    return ItemFeatureVector(
        question_id=question.question_id,
        p_correct=p,
        p_mean=float(np.mean(p)),
        p_var=float(np.var(p)),
        p_range=float(np.max(p) - np.min(p)),
        topic=topic,
    )


def feature_table(vectors, targets=None):
    """DataFrame with ``question_id``, the named features and optionally ``beta``."""
    vectors = list(vectors)
    if not vectors:
        raise DataError("No feature vectors to tabulate")
    names = vectors[0].names
    frame = pd.DataFrame([v.values() for v in vectors], columns=names)
    frame.insert(0, 'question_id', [v.question_id for v in vectors])
    if targets is not None:
        missing = [v.question_id for v in vectors if v.question_id not in targets]
        if missing:
            logger.warning("{} items have no IRT difficulty and are left out of the table".format(len(missing)))
            frame = frame[~frame['question_id'].isin(missing)].reset_index(drop=True)
        frame['beta'] = [targets[q] for q in frame['question_id']]
    return frame


def standardize(X, numeric=None):
    """Fit a :class:`Standardizer` on training rows and apply it."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("Standardization needs at least 2 training rows")
    if numeric is None:
        numeric = np.ones(X.shape[1], dtype=bool)
    numeric = np.asarray(numeric, dtype=bool)
    mean = np.where(numeric, X.mean(axis=0), 0.0)
    sd = X.std(axis=0)
    constant = numeric & (sd <= 1e-12)
    scale = np.where(numeric & ~constant, sd, 1.0)
    flagged = [int(j) for j in np.flatnonzero(constant)]
    if flagged:
        logger.debug("Zero-variance feature columns {} centered only".format(flagged))
    std = Standardizer(mean, scale, numeric, flagged)
    return std, std.transform(X)


def fit_ridge(X, y, lam):
    """Minimize ||y - b - Xw||^2 + lam * ||w||^2 via the normal equations."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if X.shape[0] != len(y):
        raise DataError("X has {} rows but y has {}".format(X.shape[0], len(y)))
    X1 = np.column_stack([np.ones(len(y)), X])
    penalty = lam * np.eye(X1.shape[1])
    penalty[0, 0] = 0.0
    A = X1.T @ X1 + penalty
    if lam == 0 and np.linalg.matrix_rank(X1) < X1.shape[1]:
        raise SingularSystemError("Design matrix is rank deficient; unpenalized least squares has no unique "
                                  "solution. Use a positive lambda.")
    try:
        coef = np.linalg.solve(A, X1.T @ y)
    except np.linalg.LinAlgError:
        raise SingularSystemError("Normal equations are singular at lambda={}".format(lam))
    return RidgeModel(coef[1:], float(coef[0]), float(lam))


def _fit_predict(X_train, y_train, X_test, lam, numeric):
    std, Z = standardize(X_train, numeric)
    model = fit_ridge(Z, y_train, lam)
    model.standardizer = std
    return model, model.predict(X_test)


def select_lambda(X, y, grid=(0.1, 1.0, 10.0, 100.0, 500.0), numeric=None, n_folds=5, seed=0):
    """Grid value with the lowest mean inner-CV MSE; ties go to the smaller value."""
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ValueError("lambda grid must not be empty")
    if len(grid) == 1:
        return grid[0]
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n_splits = min(n_folds, len(y))
    if n_splits < 2 or len(y) - int(np.ceil(len(y) / float(n_splits))) < 2:
        raise DataError("Too few rows ({}) for inner cross-validation".format(len(y)))
    folds = list(KFold(n_splits=n_splits, shuffle=True, random_state=seed).split(X))
    best, best_mse = None, np.inf
    for lam in grid:
        errors = []
        for train, test in folds:
            try:
                _, pred = _fit_predict(X[train], y[train], X[test], lam, numeric)
            except SingularSystemError:
                errors = [np.inf]
                break
            errors.append(np.mean((y[test] - pred) ** 2))
        mse = float(np.mean(errors))
        logger.debug("lambda={}: inner MSE {:.6f}".format(lam, mse))
        if mse < best_mse:
            best, best_mse = lam, mse
    if best is None:
        raise SingularSystemError("No lambda in {} gives a solvable system".format(grid))
    return best


def r_squared(y, pred):
    """1 - SS_res / SS_tot with SS_tot about the mean of ``y``; NaN if ``y`` is constant."""
    y = np.asarray(y, dtype=float)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        logger.warning("Test fold targets are constant, R^2 is undefined")
        return float('nan')
    return 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot


def cross_validate(X, y, n_folds=5, seed=0, grid=(0.1, 1.0, 10.0, 100.0, 500.0), numeric=None,
                   inner_folds=5, question_ids=None, model='ridge', estimator=None):
    """Outer K-fold evaluation with lambda chosen inside each training fold.

    ``estimator(X_train, y_train, X_test)``, when given, replaces the ridge
    fit and must return test predictions. Returns ``(report, predictions)``
    where ``predictions`` holds one out-of-fold row per item.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if len(y) < 2 * n_folds:
        raise DataError("{} items cannot fill {} folds with at least 2 items each".format(len(y), n_folds))
    if question_ids is None:
        question_ids = [str(i) for i in range(len(y))]
    report = EvaluationReport(model=model, seed=seed, n_folds=n_folds, grid=tuple(grid))
    predictions = []
    splitter = KFold(n_splits=n_folds, shuffle=True, random_state=seed)
    for fold, (train, test) in enumerate(splitter.split(X), start=1):
        if len(test) < 2:
            raise DataError("Fold {} has {} test items, need at least 2".format(fold, len(test)))
        lam = float('nan')
        if estimator is not None:
            pred = np.asarray(estimator(X[train], y[train], X[test]), dtype=float)
        else:
            lam = select_lambda(X[train], y[train], grid, numeric, inner_folds, seed)
            _, pred = _fit_predict(X[train], y[train], X[test], lam, numeric)
        mse = float(np.mean((y[test] - pred) ** 2))
        r2 = r_squared(y[test], pred)
        report.folds.append(FoldResult(fold, len(train), len(test), mse, r2, lam))
        for idx, p in zip(test, pred):
            predictions.append({'question_id': question_ids[idx], 'fold': fold,
                                'beta': float(y[idx]), 'beta_hat': float(p)})
        logger.info("{} fold {}: lambda={} MSE={:.4f} R2={:.4f}".format(model, fold, lam, mse, r2))
    predictions.sort(key=lambda r: r['question_id'])
    if report.n_r2_folds < n_folds:
        logger.warning("{}: {} of {} folds have undefined R2 and are left out of its mean".format(
            model, n_folds - report.n_r2_folds, n_folds))
    logger.info("{}: MSE {:.3f} +/- {:.3f}, R2 {:.3f} +/- {:.3f}".format(
        model, report.mse_mean, report.mse_sd, report.r2_mean, report.r2_sd))
    return report, predictions


def lr_baseline(X, y, n_folds=5, seed=0, numeric=None, question_ids=None):
    """Unpenalized linear regression under the same harness."""
    return cross_validate(X, y, n_folds=n_folds, seed=seed, grid=(0.0,), numeric=numeric,
                          question_ids=question_ids, model='linear_regression')


def fit_final_model(X, y, config=None, numeric=None, names=None, seed=0):
    """Choose lambda by CV on every item and refit on all of them."""
    config = config or RegressionConfig()
    lam = select_lambda(X, y, config.lambda_grid, numeric, config.inner_folds, seed)
    model, _ = _fit_predict(X, y, X, lam, numeric)
    model.feature_names = list(names) if names is not None else None
    logger.info("Final ridge model: lambda={}".format(lam))
    return model


def predict(model, X):
    return model.predict(X)


def frame_design(frame):
    """Split a feature table into ``(question_ids, X, names, numeric)``."""
    names = [c for c in frame.columns if c not in ('question_id', 'beta')]
    return list(frame['question_id']), frame[names].values.astype(float), names, numeric_mask(names)


def check_feature_columns(frame, k):
    expected = feature_names(k)
    names = [c for c in frame.columns if c not in ('question_id', 'beta')]
    if names != expected:
        raise DataError("Feature columns {} do not match the {}-persona layout {}".format(names, k, expected))


def write_csv(frame, path, manifest_hash=None):
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fh:
        if manifest_hash:
            fh.write('# manifest_hash={}\n'.format(manifest_hash))
        frame.to_csv(fh, index=False, float_format='%.12g')


def read_csv(path):
    return pd.read_csv(path, comment='#', dtype={'question_id': str})


def write_report(report, path, manifest_hash=None, baseline=None):
    d = report.to_dict()
    if baseline is not None:
        d['baseline'] = baseline.to_dict()
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)


def write_model(model, path, manifest_hash=None):
    d = model.to_dict()
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)


def read_model(path):
    return RidgeModel.from_dict(read_json(path))


def plot_predictions(predictions, path, manifest_hash=None):
    """Predicted against IRT difficulty, one trace per fold."""
    frame = pd.DataFrame(predictions)
    plots = []
    for fold, rows in frame.groupby('fold'):
        plots.append(go.Scatter(
            x=rows['beta'], y=rows['beta_hat'], text=rows['question_id'], mode='markers',
            name='Fold {}'.format(fold), hoverinfo='text+x+y'))
    lo = float(min(frame['beta'].min(), frame['beta_hat'].min()))
    hi = float(max(frame['beta'].max(), frame['beta_hat'].max()))
    plots.append(go.Scatter(x=[lo, hi], y=[lo, hi], mode='lines', name='y = x',
                            line=dict(dash='dash', color='grey')))
    layout = go.Layout(
        title='Predicted vs IRT difficulty (out of fold)',
        xaxis=dict(title='IRT beta'),
        yaxis=dict(title='Predicted beta'),
        hovermode='closest',
        height=600,
        margin=dict(t=80, b=80, l=80, r=40),
        meta=dict(manifest_hash=manifest_hash) if manifest_hash else None,
    )
    py.plot(go.Figure(data=plots, layout=layout), filename=path, auto_open=False,
            include_plotlyjs='cdn', show_link=False, config=dict(displaylogo=False))
    return path
