# -*- coding: utf-8 -*-
"""Latent class analysis with a binary measurement model.

Students are rows of a NaN-masked correctness matrix. Missing cells
contribute nothing to the likelihood.
"""
import io
import logging

import numpy as np
import pandas as pd
import plotly.graph_objs as go
import plotly.offline as py
from scipy.special import logsumexp

from mcqdiff.errors import DataError, EmptyResultError, FitError, UsageError
from mcqdiff.lca.models import ClassAssignment, CurvePoint, LatentClassModel, LcaConfig, ModelSelectionCurve
from mcqdiff.utils import read_json, write_json, write_jsonl, iter_jsonl

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-12


def _split(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise DataError("Response matrix must be two-dimensional")
    mask = ~np.isnan(matrix)
    observed = np.where(mask, matrix, 0.0)
    if np.any((observed != 0.0) & (observed != 1.0)):
        raise DataError("Response matrix must hold 0, 1 or NaN")
    empty = np.flatnonzero(mask.sum(axis=1) == 0)
    if len(empty):
        raise DataError("{} students have no observed responses (first row {})".format(len(empty), empty[0]))
    return observed, mask.astype(float)


def _log_joint(observed, mask, weights, rho):
    """log pi_c + sum over observed items of log P(y | class c)."""
    return (observed @ np.log(rho) + (mask - observed) @ np.log1p(-rho)) + np.log(weights)[None, :]


def _m_step(observed, mask, post, epsilon):
    weights = np.maximum(post.mean(axis=0), WEIGHT_FLOOR)
    weights = weights / weights.sum()
    num = observed.T @ post
    den = mask.T @ post
    rho = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.5)
    return weights, np.clip(rho, epsilon, 1.0 - epsilon)


def _run_em(observed, mask, k, config, rng):
    post = rng.dirichlet(np.ones(k), size=observed.shape[0])
    weights, rho = _m_step(observed, mask, post, config.epsilon)
    history = []
    converged = False
    for iteration in range(1, config.max_iterations + 1):
        log_joint = _log_joint(observed, mask, weights, rho)
        marginal = logsumexp(log_joint, axis=1)
        history.append(float(marginal.sum()))
        if len(history) > 1 and abs(history[-1] - history[-2]) < config.tolerance:
            converged = True
            break
        post = np.exp(log_joint - marginal[:, None])
        weights, rho = _m_step(observed, mask, post, config.epsilon)
    return weights, rho, history, converged, len(history)


def fit_lca(matrix, k, config=None, seed=0, item_ids=None):
    """Fit a ``k``-class model by EM, keeping the best of several restarts.

    Restart ``r`` draws its initial posterior from ``default_rng([seed, r])``,
    so each restart is reproducible on its own. Ties in log-likelihood go
    to the lowest restart index. Classes come back ordered by ascending
    mean correctness probability.
    """
    config = config or LcaConfig()
    observed, mask = _split(matrix)
    n_students, n_items = observed.shape
    if k < 1:
        raise UsageError("k must be >= 1, got {}".format(k))
    if k > n_students:
        raise FitError("Cannot fit {} classes to {} students".format(k, n_students))
    if item_ids is None:
        item_ids = ['item{}'.format(i) for i in range(n_items)]

    best = None
    for restart in range(config.n_restarts):
        weights, rho, history, converged, n_iter = _run_em(
            observed, mask, k, config, np.random.default_rng([seed, restart]))
        logger.debug("LCA k={} restart {}: logL={:.4f} after {} iterations".format(k, restart, history[-1], n_iter))
        if best is None or history[-1] > best[2][-1]:
            best = (weights, rho, history, converged, n_iter)

    weights, rho, history, converged, n_iter = best
    if not converged:
        logger.warning("LCA k={} did not converge within {} iterations".format(k, config.max_iterations))
    order = np.argsort(rho.mean(axis=0), kind='stable')
    model = LatentClassModel(
        k=k,
        class_weights=weights,
        rho=rho,
        log_likelihood=history[-1],
        item_ids=list(item_ids),
        converged=converged,
        n_iterations=n_iter,
        history=history,
    )
    return model.permuted(order)


def posterior(model, matrix):
    """Class posteriors by Bayes rule, one row per student."""
    observed, mask = _split(matrix)
    if observed.shape[1] != model.n_items:
        raise DataError("Matrix has {} items, model has {}".format(observed.shape[1], model.n_items))
    log_joint = _log_joint(observed, mask, model.class_weights, model.rho)
    return np.exp(log_joint - logsumexp(log_joint, axis=1)[:, None])


def assign_classes(model, matrix, student_ids=None):
    """Hard-assign students by maximum posterior.

    Classes are relabeled by ascending pooled accuracy of their assigned
    students; ``assignment.order`` is the permutation applied, so
    ``model.permuted(assignment.order)`` lines up with the labels.
    Empty classes fall back to the model's mean correctness probability.
    """
    observed, mask = _split(matrix)
    post = posterior(model, matrix)
    provisional = np.argmax(post, axis=1)
    keys = []
    fallback = model.class_mean_accuracy()
    for c in range(model.k):
        members = provisional == c
        attempts = mask[members].sum()
        keys.append(observed[members].sum() / attempts if attempts else fallback[c])
    order = sorted(range(model.k), key=lambda c: (keys[c], c))
    post = post[:, order]
    if student_ids is None:
        student_ids = ['s{}'.format(i) for i in range(observed.shape[0])]
    return ClassAssignment(
        student_ids=list(student_ids),
        classes=np.argmax(post, axis=1) + 1,
        posterior=post,
        order=order,
    )


def classification_entropy(post):
    """Relative entropy in [0, 1]; 1 is perfectly crisp."""
    post = np.asarray(post, dtype=float)
    n, k = post.shape
    if k == 1 or n == 0:
        return 1.0
    p = np.clip(post, 1e-300, 1.0)
    return float(1.0 - (-(post * np.log(p)).sum()) / (n * np.log(k)))


def n_parameters(k, n_items):
    return (k - 1) + k * n_items


def information_criteria(model, n_students):
    """``(BIC, AIC)`` of a fitted model."""
    p = model.n_parameters
    bic = -2.0 * model.log_likelihood + p * np.log(n_students)
    aic = -2.0 * model.log_likelihood + 2.0 * p
    return float(bic), float(aic)


def select_k(curve):
    """Class count minimizing BIC; ties go to the smaller k."""
    if not len(curve):
        raise EmptyResultError("Model selection curve is empty")
    ks = curve.ks
    if ks != list(range(ks[0], ks[0] + len(ks))):
        raise UsageError("Model selection curve must cover a contiguous k range, got {}".format(ks))
    best = min(curve, key=lambda p: (p.bic, p.k))
    return best.k


def sweep_k(matrix, k_range, config=None, seed=0, item_ids=None):
    """Fit every k in ``k_range``; returns ``(curve, {k: model})``.

    Candidates above the number of students are dropped with a warning.
    """
    config = config or LcaConfig()
    n_students = np.asarray(matrix).shape[0]
    ks = sorted(k_range)
    if ks and ks[-1] > n_students:
        logger.warning("Dropping k > {} (number of students) from the sweep".format(n_students))
        ks = [k for k in ks if k <= n_students]
    if not ks:
        raise EmptyResultError("No candidate class counts to fit")
    curve = ModelSelectionCurve()
    models = {}
    for k in ks:
        model = fit_lca(matrix, k, config, seed=seed, item_ids=item_ids)
        bic, aic = information_criteria(model, n_students)
        curve.points.append(CurvePoint(k, model.log_likelihood, model.n_parameters, aic, bic))
        models[k] = model
        logger.info("LCA k={}: logL={:.3f} BIC={:.3f} AIC={:.3f}".format(k, model.log_likelihood, bic, aic))
    return curve, models


def plot_model_selection(curve, path, manifest_hash=None):
    """BIC and AIC against k, with the BIC minimum marked."""
    best = select_k(curve)
    best_bic = curve.bic[curve.ks.index(best)]
    plots = [
        go.Scatter(x=curve.ks, y=curve.bic, name='BIC', mode='lines+markers'),
        go.Scatter(x=curve.ks, y=curve.aic, name='AIC', mode='lines+markers'),
        go.Scatter(x=[best], y=[best_bic], name='BIC minimum (k={})'.format(best), mode='markers',
                   marker=dict(size=14, symbol='star')),
    ]
    layout = go.Layout(
        title='Latent class model selection',
        xaxis=dict(title='Number of classes (k)', dtick=1),
        yaxis=dict(title='Information criterion'),
        hovermode='closest',
        height=500,
        margin=dict(t=80, b=80, l=80, r=40),
        meta=dict(manifest_hash=manifest_hash) if manifest_hash else None,
    )
    fig = go.Figure(data=plots, layout=layout)
    py.plot(
        fig,
        filename=path,
        auto_open=False,
        include_plotlyjs='cdn',
        show_link=False,
        config=dict(displaylogo=False),
    )
    return path


def write_model(model, path, entropy=None, manifest_hash=None):
    d = model.to_dict()
    if entropy is not None:
        d['relative_entropy'] = entropy
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)


def read_model(path):
    return LatentClassModel.from_dict(read_json(path))


def write_assignments(assignment, path, manifest_hash=None):
    write_jsonl(assignment.to_rows(), path, manifest_hash)


def read_assignments(path):
    return ClassAssignment.from_rows(obj for _, obj in iter_jsonl(path))


def curve_frame(curve):
    return pd.DataFrame([p.to_dict() for p in curve],
                        columns=['k', 'log_likelihood', 'n_parameters', 'aic', 'bic'])


def write_curve(curve, path, manifest_hash=None):
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fh:
        if manifest_hash:
            fh.write('# manifest_hash={}\n'.format(manifest_hash))
        curve_frame(curve).to_csv(fh, index=False, float_format='%.10g')
