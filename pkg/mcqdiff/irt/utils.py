# -*- coding: utf-8 -*-
"""Marginal maximum likelihood 2PL calibration.

EM over a fixed Gauss-Hermite grid with a standard-normal ability prior.
The E-step is a students x nodes posterior; the M-step updates every item
independently with damped Fisher scoring on (log alpha, beta).
"""
import logging

import numpy as np
from numpy.polynomial import hermite
from scipy.special import expit, logsumexp

from mcqdiff.data.utils import response_matrix
from mcqdiff.errors import DataError, DegenerateError
from mcqdiff.irt.models import IrtFitConfig, IrtFitReport, IrtParameters
from mcqdiff.utils import read_json, write_json

logger = logging.getLogger(__name__)

MAX_STEP = 1.0
MAX_HALVINGS = 30


def quadrature(n_nodes):
    """Nodes and weights integrating against N(0, 1)."""
    x, w = hermite.hermgauss(n_nodes)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


def irt_probability(theta, alpha, beta):
    """sigmoid(alpha * (theta - beta)); broadcasts over arrays."""
    p = expit(np.multiply(alpha, np.subtract(theta, beta)))
    if np.ndim(p) == 0:
        return float(p)
    return p


def _log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def _posterior(observed, mask, alpha, beta, nodes, log_weights):
    z = alpha[:, None] * (nodes[None, :] - beta[:, None])
    log_lik = observed @ _log_sigmoid(z) + (mask - observed) @ _log_sigmoid(-z)
    log_joint = log_lik + log_weights[None, :]
    marginal = logsumexp(log_joint, axis=1)
    return np.exp(log_joint - marginal[:, None]), float(marginal.sum())


def _expected_objective(log_alpha, beta, r, n, nodes, penalty):
    z = np.exp(log_alpha)[:, None] * (nodes[None, :] - beta[:, None])
    ll = (r * _log_sigmoid(z) + (n - r) * _log_sigmoid(-z)).sum(axis=1)
    return ll - 0.5 * penalty * beta ** 2


def _m_step(log_alpha, beta, r, n, nodes, penalty, n_steps):
    """Per-item Fisher scoring with step halving; never lowers the objective."""
    current = _expected_objective(log_alpha, beta, r, n, nodes, penalty)
    for _ in range(n_steps):
        a = np.exp(log_alpha)
        z = a[:, None] * (nodes[None, :] - beta[:, None])
        p = expit(z)
        resid = r - n * p
        w = n * p * (1.0 - p)
        g_s = (resid * z).sum(axis=1)
        g_b = -a * resid.sum(axis=1) - penalty * beta
        i_ss = (w * z * z).sum(axis=1) + 1e-10
        i_sb = -a * (w * z).sum(axis=1)
        i_bb = a * a * w.sum(axis=1) + penalty + 1e-10
        det = i_ss * i_bb - i_sb * i_sb
        det = np.where(det > 1e-12, det, np.nan)
        d_s = (i_bb * g_s - i_sb * g_b) / det
        d_b = (i_ss * g_b - i_sb * g_s) / det
        # Singular information: fall back to a scaled gradient step
        bad = ~np.isfinite(d_s) | ~np.isfinite(d_b)
        d_s[bad] = g_s[bad] / i_ss[bad]
        d_b[bad] = g_b[bad] / i_bb[bad]
        d_s = np.clip(d_s, -MAX_STEP, MAX_STEP)
        d_b = np.clip(d_b, -MAX_STEP, MAX_STEP)

        t = np.ones_like(beta)
        pending = np.ones(len(beta), dtype=bool)
        new_s, new_b = log_alpha.copy(), beta.copy()
        for _ in range(MAX_HALVINGS):
            cand_s = log_alpha + t * d_s
            cand_b = beta + t * d_b
            cand = _expected_objective(cand_s, cand_b, r, n, nodes, penalty)
            accept = pending & (cand >= current)
            new_s[accept] = cand_s[accept]
            new_b[accept] = cand_b[accept]
            current = np.where(accept, cand, current)
            pending &= ~accept
            if not pending.any():
                break
            t = np.where(pending, 0.5 * t, t)
        if np.allclose(new_s, log_alpha, atol=1e-12) and np.allclose(new_b, beta, atol=1e-12):
            break
        log_alpha, beta = new_s, new_b
    return log_alpha, beta


def _design(records):
    if not records:
        raise DataError("Cannot fit a 2PL model without records")
    matrix, student_ids, item_ids = response_matrix(records)
    mask = (~np.isnan(matrix)).astype(float)
    observed = np.nan_to_num(matrix, nan=0.0)
    return observed, mask, student_ids, item_ids


def fit_2pl(records, config=None):
    """Fit alpha/beta by MML-EM and return anchored parameters plus a report.

    Items answered all-correct or all-incorrect get a ridge penalty on beta
    toward 0 (``config.degenerate_penalty``) instead of being dropped. The
    report history holds the penalized marginal log-likelihood per
    iteration, which equals the plain log-likelihood when no item is
    degenerate.
    """
    config = config or IrtFitConfig()
    observed, mask, student_ids, item_ids = _design(records)
    nodes, weights = quadrature(config.n_nodes)
    log_weights = np.log(weights)

    n_obs = mask.sum(axis=0)
    n_correct = observed.sum(axis=0)
    degenerate = (n_correct == 0) | (n_correct == n_obs)
    penalty = np.where(degenerate, config.degenerate_penalty, 0.0)
    degenerate_ids = [q for q, d in zip(item_ids, degenerate) if d]
    if degenerate_ids:
        logger.warning("{} degenerate items (all correct or all incorrect), beta penalized toward 0".format(
            len(degenerate_ids)))

    p0 = (n_correct + 0.5) / (n_obs + 1.0)
    beta = -np.log(p0 / (1.0 - p0))
    log_alpha = np.zeros(len(item_ids))

    history = []
    converged = False
    n_iterations = 0
    while True:
        post, log_lik = _posterior(observed, mask, np.exp(log_alpha), beta, nodes, log_weights)
        objective = log_lik - 0.5 * float((penalty * beta ** 2).sum())
        history.append(objective)
        if len(history) > 1 and abs(history[-1] - history[-2]) < config.tolerance:
            converged = True
            break
        if n_iterations >= config.max_iterations:
            break
        r = observed.T @ post
        n = mask.T @ post
        log_alpha, beta = _m_step(log_alpha, beta, r, n, nodes, penalty, config.newton_steps)
        n_iterations += 1

    if not converged:
        logger.warning("2PL EM stopped after {} iterations without meeting tolerance {}".format(
            n_iterations, config.tolerance))
    logger.info("2PL fit on {} students x {} items: logL={:.4f}, {} iterations".format(
        len(student_ids), len(item_ids), log_lik, n_iterations))

    alpha = np.exp(log_alpha)
    eap = post @ nodes
    eap_sd = np.sqrt(np.maximum(post @ nodes ** 2 - eap ** 2, 0.0))
    expected = ((mask.T @ post) * irt_probability(nodes[None, :], alpha[:, None], beta[:, None])).sum(axis=1)
    item_fit = [{'question_id': qid, 'n': int(n_i), 'observed_p': float(c / n_i),
                 'expected_p': float(e / n_i)}
                for qid, n_i, c, e in zip(item_ids, n_obs, n_correct, expected)]

    params = anchor_scale(IrtParameters(item_ids, alpha, beta, student_ids, eap, eap_sd))
    report = IrtFitReport(
        log_likelihood=log_lik,
        n_iterations=n_iterations,
        converged=converged,
        tolerance_used=config.tolerance,
        history=history,
        degenerate_items=degenerate_ids,
        item_fit=item_fit,
    )
    return params, report


def anchor_scale(params):
    """Standardize theta to mean 0, sd 1 and move alpha/beta to match.

    alpha * (theta - beta) is unchanged, so every predicted probability is.
    """
    if len(params.theta) == 0:
        raise DegenerateError("Cannot anchor the scale without abilities")
    m = float(np.mean(params.theta))
    s = float(np.std(params.theta))
    if not np.isfinite(s) or s <= 1e-12:
        raise DegenerateError("Ability variance is zero, the scale cannot be anchored")
    return IrtParameters(
        item_ids=list(params.item_ids),
        alpha=params.alpha * s,
        beta=(params.beta - m) / s,
        student_ids=list(params.student_ids),
        theta=(params.theta - m) / s,
        theta_sd=None if params.theta_sd is None else params.theta_sd / s,
    )


def estimate_abilities(records, params, n_nodes=41):
    """EAP ability and posterior sd for the students in ``records``.

    Records on items missing from ``params`` are ignored. The prior is
    N(0, 1) on the anchored scale.
    """
    known = set(params.item_ids)
    records = [r for r in records if r.question_id in known]
    if not records:
        raise DataError("No records on calibrated items")
    matrix, student_ids, _ = response_matrix(records, questions=list(params.item_ids))
    mask = (~np.isnan(matrix)).astype(float)
    observed = np.nan_to_num(matrix, nan=0.0)
    nodes, weights = quadrature(n_nodes)
    post, _ = _posterior(observed, mask, params.alpha, params.beta, nodes, np.log(weights))
    eap = post @ nodes
    sd = np.sqrt(np.maximum(post @ nodes ** 2 - eap ** 2, 0.0))
    return student_ids, eap, sd


def write_params(params, path, manifest_hash=None):
    d = params.to_dict()
    d['convention'] = 'P(correct) = sigmoid(alpha * (theta - beta))'
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)


def read_params(path):
    return IrtParameters.from_dict(read_json(path))


def write_report(report, path, manifest_hash=None):
    d = report.to_dict()
    if manifest_hash:
        d['manifest_hash'] = manifest_hash
    write_json(d, path)
