# -*- coding: utf-8 -*-
"""Seeded generators for worlds with known ground truth."""
import logging
import os

import numpy as np
from scipy.special import expit

from mcqdiff.data.models import OPTIONS, TOPICS, InteractionRecord, ItemBank, Question
from mcqdiff.data.utils import write_items, write_records
from mcqdiff.irt.utils import quadrature
from mcqdiff.lca.models import LatentClassModel
from mcqdiff.synthetic.models import IrtWorld, LcaWorld, PersonaWorld
from mcqdiff.utils import write_json

logger = logging.getLogger(__name__)


def _ids(prefix, n):
    width = max(4, len(str(n)))
    return ['{}{:0{}d}'.format(prefix, i + 1, width) for i in range(n)]


def _bank(rng, item_ids, topics=None):
    correct = rng.integers(0, len(OPTIONS), size=len(item_ids))
    if topics is None:
        topics = [TOPICS[i % len(TOPICS)] for i in range(len(item_ids))]
    questions = []
    for qid, c, topic in zip(item_ids, correct, topics):
        questions.append(Question(
            question_id=qid,
            text='Synthetic {} question {}'.format(topic, qid),
            options={o: 'Option {}'.format(o) for o in OPTIONS},
            correct_option=OPTIONS[c],
            topic=topic,
        ))
    return ItemBank(questions)


def _observed_mask(rng, n_students, n_items, missing_rate):
    """Random missingness; every student keeps at least one response."""
    observed = rng.random((n_students, n_items)) >= missing_rate
    for u in np.flatnonzero(~observed.any(axis=1)):
        observed[u, rng.integers(n_items)] = True
    return observed


def _records(rng, correct, observed, student_ids, bank):
    """Records for the observed cells; wrong answers pick a distractor uniformly."""
    records = []
    for j, qid in enumerate(bank.ids()):
        key = bank[qid].correct_option
        distractors = [o for o in OPTIONS if o != key]
        picks = rng.integers(0, len(distractors), size=len(student_ids))
        for u, sid in enumerate(student_ids):
            if not observed[u, j]:
                continue
            ok = bool(correct[u, j])
            records.append(InteractionRecord(sid, qid, key if ok else distractors[picks[u]], ok))
    records.sort(key=lambda r: (r.student_id, r.question_id))
    return records


def generate_irt_world(config):
    rng = np.random.default_rng([config.seed, 1])
    item_ids = _ids('q', config.n_items)
    student_ids = _ids('s', config.n_students)
    alpha = rng.uniform(config.alpha_range[0], config.alpha_range[1], size=config.n_items)
    beta = rng.uniform(config.beta_range[0], config.beta_range[1], size=config.n_items)
    theta = rng.standard_normal(config.n_students)
    p = expit(alpha[None, :] * (theta[:, None] - beta[None, :]))
    correct = rng.random(p.shape) < p
    observed = _observed_mask(rng, config.n_students, config.n_items, config.missing_rate)
    bank = _bank(rng, item_ids)
    records = _records(rng, correct, observed, student_ids, bank)
    return IrtWorld(records, bank, item_ids, alpha, beta, student_ids, theta)


def _ascending(accuracy, assignments):
    """Reorder classes by ascending mean accuracy; returns (accuracy, assignments, order)."""
    order = np.argsort(accuracy.mean(axis=0), kind='stable')
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return accuracy[:, order], relabel[assignments], order


def generate_lca_world(config):
    rng = np.random.default_rng([config.seed, 2])
    k = config.k_true
    item_ids = _ids('q', config.n_items)
    student_ids = _ids('s', config.n_students)
    signs = rng.choice([-1.0, 1.0], size=(config.n_items, k))
    rho = 0.5 + signs * 0.45 * config.separation
    classes = rng.choice(k, size=config.n_students, p=config.weights)
    rho, classes, order = _ascending(rho, classes)
    weights = config.weights[order]
    correct = rng.random((config.n_students, config.n_items)) < rho[:, classes].T
    observed = _observed_mask(rng, config.n_students, config.n_items, config.missing_rate)
    matrix = np.where(observed, correct.astype(float), np.nan)
    bank = _bank(rng, item_ids)
    records = _records(rng, correct, observed, student_ids, bank)
    model = LatentClassModel(k=k, class_weights=weights, rho=rho, log_likelihood=float('nan'),
                             item_ids=item_ids)
    return LcaWorld(matrix, classes + 1, model, student_ids, item_ids, records, bank)


def topic_offsets(k, effect):
    """Class c is strong on one topic and weak on the next one round the list."""
    offsets = {}
    for c in range(k):
        row = {t: 0.0 for t in TOPICS}
        if k > 1:
            row[TOPICS[c % len(TOPICS)]] += effect
            row[TOPICS[(c + 1) % len(TOPICS)]] -= effect
        offsets[c] = row
    return offsets


def generate_persona_world(config, n_nodes=41):
    """Students in latent classes with class-shifted abilities and topic offsets.

    P(correct) = sigmoid(alpha_i * (theta_u + offset[c_u, topic_i] - beta_i)),
    theta_u ~ N(class mean, within_class_sd). The class-conditional accuracy
    reported in the truth integrates theta out by Gauss-Hermite quadrature.
    """
    rng = np.random.default_rng([config.seed, 3])
    k = config.k_true
    item_ids = _ids('q', config.n_items)
    student_ids = _ids('s', config.n_students)
    alpha = rng.uniform(config.alpha_range[0], config.alpha_range[1], size=config.n_items)
    beta = rng.uniform(config.beta_range[0], config.beta_range[1], size=config.n_items)
    topics = [TOPICS[i] for i in rng.integers(0, len(TOPICS), size=config.n_items)]
    means = np.linspace(-config.ability_spread / 2.0, config.ability_spread / 2.0, k) if k > 1 else np.zeros(1)
    offsets = topic_offsets(k, config.topic_effect)
    gamma = np.array([[offsets[c][t] for c in range(k)] for t in topics])

    classes = rng.choice(k, size=config.n_students, p=config.weights)
    theta = means[classes] + config.within_class_sd * rng.standard_normal(config.n_students)
    shift = gamma[:, classes].T
    p = expit(alpha[None, :] * (theta[:, None] + shift - beta[None, :]))
    correct = rng.random(p.shape) < p
    observed = _observed_mask(rng, config.n_students, config.n_items, config.missing_rate)

    nodes, weights = quadrature(n_nodes)
    accuracy = np.empty((config.n_items, k))
    for c in range(k):
        grid = means[c] + config.within_class_sd * nodes
        accuracy[:, c] = expit(alpha[:, None] * (grid[None, :] + gamma[:, [c]] - beta[:, None])) @ weights

    accuracy, classes, order = _ascending(accuracy, classes)
    offsets = {new + 1: offsets[old] for new, old in enumerate(order)}
    bank = _bank(rng, item_ids, topics)
    records = _records(rng, correct, observed, student_ids, bank)
    logger.info("Persona world: {} students, {} items, {} classes, {} records".format(
        config.n_students, config.n_items, k, len(records)))
    return PersonaWorld(records, bank, classes + 1, student_ids, theta, item_ids, alpha, beta,
                        accuracy, config.weights[order], offsets)


GENERATORS = {
    'irt': generate_irt_world,
    'lca': generate_lca_world,
    'persona': generate_persona_world,
}


def generate(config):
    return GENERATORS[config.kind](config)


def write_world(world, out_dir):
    """Write interactions.jsonl, items.jsonl and truth.json; returns their paths."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    paths = {
        'interactions': os.path.join(out_dir, 'interactions.jsonl'),
        'items': os.path.join(out_dir, 'items.jsonl'),
        'truth': os.path.join(out_dir, 'truth.json'),
    }
    write_records(world.records, paths['interactions'])
    write_items(world.bank, paths['items'])
    write_json(world.truth(), paths['truth'])
    return paths
