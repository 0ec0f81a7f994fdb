# -*- coding: utf-8 -*-
"""Pipeline stages.

Each stage reads the artifacts of earlier stages from the output directory
and writes its own. Stages never hand objects to each other in memory, so
running them one by one gives the same files as ``run_all``.
"""
import io
import logging
import os

import numpy as np
import pandas as pd

import mcqdiff
from mcqdiff.data import utils as data_utils
from mcqdiff.data.models import DatasetPartition
from mcqdiff.errors import DataError, ProviderError
from mcqdiff.irt import utils as irt_utils
from mcqdiff.lca import utils as lca_utils
from mcqdiff.llm.client import LlmClient
from mcqdiff.profiling import utils as profiling_utils
from mcqdiff.regression import utils as regression_utils
from mcqdiff.regression.models import feature_names, numeric_mask
from mcqdiff.simulation import utils as simulation_utils
from mcqdiff.synthetic import utils as synthetic_utils
from mcqdiff.utils import read_json, require, write_json

logger = logging.getLogger(__name__)

# artifact name -> subcommand that writes it
PRODUCERS = {
    'interactions.jsonl': 'ingest',
    'items.jsonl': 'ingest',
    'partition.json': 'ingest',
    'irt_params.json': 'fit-irt',
    'lca_model.json': 'fit-lca',
    'assignments.jsonl': 'fit-lca',
    'persona_requests.json': 'profile',
    'personas.json': 'personas',
    'simulation_matrices.jsonl': 'simulate',
    'features.csv': 'features',
    'ridge_model.json': 'evaluate',
}

STAGES = ('ingest', 'fit-irt', 'fit-lca', 'profile', 'personas', 'simulate', 'features', 'evaluate')


def artifact(cfg, name):
    """Path of an upstream artifact; fails naming the stage that makes it."""
    return require(cfg.paths.artifact(name), PRODUCERS[name])


def write_manifest(cfg, stage):
    path = cfg.paths.artifact('manifest.json')
    stages = []
    if os.path.isfile(path):
        stages = read_json(path).get('stages', [])
    if stage not in stages:
        stages.append(stage)
    write_json({
        'manifest_hash': cfg.manifest_hash(),
        'config_hash': cfg.config_hash(),
        'config': cfg.to_dict(),
        'inputs': cfg.input_hashes(),
        'version': mcqdiff.version,
        'numpy_version': np.__version__,
        'seed': cfg.seed,
        'stages': stages,
    }, path)


def _load_core(cfg):
    records, bank = data_utils.ingest(artifact(cfg, 'interactions.jsonl'), artifact(cfg, 'items.jsonl'))
    part = DatasetPartition.from_dict(read_json(artifact(cfg, 'partition.json')))
    return records, bank, part


def ingest(cfg):
    """Validate the raw inputs, write canonical copies and the partition."""
    records, bank = data_utils.ingest(cfg.paths.interactions, cfg.paths.items)
    if not os.path.isdir(cfg.paths.out_dir):
        os.makedirs(cfg.paths.out_dir)
    f = cfg.filtering
    part = data_utils.partition(
        records,
        estimation_min_responses=f.estimation_min_responses,
        min_responses_per_question=f.min_responses_per_question,
        min_attempts_per_student=f.min_attempts_per_student,
        rule=f.split,
        seed=cfg.seed,
    )
    mh = cfg.manifest_hash()
    data_utils.write_records(records, cfg.paths.artifact('interactions.jsonl'), mh)
    data_utils.write_items(bank, cfg.paths.artifact('items.jsonl'), mh)
    d = part.to_dict()
    d['summary'] = data_utils.dataset_summary(records, bank).to_dict()
    d['manifest_hash'] = mh
    write_json(d, cfg.paths.artifact('partition.json'))
    return part


def fit_irt(cfg):
    records, _, part = _load_core(cfg)
    params, report = irt_utils.fit_2pl(data_utils.estimation_records(records, part), cfg.irt)
    mh = cfg.manifest_hash()
    irt_utils.write_params(params, cfg.paths.artifact('irt_params.json'), mh)
    irt_utils.write_report(report, cfg.paths.artifact('irt_report.json'), mh)
    return params, report


def fit_lca(cfg):
    records, _, part = _load_core(cfg)
    matrix, student_ids, item_ids = data_utils.response_matrix(data_utils.profiling_records(records, part))
    curve, models = lca_utils.sweep_k(matrix, cfg.lca.k_range, cfg.lca, seed=cfg.seed, item_ids=item_ids)
    k = lca_utils.select_k(curve)
    logger.info("Selected k={} by BIC".format(k))
    assignment = lca_utils.assign_classes(models[k], matrix, student_ids)
    model = models[k].permuted(assignment.order)
    entropy = lca_utils.classification_entropy(assignment.posterior)
    mh = cfg.manifest_hash()
    lca_utils.write_curve(curve, cfg.paths.artifact('model_selection.csv'), mh)
    lca_utils.plot_model_selection(curve, cfg.paths.artifact('model_selection.html'), mh)
    lca_utils.write_model(model, cfg.paths.artifact('lca_model.json'), entropy, mh)
    lca_utils.write_assignments(assignment, cfg.paths.artifact('assignments.jsonl'), mh)
    return model, assignment


def profile(cfg):
    records, bank, part = _load_core(cfg)
    assignment = lca_utils.read_assignments(artifact(cfg, 'assignments.jsonl'))
    accuracy = profiling_utils.cluster_accuracies(
        data_utils.profiling_records(records, part), assignment, cfg.profiling.min_support)
    scores = profiling_utils.deviation_scores(accuracy)
    selections = profiling_utils.select_extremes(scores, cfg.profiling.per_side)
    requests = [profiling_utils.build_persona_request(c, s.strengths, s.weaknesses, bank, accuracy)
                for c, s in sorted(selections.items())]
    mh = cfg.manifest_hash()
    profiling_utils.write_deviations(scores, cfg.paths.artifact('deviations.csv'), mh)
    profiling_utils.write_requests(requests, cfg.paths.artifact('persona_requests.json'), mh)
    return requests


def personas(cfg, provider=None):
    """Personas from the language model, a manual file or the bundled set."""
    requests = profiling_utils.read_requests(artifact(cfg, 'persona_requests.json'))
    k = lca_utils.read_model(artifact(cfg, 'lca_model.json')).k
    source = cfg.profiling.persona_source
    mh = cfg.manifest_hash()
    if source == 'llm':
        client = LlmClient(cfg.provider, provider)
        try:
            profiles = [client.synthesize_persona(r) for r in requests]
        finally:
            client.write_archive(cfg.paths.artifact('persona_raw.jsonl'), mh)
    elif source == 'manual':
        if not cfg.paths.manual_personas:
            raise DataError("profiling.persona_source is 'manual' but paths.manual_personas is not set")
        profiles = profiling_utils.load_personas(cfg.paths.manual_personas, k)
    else:
        profiles = profiling_utils.load_personas(profiling_utils.BUNDLED_PERSONAS, k)
    profiling_utils.write_personas(profiles, cfg.paths.artifact('personas.json'), mh)
    with io.open(cfg.paths.artifact('personas.md'), 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(profiling_utils.persona_report(profiles, requests, mh))
    for p in profiles:
        logger.info("Cluster {}: {}".format(p.cluster, p.name))
    return profiles


def simulate(cfg, provider=None):
    _, bank, part = _load_core(cfg)
    profiles = profiling_utils.load_personas(artifact(cfg, 'personas.json'))
    questions = [bank[q] for q in sorted(part.estimation_questions)]
    client = LlmClient(cfg.provider, provider, cache_dir=cfg.paths.cache)
    batch = client.batch_simulate(questions, profiles)
    mh = cfg.manifest_hash()
    client.write_archive(cfg.paths.artifact('simulation_raw.jsonl'), mh)
    matrices, dropped = simulation_utils.build_matrices(batch.results, [q.question_id for q in questions],
                                                        len(profiles))
    write_json({
        'failed_pairs': [f.to_dict() for f in batch.failures],
        'dropped_questions': dropped,
        'manifest_hash': mh,
    }, cfg.paths.artifact('simulation_failures.json'))
    if batch.failures:
        logger.warning("{} of {} pairs failed; see simulation_failures.json".format(
            len(batch.failures), len(questions) * len(profiles)))
    if not matrices:
        raise ProviderError("No question has a complete persona matrix ({} failed pairs)".format(
            len(batch.failures)))
    simulation_utils.write_matrices(matrices, cfg.paths.artifact('simulation_matrices.jsonl'), mh)
    return matrices, batch


def features(cfg):
    bank = data_utils.load_items(artifact(cfg, 'items.jsonl'))
    matrices = simulation_utils.read_matrices(artifact(cfg, 'simulation_matrices.jsonl'))
    k = len(profiling_utils.load_personas(artifact(cfg, 'personas.json')))
    betas = irt_utils.read_params(artifact(cfg, 'irt_params.json')).beta_by_item()
    vectors = [regression_utils.extract_features(m, bank[m.question_id], k) for m in matrices]
    frame = regression_utils.feature_table(vectors, betas)
    regression_utils.write_csv(frame, cfg.paths.artifact('features.csv'), cfg.manifest_hash())
    logger.info("Wrote {} feature rows".format(len(frame)))
    return frame


def _baseline(cfg, frame):
    path = cfg.paths.handcrafted_features
    if not path:
        return None
    hand = regression_utils.read_csv(path)
    if 'question_id' not in hand.columns:
        raise DataError("{} has no question_id column".format(path))
    hand = hand.drop(columns=[c for c in ('beta',) if c in hand.columns])
    joined = frame[['question_id', 'beta']].merge(hand, on='question_id', how='inner')
    names = [c for c in joined.columns if c not in ('question_id', 'beta')]
    if len(joined) < len(frame):
        logger.warning("Handcrafted features cover {} of {} items".format(len(joined), len(frame)))
    report, _ = regression_utils.lr_baseline(
        joined[names].values.astype(float), joined['beta'].values, cfg.regression.n_folds, cfg.seed,
        np.ones(len(names), dtype=bool), list(joined['question_id']))
    return report


def evaluate(cfg):
    frame = regression_utils.read_csv(artifact(cfg, 'features.csv'))
    k = len(profiling_utils.load_personas(artifact(cfg, 'personas.json')))
    regression_utils.check_feature_columns(frame, k)
    qids, X, names, numeric = regression_utils.frame_design(frame)
    y = frame['beta'].values.astype(float)
    r = cfg.regression
    report, predictions = regression_utils.cross_validate(
        X, y, n_folds=r.n_folds, seed=cfg.seed, grid=r.lambda_grid, numeric=numeric,
        inner_folds=r.inner_folds, question_ids=qids)
    baseline = _baseline(cfg, frame)
    model = regression_utils.fit_final_model(X, y, r, numeric, names, cfg.seed)
    mh = cfg.manifest_hash()
    regression_utils.write_report(report, cfg.paths.artifact('eval_report.json'), mh, baseline)
    regression_utils.write_csv(pd.DataFrame(predictions, columns=['question_id', 'fold', 'beta', 'beta_hat']),
                               cfg.paths.artifact('predictions.csv'), mh)
    regression_utils.plot_predictions(predictions, cfg.paths.artifact('predictions.html'), mh)
    regression_utils.write_model(model, cfg.paths.artifact('ridge_model.json'), mh)
    return report


def predict(cfg, features_path, output=None):
    """Cold-start difficulty for items that have features but no responses."""
    model = regression_utils.read_model(artifact(cfg, 'ridge_model.json'))
    frame = regression_utils.read_csv(features_path)
    names = model.feature_names or feature_names(len(model.weights) - 6)
    missing = [n for n in names if n not in frame.columns]
    if missing:
        raise DataError("{} lacks feature columns {}".format(features_path, missing))
    if list(numeric_mask(names)) != list(model.standardizer.numeric):
        raise DataError("Stored model does not match the feature layout")
    out = pd.DataFrame({'question_id': frame['question_id'],
                        'beta_hat': regression_utils.predict(model, frame[names].values.astype(float))})
    if output:
        regression_utils.write_csv(out, output, cfg.manifest_hash())
    return out


def synth(cfg):
    world = synthetic_utils.generate(cfg.synthetic)
    return synthetic_utils.write_world(world, cfg.paths.out_dir)


STAGE_FUNCTIONS = {
    'ingest': ingest,
    'fit-irt': fit_irt,
    'fit-lca': fit_lca,
    'profile': profile,
    'personas': personas,
    'simulate': simulate,
    'features': features,
    'evaluate': evaluate,
}


def run_stage(cfg, stage, provider=None):
    logger.info("Running stage '{}'".format(stage))
    fn = STAGE_FUNCTIONS[stage]
    result = fn(cfg, provider) if stage in ('personas', 'simulate') else fn(cfg)
    write_manifest(cfg, stage)
    return result


def run_all(cfg, provider=None):
    for stage in STAGES:
        run_stage(cfg, stage, provider)
    return read_json(cfg.paths.artifact('eval_report.json'))
