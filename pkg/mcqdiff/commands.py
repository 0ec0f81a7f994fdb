# -*- coding: utf-8 -*-
"""Click commands."""
import logging
import os

import click

from mcqdiff import pipeline
from mcqdiff.utils import run_lock

HERE = os.path.abspath(os.path.dirname(__file__))
PROJECT_ROOT = os.path.join(HERE, os.pardir)
TEST_PATH = os.path.join(PROJECT_ROOT, 'tests')


COMMON_OPTIONS = [
    click.option('-c', '--config', 'config_files', multiple=True, type=click.Path(exists=True, dir_okay=False),
                 help='YAML config file; may be given more than once, later files win.'),
    click.option('--cl-config', 'cl_config', multiple=True,
                 help="Config as YAML on the command line, e.g. \"lca: {k_max: 6}\"."),
    click.option('-o', '--out-dir', default=None, help='Output directory (default: paths.out_dir).'),
    click.option('-s', '--seed', default=None, type=int, help='Global seed (default: seed).'),
    click.option('-v', '--verbose', is_flag=True, help='Debug logging.'),
    click.option('-q', '--quiet', is_flag=True, help='Only warnings and errors.'),
]


def common_options(f):
    """--config, --cl-config, --out-dir, --seed and verbosity for every stage."""
    for option in reversed(COMMON_OPTIONS):
        f = option(f)
    return f


def load_config(config_files=(), cl_config=(), out_dir=None, seed=None, verbose=False, quiet=False,
                overrides=None):
    """Layered config for one run, with logging set up to match."""
    from mcqdiff.app import init_log
    config_class = click.get_current_context().obj['config_class']
    config = config_class(paths=config_files, cl_config=cl_config, overrides=overrides)
    level = config.LOG_LEVEL
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    init_log(level)
    return config.pipeline.with_overrides(seed=seed, out_dir=out_dir)


def _run(stage, **kwargs):
    cfg = load_config(**kwargs)
    with run_lock(cfg.paths.out_dir):
        return pipeline.run_stage(cfg, stage)


@click.command()
@common_options
@click.option('--interactions', default=None, type=click.Path(), help='Interaction log (JSONL).')
@click.option('--items', default=None, type=click.Path(), help='Item bank (JSONL).')
def ingest(interactions, items, **kwargs):
    """ Validate inputs and split profiling / estimation questions """
    paths = {k: v for k, v in (('interactions', interactions), ('items', items)) if v}
    part = _run('ingest', overrides={'paths': paths} if paths else None, **kwargs)
    click.echo('{} profiling questions, {} profiling students, {} estimation questions'.format(
        len(part.profiling_questions), len(part.profiling_students), len(part.estimation_questions)))


@click.command('fit-irt')
@common_options
def fit_irt(**kwargs):
    """ Calibrate 2PL difficulty on the estimation set """
    params, report = _run('fit-irt', **kwargs)
    click.echo('{} items calibrated, logL {:.3f}, converged: {}'.format(
        len(params.item_ids), report.log_likelihood, report.converged))


@click.command('fit-lca')
@common_options
def fit_lca(**kwargs):
    """ Find learner classes on the profiling set """
    model, assignment = _run('fit-lca', **kwargs)
    click.echo('Selected {} classes for {} students'.format(model.k, len(assignment.student_ids)))


@click.command()
@common_options
def profile(**kwargs):
    """ Deviation scores and persona requests per class """
    requests = _run('profile', **kwargs)
    click.echo('Wrote {} persona requests'.format(len(requests)))


@click.command()
@common_options
def personas(**kwargs):
    """ Synthesize or load one persona per class """
    for p in _run('personas', **kwargs):
        click.echo('Cluster {}: {}'.format(p.cluster, p.name))


@click.command()
@common_options
def simulate(**kwargs):
    """ Ask every persona about every estimation question """
    matrices, batch = _run('simulate', **kwargs)
    click.echo('{} complete matrices; {} provider calls, {} cache hits, {} failed pairs'.format(
        len(matrices), batch.n_provider_calls, batch.n_cache_hits, len(batch.failures)))


@click.command()
@common_options
def features(**kwargs):
    """ Build item features from the simulation matrices """
    frame = _run('features', **kwargs)
    click.echo('{} items with features'.format(len(frame)))


@click.command()
@common_options
def evaluate(**kwargs):
    """ Cross-validate ridge regression on IRT difficulty """
    report = _run('evaluate', **kwargs)
    click.echo('MSE {:.3f} +/- {:.3f}, R2 {:.3f} +/- {:.3f}'.format(
        report.mse_mean, report.mse_sd, report.r2_mean, report.r2_sd))


@click.command('all')
@common_options
@click.option('--interactions', default=None, type=click.Path(), help='Interaction log (JSONL).')
@click.option('--items', default=None, type=click.Path(), help='Item bank (JSONL).')
def run_all(interactions, items, **kwargs):
    """ Run every stage from ingest to evaluate """
    paths = {k: v for k, v in (('interactions', interactions), ('items', items)) if v}
    cfg = load_config(overrides={'paths': paths} if paths else None, **kwargs)
    with run_lock(cfg.paths.out_dir):
        report = pipeline.run_all(cfg)
    agg = report['aggregate']
    click.echo('MSE {:.3f} +/- {:.3f}, R2 {:.3f} +/- {:.3f}'.format(
        agg['mse_mean'], agg['mse_sd'], agg['r2_mean'], agg['r2_sd']))


@click.command()
@common_options
@click.option('--kind', type=click.Choice(['irt', 'lca', 'persona']), default=None,
              help='World type (default: synthetic.kind).')
@click.option('--n-students', type=int, default=None)
@click.option('--n-items', type=int, default=None)
def synth(kind, n_students, n_items, **kwargs):
    """ Generate a synthetic world with known ground truth """
    synthetic = {k: v for k, v in (('kind', kind), ('n_students', n_students), ('n_items', n_items))
                 if v is not None}
    cfg = load_config(overrides={'synthetic': synthetic} if synthetic else None, **kwargs)
    with run_lock(cfg.paths.out_dir):
        paths = pipeline.synth(cfg)
    for name, path in sorted(paths.items()):
        click.echo('{}: {}'.format(name, path))


@click.command()
@common_options
@click.argument('features_csv', type=click.Path(exists=True, dir_okay=False))
@click.option('--output', default=None, type=click.Path(), help='Write predictions to this CSV.')
def predict(features_csv, output, **kwargs):
    """ Predict difficulty for new items from their features """
    cfg = load_config(**kwargs)
    out = pipeline.predict(cfg, features_csv, output)
    if not output:
        click.echo(out.to_csv(index=False), nl=False)


@click.command()
def test():
    """ Run the tests """
    import pytest
    rv = pytest.main([TEST_PATH, '--verbose'])
    exit(rv)


COMMANDS = [ingest, fit_irt, fit_lca, profile, personas, simulate, features, evaluate, run_all, synth, predict,
            test]
