# -*- coding: utf-8 -*-
"""Defines fixtures available to all tests."""
import io
import json
import logging
import os

import pytest

from mcqdiff.llm.models import ProviderConfig
from mcqdiff.synthetic.models import SyntheticWorldConfig
from mcqdiff.synthetic.utils import generate_persona_world, write_world

from .factories import PersonaFactory, QuestionFactory


@pytest.fixture(autouse=True)
def reset_logging():
    """CLI runs attach a handler to captured streams; drop it after each test."""
    yield
    logger = logging.getLogger('mcqdiff')
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def out_dir(tmpdir):
    """An empty output directory."""
    return str(tmpdir.mkdir('results'))


@pytest.fixture
def write_jsonl(tmpdir):
    """Write rows to a JSONL file under tmpdir and return its path."""
    def _write(name, rows):
        path = str(tmpdir.join(name))
        with io.open(path, 'w', encoding='utf-8') as fh:
            for row in rows:
                fh.write(json.dumps(row) + '\n')
        return path
    return _write


@pytest.fixture
def provider_config():
    """Mock provider without waits between retries."""
    return ProviderConfig(provider='mock', backoff=0.0, rate_limit=0, concurrency=2, seed=7)


@pytest.fixture
def questions():
    """Ten questions spread over the three topics."""
    return QuestionFactory.create_batch(10)


@pytest.fixture
def personas():
    """Five manual personas for clusters 1-5."""
    return [PersonaFactory(cluster=c) for c in range(1, 6)]


PILOT_RECORD = os.path.join(os.path.dirname(__file__), 'data', 'persona_world_pilot.json')


@pytest.fixture(scope='session')
def pilot_record():
    """World, pipeline settings and R2 threshold of the recorded end-to-end run."""
    with io.open(PILOT_RECORD, encoding='utf-8') as fh:
        return json.load(fh)


@pytest.fixture(scope='session')
def world_config(pilot_record):
    return SyntheticWorldConfig(**pilot_record['world'])


@pytest.fixture(scope='session')
def persona_world(world_config):
    """A three-class persona world with known class accuracies."""
    return generate_persona_world(world_config)


@pytest.fixture(scope='session')
def world_files(tmpdir_factory, persona_world):
    """The persona world written as interactions.jsonl, items.jsonl and truth.json."""
    return write_world(persona_world, str(tmpdir_factory.mktemp('world')))


@pytest.fixture(scope='session')
def pipeline_config_file(tmpdir_factory, world_files, pilot_record):
    """Config for a fast end-to-end run on the persona world."""
    run = pilot_record['pipeline']
    path = str(tmpdir_factory.mktemp('config').join('mcqdiff_config.yaml'))
    with io.open(path, 'w', encoding='utf-8') as fh:
        fh.write('\n'.join([
            'seed: {}'.format(run['seed']),
            'paths:',
            '    interactions: {}'.format(world_files['interactions']),
            '    items: {}'.format(world_files['items']),
            'filtering:',
            '    split: {}'.format(run['split']),
            'lca:',
            '    k_min: {}'.format(run['k']),
            '    k_max: {}'.format(run['k']),
            '    n_restarts: {}'.format(run['n_restarts']),
            'provider:',
            '    provider: mock',
            '    mock_mode: {}'.format(run['mock_mode']),
            '    truth_path: {}'.format(world_files['truth']),
            '    rate_limit: 0',
            '    backoff: 0',
            '',
        ]))
    assert os.path.isfile(path)
    return path
