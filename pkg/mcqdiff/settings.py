# -*- coding: utf-8 -*-
"""Application configuration."""
import copy
import dataclasses
import logging
import os
from dataclasses import dataclass, field

import mcqdiff
from mcqdiff.data.models import FilterConfig
from mcqdiff.errors import UsageError
from mcqdiff.irt.models import IrtFitConfig
from mcqdiff.lca.models import LcaConfig
from mcqdiff.llm.models import ProviderConfig
from mcqdiff.regression.models import RegressionConfig
from mcqdiff.synthetic.models import SyntheticWorldConfig
from mcqdiff.utils import canonical_json, settings, sha256_file, sha256_text

logger = logging.getLogger(__name__)

PERSONA_SOURCES = ('llm', 'manual', 'bundled')


@dataclass
class PathsConfig:
    interactions: str = 'interactions.jsonl'
    items: str = 'items.jsonl'
    out_dir: str = 'results'
    manual_personas: str = None
    handcrafted_features: str = None
    cache_dir: str = None

    def artifact(self, name):
        return os.path.join(self.out_dir, name)

    @property
    def cache(self):
        return self.cache_dir or os.path.join(self.out_dir, 'cache')


@dataclass
class ProfilingConfig:
    min_support: int = 5
    per_side: int = 5
    persona_source: str = 'llm'

    def __post_init__(self):
        if self.min_support < 1 or self.per_side < 1:
            raise ValueError("profiling.min_support and profiling.per_side must be >= 1")
        if self.persona_source not in PERSONA_SOURCES:
            raise ValueError("profiling.persona_source must be one of {}".format(', '.join(PERSONA_SOURCES)))


# Sections whose seed comes from the top-level seed
SEEDED = ('provider', 'synthetic')


@dataclass
class PipelineConfig:
    seed: int = 0
    log_level: str = 'INFO'
    paths: PathsConfig = field(default_factory=PathsConfig)
    filtering: FilterConfig = field(default_factory=FilterConfig)
    irt: IrtFitConfig = field(default_factory=IrtFitConfig)
    lca: LcaConfig = field(default_factory=LcaConfig)
    profiling: ProfilingConfig = field(default_factory=ProfilingConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    regression: RegressionConfig = field(default_factory=RegressionConfig)
    synthetic: SyntheticWorldConfig = field(default_factory=SyntheticWorldConfig)

    SECTIONS = {
        'paths': PathsConfig,
        'filtering': FilterConfig,
        'irt': IrtFitConfig,
        'lca': LcaConfig,
        'profiling': ProfilingConfig,
        'provider': ProviderConfig,
        'regression': RegressionConfig,
        'synthetic': SyntheticWorldConfig,
    }

    @classmethod
    def from_dict(cls, d):
        """Build from a nested mapping; unknown keys are warned about and ignored."""
        d = copy.deepcopy(d or {})
        seed = int(d.pop('seed', 0))
        log_level = str(d.pop('log_level', 'INFO'))
        sections = {}
        for name, section_cls in cls.SECTIONS.items():
            values = d.pop(name, None) or {}
            if not isinstance(values, dict):
                raise UsageError("Config section '{}' must be a mapping".format(name))
            known = {f.name for f in dataclasses.fields(section_cls)}
            for key in sorted(set(values) - known):
                logger.warning("Ignoring unknown config key '{}.{}'".format(name, key))
                values.pop(key)
            if name in SEEDED:
                values['seed'] = seed
            try:
                sections[name] = section_cls(**values)
            except (TypeError, ValueError) as e:
                raise UsageError("Invalid config: {}".format(e))
        for key in sorted(d):
            logger.warning("Ignoring unknown config key '{}'".format(key))
        return cls(seed=seed, log_level=log_level, **sections)

    def to_dict(self):
        d = {'seed': self.seed, 'log_level': self.log_level}
        for name in self.SECTIONS:
            section = getattr(self, name)
            values = section.to_dict() if name == 'provider' else dataclasses.asdict(section)
            if name in SEEDED:
                values.pop('seed', None)
            d[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in values.items()}
        return d

    def with_overrides(self, seed=None, out_dir=None):
        d = self.to_dict()
        if seed is not None:
            d['seed'] = seed
        if out_dir is not None:
            d['paths']['out_dir'] = out_dir
        return PipelineConfig.from_dict(d)

    def config_hash(self):
        """Hash of everything that affects results; output locations excluded."""
        d = self.to_dict()
        d.pop('log_level')
        d.pop('paths')
        return sha256_text(canonical_json(d))

    def input_hashes(self):
        hashes = {}
        for name in ('interactions', 'items', 'manual_personas', 'handcrafted_features'):
            path = getattr(self.paths, name)
            if path and os.path.isfile(path):
                hashes[name] = sha256_file(path)
        return hashes

    def manifest_hash(self):
        return sha256_text(canonical_json({
            'config': self.config_hash(),
            'inputs': self.input_hashes(),
            'seed': self.seed,
            'version': mcqdiff.version,
        }))


class Config(object):
    """Base configuration."""

    ENV = 'base'
    DEBUG = False
    LOG_LEVEL = logging.INFO
    LOAD_USER_FILES = True

    def __init__(self, paths=(), cl_config=(), overrides=None):
        conf = settings.load_defaults()
        try:
            if self.LOAD_USER_FILES:
                settings.load_userconfig(paths, cl_config, conf)
            else:
                for p in paths:
                    settings.load_config(p, conf, required=True)
                settings.parse_cl_config(cl_config, conf)
        except (IOError, ValueError) as e:
            raise UsageError(str(e))
        if overrides:
            settings.update_dict(conf, overrides)
        self.pipeline = PipelineConfig.from_dict(conf)
        if self.pipeline.log_level and not self.DEBUG:
            self.LOG_LEVEL = logging.getLevelName(self.pipeline.log_level.upper())


class ProdConfig(Config):
    """Production configuration."""

    ENV = 'prod'
    DEBUG = False


class DevConfig(Config):
    """Development configuration."""

    ENV = 'dev'
    DEBUG = True
    LOG_LEVEL = logging.DEBUG


class TestConfig(Config):
    """Test configuration. User config files are never read."""

    ENV = 'test'
    DEBUG = False
    LOG_LEVEL = logging.DEBUG
    LOAD_USER_FILES = False

    def __init__(self, paths=(), cl_config=(), overrides=None):
        super(TestConfig, self).__init__(paths, cl_config, overrides)
        self.LOG_LEVEL = logging.DEBUG
