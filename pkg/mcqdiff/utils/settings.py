#!/usr/bin/env python
""" mcqdiff config module. """

import collections.abc
import copy
import io
import logging
import os
import subprocess

import yaml

import mcqdiff

logger = logging.getLogger(__name__)

# Get the mcqdiff version
version = mcqdiff.version
script_path = os.path.dirname(os.path.realpath(__file__))
git_hash = None
git_hash_short = None
try:
    git_hash = subprocess.check_output(['git', 'rev-parse', 'HEAD'],
                                       cwd=script_path,
                                       stderr=subprocess.STDOUT,
                                       universal_newlines=True).strip()
    git_hash_short = git_hash[:7]
    version = '{} ({})'.format(version, git_hash_short)
except (OSError, subprocess.CalledProcessError):
    pass

# Constants
MCQDIFF_DIR = os.path.dirname(os.path.realpath(mcqdiff.__file__))
DEFAULTS_PATH = os.path.join(MCQDIFF_DIR, 'utils', 'config_defaults.yaml')
ENV_CONFIG_PATH = 'MCQDIFF_CONFIG_PATH'


def load_defaults():
    """ Parse the packaged defaults. Never edited at runtime. """
    with io.open(DEFAULTS_PATH, encoding='utf-8') as f:
        return yaml.safe_load(f)


##### Functions to load user config files. These are called by the main mcqdiff script.
# Note that config files are loaded in a specific order and values can overwrite each other.
def load_userconfig(paths=(), cl_config=(), conf=None):
    """ Overwrite config defaults with user config files """
    if conf is None:
        conf = load_defaults()

    # Load and parse installation config file if we find it
    load_config(os.path.join(os.path.dirname(MCQDIFF_DIR), 'mcqdiff_config.yaml'), conf)

    # Load and parse a user config file if we find it
    load_config(os.path.expanduser('~/.mcqdiff_config.yaml'), conf)

    # Load and parse a config file path set in an ENV variable if we find it
    if os.environ.get(ENV_CONFIG_PATH) is not None:
        load_config(os.environ.get(ENV_CONFIG_PATH), conf, required=True)

    # Load and parse a config file in this working directory if we find it
    load_config('mcqdiff_config.yaml', conf)

    # Custom command line config
    for p in paths:
        load_config(p, conf, required=True)
    parse_cl_config(cl_config, conf)
    return conf


def load_config(yaml_config, conf, required=False):
    """ Load and parse a config file if we find it """
    if os.path.isfile(yaml_config):
        try:
            with io.open(yaml_config, encoding='utf-8') as f:
                new_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            logger.error("Error parsing config YAML: {}".format(e))
            raise ValueError("Could not parse config file {}".format(yaml_config))
        if not isinstance(new_config, dict):
            raise ValueError("Config file {} must hold a mapping".format(yaml_config))
        logger.debug("Loading config settings from: {}".format(yaml_config))
        add_config(new_config, conf)
    elif required:
        raise IOError("Config file not found: {}".format(yaml_config))
    else:
        logger.debug("No mcqdiff config found: {}".format(yaml_config))
    return conf


def parse_cl_config(cl_config, conf):
    for clc_str in cl_config:
        try:
            parsed_clc = yaml.safe_load(clc_str)
            # something:var fails as it needs a space. Fix this (a common mistake)
            if isinstance(parsed_clc, str) and ':' in clc_str:
                clc_str = ': '.join(clc_str.split(':', 1))
                parsed_clc = yaml.safe_load(clc_str)
        except yaml.YAMLError as e:
            logger.error("Could not parse command line config: {}\n{}".format(clc_str, e))
            raise ValueError("Could not parse command line config: {}".format(clc_str))
        if not isinstance(parsed_clc, dict):
            logger.error("Could not parse command line config: {}".format(clc_str))
            raise ValueError("Could not parse command line config: {}".format(clc_str))
        logger.debug("Found command line config: {}".format(parsed_clc))
        add_config(parsed_clc, conf)
    return conf


def add_config(new_conf, conf):
    """ Add to the config dict, recursing into sections """
    for c, v in list(new_conf.items()):
        logger.debug("New config '{}': {}".format(c, mask_secrets(c, v)))
        update_dict(conf, {c: v})
    return conf


def update_dict(d, u):
    """ Recursively updates nested dict d from nested dict u
    """
    for key, val in list(u.items()):
        if isinstance(val, collections.abc.Mapping):
            d[key] = update_dict(d.get(key) or {}, val)
        else:
            d[key] = copy.deepcopy(val)
    return d


def mask_secrets(key, value):
    if isinstance(value, collections.abc.Mapping):
        return {k: mask_secrets(k, v) for k, v in value.items()}
    if 'key' in str(key).lower() and not str(key).endswith('_env') and value:
        return '***'
    return value
