# -*- coding: utf-8 -*-
"""Latent class analysis with a binary measurement model."""
from . import models, utils  # noqa
