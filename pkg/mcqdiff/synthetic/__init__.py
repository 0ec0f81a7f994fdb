# -*- coding: utf-8 -*-
"""Seeded worlds with known ground truth."""
from . import models, utils  # noqa
