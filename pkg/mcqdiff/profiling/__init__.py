# -*- coding: utf-8 -*-
"""Deviation scores, strength / weakness items and personas."""
from . import models, utils  # noqa
