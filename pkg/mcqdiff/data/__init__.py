# -*- coding: utf-8 -*-
"""Interaction logs, the item bank, and dataset partitioning."""
from . import models, utils  # noqa
