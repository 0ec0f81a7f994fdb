# -*- coding: utf-8 -*-
"""2PL item response theory ground truth."""
from . import models, utils  # noqa
