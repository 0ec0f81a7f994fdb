# -*- coding: utf-8 -*-
"""Item features, ridge regression and cross-validated evaluation."""
from . import models, utils  # noqa
