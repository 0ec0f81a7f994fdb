# -*- coding: utf-8 -*-
"""Persona-conditioned option probability matrices."""
from . import models, utils  # noqa
