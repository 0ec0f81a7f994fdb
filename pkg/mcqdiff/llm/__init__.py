# -*- coding: utf-8 -*-
"""Language model providers and the persona / simulation client."""
from . import models, providers, client  # noqa
