#!/usr/bin/env python
# coding: utf-8

"""design based causal inference under arbitrary interference

Notes
-----
Exposure probabilities, estimands and assumption verdicts are computed exactly, as rationals,
whenever the design support can be enumerated; larger designs use closed forms or sampling and
say so in their provenance.

Attributes
----------
manager : pluggy.PluginManager
    Hooks for documents, mappings, outcome rules, the corpus and sweep populations.
settings : munch.Munch
    The enumeration cap, rendering digits, tolerance and threads.
"""
__version__ = "0.1.0"

from .spec import *  # isort:skip
from .base import *  # isort:skip
from . import config, schema  # isort:skip
from . import design, exposure, outcomes  # isort:skip
from . import corpus, generators  # isort:skip
from . import estimands, assumptions, estimation  # isort:skip
from . import montecarlo, reports, cli  # isort:skip

settings = config.settings
