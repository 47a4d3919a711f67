"""Settings for dbinfer.

Attributes
----------
settings : munch.Munch
    ``cap`` the largest support enumerated exactly, ``digits`` significant digits in
    decimal renderings, ``tolerance`` for comparing computed outcomes and ``threads``
    for replication pools.

Notes
-----
The environment variable ``EXPOSURE_ENGINE_CAP`` overrides the default cap.
"""
import logging
import os

import anyconfig
import munch

import dbinfer

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2_000_000
CAP_VARIABLE = "EXPOSURE_ENGINE_CAP"


def _environment_cap():
    value = os.environ.get(CAP_VARIABLE)
    if value is None:
        return DEFAULT_CAP
    try:
        cap = int(value)
    except ValueError:
        raise dbinfer.ValidationError(f"{CAP_VARIABLE}={value!r} is not an integer.")
    if cap < 1:
        raise dbinfer.ValidationError(f"{CAP_VARIABLE} must be positive, got {cap}.")
    return cap


settings = munch.Munch(
    cap=_environment_cap(), digits=12, tolerance=0, threads=os.cpu_count() or 1
)


def enumeration_cap() -> int:
    """The cap in force, re-reading the environment first.

Examples
--------

    >>> assert enumeration_cap() >= 1
    """
    if CAP_VARIABLE in os.environ:
        return _environment_cap()
    return settings.cap


def load_config(*paths) -> munch.Munch:
    """Merge configuration files over the defaults.

Parameters
----------
*paths
    Files in any format ``anyconfig`` reads; later files win.

Returns
-------
munch.Munch
    """
    config = munch.Munch(settings)
    if paths:
        loaded = anyconfig.load(list(map(str, paths)))
        dbinfer.manager.hook.validate_document(
            document=dict(loaded), schema=dbinfer.schema.SETTINGS
        )
        config.update(munch.Munch.fromDict(dict(loaded)))
        logger.debug("loaded configuration from %s", ", ".join(map(str, paths)))
    return config
