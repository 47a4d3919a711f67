import anyconfig
import pytest

import dbinfer

collect_ignore = ["setup.py", "conf.py", "examples"]


@pytest.fixture(autouse=True)
def doctest_names(doctest_namespace):
    doctest_namespace.update(dbinfer=dbinfer, Fraction=dbinfer.Fraction, anyconfig=anyconfig)


@pytest.fixture(autouse=True)
def fresh_settings():
    previous = dict(dbinfer.config.settings)
    yield
    dbinfer.config.settings.update(previous)
