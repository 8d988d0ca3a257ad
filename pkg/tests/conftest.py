import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _results import LINES  # noqa: E402
from oracles import NaiveGroup  # noqa: E402

from jordanlab.dsl import catalog_by_label, default_catalog  # noqa: E402


@pytest.fixture(scope="session")
def catalog():
    return catalog_by_label()


@pytest.fixture(scope="session")
def entries():
    return default_catalog()


@lru_cache(maxsize=None)
def naive_for(label):
    G = catalog_by_label()[label].group
    return NaiveGroup([g.images for g in G.generators], G.degree)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
