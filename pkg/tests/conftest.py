from __future__ import annotations

import pytest

from cdwb.generate import rng_from_env
from cdwb.syntax import SentenceTable, parse_source


@pytest.fixture
def rng():
    return rng_from_env(20261016)


@pytest.fixture
def program():
    """Parse a seed file into a fresh table."""

    def make(text: str, **kw):
        return parse_source(text, SentenceTable(), **kw)

    return make


TOWER = "Z := 0=0\nE := T(quote(Z))\nF := T(quote(E))\n"
PARADOX = "L := ~T(quote(L))\nK := T(quote(K))\n"
