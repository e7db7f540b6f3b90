from __future__ import annotations

from pathlib import Path

import pytest

from wiser.codec import read_corpus
from wiser.frames import load_catalog
from wiser.rules import REIFIED_OVERRIDES, compile_rules, map_catalog

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def figure_pair():
    numbered, thematic = read_corpus(DATA / "figure_pair.txt")
    return numbered, thematic


@pytest.fixture(scope="session")
def fixture_catalog():
    return load_catalog(DATA / "fixture_catalog.tsv")


@pytest.fixture(scope="session")
def builtin_rules():
    return compile_rules()


@pytest.fixture(scope="session")
def fixture_mapping(fixture_catalog, builtin_rules):
    table, _ = map_catalog(fixture_catalog, builtin_rules, REIFIED_OVERRIDES)
    return table


@pytest.fixture(scope="session")
def corpus50():
    return read_corpus(DATA / "corpus50.txt")


@pytest.fixture(scope="session")
def appendix_corpus():
    return read_corpus(DATA / "appendix_corpus.txt")
