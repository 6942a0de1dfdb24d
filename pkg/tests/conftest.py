import json
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(TESTS))


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_dir():
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def definitions_path():
    return FIXTURES / "definitions.jsonl"


@pytest.fixture(scope="session")
def metric_oracle():
    with open(FIXTURES / "metrics" / "metric_oracle.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def expected_rho():
    with open(FIXTURES / "expected_rho.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def word_corpus(corpus_dir):
    from defsense.corpus import load_lemma
    return load_lemma(corpus_dir, "word")


@pytest.fixture(scope="session")
def record_corpus(corpus_dir):
    from defsense.corpus import load_lemma
    return load_lemma(corpus_dir, "record")


@pytest.fixture(scope="session")
def definitions(definitions_path):
    from defsense.defstore import load_definitions
    return load_definitions(definitions_path)
