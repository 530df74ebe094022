from pathlib import Path
import sys

import pytest

from postergen.config import RunConfig
from postergen.corpus import parse_paper
from postergen.pipeline import ModelBundle, train
from postergen.synthetic import generate_corpus

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def fixture_paper():
    return parse_paper((DATA / "three_section.paper.xml").read_bytes())


@pytest.fixture(scope="session")
def fixture_bundle():
    return ModelBundle.load(DATA / "fixture_model.json")


@pytest.fixture(scope="session")
def noiseless_corpus():
    return generate_corpus(20, seed=11)


@pytest.fixture(scope="session")
def noiseless_bundle(noiseless_corpus):
    bundle, _ = train(noiseless_corpus, RunConfig())
    return bundle


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
