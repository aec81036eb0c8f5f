import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(TESTS))
sys.path.insert(0, str(FIXTURES))

from vetra.cpg.index import FunctionIndex, build_function_index  # noqa: E402


@pytest.fixture(scope="session")
def repo_cq() -> Path:
    return FIXTURES / "repo_cq"


@pytest.fixture(scope="session")
def repo_gre() -> Path:
    return FIXTURES / "repo_gre"


@pytest.fixture(scope="session")
def cq_index(repo_cq) -> FunctionIndex:
    return build_function_index(repo_cq)


@pytest.fixture(scope="session")
def gre_index(repo_gre) -> FunctionIndex:
    return build_function_index(repo_gre)


@pytest.fixture(scope="session")
def cassettes(tmp_path_factory) -> dict[str, Path]:
    """Fresh cassettes recorded against the current prompts/renderers."""
    from build_cassettes import SCENARIOS, record_scenario
    from vetra.llm import save_cassette

    out = tmp_path_factory.mktemp("cassettes")
    paths = {}
    for name in SCENARIOS:
        records, _run = record_scenario(name)
        path = out / f"{name}.json"
        save_cassette(records, path)
        paths[name] = path
    return paths
