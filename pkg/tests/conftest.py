import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from egalflow.exchange import solve_exchange, validate_instance  # noqa: E402
from egalflow.generate import corpus_document  # noqa: E402
from egalflow.io import fixture_document  # noqa: E402
from egalflow.sharing import build_profit_sharing_graph  # noqa: E402

FIXTURE_NAMES = ("E1", "E2", "E3", "F1")


@functools.lru_cache(maxsize=None)
def fixture_instance(name):
    return validate_instance(fixture_document(name))


@functools.lru_cache(maxsize=None)
def fixture_solution(name):
    return solve_exchange(fixture_instance(name))


@functools.lru_cache(maxsize=None)
def fixture_psg(name):
    return build_profit_sharing_graph(fixture_solution(name))


@functools.lru_cache(maxsize=None)
def corpus_solution(seed):
    return solve_exchange(validate_instance(corpus_document(seed), check_trades=False))


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_name(request):
    return request.param
