import pytest

from analyticContext import build_context
from processModel import ProcessSpec


@pytest.fixture(scope="session")
def spec_pos():
    return ProcessSpec(d=0.25)


@pytest.fixture(scope="session")
def spec_neg():
    return ProcessSpec(d=-0.25)


@pytest.fixture(scope="session")
def ctx_pos(spec_pos):
    return build_context(spec_pos, use_cache=False)


@pytest.fixture(scope="session")
def ctx_neg(spec_neg):
    return build_context(spec_neg, use_cache=False)


@pytest.fixture
def contexts(ctx_pos, ctx_neg):
    return {0.25: ctx_pos, -0.25: ctx_neg}
