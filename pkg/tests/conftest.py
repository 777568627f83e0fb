"""
BFMLIFT — shared test fixtures
"""
from fractions import Fraction
from pathlib import Path

import pytest

from bfmlift.core.config import get_settings
from bfmlift.core.observability import configure_logging
from bfmlift.services.laurent import MonomialMap
from bfmlift.services.mirror import ToricInput, build_mirror

JOBS = Path(__file__).resolve().parent.parent / "jobs"


@pytest.fixture(autouse=True)
def _quiet_logs():
    configure_logging("WARNING", json=True)
    yield


@pytest.fixture
def jobs_dir() -> Path:
    return JOBS


@pytest.fixture
def fresh_settings(monkeypatch):
    """Settings re-read from a clean environment."""
    for key in ("BFMLIFT_BUDGET", "BFMLIFT_SEED", "BFMLIFT_NOVIKOV", "BFMLIFT_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield get_settings
    get_settings.cache_clear()


def p1_toric(action: int = 1, areas=(0, 0)) -> ToricInput:
    return ToricInput(
        n=1,
        rays=((1,), (-1,)),
        areas=tuple(Fraction(a) for a in areas),
        action=MonomialMap(((action,),)),
    )


def p2_toric(action=((-2, -1), (1, -1))) -> ToricInput:
    return ToricInput(
        n=2,
        rays=((1, 0), (0, 1), (-1, -1)),
        areas=(Fraction(0),) * 3,
        action=MonomialMap(action),
    )


@pytest.fixture
def p1_pgl2():
    return build_mirror(p1_toric(1))


@pytest.fixture
def p1_sl2():
    return build_mirror(p1_toric(2))


@pytest.fixture
def p2_su3():
    return build_mirror(p2_toric())


@pytest.fixture
def p2_psu3():
    """P^2 over PSU3: w1 = w2 = zeta goes to (zeta, zeta^2), a nontrivial central element."""
    return build_mirror(p2_toric(((1, 0), (0, -1))))


@pytest.fixture
def make_p1():
    """Factory for P^1 toric inputs with a chosen action entry and areas."""
    return p1_toric
