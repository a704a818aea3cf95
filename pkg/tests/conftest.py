import os
import sys
import tempfile

import numpy as np
import pytest

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
sys.path.insert(0, SRC)
# лог тестів не змішується з робочим logs/full_log.log
os.environ.setdefault("NEHARI_LOG_DIR", tempfile.mkdtemp(prefix="nehari-logs-"))

from lattice import VertexFunction, build_torus, constant  # noqa: E402
from nonlinearity import power_nonlinearity  # noqa: E402
from variational import build_problem  # noqa: E402


def staggered_potential(torus, amplitude=1.0, shift=-2.0):
    parity = np.sum(torus.all_coords(), axis=1) % 2
    return VertexFunction(amplitude * (1.0 - 2.0 * parity) + shift, torus)


@pytest.fixture(autouse=True)
def no_telegram(monkeypatch):
    import telegram_notify
    monkeypatch.setattr(telegram_notify, "TOKEN", None)
    monkeypatch.setattr(telegram_notify, "CHAT_ID", None)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_staggered():
    def make(side=16, amplitude=1.0, shift=-2.0, p=4.0):
        torus = build_torus(1, [side], 2)
        return build_problem(torus, staggered_potential(torus, amplitude, shift),
                             power_nonlinearity(p, constant(torus, 1.0)))
    return make


@pytest.fixture
def definite():
    """V ≡ 1, f = u³ на 1D торі L=8: E⁻ = {0}, u ≡ 1 — критична точка з Φ = 2."""
    torus = build_torus(1, [8], 1)
    return build_problem(torus, constant(torus, 1.0), power_nonlinearity(4, constant(torus, 1.0)))


@pytest.fixture
def staggered(make_staggered):
    """V(x) = (−1)ˣ − 2, f = u³ на 1D торі L=16: щілина (−1, 1), dim E± = 8."""
    return make_staggered()


@pytest.fixture
def stagger():
    return staggered_potential
