from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlczsim import memories
from dlczsim.bogoliubov import BogoliubovError
from dlczsim.memories import OnePassParams, TwoPassParams


def test_two_pass_without_reflections():
    m = memories.two_pass(TwoPassParams(2.0, 0.0))
    e = math.exp(-4)
    assert m.b1 == pytest.approx(e - 1, abs=1e-14)
    assert m.b1 == pytest.approx(-0.98168, abs=1e-5)
    assert m.b2 == pytest.approx(math.sqrt(1 - (e - 1) ** 2), abs=1e-12)
    assert m.b2 == pytest.approx(0.19051, abs=1e-5)
    assert m.c1 == m.c3 == 0 and m.c2 == 0


def test_two_pass_reflection_noise():
    m = memories.two_pass(TwoPassParams(2.0, 1e-3))
    assert m.c3 == pytest.approx(0.03, abs=1e-14)
    assert m.b1 < 0
    assert m.b1**2 + m.b2**2 - m.c3**2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(BogoliubovError, match="kappa = 2"):
        memories.two_pass(TwoPassParams(1.5, 1e-3))


def test_one_pass_unsqueezed_unit_coupling():
    m = memories.one_pass(OnePassParams(1.0, 1.0, 1.0))
    assert (m.b1, m.b2, m.c1, m.c3) == pytest.approx((1.0, 0.5, 0.0, 0.0), abs=1e-14)
    assert abs(m.c2) == pytest.approx(0.5, abs=1e-14)


@given(st.floats(1e-3, 1.0))
def test_one_pass_noise_shrinks_with_squeezing(s):
    m = memories.one_pass(OnePassParams(1.0, 1.0, s))
    assert m.b2 == pytest.approx(math.sqrt(s) / 2, rel=1e-12)
    assert abs(m.c2) == pytest.approx(math.sqrt(s) / 2, rel=1e-12)


@given(st.floats(0.0, 10.0))
def test_c1_memory_normalized(c1):
    m = memories.c1_memory(c1)
    assert m.b1**2 - m.c1**2 == pytest.approx(1.0, rel=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        TwoPassParams(kappa=0.0)
    with pytest.raises(ValueError):
        TwoPassParams(xi=1.0)
    with pytest.raises(ValueError):
        OnePassParams(s=0.0)


def test_from_config_kinds_and_errors():
    assert memories.from_config({}) == memories.ideal()
    m = memories.from_config({"memory.kind": "two_pass", "memory.kappa": "2", "memory.xi": "1e-3"})
    assert m.c3 == pytest.approx(0.03)
    assert memories.from_config({"memory.kind": "c1", "memory.c1": "0.1"}).c1 == pytest.approx(0.1)
    with pytest.raises(ValueError, match="unknown memory.kind"):
        memories.from_config({"memory.kind": "quantum_dot"})
    with pytest.raises(ValueError, match="does not accept memory.xi"):
        memories.from_config({"memory.kind": "one_pass", "memory.xi": "0.1"})


def test_to_config_round_trip():
    m = memories.one_pass(OnePassParams(1.2, 0.8, 0.5))
    back = memories.from_config(memories.to_config(m))
    for name in ("b1", "b2", "c1", "c3"):
        assert getattr(back, name) == pytest.approx(getattr(m, name), abs=1e-15)
    assert complex(back.c2) == pytest.approx(complex(m.c2), abs=1e-15)
