import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.analysis import (
    BucklingQuery,
    buckling_number,
    critical_spacing,
    deflection_for_force,
    force_for_buckling_number,
    force_for_deflection,
)
from src.errors import InvalidArgumentError
from src.filament import MaterialParams

FIBER = MaterialParams()
E, I = FIBER.youngs_modulus, FIBER.second_moment


def test_reference_deflection_force():
    # 13.3 mm over a 100 mm span of the default fiber
    assert force_for_deflection(13.3e-3, E, I, 0.1) == pytest.approx(0.0501398, rel=1e-5)


def test_buckling_number_reference_value():
    b = buckling_number(BucklingQuery(0.05, 0.1, E, I))
    assert b == pytest.approx(0.025 * 0.01 / (math.pi**2 * E * I))


def test_compressive_share_is_half_the_input():
    q = BucklingQuery(0.2, 0.1, E, I)
    assert q.compressive_load == 0.1
    assert q.euler_load == pytest.approx(math.pi**2 * FIBER.bending_stiffness / 0.01)


@given(force=st.floats(1e-4, 10.0), spacing=st.floats(0.01, 0.5), scale=st.floats(0.1, 10.0))
def test_buckling_number_scaling(force, spacing, scale):
    base = buckling_number(BucklingQuery(force, spacing, E, I))
    assert buckling_number(BucklingQuery(force * scale, spacing, E, I)) == pytest.approx(base * scale, rel=1e-12)
    assert buckling_number(BucklingQuery(force, spacing * scale, E, I)) == pytest.approx(base * scale**2, rel=1e-12)


@given(b=st.floats(0.0, 5.0), spacing=st.floats(0.01, 0.5))
def test_force_for_buckling_number_inverts(b, spacing):
    force = force_for_buckling_number(b, spacing, E, I)
    assert buckling_number(BucklingQuery(force, spacing, E, I)) == pytest.approx(b, rel=1e-12, abs=1e-15)


@given(force=st.floats(1e-4, 10.0))
def test_critical_spacing_gives_unit_buckling_number(force):
    s = critical_spacing(force, E, I)
    assert buckling_number(BucklingQuery(force, s, E, I)) == pytest.approx(1.0, rel=1e-12)


@given(delta=st.floats(0.0, 0.05), spacing=st.floats(0.01, 0.5))
def test_deflection_round_trip(delta, spacing):
    force = force_for_deflection(delta, E, I, spacing)
    assert deflection_for_force(force, E, I, spacing) == pytest.approx(delta, rel=1e-12, abs=1e-18)


@pytest.mark.parametrize(
    "call",
    [
        lambda: force_for_deflection(-1e-3, E, I, 0.1),
        lambda: force_for_deflection(1e-3, E, I, 0.0),
        lambda: BucklingQuery(-0.1, 0.1, E, I),
        lambda: BucklingQuery(0.1, 0.1, 0.0, I),
        lambda: force_for_buckling_number(-1.0, 0.1, E, I),
        lambda: critical_spacing(0.0, E, I),
    ],
)
def test_invalid_inputs(call):
    with pytest.raises(InvalidArgumentError):
        call()
