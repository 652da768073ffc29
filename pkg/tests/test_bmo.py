from __future__ import annotations

import numpy as np
import pytest

from qfock import bmo
from qfock import slice_fn as sf
from qfock.quat_core import I_UNIT, J_UNIT, Quaternion, qabs

RE = sf.from_intrinsic(lambda z: z.real + 0j)
SMALL = bmo.Window(extent=3.0, n=7)

# (1/(pi r^2)) int_{|w|<r} |Re w| dm for r = 0.7, from scipy dblquad
RE_DISK_MOMENT_07 = 0.2970892271048707


def test_bmo_norm_examples():
    assert bmo.bmo_norm(sf.constant(Quaternion(1, 2, 0, -1)), 1.0, 1.0, SMALL).value < 1e-12
    rep = bmo.bmo_norm(RE, 1.0, 0.7, SMALL)
    assert rep.value == pytest.approx(RE_DISK_MOMENT_07, rel=2e-3)
    assert rep.value == pytest.approx(4 * 0.7 / (3 * np.pi), rel=2e-3)
    # the same at every centre
    vals = bmo.mean_oscillation(RE, 1.0, 0.7, SMALL.centers(), J_UNIT)
    assert np.ptp(vals) < 1e-12
    assert rep.kind == "BMOpr" and rep.finite
    bounded = sf.from_intrinsic(lambda z: np.sin(3 * z.real) * np.cos(z.imag) + 0j, Quaternion(0, 1, 0, 0))
    assert bmo.bmo_norm(bounded, 2.0, 1.0, SMALL).value <= 2 * 1.0


def test_bmo_invariant_under_constants():
    for f in bmo.bmo1_bank().values():
        c = Quaternion(0.7, -1, 2, 0.5)
        a = bmo.bmo_norm(f, 1.0, 1.0, SMALL).value
        b = bmo.bmo_norm(f + sf.constant(c), 1.0, 1.0, SMALL).value
        assert abs(a - b) <= 1e-10


def test_best_constant_within_factor_two():
    f = sf.from_intrinsic(lambda z: np.tanh(2 * z.real) + 1j * np.sin(z.imag))
    for z in (0.0, 0.5 + 1j, -1 + 0.3j):
        for I in (I_UNIT, J_UNIT):
            mo = bmo.mean_oscillation(f, 1.0, 1.0, z, I)[0]
            best = bmo.best_constant_oscillation(f, 1.0, 1.0, z, I)
            assert best <= mo + 1e-12
            assert mo <= 2 * best + 1e-9


def test_averaging_keeps_slice_structure():
    f = sf.from_intrinsic(lambda z: np.exp(-np.abs(z - 1) ** 2) * z, Quaternion(0, 0, 1, 1))
    avg = bmo.averaging_function(f, 0.8)
    assert sf.parity_defect(avg) < 1e-12
    # averaging reproduces harmonic functions
    assert np.abs(bmo.averaging_function(RE, 0.8).on_slice(np.array([0.3 + 2j]), I_UNIT.arr)[0, 0] - 0.3) < 1e-12


def test_bo_examples():
    assert bmo.bo_seminorm(sf.constant(3.0), 1.0, SMALL).value == 0.0
    for r in (0.5, 1.0, 2.0):
        assert bmo.bo_seminorm(RE, r, SMALL).value == pytest.approx(r, rel=1e-12)
    rep = bmo.bo_seminorm(bmo.negative_control(), 1.0, SMALL)
    assert not rep.finite
    assert rep.value > 2 * 3.0 * np.sqrt(2)


def test_ba_examples():
    c = Quaternion(1, 1, 0, 1)
    for p in (1.0, 2.0):
        rep = bmo.ba_norm(sf.constant(c), p, 1.0, SMALL)
        assert rep.value == pytest.approx(abs(c) ** p, rel=1e-12)
        assert rep.extra["norm"] == pytest.approx(abs(c), rel=1e-12)
    assert not bmo.ba_norm(RE, 2.0, 1.0, SMALL).finite
    bump = bmo.bmo1_bank()["bump"]
    rep = bmo.ba_norm(bump, 1.0, 1.0, SMALL)
    # B_1 exp(-|z|^2) at 0 = 1/2
    assert rep.finite and rep.value == pytest.approx(0.5, rel=1e-7)


@pytest.mark.parametrize("name", sorted(bmo.bmo1_bank()))
def test_decomposition_finite(name):
    f = bmo.bmo1_bank()[name]
    rep = bmo.decomposition_check(f, 1.0, 1.0, SMALL)
    assert rep.all_finite, rep.values


def test_decomposition_of_linear_symbol():
    rep = bmo.decomposition_check(RE, 0.5, 1.0, SMALL)
    assert rep.ba_remainder.value < 1e-12
    assert rep.ba_berezin_remainder.value < 1e-12
    assert rep.bo_average.value == pytest.approx(0.5, rel=1e-12)
    const = bmo.decomposition_check(sf.constant(2.0), 1.0, 1.0, SMALL)
    assert max(const.values.values()) < 1e-12


def test_bmo_finite_across_radii():
    for f in bmo.bmo1_bank().values():
        assert all(bmo.bmo_norm(f, 1.0, r, SMALL).finite for r in (0.5, 1.0, 2.0))
    assert not bmo.bmo_norm(bmo.negative_control(), 1.0, 1.0, SMALL).finite


def test_window_inner_mask():
    w = bmo.Window(extent=4.0, n=9)
    c = w.centers()
    assert len(c) == 81 and w.inner_mask().sum() == 25
    assert np.all(np.abs(c[w.inner_mask()].real) <= 2)
    assert qabs(np.zeros((2, 4))).shape == (2,)
