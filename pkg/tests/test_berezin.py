from __future__ import annotations

import numpy as np
import pytest

from qfock import berezin as bz
from qfock import slice_fn as sf
from qfock.quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    Quaternion,
    qabs,
    random_quaternions,
    random_units,
    real_quat,
)

CTX = bz.BerezinContext(1.0)
PROBES = bz.probe_points(1.5, 4)


def _abs2():
    return sf.from_intrinsic(lambda z: np.abs(z) ** 2 + 0j)


def test_berezin_examples():
    c = Quaternion(2, -1, 0.5, 3)
    assert np.abs(bz.berezin(sf.constant(c), CTX)(PROBES) - c.arr).max() < 1e-13
    for alpha in (0.5, 1.0, 3.0):
        ctx = bz.BerezinContext(alpha)
        got = bz.berezin(_abs2(), ctx)(PROBES)
        ref = real_quat(np.sum(PROBES**2, -1) + 1 / alpha)
        assert np.abs(got - ref).max() < 1e-12
    re = sf.from_intrinsic(lambda z: z.real + 0j)
    assert np.abs(bz.berezin(re, CTX)(PROBES) - re(PROBES)).max() < 1e-12


def test_berezin_of_cosine_closed_form():
    # B_alpha cos(Re z) = exp(-1/(4 alpha)) cos(Re z)
    f = sf.from_intrinsic(lambda z: np.cos(z.real) + 0j)
    for alpha in (0.5, 1.0, 2.0):
        got = bz.berezin(f, bz.BerezinContext(alpha))(PROBES)
        ref = real_quat(np.exp(-1 / (4 * alpha)) * np.cos(PROBES[:, 0]))
        assert np.abs(got - ref).max() < 1e-12


def test_semigroup_examples():
    assert bz.semigroup_check(sf.constant(1.0), 1.0, 1.0) < 1e-14
    cos = sf.from_intrinsic(lambda z: np.cos(z.real) + 0j)
    assert bz.semigroup_check(cos, 1.0, 1.0) < 1e-6
    bump = sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j)
    assert bz.semigroup_check(bump, 1.0, 2.0) < 1e-8
    step = sf.from_intrinsic(lambda z: np.tanh(z.real) + 0j)
    assert bz.semigroup_check(step, 1.0, 1.0) < 1e-6


def test_slice_stability():
    rng = np.random.default_rng(0)
    fns = [sf.RegularPolynomial(random_quaternions(rng, 3)),
           sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2 / 3) * np.sin(z) + 0j, Quaternion(0, 1, 2, 0)),
           sf.constant(J_UNIT).star(sf.from_intrinsic(lambda z: np.cos(z) * np.exp(-np.abs(z) ** 2))),
           sf.from_intrinsic(lambda z: np.tanh(z.real) + 1j * z.imag * np.exp(-z.imag**2)),
           sf.extend_from_slice(lambda z: np.stack([np.cos(z.real), np.sin(z.imag), 0 * z.real, np.exp(-np.abs(z) ** 2)],
                                                   -1), I_UNIT)]
    for f in fns:
        g = bz.berezin(f, CTX, check=False)
        assert sf.parity_defect(g) < 1e-12
        x, y = 0.4, 0.9
        for J in random_units(rng, 3):
            fp = g(real_quat(x) + y * J)
            fm = g(real_quat(x) - y * J)
            for I in (I_UNIT, J_UNIT, K_UNIT):
                rep = sf.represent_from_slice(fp, fm, J, I.arr)
                assert np.abs(rep - g(real_quat(x) + y * I.arr)).max() < 1e-8


def test_intrinsic_preserved():
    f = sf.from_intrinsic(lambda z: np.sin(z.real) * np.exp(-z.imag**2) + 1j * np.tanh(z.imag))
    g = bz.berezin(f, CTX)
    assert sf.is_intrinsic(g, "stem_real")


def test_ip_surrogate_rejects_fast_growth():
    big = sf.from_intrinsic(lambda z: np.exp(2 * np.abs(z) ** 2) + 0j)
    with pytest.raises(bz.IpConditionError):
        bz.berezin(big, CTX)
    # moderate polynomial growth passes
    bz.check_Ip(_abs2(), CTX)


def test_contraction_on_bounded_functions():
    fns = [sf.from_intrinsic(lambda z: np.tanh(z.real) + 0j),
           sf.from_intrinsic(lambda z: np.sin(z.real) * np.cos(z.imag) + 0j),
           sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j, Quaternion(0, 0, 1, 0))]
    for f in fns:
        assert bz.grid_sup(bz.berezin(f, CTX), 3.0, 21) <= bz.grid_sup(f, 6.0, 61) + 1e-12


def test_iterate_lipschitz():
    pairs = np.array([[x, x + 0.05] for x in np.linspace(-1, 1, 21)])
    const = sf.constant(3.0)
    assert bz.iterate_lipschitz_probe(const, 1, CTX, pairs, 3.0).max_ratio < 1e-12
    # wide Gaussians need enough nodes to resolve a steep symbol
    for k, nodes in ((1.0, 64), (3.0, 128)):
        step = sf.from_intrinsic(lambda z: np.tanh(k * z.real) + 0j)
        ctx = bz.BerezinContext(1.0, nodes)
        reps = [bz.iterate_lipschitz_probe(step, n, ctx, pairs, 1.0) for n in (1, 4, 16)]
        assert all(r.ok for r in reps)
        assert reps[1].bound == pytest.approx(reps[0].bound / 2)
        assert reps[2].max_ratio < reps[1].max_ratio < reps[0].max_ratio


def test_slice_laplacian_examples():
    q = random_quaternions(np.random.default_rng(1), 10)
    assert np.abs(bz.slice_laplacian(sf.monomial(2), q)).max() < 1e-6
    assert np.allclose(bz.slice_laplacian(_abs2(), q), real_quat(np.full(10, 4.0)), atol=1e-6)
    f = sf.RegularPolynomial(random_quaternions(np.random.default_rng(2), 5))
    assert np.abs(bz.slice_laplacian(f, 0.5 * q)).max() < 1e-4
    with pytest.raises(ValueError):
        bz.slice_laplacian(_abs2(), q, h=1e-7)


def test_exponential_fixed_point():
    for alpha in (0.5, 1.0):
        f = bz.exponential_fixed_point(alpha)
        ctx = bz.BerezinContext(alpha)
        v = f(PROBES)
        assert np.max(qabs(bz.berezin(f, ctx)(PROBES) - v) / qabs(v)) < 1e-6
        lap = bz.slice_laplacian(f, PROBES, h=1e-4)
        expected = 8 * alpha * np.pi * np.stack([-v[:, 1], v[:, 0], -v[:, 3], v[:, 2]], -1)  # I f with I = i
        assert np.max(qabs(lap - expected) / qabs(v)) < 1e-3


def test_fixed_point_suite():
    rep = bz.fixed_point_suite(CTX)
    assert all(rep.verdicts.values()), rep.verdicts
    assert rep.harmonic_dev < 1e-8
    assert rep.exponential_dev < 1e-6


def test_growth_classes():
    one = sf.constant(1.0)
    assert bz.growth_class_probe(one, CTX, "Linf_s").verdict
    assert not bz.growth_class_probe(one, CTX, "C0").verdict
    bump = sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j)
    for alpha in (1.0, 2.0):
        assert bz.growth_class_probe(bump, bz.BerezinContext(alpha), "C0").verdict
        assert bz.growth_class_probe(bump, bz.BerezinContext(alpha), "Lp_V").verdict
    assert not bz.growth_class_probe(_abs2(), CTX, "Linf_s").verdict
    with pytest.raises(ValueError):
        bz.growth_class_probe(one, CTX, "L7")


def test_monotonicity():
    rng = np.random.default_rng(3)
    probes = random_quaternions(rng, 50)
    for f in (sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j),
              sf.from_intrinsic(lambda z: 1 + np.cos(z.real) + 0j), _abs2()):
        assert bz.monotonicity_check(f, 2.0, 1.0, probes) >= -1e-12
    with pytest.raises(ValueError):
        bz.monotonicity_check(_abs2(), 1.0, 2.0, probes)


def test_c0_limit_as_alpha_grows():
    f = sf.from_intrinsic(lambda z: np.tanh(z.real) * np.cos(z.imag) + 0j)
    probes = bz.probe_points(1.0, 3)
    devs = [float(np.max(qabs(bz.berezin(f, bz.BerezinContext(a))(probes) - f(probes)))) for a in (1, 10, 100)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.02


def test_iterate_equals_repeated_application():
    f = sf.from_intrinsic(lambda z: np.cos(z.real) * np.exp(-z.imag**2 / 4) + 0j)
    twice = bz.berezin(bz.berezin(f, bz.BerezinContext(1.0, 32)), bz.BerezinContext(1.0, 32), check=False)
    it = bz.berezin_iterate(f, 2, bz.BerezinContext(1.0, 32))
    assert np.abs(twice(PROBES) - it(PROBES)).max() < 1e-8
    with pytest.raises(ValueError):
        bz.berezin_iterate(f, 0, CTX)
