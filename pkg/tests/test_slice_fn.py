from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfock import slice_fn as sf
from qfock.quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    ImaginaryUnit,
    Quaternion,
    complex_to_quat,
    orthogonal_unit,
    qconj,
    qmul,
    random_quaternions,
    random_units,
    real_quat,
)

RNG = np.random.default_rng(7)


def _rand_poly(rng, deg=3):
    return sf.RegularPolynomial(random_quaternions(rng, deg + 1))


def test_evaluate_examples():
    q2 = sf.monomial(2)
    assert sf.evaluate(q2, J_UNIT).isclose(Quaternion(-1.0))
    c = sf.constant(I_UNIT)
    assert sf.evaluate(c, Quaternion(0.3, -1, 2, 0.5)).isclose(I_UNIT)
    q = Quaternion(1, 0, 0, 2)
    assert sf.evaluate(sf.identity(), q).isclose(q)


def test_polynomial_matches_direct_powers():
    rng = np.random.default_rng(1)
    f = _rand_poly(rng, 4)
    q = random_quaternions(rng, 30)
    direct = np.zeros_like(q)
    power = real_quat(np.ones(len(q)))
    for a in f.coeffs:
        direct += qmul(power, a)
        power = qmul(power, q)
    assert np.abs(f(q) - direct).max() < 1e-12


def test_represent_from_slice_examples():
    c = Quaternion(2, 1, -1, 3)
    f = sf.constant(c)
    assert sf.represent_from_slice(c, c, J_UNIT, I_UNIT).isclose(c)
    out = sf.represent_from_slice(J_UNIT, -J_UNIT, J_UNIT, I_UNIT)
    assert out.isclose(I_UNIT)
    q2 = sf.monomial(2)
    plus = sf.evaluate(q2, Quaternion(1, 0, 1, 0))
    minus = sf.evaluate(q2, Quaternion(1, 0, -1, 0))
    out = sf.represent_from_slice(plus, minus, J_UNIT, K_UNIT)
    assert out.isclose(Quaternion(0, 0, 0, 2))
    assert out.isclose(sf.evaluate(q2, Quaternion(1, 0, 0, 1)))
    assert f(Quaternion(1, 2, 3, 4)).isclose(c)


def test_representation_consistency_random():
    rng = np.random.default_rng(2)
    for _ in range(5):
        f = _rand_poly(rng, 3)
        x, y = rng.normal(size=2)
        for J in random_units(rng, 3):
            fp = f(real_quat(x) + y * J)
            fm = f(real_quat(x) - y * J)
            for I in random_units(rng, 3):
                assert np.abs(sf.represent_from_slice(fp, fm, J, I) - f(real_quat(x) + y * I)).max() < 1e-12


def test_extend_from_slice_examples():
    ext = sf.extend_from_slice(lambda z: complex_to_quat(z, I_UNIT), I_UNIT)
    q = random_quaternions(RNG, 20)
    assert np.abs(ext(q) - q).max() < 1e-14
    a = 0.7
    ex = sf.extend_from_slice(lambda z: complex_to_quat(np.exp(a * z), I_UNIT), I_UNIT)
    exp_intrinsic = sf.from_intrinsic(lambda z: np.exp(a * z))
    assert np.abs(ex(q) - exp_intrinsic(q)).max() < 1e-12
    conj = sf.extend_from_slice(lambda z: complex_to_quat(np.conj(z), I_UNIT), I_UNIT)
    X, Y = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-2, 2, 5))
    a_, b_ = conj.stem(X, Y)
    assert np.allclose(a_, real_quat(X)) and np.allclose(b_, real_quat(-Y))
    assert np.abs(conj(q) - qconj(q)).max() < 1e-14


def test_split_examples():
    F, G = sf.split(sf.constant(J_UNIT), I_UNIT, J_UNIT)
    z = np.array([0.5 + 1j, -2 + 0.1j])
    assert np.allclose(F(z), 0) and np.allclose(G(z), 1)
    F, G = sf.split(sf.identity(), I_UNIT, J_UNIT)
    assert np.allclose(F(z), z) and np.allclose(G(z), 0)
    F, G = sf.split(sf.constant(Quaternion(1, 1, 2, 3)), I_UNIT, J_UNIT)
    assert np.allclose(F(z), 1 + 1j) and np.allclose(G(z), 2 + 3j)
    with pytest.raises(ValueError):
        sf.split(sf.identity(), I_UNIT, ImaginaryUnit.from_vector([1, 1, 0]))


def test_star_product_examples():
    a = Quaternion(0.5, -1, 2, 0.3)
    q = random_quaternions(RNG, 20)
    prod = sf.star_product(sf.identity(), sf.constant(a))
    assert np.abs(prod(q) - qmul(q, a.arr)).max() < 1e-13
    # intrinsic factor on the left acts pointwise
    h = sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) * np.cos(z.real) + 0j)
    g = _rand_poly(RNG)
    assert np.abs(sf.star_product(h, g)(q) - qmul(h(q), g(q))).max() < 1e-13
    j_j = sf.star_product(sf.constant(J_UNIT), sf.constant(J_UNIT))
    assert np.abs(j_j(q) - real_quat(-np.ones(len(q)))).max() < 1e-15
    sq = sf.star_product(sf.identity(), sf.identity())
    assert np.abs(sq(q) - qmul(q, q)).max() < 1e-13


@pytest.mark.parametrize("H", [lambda z: z**2 + (1 - 2j) * z, lambda z: np.exp((0.3 + 1j) * z),
                               lambda z: (2 + 1j) * np.sin(z)])
def test_unit_times_holomorphic_conjugates(H):
    I, J0 = I_UNIT, J_UNIT
    Hs = sf.extend_from_slice(lambda z: complex_to_quat(H(z), I), I)
    prod = sf.star_product(sf.constant(J0), Hs)
    z = RNG.normal(size=30) + 1j * RNG.normal(size=30)
    expected = qmul(complex_to_quat(np.conj(H(np.conj(z))), I), J0.arr)
    assert np.abs(prod.on_slice(z, I) - expected).max() < 1e-12


def test_star_routes_agree():
    rng = np.random.default_rng(3)
    z = np.array([1 + 1j])
    for f, g in [(sf.identity(), sf.constant(Quaternion(0.5, 1, -1, 2))),
                 (sf.constant(J_UNIT), _rand_poly(rng)),
                 (sf.from_intrinsic(np.cos), _rand_poly(rng))]:
        for I in random_units(rng, 3):
            a = sf.star_product(f, g).on_slice(z, I)
            b = sf.star_slicewise(f, g, I, z)
            assert np.abs(a - b).max() < 1e-12
    I = I_UNIT
    assert np.allclose(sf.star_slicewise(sf.constant(J_UNIT), sf.constant(J_UNIT), I, z), [[-1, 0, 0, 0]])


def test_star_associative_and_noncommutative():
    rng = np.random.default_rng(4)
    q = random_quaternions(rng, 50)
    for _ in range(3):
        f, g, h = (_rand_poly(rng, 2) for _ in range(3))
        lhs = sf.star_product(sf.star_product(f, g), h)(q)
        rhs = sf.star_product(f, sf.star_product(g, h))(q)
        assert np.max(np.abs(lhs - rhs)) <= 1e-11 * np.max(np.abs(lhs))
    fi, gj = sf.constant(I_UNIT), sf.constant(J_UNIT)
    d = sf.star_product(fi, gj)(q) - sf.star_product(gj, fi)(q)
    assert np.linalg.norm(d, axis=-1).max() > 0.5


def test_parity_of_constructed_functions():
    rng = np.random.default_rng(5)
    fns = [_rand_poly(rng), sf.from_intrinsic(np.exp), sf.constant(K_UNIT),
           sf.extend_from_slice(lambda z: complex_to_quat(np.abs(z) ** 2 + z, J_UNIT), J_UNIT),
           sf.star_product(_rand_poly(rng), sf.from_intrinsic(np.sin))]
    for f in fns:
        assert sf.parity_defect(f) < 1e-13


def test_is_intrinsic_examples():
    q2 = sf.monomial(2)
    for mode in sf.MODES:
        assert sf.is_intrinsic(q2, mode)
    ci = sf.constant(I_UNIT)
    rep = sf.is_intrinsic(ci, "two_slices")
    assert not rep and rep.witness["unit"] == [0.0, 1.0, 0.0]
    for mode in sf.MODES:
        assert not sf.is_intrinsic(ci, mode)
    # a = 0, b = y I1 with I1 = i: conjugation-compatible on C_j and C_k, but
    # C_j is not preserved
    odd = sf.from_stem(lambda x, y: np.zeros(x.shape + (4,)), lambda x, y: y[..., None] * I_UNIT.arr)
    z = np.array([0.5 + 1j, -1 + 2j])
    for u in (J_UNIT, K_UNIT):
        assert np.abs(odd.on_slice(np.conj(z), u) - qconj(odd.on_slice(z, u))).max() < 1e-15
    assert not sf.is_intrinsic(odd, "three_conj")
    rep = sf.is_intrinsic(odd, "one_slice_conj", units=(J_UNIT,))
    assert not rep and rep.witness["property"] == "slice_preserved"
    assert not sf.is_intrinsic(odd, "stem_real")


def test_is_intrinsic_modes_agree():
    rng = np.random.default_rng(6)
    fns = [_rand_poly(rng), sf.RegularPolynomial(real_quat(rng.normal(size=4))), sf.from_intrinsic(np.cosh),
           sf.constant(J_UNIT), sf.from_intrinsic(np.exp, Quaternion(1, 0, 1, 0))]
    for f in fns:
        answers = {bool(sf.is_intrinsic(f, m)) for m in sf.MODES}
        assert len(answers) == 1
    with pytest.raises(ValueError):
        sf.is_intrinsic(fns[0], "three_conj", units=(I_UNIT, J_UNIT, ImaginaryUnit.from_vector([1, 1, 0])))
    with pytest.raises(ValueError):
        sf.is_intrinsic(fns[0], "bogus")


def test_intrinsic_basis_decompose():
    I, J = I_UNIT, J_UNIT
    q = random_quaternions(RNG, 25)
    parts = sf.intrinsic_basis_decompose(sf.constant(I_UNIT), I, J)
    for k, h in enumerate(parts):
        assert np.allclose(h(q), real_quat(np.full(len(q), 1.0 if k == 1 else 0.0)))
    parts = sf.intrinsic_basis_decompose(sf.identity(), I, J)
    assert np.allclose(parts[0](q), q)
    assert all(np.allclose(h(q), 0) for h in parts[1:])
    parts = sf.intrinsic_basis_decompose(sf.constant(Quaternion(1, 1, 2, 3)), I, J)
    for c, h in zip((1, 1, 2, 3), parts):
        assert np.allclose(h(q), real_quat(np.full(len(q), c)))
    f = _rand_poly(RNG)
    Ia, Ja = I.arr, J.arr
    basis = [real_quat(1.0), Ia, Ja, qmul(Ia, Ja)]
    parts = sf.intrinsic_basis_decompose(f, I, J)
    rebuilt = sum(qmul(h(q), e) for h, e in zip(parts, basis))
    assert np.abs(rebuilt - f(q)).max() < 1e-12
    assert all(sf.is_intrinsic(h, "stem_real") for h in parts)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=8, max_size=8), st.floats(-2, 2), st.floats(0.01, 2))
def test_extension_restricts_to_the_slice(c, x, y):
    f = sf.RegularPolynomial(np.array(c).reshape(2, 4))
    I = ImaginaryUnit.from_vector([0.3, -1, 2])
    ext = sf.extend_from_slice(lambda z: f.on_slice(z, I), I)
    z = np.array([x + 1j * y, x - 1j * y])
    assert np.abs(ext.on_slice(z, I) - f.on_slice(z, I)).max() < 1e-12
    J = orthogonal_unit(I)
    assert np.abs(ext.on_slice(z, J) - f.on_slice(z, J)).max() < 1e-12
