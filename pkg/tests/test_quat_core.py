from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfock.quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    ImaginaryUnit,
    Quaternion,
    SphereRuleSpec,
    is_antipodal,
    join_components,
    orthogonal_unit,
    qabs,
    qconj,
    qmul,
    recompose,
    slice_decompose,
    sphere_nodes,
    sphere_rule,
    split_components,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
quats = st.tuples(finite, finite, finite, finite).map(np.array)
vec3 = st.tuples(finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


def test_basis_products():
    i, j, k = I_UNIT, J_UNIT, K_UNIT
    assert (i * j).isclose(k)
    assert (j * i).isclose(-k)
    assert (j * k).isclose(i)
    assert (k * i).isclose(j)
    for u in (i, j, k):
        assert (u * u).isclose(Quaternion(-1.0))


def test_qmul_examples():
    q = Quaternion(1.5, -2, 0.25, 3)
    assert (q * 1).isclose(q)
    assert (Quaternion(1, 1) * Quaternion(1, 0, 1)).isclose(Quaternion(1, 1, 1, 1))


def test_norm_and_conjugate():
    q = Quaternion(1, 2, -3, 4)
    assert abs(q) == pytest.approx(np.sqrt(30))
    assert (q * q.conj()).isclose(Quaternion(30.0))
    assert (q.conj() * q).isclose(Quaternion(30.0))
    assert (q / q).isclose(Quaternion(1.0))


@settings(max_examples=200, deadline=None)
@given(quats, quats, quats)
def test_algebra_properties(a, b, c):
    scale = (1 + qabs(a)) * (1 + qabs(b)) * (1 + qabs(c))
    assert np.abs(qmul(qmul(a, b), c) - qmul(a, qmul(b, c))).max() <= 1e-13 * scale
    assert np.abs(qconj(qmul(a, b)) - qmul(qconj(b), qconj(a))).max() <= 1e-13 * scale
    assert abs(qabs(qmul(a, b)) - qabs(a) * qabs(b)) <= 1e-13 * scale


def test_imaginary_unit_validation():
    with pytest.raises(ValueError):
        ImaginaryUnit(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ImaginaryUnit(1.0, 0.0, 0.0, 0.0)
    u = ImaginaryUnit.from_vector([1, 2, 2])
    assert np.abs(qmul(u.arr, u.arr) + np.array([1, 0, 0, 0])).max() < 1e-14


def test_slice_decompose_examples():
    p = slice_decompose(Quaternion(3, 0, 4, 0))
    assert (p.x, p.y) == pytest.approx((3, 4))
    assert p.unit.isclose(J_UNIT)
    p = slice_decompose(Quaternion(5.0))
    assert (p.x, p.y) == (5.0, 0.0)
    assert p.unit.isclose(I_UNIT)
    p = slice_decompose(Quaternion(1, 1, 1, 1))
    assert (p.x, p.y) == pytest.approx((1, np.sqrt(3)))
    assert np.allclose(p.unit.vec, np.ones(3) / np.sqrt(3))


@settings(max_examples=200, deadline=None)
@given(quats)
def test_decompose_recompose(q):
    p = slice_decompose(q)
    assert p.y >= 0
    back = recompose(p.x, p.y, p.unit)
    assert np.abs(back - q).max() <= 1e-14 * (1 + qabs(q))


def test_orthogonal_unit_examples():
    assert orthogonal_unit(I_UNIT).isclose(J_UNIT)
    assert orthogonal_unit(J_UNIT).isclose(K_UNIT)
    J = orthogonal_unit(ImaginaryUnit.from_vector([1, 1, 0]))
    # the construction orthogonalises the next basis vector after the dominant one
    assert np.allclose(J.vec, np.array([-1, 1, 0]) / np.sqrt(2))


@settings(max_examples=200, deadline=None)
@given(vec3)
def test_orthogonal_units_anticommute(v):
    I = ImaginaryUnit.from_vector(v)
    J = orthogonal_unit(I)
    assert abs(float(I.vec @ J.vec)) < 1e-14
    assert np.abs(qmul(I.arr, J.arr) + qmul(J.arr, I.arr)).max() < 1e-14


def test_split_join_roundtrip():
    rng = np.random.default_rng(0)
    q = rng.standard_normal((50, 4))
    I = ImaginaryUnit.from_vector([1, -2, 0.5])
    J = orthogonal_unit(I)
    F, G = split_components(q, I, J)
    assert np.abs(join_components(F, G, I, J) - q).max() < 1e-14
    F, G = split_components(np.array([1.0, 1, 2, 3]), I_UNIT, J_UNIT)
    assert F == pytest.approx(1 + 1j)
    assert G == pytest.approx(2 + 3j)


@pytest.mark.parametrize("spec", [SphereRuleSpec("icosahedron"), SphereRuleSpec("octahedron"),
                                  SphereRuleSpec("gauss_product", 6)])
def test_sphere_rule_moments(spec):
    nodes = sphere_nodes(spec)
    w = np.array([s for _, s in nodes])
    v = np.array([u.vec for u, _ in nodes])
    assert np.all(w >= 0)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.abs(w @ v).max() < 1e-14
    assert w @ v[:, 0] ** 2 == pytest.approx(1 / 3, abs=1e-12)
    assert is_antipodal(sphere_rule(spec))


def _monte_carlo_moment(f, n=400_000):
    rng = np.random.default_rng(1)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return f(v).mean()


def test_sphere_rule_degree_exactness():
    # every monomial of degree <= declared degree against exact sphere moments
    from math import gamma

    def exact(a, b, c):
        if a % 2 or b % 2 or c % 2:
            return 0.0
        s = (a + b + c + 3) / 2
        return gamma((a + 1) / 2) * gamma((b + 1) / 2) * gamma((c + 1) / 2) / gamma(s) / (2 * np.pi)

    for spec in (SphereRuleSpec("icosahedron"), SphereRuleSpec("octahedron"), SphereRuleSpec("gauss_product", 4)):
        rule = sphere_rule(spec)
        v = rule.units[:, 1:]
        for a in range(rule.degree + 1):
            for b in range(rule.degree + 1 - a):
                for c in range(rule.degree + 1 - a - b):
                    got = rule.weights @ (v[:, 0] ** a * v[:, 1] ** b * v[:, 2] ** c)
                    assert abs(got - exact(a, b, c)) < 1e-12, (spec, a, b, c)
    assert _monte_carlo_moment(lambda v: v[:, 0] ** 2) == pytest.approx(1 / 3, abs=5e-3)


def test_unsupported_sphere_rule():
    with pytest.raises(ValueError, match="unsupported"):
        sphere_rule(SphereRuleSpec("cube"))
