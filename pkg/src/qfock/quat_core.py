"""Quaternion arithmetic, imaginary units, slice decomposition and sphere rules.

Two representations coexist.  ``Quaternion`` is a small immutable scalar type
for readable code and tests.  Bulk numerics use float arrays whose last axis
has length 4 (components along 1, i, j, k); every helper below accepts both.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

QuatLike = Union["Quaternion", np.ndarray, Iterable[float]]

_DEFAULT_UNIT = np.array([0.0, 1.0, 0.0, 0.0])


@dataclass(frozen=True)
class Quaternion:
    """q = x0 + x1 i + x2 j + x3 k."""

    x0: float = 0.0
    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        if a.shape != (4,):
            raise ValueError(f"expected 4 components, got shape {a.shape}")
        return cls(*(float(v) for v in a))

    @classmethod
    def real(cls, r: float) -> "Quaternion":
        return cls(float(r), 0.0, 0.0, 0.0)

    @property
    def arr(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3])

    def __array__(self, dtype=None, copy=None):
        return self.arr if dtype is None else self.arr.astype(dtype)

    def __iter__(self):
        return iter((self.x0, self.x1, self.x2, self.x3))

    def __repr__(self) -> str:
        return f"Quaternion({self.x0:+.6g}, {self.x1:+.6g}i, {self.x2:+.6g}j, {self.x3:+.6g}k)"

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(self.arr + other)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(self.arr - other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(other - self.arr)

    def __neg__(self):
        return Quaternion(-self.x0, -self.x1, -self.x2, -self.x3)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(qmul(self.arr, other))

    def __rmul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(qmul(other, self.arr))

    def __truediv__(self, other):
        """Right division: self * other^{-1}."""
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Quaternion.from_array(qmul(self.arr, qinv(other)))

    def __abs__(self) -> float:
        return float(np.linalg.norm(self.arr))

    def conj(self) -> "Quaternion":
        return Quaternion(self.x0, -self.x1, -self.x2, -self.x3)

    @property
    def re(self) -> float:
        return self.x0

    @property
    def im(self) -> "Quaternion":
        return Quaternion(0.0, self.x1, self.x2, self.x3)

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.arr - _coerce(other))) <= tol)


@dataclass(frozen=True)
class ImaginaryUnit(Quaternion):
    """A purely imaginary unit quaternion, so u^2 = -1."""

    def __post_init__(self):
        if abs(self.x0) > 1e-12 or abs(abs(self) - 1.0) > 1e-12:
            raise ValueError(f"not an imaginary unit: {tuple(self)}")

    @classmethod
    def from_vector(cls, v) -> "ImaginaryUnit":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape == (4,):
            v = v[1:]
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero vector has no direction")
        v = v / n
        return cls(0.0, float(v[0]), float(v[1]), float(v[2]))

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


I_UNIT = ImaginaryUnit(0.0, 1.0, 0.0, 0.0)
J_UNIT = ImaginaryUnit(0.0, 0.0, 1.0, 0.0)
K_UNIT = ImaginaryUnit(0.0, 0.0, 0.0, 1.0)
ONE = Quaternion(1.0)


@dataclass(frozen=True)
class SlicePoint:
    """q = x + y*unit with y >= 0."""

    x: float
    y: float
    unit: ImaginaryUnit

    def recompose(self) -> Quaternion:
        return Quaternion.from_array(self.x * ONE.arr + self.y * self.unit.arr)


def _coerce(v):
    if isinstance(v, Quaternion):
        return v.arr
    if isinstance(v, (int, float, np.floating, np.integer)):
        return np.array([float(v), 0.0, 0.0, 0.0])
    if isinstance(v, np.ndarray) and v.shape[-1:] == (4,):
        return v
    return None


def as_qarray(q) -> np.ndarray:
    """Float array with a trailing axis of length 4."""
    if isinstance(q, Quaternion):
        return q.arr
    a = np.asarray(q, dtype=float)
    if a.shape[-1:] != (4,):
        raise ValueError(f"trailing axis must have length 4, got shape {a.shape}")
    return a


def qmul(a, b):
    """Hamilton product.  Broadcasts over leading axes."""
    if isinstance(a, Quaternion) and isinstance(b, Quaternion):
        return Quaternion.from_array(qmul(a.arr, b.arr))
    a = as_qarray(a)
    b = as_qarray(b)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(q):
    if isinstance(q, Quaternion):
        return q.conj()
    q = as_qarray(q)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qabs(q):
    if isinstance(q, Quaternion):
        return abs(q)
    return np.linalg.norm(as_qarray(q), axis=-1)


def qinv(q):
    if isinstance(q, Quaternion):
        return Quaternion.from_array(qinv(q.arr))
    q = as_qarray(q)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    return qconj(q) / n2


def real_quat(r) -> np.ndarray:
    """Embed real values as quaternion arrays."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape + (4,))
    out[..., 0] = r
    return out


def slice_arrays(q):
    """Vectorised slice decomposition: returns (x, y, unit) with y >= 0.

    Real inputs get the default unit i.
    """
    q = as_qarray(q)
    x = q[..., 0]
    im = q[..., 1:]
    y = np.linalg.norm(im, axis=-1)
    unit = np.broadcast_to(_DEFAULT_UNIT, q.shape).copy()
    nz = y > 0
    unit[nz, 1:] = im[nz] / y[nz, None]
    return x, y, unit


def slice_decompose(q) -> SlicePoint:
    """q = x + y*unit with x = Re q, y = |Im q| and unit = Im q/|Im q| (i if q is real)."""
    x, y, u = slice_arrays(as_qarray(q))
    return SlicePoint(float(x), float(y), ImaginaryUnit(*(float(v) for v in u)))


def recompose(x, y, unit) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return real_quat(x) + y[..., None] * as_qarray(unit)


def orthogonal_unit(I) -> ImaginaryUnit:
    """Deterministic unit J perpendicular to I.

    Construction: let m be the index of the largest |component| of I (first
    one on ties); Gram-Schmidt the next basis vector e_{(m+1) mod 3} against I.
    This sends i -> j, j -> k, k -> i.
    """
    v = as_qarray(I)[1:]
    m = int(np.argmax(np.abs(v)))
    e = np.zeros(3)
    e[(m + 1) % 3] = 1.0
    w = e - np.dot(e, v) * v
    return ImaginaryUnit.from_vector(w)


def complex_to_quat(z, unit) -> np.ndarray:
    """Map u + iv in C to u + v*unit in C_unit."""
    z = np.asarray(z, dtype=complex)
    return recompose(z.real, z.imag, unit)


def quat_to_complex(q, unit) -> np.ndarray:
    """Inverse of complex_to_quat for points of C_unit (no membership check)."""
    q = as_qarray(q)
    return q[..., 0] + 1j * (q[..., 1:] @ as_qarray(unit)[1:])


def split_components(q, I, J):
    """Write q = F + G J with F, G in C_I (returned as complex numbers)."""
    q = as_qarray(q)
    Ia = as_qarray(I)
    Ja = as_qarray(J)
    K = qmul(Ia, Ja)
    c0 = q[..., 0]
    c1 = q @ Ia
    c2 = q @ Ja
    c3 = q @ K
    return c0 + 1j * c1, c2 + 1j * c3


def join_components(F, G, I, J) -> np.ndarray:
    """Inverse of split_components: F + G J."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    Ia = as_qarray(I)
    Ja = as_qarray(J)
    K = qmul(Ia, Ja)
    return (
        real_quat(F.real)
        + F.imag[..., None] * Ia
        + G.real[..., None] * Ja
        + G.imag[..., None] * K
    )


def random_quaternions(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * rng.standard_normal((n, 4))


def random_units(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = np.zeros((n, 4))
    out[:, 1:] = v
    return out


# --- sphere rules -----------------------------------------------------------


@dataclass(frozen=True)
class SphereRuleSpec:
    """Quadrature on the unit sphere of imaginary units.

    kind: "icosahedron" (12 nodes, degree 5), "octahedron" (6 nodes,
    degree 3) or "gauss_product" (n Gauss-Legendre nodes in cos(theta) times
    2n equispaced azimuths, degree 2n-1).
    """

    kind: str = "icosahedron"
    n: int = 4


@dataclass(frozen=True)
class SphereRule:
    units: np.ndarray  # (m, 4), purely imaginary
    weights: np.ndarray  # (m,), sum to 1
    degree: int

    def __len__(self) -> int:
        return len(self.weights)


_DESIGNS = {"icosahedron": 5, "octahedron": 3}


@lru_cache(maxsize=32)
def sphere_rule(spec: SphereRuleSpec = SphereRuleSpec()) -> SphereRule:
    if spec.kind == "octahedron":
        v = np.vstack([np.eye(3), -np.eye(3)])
        deg = 3
    elif spec.kind == "icosahedron":
        phi = (1 + np.sqrt(5)) / 2
        base = []
        for s1 in (1, -1):
            for s2 in (1, -1):
                base.append((0.0, s1, s2 * phi))
        base = np.array(base)
        v = np.vstack([base, np.roll(base, 1, axis=1), np.roll(base, 2, axis=1)])
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        deg = 5
    elif spec.kind == "gauss_product":
        if spec.n < 1:
            raise ValueError("gauss_product needs n >= 1")
        t, wt = np.polynomial.legendre.leggauss(spec.n)
        nphi = 2 * spec.n
        ph = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
        T, P = np.meshgrid(t, ph, indexing="ij")
        s = np.sqrt(1 - T**2)
        v = np.stack([s * np.cos(P), s * np.sin(P), T], axis=-1).reshape(-1, 3)
        w = (np.repeat(wt, nphi) / 2.0) / nphi
        units = np.hstack([np.zeros((len(v), 1)), v])
        return SphereRule(units, w, 2 * spec.n - 1)
    else:
        raise ValueError(f"unsupported sphere rule {spec.kind!r}; choose from "
                         f"{sorted(list(_DESIGNS) + ['gauss_product'])}")
    w = np.full(len(v), 1.0 / len(v))
    units = np.hstack([np.zeros((len(v), 1)), v])
    return SphereRule(units, w, deg)


def sphere_nodes(spec: SphereRuleSpec = SphereRuleSpec()) -> list[tuple[ImaginaryUnit, float]]:
    """Nodes and weights of a normalised rule for the sphere of imaginary units."""
    rule = sphere_rule(spec)
    return [(ImaginaryUnit.from_vector(u), float(w)) for u, w in zip(rule.units, rule.weights)]


def is_antipodal(rule: SphereRule, tol: float = 1e-12) -> bool:
    """True when every node I has a partner -I with equal weight."""
    for u, w in zip(rule.units, rule.weights):
        d = np.linalg.norm(rule.units + u, axis=1)
        m = int(np.argmin(d))
        if d[m] > tol or abs(rule.weights[m] - w) > tol:
            return False
    return True
