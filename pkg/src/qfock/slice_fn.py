"""Slice functions stored through their stems.

A slice function is f(x + yI) = a(x, y) + I b(x, y) with a even and b odd in
y.  Stems are vectorised: ``stem(x, y)`` takes broadcastable real arrays and
returns the pair (a, b) of quaternion arrays with shape ``x.shape + (4,)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    ImaginaryUnit,
    Quaternion,
    as_qarray,
    complex_to_quat,
    join_components,
    qconj,
    qmul,
    real_quat,
    slice_arrays,
    split_components,
)

StemCallable = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

TAGS = ("regular_poly", "intrinsic", "generic")
MODES = ("two_slices", "three_conj", "one_slice_conj", "stem_real")


@dataclass(frozen=True)
class StemFunction:
    """Pair (a, b) evaluated together by ``fn``."""

    fn: StemCallable

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self.fn(x, y)

    def a(self, x, y) -> np.ndarray:
        return self(x, y)[0]

    def b(self, x, y) -> np.ndarray:
        return self(x, y)[1]


def _qconst(c) -> np.ndarray:
    if isinstance(c, (int, float, np.floating, np.integer)):
        return real_quat(float(c))
    return as_qarray(c).astype(float)


@dataclass(frozen=True)
class SliceFunction:
    stem: StemFunction
    tag: str = "generic"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")

    # evaluation ----------------------------------------------------------
    def __call__(self, q):
        """Evaluate at quaternions (Quaternion or array with trailing axis 4)."""
        scalar = isinstance(q, Quaternion)
        q = as_qarray(q)
        x, y, unit = slice_arrays(q)
        a, b = self.stem(x, y)
        out = a + qmul(unit, b)
        return Quaternion.from_array(out) if scalar else out

    def on_slice(self, z, unit) -> np.ndarray:
        """Evaluate at u + v*unit for complex z = u + iv (v may be negative)."""
        z = np.asarray(z, dtype=complex)
        a, b = self.stem(z.real, z.imag)
        return a + qmul(as_qarray(unit), b)

    def split(self, I, J):
        """Complex-valued (F, G) on C_I with f = F + G J there."""
        return split(self, I, J)

    # algebra ---------------------------------------------------------------
    def __add__(self, other: "SliceFunction") -> "SliceFunction":
        if not isinstance(other, SliceFunction):
            return NotImplemented
        s1, s2 = self.stem, other.stem

        def fn(x, y):
            a1, b1 = s1(x, y)
            a2, b2 = s2(x, y)
            return a1 + a2, b1 + b2

        return SliceFunction(StemFunction(fn), _join_tag(self.tag, other.tag))

    def __sub__(self, other: "SliceFunction") -> "SliceFunction":
        return self + other.scale(-1.0)

    def __neg__(self) -> "SliceFunction":
        return self.scale(-1.0)

    def scale(self, r: float) -> "SliceFunction":
        s = self.stem
        r = float(r)

        def fn(x, y):
            a, b = s(x, y)
            return r * a, r * b

        return SliceFunction(StemFunction(fn), self.tag)

    def times_const(self, c) -> "SliceFunction":
        """Pointwise right multiplication q -> f(q) c (again a slice function)."""
        c = _qconst(c)
        s = self.stem

        def fn(x, y):
            a, b = s(x, y)
            return qmul(a, c), qmul(b, c)

        real_c = np.allclose(c[1:], 0.0)
        tag = self.tag if real_c else ("regular_poly" if self.tag == "regular_poly" else "generic")
        return SliceFunction(StemFunction(fn), tag)

    def star(self, other: "SliceFunction") -> "SliceFunction":
        return star_product(self, other)

    def conj(self) -> "SliceFunction":
        """q -> conj(f(q)) is not slice in general; this returns the stem conjugate
        (conj a, conj b), which equals the pointwise conjugate for intrinsic f."""
        s = self.stem

        def fn(x, y):
            a, b = s(x, y)
            return qconj(a), qconj(b)

        return SliceFunction(StemFunction(fn), "intrinsic" if self.tag == "intrinsic" else "generic")

    def dilate(self, c: float) -> "SliceFunction":
        """q -> f(c q) for real c."""
        s = self.stem
        c = float(c)

        def fn(x, y):
            return s(c * x, c * y)

        return SliceFunction(StemFunction(fn), self.tag)


def _join_tag(t1: str, t2: str) -> str:
    return t1 if t1 == t2 else "generic"


# --- constructors ---------------------------------------------------------


def from_stem(a: Callable, b: Callable, tag: str = "generic") -> SliceFunction:
    """Build from separate callables a(x, y), b(x, y) returning quaternion arrays."""

    def fn(x, y):
        return np.broadcast_to(a(x, y), x.shape + (4,)), np.broadcast_to(b(x, y), x.shape + (4,))

    return SliceFunction(StemFunction(fn), tag)


def constant(c) -> SliceFunction:
    c = _qconst(c)
    tag = "intrinsic" if np.allclose(c[1:], 0.0) else "regular_poly"

    def fn(x, y):
        a = np.broadcast_to(c, x.shape + (4,)).copy()
        return a, np.zeros(x.shape + (4,))

    return SliceFunction(StemFunction(fn), tag)


def from_intrinsic(phi: Callable[[np.ndarray], np.ndarray], coeff=None) -> SliceFunction:
    """Slice function with complex profile phi, optionally times a right constant.

    phi maps complex arrays to complex arrays and must satisfy
    phi(conj z) = conj phi(z); then f(x + yI) = Re phi(x+iy) + I Im phi(x+iy).
    Holomorphy is not required (|z|^2 or Re z are fine).
    """

    def fn(x, y):
        v = np.asarray(phi(x + 1j * y), dtype=complex)
        v = np.broadcast_to(v, x.shape)
        return real_quat(v.real), real_quat(v.imag)

    f = SliceFunction(StemFunction(fn), "intrinsic")
    return f if coeff is None else f.times_const(coeff)


def identity() -> SliceFunction:
    return RegularPolynomial([[0, 0, 0, 0], [1, 0, 0, 0]])


class RegularPolynomial(SliceFunction):
    """f(q) = sum_n q^n a_n with quaternion right coefficients a_n."""

    def __init__(self, coeffs: Sequence):
        c = np.atleast_2d(np.asarray([as_qarray(a) if isinstance(a, Quaternion) else a for a in coeffs], dtype=float))
        if c.shape[-1] != 4:
            raise ValueError("coefficients need 4 components each")
        c = c.copy()
        c.setflags(write=False)

        def fn(x, y):
            z = x + 1j * y
            n = c.shape[0]
            # Horner on the complex profile, once for every coefficient component
            acc = np.zeros(z.shape + (4,), dtype=complex)
            for k in range(n - 1, -1, -1):
                acc = acc * z[..., None] + c[k]
            return acc.real, acc.imag

        real_coeffs = np.allclose(c[:, 1:], 0.0)
        super().__init__(StemFunction(fn), "intrinsic" if real_coeffs else "regular_poly")
        object.__setattr__(self, "coeffs", c)

    def times_const(self, c) -> "RegularPolynomial":
        """q -> f(q) c, again with right coefficients a_n c."""
        return RegularPolynomial(qmul(self.coeffs, _qconst(c)))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __repr__(self) -> str:
        return f"RegularPolynomial(degree={self.degree})"


def monomial(n: int, coeff=None) -> RegularPolynomial:
    c = np.zeros((n + 1, 4))
    c[n] = _qconst(1.0 if coeff is None else coeff)
    return RegularPolynomial(c)


# --- core operations ------------------------------------------------------


def evaluate(f: SliceFunction, q):
    """f(q) through the stem at the slice decomposition of q."""
    return f(q)


def represent_from_slice(fJ_plus, fJ_minus, J, I):
    """Representation formula: value at x + yI from the values at x +/- yJ."""
    scalar = isinstance(fJ_plus, Quaternion)
    fp = as_qarray(fJ_plus)
    fm = as_qarray(fJ_minus)
    IJ = qmul(as_qarray(I), as_qarray(J))
    one = real_quat(1.0)
    out = 0.5 * qmul(one - IJ, fp) + 0.5 * qmul(one + IJ, fm)
    return Quaternion.from_array(out) if scalar else out


def extend_from_slice(fI: Callable[[np.ndarray], np.ndarray], I) -> SliceFunction:
    """Slice function whose restriction to C_I is fI.

    fI takes complex arrays z (coordinates on C_I) and returns quaternion arrays.
    Stem: a = (fI(z) + fI(conj z))/2 and b = I (fI(conj z) - fI(z))/2.
    """
    Ia = as_qarray(I)

    def fn(x, y):
        z = x + 1j * y
        # one call for z and conj(z) halves the cost of expensive restrictions
        both = as_qarray(fI(np.stack([z, np.conj(z)])))
        fp, fm = both[0], both[1]
        a = 0.5 * (fp + fm)
        b = 0.5 * qmul(Ia, fm - fp)
        return a, b

    return SliceFunction(StemFunction(fn), "generic")


def _check_orthogonal(I, J, tol: float = 1e-12) -> None:
    if abs(float(as_qarray(I)[1:] @ as_qarray(J)[1:])) > tol:
        raise ValueError("J must be orthogonal to I")


def split(f: SliceFunction, I, J):
    """Splitting on C_I: f(z) = F(z) + G(z) J with F, G complex (C_I-valued).

    Returns callables on complex arrays.
    """
    _check_orthogonal(I, J)

    def F(z):
        return split_components(f.on_slice(z, I), I, J)[0]

    def G(z):
        return split_components(f.on_slice(z, I), I, J)[1]

    return F, G


def star_product(f: SliceFunction, g: SliceFunction) -> SliceFunction:
    """Stem product (a1 a2 - b1 b2, a1 b2 + b1 a2)."""
    s1, s2 = f.stem, g.stem

    def fn(x, y):
        a1, b1 = s1(x, y)
        a2, b2 = s2(x, y)
        return qmul(a1, a2) - qmul(b1, b2), qmul(a1, b2) + qmul(b1, a2)

    if f.tag == "intrinsic" and g.tag == "intrinsic":
        tag = "intrinsic"
    elif f.tag in ("intrinsic", "regular_poly") and g.tag in ("intrinsic", "regular_poly"):
        tag = "regular_poly"
    else:
        tag = "generic"
    return SliceFunction(StemFunction(fn), tag)


def star_slicewise(f: SliceFunction, g: SliceFunction, I, z, J=None) -> np.ndarray:
    """(f * g) on C_I from the splittings f = F0 + F1 J, g = G0 + G1 J:

    [F0 G0 - F1 conj(G1(zbar))] + [F0 G1 + F1 conj(G0(zbar))] J.
    """
    from .quat_core import orthogonal_unit

    J = orthogonal_unit(I) if J is None else J
    z = np.asarray(z, dtype=complex)
    F0, F1 = split_components(f.on_slice(z, I), I, J)
    G0, G1 = split_components(g.on_slice(z, I), I, J)
    G0b, G1b = split_components(g.on_slice(np.conj(z), I), I, J)
    A = F0 * G0 - F1 * np.conj(G1b)
    B = F0 * G1 + F1 * np.conj(G0b)
    return join_components(A, B, I, J)


@dataclass
class IntrinsicReport:
    value: bool
    mode: str
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.value


def default_grid(n: int = 9, extent: float = 2.0):
    """Symmetric (x, y) sample grid with y > 0."""
    xs = np.linspace(-extent, extent, n)
    ys = np.linspace(extent / n, extent, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return X.ravel(), Y.ravel()


def _slice_deviation(vals: np.ndarray, unit: np.ndarray) -> np.ndarray:
    """Distance of each value from C_unit."""
    u = unit[1:]
    v = vals[..., 1:]
    perp = v - (v @ u)[..., None] * u
    return np.linalg.norm(perp, axis=-1)


def is_intrinsic(
    f: SliceFunction,
    mode: str,
    grid=None,
    units: Optional[Sequence] = None,
    tol: float = 1e-10,
) -> IntrinsicReport:
    """Grid test of one of four equivalent characterisations of intrinsic functions.

    two_slices: f(C_I) in C_I for two distinct slices (default i, j).
    three_conj: f(conj z) = conj f(z) on three independent slices (default i, j, k).
    one_slice_conj: both properties on a single slice (default i).
    stem_real: the stem components are real.
    The answer means "true on the grid", not a proof.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    X, Y = default_grid() if grid is None else grid
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    defaults = {"two_slices": (I_UNIT, J_UNIT), "three_conj": (I_UNIT, J_UNIT, K_UNIT),
                "one_slice_conj": (I_UNIT,), "stem_real": ()}
    units = defaults[mode] if units is None else tuple(units)
    z = X + 1j * Y

    if mode == "stem_real":
        a, b = f.stem(X, Y)
        dev = np.maximum(np.linalg.norm(a[..., 1:], axis=-1), np.linalg.norm(b[..., 1:], axis=-1))
        k = int(np.argmax(dev))
        if dev[k] > tol:
            return IntrinsicReport(False, mode, {"x": X[k], "y": Y[k], "deviation": float(dev[k])})
        return IntrinsicReport(True, mode)

    if mode == "two_slices" and len(units) < 2:
        raise ValueError("two_slices needs two units")
    if mode == "three_conj":
        M = np.array([as_qarray(u)[1:] for u in units])
        if len(units) < 3 or abs(np.linalg.det(M[:3])) < 1e-8:
            raise ValueError("three_conj needs three linearly independent units")

    for u in units:
        ua = as_qarray(u)
        vals = f.on_slice(z, ua)
        if mode in ("two_slices", "one_slice_conj"):
            dev = _slice_deviation(vals, ua)
            k = int(np.argmax(dev))
            if dev[k] > tol:
                return IntrinsicReport(False, mode, {"unit": ua[1:].tolist(), "x": X[k], "y": Y[k],
                                                     "property": "slice_preserved",
                                                     "deviation": float(dev[k])})
        if mode in ("three_conj", "one_slice_conj"):
            vb = f.on_slice(np.conj(z), ua)
            dev = np.linalg.norm(vb - qconj(vals), axis=-1)
            k = int(np.argmax(dev))
            if dev[k] > tol:
                return IntrinsicReport(False, mode, {"unit": ua[1:].tolist(), "x": X[k], "y": Y[k],
                                                     "property": "conjugation",
                                                     "deviation": float(dev[k])})
    return IntrinsicReport(True, mode)


def intrinsic_basis_decompose(f: SliceFunction, I, J):
    """f = h0 + h1 I + h2 J + h3 IJ with each h_l intrinsic (real stems)."""
    _check_orthogonal(I, J)
    basis = np.stack([real_quat(1.0), as_qarray(I), as_qarray(J), qmul(as_qarray(I), as_qarray(J))])
    s = f.stem
    parts = []
    for l in range(4):
        e = basis[l]

        def fn(x, y, e=e):
            a, b = s(x, y)
            return real_quat(a @ e), real_quat(b @ e)

        parts.append(SliceFunction(StemFunction(fn), "intrinsic"))
    return tuple(parts)


def parity_defect(f: SliceFunction, grid=None) -> float:
    """max |a(x,-y) - a(x,y)| + |b(x,-y) + b(x,y)| over a grid, plus |b(x,0)|."""
    X, Y = default_grid(20) if grid is None else grid
    a1, b1 = f.stem(X, Y)
    a2, b2 = f.stem(X, -Y)
    _, b0 = f.stem(X, np.zeros_like(X))
    return float(max(np.abs(a1 - a2).max(), np.abs(b1 + b2).max(), np.abs(b0).max()))
