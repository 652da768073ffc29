"""Quadrature on slices and on the sphere of units, Gaussian measures, discrete
measures, symmetric boxes and Carleson-type statistics.

Conventions
-----------
dV = dm(C_I^+) dsigma(I) with sigma normalised, and
dlambda_alpha = (2 alpha / pi) exp(-alpha |z|^2) dV.  For an antipodally
symmetric sphere rule the half-plane integrals fold into full-plane ones:
    int_H g dlambda_alpha = sum_J sigma_J int_{C_J} g dlambda_{alpha,J},
with dlambda_{alpha,J} = (alpha/pi) exp(-alpha|z|^2) dm on the whole slice.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .quat_core import (
    I_UNIT,
    SphereRuleSpec,
    as_qarray,
    complex_to_quat,
    is_antipodal,
    orthogonal_unit,
    qmul,
    real_quat,
    slice_arrays,
    sphere_rule,
)


class WindowError(RuntimeError):
    """Raised when a quadrature window does not capture the integrand."""


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Hermite on each slice times a sphere rule.

    n_gh: nodes per axis.  window_tol: relative mass allowed on the outer ring
    of nodes before the window is declared insufficient.
    """

    n_gh: int = 48
    sphere: SphereRuleSpec = SphereRuleSpec()
    window_tol: float = 1e-9

    def plane(self, c: float, center: complex = 0.0):
        return gauss_plane(self.n_gh, c, center)


@lru_cache(maxsize=64)
def _hermgauss(n: int):
    return np.polynomial.hermite.hermgauss(n)


def gauss_plane(n: int, c: float, center: complex = 0.0):
    """Nodes z (complex, flattened) and weights w with
    sum w g(z) ~ int_{R^2} g(z) exp(-c |z - center|^2) dm(z)."""
    t, wt = _hermgauss(n)
    s = 1.0 / np.sqrt(c)
    U, V = np.meshgrid(t * s, t * s, indexing="ij")
    W = np.outer(wt, wt) / c
    z = center + (U + 1j * V).ravel()
    return z, W.ravel()


def _outer_mask(n: int) -> np.ndarray:
    t, _ = _hermgauss(n)
    U, V = np.meshgrid(t, t, indexing="ij")
    r = np.hypot(U, V).ravel()
    return r > 0.8 * r.max()


def _window_check(vals: np.ndarray, w: np.ndarray, n: int, tol: float) -> None:
    flat = vals.reshape(len(w), -1) if vals.ndim > 1 else vals[:, None]
    contrib = np.abs(flat) * w[:, None]
    total = contrib.sum()
    outer = contrib[_outer_mask(n)].sum()
    if not np.isfinite(total):
        raise WindowError("integrand is not finite on the quadrature nodes")
    if outer > tol * max(total, 1e-300):
        raise WindowError(f"outer ring carries {outer / total:.2e} of the mass (tol {tol:.0e})")


def integrate_slice(g: Callable, I, alpha: float, rule: QuadratureRule = QuadratureRule(),
                    check: bool = True):
    """int_{C_I} g dlambda_{alpha,I}; g maps quaternion arrays (..., 4) to arrays."""
    z, w = rule.plane(alpha)
    pts = complex_to_quat(z, as_qarray(I))
    vals = np.asarray(g(pts))
    if check:
        _window_check(vals, w, rule.n_gh, rule.window_tol)
    return np.tensordot(w, vals, axes=(0, 0)) * (alpha / np.pi)


def integrate_global(g: Callable, alpha: float, rule: QuadratureRule = QuadratureRule(),
                     check: bool = True):
    """int_H g dlambda_alpha via the sphere rule times slice rules."""
    sr = sphere_rule(rule.sphere)
    if not is_antipodal(sr):
        raise ValueError("global integration needs an antipodally symmetric sphere rule")
    total = 0.0
    for u, s in zip(sr.units, sr.weights):
        total = total + s * integrate_slice(g, u, alpha, rule, check)
    return total


# --- discrete measures and boxes -------------------------------------------


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite list of atoms (points (n, 4), weights (n,) >= 0)."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 4)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(p) != len(w):
            raise ValueError("points and weights differ in length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls) -> "DiscreteMeasure":
        return cls(np.zeros((0, 4)), np.zeros(0))

    @classmethod
    def from_slice(cls, z, weights, unit=I_UNIT) -> "DiscreteMeasure":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(complex_to_quat(z, as_qarray(unit)), np.broadcast_to(weights, z.shape))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(np.vstack([self.points, other.points]),
                               np.concatenate([self.weights, other.weights]))

    def real_part(self) -> "DiscreteMeasure":
        """Atoms on the real axis."""
        m = np.linalg.norm(self.points[:, 1:], axis=1) == 0
        return DiscreteMeasure(self.points[m], self.weights[m])

    def off_axis(self) -> "DiscreteMeasure":
        m = np.linalg.norm(self.points[:, 1:], axis=1) > 0
        return DiscreteMeasure(self.points[m], self.weights[m])

    def by_unit(self, decimals: int = 12) -> dict:
        """Off-axis atoms grouped by their imaginary unit."""
        off = self.off_axis()
        _, _, u = slice_arrays(off.points)
        groups: dict = {}
        for k, key in enumerate(map(tuple, np.round(u[:, 1:], decimals))):
            groups.setdefault(key, []).append(k)
        return {key: DiscreteMeasure(off.points[idx], off.weights[idx]) for key, idx in groups.items()}

    def to_json(self) -> dict:
        x, y, u = slice_arrays(self.points)
        return {"atoms": [{"x": float(a), "y": float(b), "unit": uu[1:].tolist(), "w": float(w)}
                          for a, b, uu, w in zip(x, y, u, self.weights)]}

    @classmethod
    def from_json(cls, data) -> "DiscreteMeasure":
        if isinstance(data, str):
            data = json.loads(data)
        atoms = data["atoms"]
        pts, ws = [], []
        for a in atoms:
            y = float(a["y"])
            if y < 0:
                raise ValueError("atom y must be >= 0")
            u = np.asarray(a.get("unit", [1.0, 0.0, 0.0]), dtype=float)
            n = np.linalg.norm(u)
            if n == 0:
                raise ValueError("atom unit must be nonzero")
            pts.append(np.concatenate([[float(a["x"])], y * u / n]))
            ws.append(float(a["w"]))
        if not pts:
            return cls.empty()
        return cls(np.array(pts), np.array(ws))


@dataclass(frozen=True)
class SymmetricBox:
    """S(z, r): union over units J of the disk of radius r about x0 + y0 J."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", as_qarray(self.center).astype(float))

    def contains(self, w) -> np.ndarray:
        w = as_qarray(w)
        x0, y0 = self.center[0], np.linalg.norm(self.center[1:])
        x = w[..., 0]
        y = np.linalg.norm(w[..., 1:], axis=-1)
        return np.hypot(x - x0, y - y0) <= self.radius * (1 + 1e-12)


def box_mass(mu: DiscreteMeasure, box: SymmetricBox) -> float:
    if len(mu) == 0:
        return 0.0
    return float(mu.weights[box.contains(mu.points)].sum())


def averaging_function(mu: DiscreteMeasure, z, r: float) -> float:
    """mu(S(z, r)) / (pi r^2)."""
    return box_mass(mu, SymmetricBox(as_qarray(z), r)) / (np.pi * r * r)


def kernel_quantity(mu: DiscreteMeasure, alpha: float, p: float, probes) -> np.ndarray:
    """int |k_z(w) exp(-alpha|w|^2/2)|^p dmu(w) for every probe z (finite sums)."""
    from .fock_core import damped_kernel

    probes = np.atleast_2d(as_qarray(probes))
    if len(mu) == 0:
        return np.zeros(len(probes))
    mod = np.linalg.norm(damped_kernel(alpha, mu.points[None, :, :], probes[:, None, :]), axis=-1)  # K(w, z)
    return (mod**p) @ mu.weights


@dataclass
class CarlesonProfile:
    sup_kernel: float
    sup_box: float
    table: list  # rows (probe index, x, y, unit..., kernel quantity, box mass)

    @property
    def ratio(self) -> float:
        return self.sup_kernel / self.sup_box if self.sup_box > 0 else np.inf


def carleson_profile(mu: DiscreteMeasure, alpha: float, p: float, probes, r: float) -> CarlesonProfile:
    """Kernel quantity and box mass at every probe, and their suprema over the probes."""
    probes = np.atleast_2d(as_qarray(probes))
    kq = kernel_quantity(mu, alpha, p, probes)
    bm = np.array([box_mass(mu, SymmetricBox(z, r)) for z in probes])
    table = [(k, *probes[k].tolist(), float(kq[k]), float(bm[k])) for k in range(len(probes))]
    return CarlesonProfile(float(kq.max(initial=0.0)), float(bm.max(initial=0.0)), table)


def probe_lattice(extent: float, spacing: float, units: Optional[Sequence] = None) -> np.ndarray:
    """Deterministic probe centres: a square lattice in the upper half of three
    fixed slices (i, j, (i+j+k)/sqrt 3) plus the real axis."""
    from .quat_core import ImaginaryUnit

    if units is None:
        units = [I_UNIT, ImaginaryUnit(0, 0, 1, 0), ImaginaryUnit.from_vector([1, 1, 1])]
    xs = np.arange(-extent, extent + 1e-9, spacing)
    ys = np.arange(spacing, extent + 1e-9, spacing)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = [real_quat(xs)]
    for u in units:
        pts.append(complex_to_quat((X + 1j * Y).ravel(), as_qarray(u)))
    return np.vstack(pts)


def vanishing_profile(mu: DiscreteMeasure, alpha: float, p: float, I, radii: Sequence[float],
                      r: float, n_angles: int = 64) -> list[dict]:
    """For each radius R: max over |z| = R in C_I of the kernel quantity and box mass."""
    rows = []
    th = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    for R in radii:
        pts = complex_to_quat(R * np.exp(1j * th), as_qarray(I))
        kq = kernel_quantity(mu, alpha, p, pts)
        bm = np.array([box_mass(mu, SymmetricBox(z, r)) for z in pts])
        rows.append({"R": float(R), "kernel": float(kq.max()), "box": float(bm.max())})
    return rows


def decay_verdict(rows: list[dict], factor: float = 0.25) -> bool:
    """True when both quantities at the largest radius are below factor times
    their maximum over the table (a finite-window reading of "tends to 0")."""
    k = np.array([row["kernel"] for row in rows])
    b = np.array([row["box"] for row in rows])
    ok_k = k[-1] <= factor * k.max() if k.max() > 0 else True
    ok_b = b[-1] <= factor * b.max() if b.max() > 0 else True
    return bool(ok_k and ok_b)


# --- box integrals -----------------------------------------------------------


def polar_disk_rule(r: float, n_r: int = 32, n_t: int = 32):
    """Midpoint polar rule on the disk of radius r: offsets (complex) and area weights."""
    rho = (np.arange(n_r) + 0.5) * r / n_r
    th = 2 * np.pi * (np.arange(n_t) + 0.5) / n_t
    R, T = np.meshgrid(rho, th, indexing="ij")
    off = (R * np.exp(1j * T)).ravel()
    w = (R * (r / n_r) * (2 * np.pi / n_t)).ravel()
    return off, w


def intrinsic_average_identity(f, z, r: float, I=I_UNIT, rule: QuadratureRule = QuadratureRule(),
                               n_r: int = 64, n_t: int = 64):
    """(int_{S(z,r)} f dV, int_{B_I(z_I,r)} f dm) for a real-valued slice function f.

    The box integral is taken literally with dV = dm(C_J^+) dsigma(J): on each
    node slice J we integrate over the part of the box lying in the closed upper
    half-plane.  The two numbers agree whenever the disk stays off the real axis
    (r <= |Im z|); a disk that crosses the axis overlaps its own mirror image,
    and the box integral then counts the overlap once.
    """
    z = as_qarray(z)
    x0, y0 = z[0], np.linalg.norm(z[1:])
    Ia = as_qarray(I)
    off, w = polar_disk_rule(r, n_r, n_t)
    pts = x0 + 1j * y0 + off
    vals = f.on_slice(pts, Ia)
    if np.abs(vals[..., 1:]).max() > 1e-10:
        raise ValueError("f is not real-valued on the sampled disk")
    slice_val = float(w @ vals[..., 0])

    # Box part in the upper half-plane: union of the disk and its mirror image,
    # integrated with one weight per point of the union.
    sr = sphere_rule(rule.sphere)
    up = pts.imag >= 0
    mirror = np.conj(pts)
    in_first = np.abs(mirror - (x0 + 1j * y0)) <= r
    # upper points of the disk count once; lower points of the disk are mirrored
    # into the upper half-plane and count unless already covered by the disk itself
    keep = up | ~in_first
    glob = 0.0
    for u, s in zip(sr.units, sr.weights):
        vals_u = f.on_slice(np.where(up, pts, mirror), u)[..., 0]
        glob += s * float((w * keep) @ vals_u)
    return glob, slice_val
