"""Mean-oscillation, bounded-oscillation and bounded-average seminorms on slice
grids, and the BO + BA decomposition checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .berezin import BerezinContext, berezin, convolve_stem
from .quad_measure import gauss_plane, polar_disk_rule
from .quat_core import I_UNIT, J_UNIT, K_UNIT, as_qarray, qabs
from .slice_fn import SliceFunction, StemFunction, constant, from_intrinsic

SEMINORMS = ("BMOpr", "BO", "BAp")


@dataclass(frozen=True)
class Window:
    """Centres x + yJ with x, y on an n-point grid of [-extent, extent], J in units."""

    extent: float = 4.0
    n: int = 9
    units: tuple = (I_UNIT, J_UNIT, K_UNIT)

    def centers(self) -> np.ndarray:
        t = np.linspace(-self.extent, self.extent, self.n)
        X, Y = np.meshgrid(t, t, indexing="ij")
        return (X + 1j * Y).ravel()

    def inner_mask(self) -> np.ndarray:
        c = self.centers()
        h = self.extent / 2 + 1e-12
        return (np.abs(c.real) <= h) & (np.abs(c.imag) <= h)


@dataclass
class SeminormReport:
    kind: str
    value: float
    window: Window
    table: dict  # unit index -> sup on that slice
    inner_value: float
    extra: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        """Bounded on the window with margin: the full-window sup is within 25% of
        the sup over the inner half-window."""
        if not np.isfinite(self.value):
            return False
        return self.value <= 1.25 * self.inner_value + 1e-12


def _report(kind: str, local: dict, window: Window, **extra) -> SeminormReport:
    inner = window.inner_mask()
    value = float(max(v.max() for v in local.values()))
    inner_value = float(max(v[inner].max() for v in local.values()))
    table = {k: float(v.max()) for k, v in local.items()}
    return SeminormReport(kind, value, window, table, inner_value, dict(extra))


def averaging_function(f: SliceFunction, r: float, n_r: int = 16, n_t: int = 32) -> SliceFunction:
    """f^_r: disk average of radius r on every slice, as a slice function.

    The disk is symmetric under y -> -y, so averaging the stem keeps a even and
    b odd; b is reset to 0 on the real axis.
    """
    off, w = polar_disk_rule(r, n_r, n_t)
    w = w / (np.pi * r * r)
    stem = f.stem

    def fn(x, y):
        return convolve_stem(stem, x, y, off, w)

    return SliceFunction(StemFunction(fn), "intrinsic" if f.tag == "intrinsic" else "generic")


def mean_oscillation(f: SliceFunction, p: float, r: float, z, I=I_UNIT, c=None,
                     n_r: int = 32, n_t: int = 32) -> np.ndarray:
    """[(1/(pi r^2)) int_{B_I(z, r)} |f - c|^p dm]^(1/p), c defaulting to the disk average."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    off, w = polar_disk_rule(r, n_r, n_t)
    w = w / (np.pi * r * r)
    vals = f.on_slice(z[:, None] + off[None, :], as_qarray(I))
    if c is None:
        c = np.einsum("m,pmc->pc", w, vals)
    c = np.broadcast_to(np.asarray(c, dtype=float), (len(z), 4))
    dev = qabs(vals - c[:, None, :]) ** p
    return (dev @ w) ** (1 / p)


def best_constant_oscillation(f: SliceFunction, p: float, r: float, z: complex, I=I_UNIT) -> float:
    """min over quaternion constants c of the oscillation about c."""
    start = mean_oscillation(f, p, r, z, I)
    off, w = polar_disk_rule(r, 32, 32)
    c0 = (w / (np.pi * r * r)) @ f.on_slice(z + off, as_qarray(I))
    res = minimize(lambda c: float(mean_oscillation(f, p, r, z, I, c)[0]), c0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return float(min(res.fun, start[0]))


def bmo_norm(f: SliceFunction, p: float, r: float, window: Window = Window()) -> SeminormReport:
    """sup over window centres and slices of the local mean oscillation."""
    local = {k: mean_oscillation(f, p, r, window.centers(), u) for k, u in enumerate(window.units)}
    return _report("BMOpr", local, window, p=p, r=r)


def _local_oscillation(f: SliceFunction, r: float, z: np.ndarray, I, n_r: int = 8, n_t: int = 48) -> np.ndarray:
    rho = np.linspace(0, r, n_r + 1)[1:]
    th = 2 * np.pi * np.arange(n_t) / n_t
    off = (rho[:, None] * np.exp(1j * th[None, :])).ravel()
    Ia = as_qarray(I)
    centre = f.on_slice(z, Ia)
    vals = f.on_slice(z[:, None] + off[None, :], Ia)
    return qabs(vals - centre[:, None, :]).max(axis=1)


def bo_seminorm(f: SliceFunction, r: float, window: Window = Window()) -> SeminormReport:
    """sup over window centres of omega_r(f)(z) = sup {|f(z) - f(w)| : |w - z| <= r} on each slice."""
    local = {k: _local_oscillation(f, r, window.centers(), u) for k, u in enumerate(window.units)}
    return _report("BO", local, window, r=r)


def ba_norm(f: SliceFunction, p: float, alpha: float, window: Window = Window(), n_nodes: int = 16) -> SeminormReport:
    """sup over window centres of the Berezin transform of |f|^p.

    The reported value is that supremum itself (the p-th power of the norm);
    extra["norm"] carries its p-th root.
    """
    u, w = gauss_plane(n_nodes, alpha)
    w = w * alpha / np.pi
    z = window.centers()
    local = {}
    for k, unit in enumerate(window.units):
        vals = qabs(f.on_slice(z[:, None] + u[None, :], as_qarray(unit))) ** p
        local[k] = vals @ w
    rep = _report("BAp", local, window, p=p, alpha=alpha)
    rep.extra["norm"] = rep.value ** (1 / p)
    return rep


@dataclass
class DecompositionReport:
    bo_average: SeminormReport
    ba_remainder: SeminormReport
    bo_berezin: SeminormReport
    ba_berezin_remainder: SeminormReport

    @property
    def values(self) -> dict:
        return {k: getattr(self, k).value for k in ("bo_average", "ba_remainder", "bo_berezin", "ba_berezin_remainder")}

    @property
    def all_finite(self) -> bool:
        return all(getattr(self, k).finite for k in ("bo_average", "ba_remainder", "bo_berezin", "ba_berezin_remainder"))


def decomposition_check(f: SliceFunction, r: float, alpha: float, window: Window = Window(), p: float = 1.0,
                        n_nodes: int = 16) -> DecompositionReport:
    """f = f^_r + (f - f^_r) and f = f~ + (f - f~): oscillation of the smooth part,
    average of the remainder."""
    avg = averaging_function(f, r)
    ber = berezin(f, BerezinContext(alpha, n_nodes), check=False)
    return DecompositionReport(
        bo_seminorm(avg, r, window),
        ba_norm(f - avg, p, alpha, window),
        bo_seminorm(ber, r, window),
        ba_norm(f - ber, p, alpha, window),
    )


def bmo1_bank() -> dict:
    """Test symbols in BMO^1, plus |z|^2 as a negative control."""
    return {
        "constant": constant(2.5),
        "re": from_intrinsic(lambda z: z.real + 0j),
        "smooth_step": from_intrinsic(lambda z: np.tanh(z.real) + 0j),
        "oscillator": from_intrinsic(lambda z: np.sin(z.real) * np.cos(z.imag) + 0j),
        "bump": from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j),
        "log_growth": from_intrinsic(lambda z: np.log1p(np.abs(z) ** 2) + 0j),
    }


def negative_control() -> SliceFunction:
    return from_intrinsic(lambda z: np.abs(z) ** 2 + 0j)
