"""Slice-wise Berezin transform, its heat-semigroup structure, iterate Lipschitz
bounds, the slice Laplacian, fixed points and growth-class probes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .quad_measure import WindowError, _window_check, gauss_plane
from .quat_core import I_UNIT, J_UNIT, K_UNIT, as_qarray, qabs, qmul, slice_arrays, sphere_rule, SphereRuleSpec
from .slice_fn import SliceFunction, StemFunction, constant, from_intrinsic, from_stem

_MAX_BLOCK = 200_000
DEFAULT_SLICES = (I_UNIT, J_UNIT, K_UNIT)


class IpConditionError(ValueError):
    """The integrability surrogate failed: the Gaussian average is not resolved."""


@dataclass(frozen=True)
class BerezinContext:
    """Weight alpha, Gauss-Hermite order per axis, and the integrability surrogate.

    The surrogate evaluates the shifted rule at the probe points on one slice
    and demands a finite integrand whose outer node ring carries at most
    ip_tol of the mass.
    """

    alpha: float
    n_nodes: int = 24
    ip_p: float = 1.0
    ip_probes: tuple = (0.0, 2.0, 2.0 + 2.0j, -3.0j, 4.0 - 1.0j)
    ip_tol: float = 1e-5

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def with_alpha(self, alpha: float) -> "BerezinContext":
        return BerezinContext(alpha, self.n_nodes, self.ip_p, self.ip_probes, self.ip_tol)


def check_Ip(f: SliceFunction, ctx: BerezinContext, I=I_UNIT) -> None:
    """Single-slice surrogate for int |K(z, a)|^2 |f(a)|^p dlambda_alpha(a) < inf.

    On one slice that integral is exp(alpha|z|^2) times the Gaussian average of
    |f|^p around z, so it suffices to check that average at the probes.
    """
    u, w = gauss_plane(ctx.n_nodes, ctx.alpha)
    for z in ctx.ip_probes:
        vals = qabs(f.on_slice(z + u, as_qarray(I))) ** ctx.ip_p
        try:
            _window_check(vals, w, ctx.n_nodes, ctx.ip_tol)
        except WindowError as exc:
            raise IpConditionError(f"integrability surrogate failed at z={z}: {exc}") from None


def convolve_stem(stem: StemFunction, x: np.ndarray, y: np.ndarray, offsets: np.ndarray, weights: np.ndarray):
    """Stem of sum_m weights[m] f(. + offsets[m]), evaluated in bounded blocks.

    The offset set must be symmetric under conjugation so that parity is kept;
    b is reset to 0 on the real axis.
    """
    shape = x.shape
    xf, yf = x.ravel(), y.ravel()
    A = np.empty((xf.size, 4))
    B = np.empty((xf.size, 4))
    step = max(1, _MAX_BLOCK // len(offsets))
    for s in range(0, xf.size, step):
        X = xf[s:s + step, None] + offsets.real[None, :]
        Y = yf[s:s + step, None] + offsets.imag[None, :]
        a, b = stem(X, Y)
        A[s:s + step] = np.einsum("m,pmc->pc", weights, a)
        B[s:s + step] = np.einsum("m,pmc->pc", weights, b)
    B[yf == 0] = 0.0
    return A.reshape(shape + (4,)), B.reshape(shape + (4,))


def berezin(f: SliceFunction, ctx: BerezinContext, check: bool = True) -> SliceFunction:
    """f~(z) = (alpha/pi) int_{C_I} exp(-alpha|w-z|^2) f(w) dm(w) on every slice.

    The stem of f~ is the Gaussian convolution of the stem of f, so the result
    is again a slice function and intrinsic input stays intrinsic.
    """
    if check:
        check_Ip(f, ctx)
    stem = f.stem
    u, w = gauss_plane(ctx.n_nodes, ctx.alpha)
    w = w * (ctx.alpha / np.pi)

    def fn(x, y):
        return convolve_stem(stem, x, y, u, w)

    tag = "intrinsic" if f.tag == "intrinsic" else "generic"
    return SliceFunction(StemFunction(fn), tag)


def berezin_iterate(f: SliceFunction, n: int, ctx: BerezinContext) -> SliceFunction:
    """B_alpha^n f, computed in one pass as B_{alpha/n} f (semigroup law)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return berezin(f, ctx.with_alpha(ctx.alpha / n))


def probe_points(extent: float = 2.0, n: int = 5, units: Sequence = DEFAULT_SLICES) -> np.ndarray:
    """Quaternion probes on an n x n grid of C_J for each unit J."""
    t = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    pts = [X.ravel()[:, None] * np.array([1.0, 0, 0, 0]) + Y.ravel()[:, None] * as_qarray(u) for u in units]
    return np.concatenate(pts)


def semigroup_check(f: SliceFunction, alpha: float, beta: float, ctx: Optional[BerezinContext] = None,
                    probes=None) -> float:
    """max |B_alpha(B_beta f) - B_{alpha beta/(alpha+beta)} f| on the probes.

    The default rule has 32 nodes per axis: nested smoothing of functions with
    nearby complex singularities (tanh) needs it for 1e-7 accuracy.
    """
    ctx = BerezinContext(alpha, 32) if ctx is None else ctx
    probes = probe_points(1.5, 4) if probes is None else probes
    inner = berezin(f, ctx.with_alpha(beta))
    twice = berezin(inner, ctx.with_alpha(alpha), check=False)
    once = berezin(f, ctx.with_alpha(alpha * beta / (alpha + beta)))
    return float(np.max(qabs(twice(probes) - once(probes))))


def grid_sup(f: SliceFunction, extent: float = 4.0, n: int = 41, units: Sequence = DEFAULT_SLICES) -> float:
    return float(np.max(qabs(f(probe_points(extent, n, units)))))


@dataclass
class LipschitzReport:
    n: int
    max_ratio: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.bound


def lipschitz_bound(alpha: float, n: int, sup_norm: float) -> float:
    """sqrt(2) C ||f||_inf / sqrt(n) with C = 2 sqrt(alpha/pi)."""
    return np.sqrt(2) * 2 * np.sqrt(alpha / np.pi) * sup_norm / np.sqrt(n)


def iterate_lipschitz_probe(f: SliceFunction, n: int, ctx: BerezinContext, pairs, sup_norm: Optional[float] = None,
                            I=I_UNIT) -> LipschitzReport:
    """max |B^n f(z) - B^n f(w)| / |z - w| over complex pairs on C_I, checked against the bound."""
    pairs = np.asarray(pairs, dtype=complex)
    sup_norm = grid_sup(f) if sup_norm is None else sup_norm
    g = berezin_iterate(f, n, ctx)
    Ia = as_qarray(I)
    d = qabs(g.on_slice(pairs[:, 0], Ia) - g.on_slice(pairs[:, 1], Ia))
    ratio = float(np.max(d / np.abs(pairs[:, 0] - pairs[:, 1])))
    rep = LipschitzReport(n, ratio, float(lipschitz_bound(ctx.alpha, n, sup_norm)))
    if not rep.ok:
        raise AssertionError(f"Lipschitz ratio {ratio:.4g} exceeds {rep.bound:.4g} at n={n}")
    return rep


def slice_laplacian(f: SliceFunction, q, h: float = 1e-3) -> np.ndarray:
    """(d^2/dx^2 + d^2/dy^2) of f on the slice of q by central differences, O(h^2)."""
    if h < 1e-5:
        raise ValueError("step below 1e-5: second differences lose all digits to cancellation")
    q = as_qarray(q)
    x, y, unit = slice_arrays(q)
    x, y = np.asarray(x), np.asarray(y)
    X = np.stack([x, x + h, x - h, x, x])
    Y = np.stack([y, y, y, y + h, y - h])
    a, b = f.stem(X, Y)
    lap_a = (a[1] + a[2] + a[3] + a[4] - 4 * a[0]) / h**2
    lap_b = (b[1] + b[2] + b[3] + b[4] - 4 * b[0]) / h**2
    return lap_a + qmul(unit, lap_b)


def exponential_fixed_point(alpha: float, I=I_UNIT) -> SliceFunction:
    """f(x + yJ) = exp(c (1 + I) x), c = 2 sqrt(alpha pi): the stem is exp(a x) with
    a = c(1 + I), a^2 = 8 alpha pi I, and b = 0.

    Gaussian smoothing multiplies exp(a x) by exp(a^2/(4 alpha)) = exp(2 pi I) = 1,
    so the function is fixed although its slice Laplacian is 8 alpha pi I f.
    """
    c = 2 * np.sqrt(alpha * np.pi)
    Ia = as_qarray(I)

    def a(x, y):
        e = np.exp(c * x)[..., None]
        return e * (np.cos(c * x)[..., None] * np.array([1.0, 0, 0, 0]) + np.sin(c * x)[..., None] * Ia)

    return from_stem(a, lambda x, y: np.zeros(np.shape(x) + (4,)), "generic")


@dataclass
class FixedPointReport:
    bounded_fixed: float
    oscillation: list
    harmonic_dev: float
    exponential_dev: float
    exponential_laplacian: float
    verdicts: dict = field(default_factory=dict)


def fixed_point_suite(ctx: BerezinContext, probes=None) -> FixedPointReport:
    """Three fixed-point phenomena.

    (i) a bounded nonconstant function loses oscillation under iteration, so a
        bounded fixed point must be constant; the constant 5 is fixed.
    (ii) Re q is fixed and slice harmonic.
    (iii) the exponential of exponential_fixed_point is fixed with nonzero Laplacian.
    """
    probes = probe_points(1.5, 5) if probes is None else probes
    five = constant(5.0)
    bounded_fixed = float(np.max(qabs(berezin(five, ctx)(probes) - 5.0 * np.array([1.0, 0, 0, 0]))))
    wave = from_intrinsic(lambda z: np.cos(z.real) + 0j)
    osc = []
    for n in (1, 4, 16, 64):
        v = berezin_iterate(wave, n, ctx)(probes)[:, 0]
        osc.append(float(v.max() - v.min()))
    re = from_intrinsic(lambda z: z.real + 0j)
    harmonic_dev = float(np.max(qabs(berezin(re, ctx)(probes) - re(probes))))
    ex = exponential_fixed_point(ctx.alpha)
    ev = ex(probes)
    exponential_dev = float(np.max(qabs(berezin(ex, ctx)(probes) - ev) / qabs(ev)))
    lap = slice_laplacian(ex, probes)
    rel_lap = float(np.min(qabs(lap) / qabs(ev)))
    rep = FixedPointReport(bounded_fixed, osc, harmonic_dev, exponential_dev, rel_lap)
    rep.verdicts = {
        "bounded_fixed_points_constant": bounded_fixed < 1e-10 and all(b < a for a, b in zip(osc, osc[1:])),
        "harmonic_fixed": harmonic_dev < 1e-8,
        "exponential_fixed": exponential_dev < 1e-6,
        "exponential_not_harmonic": rel_lap > 1.0,
    }
    return rep


# --- growth classes -----------------------------------------------------------

GROWTH_CLASSES = ("Linf_s", "C0", "Lp_V")


@dataclass
class GrowthReport:
    cls: str
    verdict: bool
    table: list  # (R, value)
    detail: str = ""


def _ring_sup(g: SliceFunction, R: float, units: Sequence, n_angles: int = 48) -> float:
    th = np.linspace(0, np.pi, n_angles)
    vals = []
    for u in units:
        vals.append(np.max(qabs(g.on_slice(R * np.exp(1j * th), as_qarray(u)))))
    return float(max(vals))


def growth_class_probe(f: SliceFunction, ctx: BerezinContext, cls: str, radii: Sequence[float] = (1, 2, 4, 8),
                       units: Sequence = DEFAULT_SLICES, p: float = 2.0, tol: float = 1e-3) -> GrowthReport:
    """Window verdict for B_alpha f in L_s^inf, C_0 or L^p(dV).

    Linf_s: ring sup at the outermost radius at most 1.25 times the max over the inner radii.
    C0: ring sup at the outermost radius below tol times the overall max ("C0 up to R_max").
    Lp_V: the last dyadic shell contributes under 1% of the accumulated integral.
    """
    if cls not in GROWTH_CLASSES:
        raise ValueError(f"unknown class {cls!r}; choose from {GROWTH_CLASSES}")
    g = berezin(f, ctx)
    if cls in ("Linf_s", "C0"):
        table = [(float(R), _ring_sup(g, R, units)) for R in radii]
        inner = max([grid_sup(g, radii[0], 9, units)] + [v for _, v in table[:-1]])
        last = table[-1][1]
        ok = last <= 1.25 * inner if cls == "Linf_s" else last <= tol * max(inner, 1e-300)
        return GrowthReport(cls, bool(ok), table, f"R_max={radii[-1]}")
    # L^p(dV): shells [R_{k-1}, R_k) in the (x, y >= 0) half-plane with weight y^2
    # times the sphere rule (dV = y^2 dx dy dsigma, dsigma of total mass 4 pi).
    sr = sphere_rule(SphereRuleSpec())
    edges = (0.0,) + tuple(radii)
    table, acc = [], 0.0
    for r0, r1 in zip(edges, edges[1:]):
        rho = np.linspace(r0, r1, 25)[:-1] + (r1 - r0) / 48
        th = (np.arange(48) + 0.5) * np.pi / 48
        Rh, Th = np.meshgrid(rho, th, indexing="ij")
        z = (Rh * np.exp(1j * Th)).ravel()
        dA = (Rh * (r1 - r0) / 24 * np.pi / 48).ravel()
        shell = 0.0
        for u, s in zip(sr.units, sr.weights):
            vals = qabs(g.on_slice(z, u)) ** p
            shell += s * 4 * np.pi * float((dA * z.imag**2) @ vals)
        acc += shell
        table.append((float(r1), shell))
    ok = table[-1][1] <= 1e-2 * acc
    return GrowthReport(cls, bool(ok), table, f"p={p}")


def monotonicity_check(f: SliceFunction, alpha: float, beta: float, probes, n_nodes: int = 24) -> float:
    """min over probes of (alpha/beta) B_beta f - B_alpha f for nonnegative real f, 0 < beta < alpha.

    A nonnegative result confirms B_alpha f <= (alpha/beta) B_beta f.
    """
    if not 0 < beta < alpha:
        raise ValueError("need 0 < beta < alpha")
    fa = berezin(f, BerezinContext(alpha, n_nodes))(probes)[:, 0]
    fb = berezin(f, BerezinContext(beta, n_nodes))(probes)[:, 0]
    return float(np.min((alpha / beta) * fb - fa))
