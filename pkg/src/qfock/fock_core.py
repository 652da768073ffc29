"""Reproducing kernel, normalised kernels, monomial norms, inner products and
slice/global Fock norms."""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log
from typing import Callable, Optional

import numpy as np

from .quad_measure import QuadratureRule, gauss_plane
from .quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    Quaternion,
    as_qarray,
    qabs,
    qconj,
    qmul,
    real_quat,
    slice_arrays,
    sphere_rule,
)
from .slice_fn import RegularPolynomial, SliceFunction, StemFunction

FockElement = RegularPolynomial


@dataclass(frozen=True)
class KernelContext:
    """Weight alpha plus truncation policy for K_alpha(z, w) = sum alpha^n z^n conj(w)^n / n!.

    With t = alpha |z| |w| the series is cut after the first N terms such that
    t^(N+1) / (N+1)! <= tail_tol; the neglected tail is then at most
    tail_tol * exp(t), i.e. tail_tol relative to the kernel's magnitude bound.
    """

    alpha: float
    max_terms: int = 600
    tail_tol: float = 1e-17
    cap: float = 700.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def n_terms(self, t: float) -> int:
        if t > self.cap:
            raise OverflowError(f"alpha|z||w| = {t:.1f} exceeds the cap {self.cap}")
        if t == 0:
            return 1
        logt = log(t)
        n = 0
        # smallest N with (N+1) log t - lgamma(N+2) <= log tail_tol
        target = log(self.tail_tol)
        while (n + 1) * logt - lgamma(n + 2) > target or n + 1 < t:
            n += 1
            if n >= self.max_terms:
                raise OverflowError(f"series needs more than {self.max_terms} terms at t = {t:.1f}")
        return n + 1


def _power_sums(zeta: np.ndarray, omega: np.ndarray, ctx: KernelContext, n_terms: Optional[int] = None):
    """Real sums S_XY = sum_n alpha^n/n! X(zeta^n) Y(omega^n) for X, Y in {Re, Im}.

    Powers are carried in the scaled form (sqrt(alpha) zeta)^n / sqrt(n!) so
    nothing overflows before the final products.
    """
    zeta, omega = np.broadcast_arrays(np.asarray(zeta, dtype=complex), np.asarray(omega, dtype=complex))
    t = float(ctx.alpha * np.max(np.abs(zeta) * np.abs(omega), initial=0.0))
    N = ctx.n_terms(t) if n_terms is None else n_terms
    sa = np.sqrt(ctx.alpha)
    u = np.ones_like(zeta)
    v = np.ones_like(omega)
    RR = np.zeros(zeta.shape)
    RI = np.zeros(zeta.shape)
    IR = np.zeros(zeta.shape)
    II = np.zeros(zeta.shape)
    for n in range(N):
        if n > 0:
            s = 1.0 / np.sqrt(n)
            u = u * (sa * zeta) * s
            v = v * (sa * omega) * s
        RR += u.real * v.real
        RI += u.real * v.imag
        IR += u.imag * v.real
        II += u.imag * v.imag
    return RR, RI, IR, II


def kernel_eval(ctx: KernelContext, z, w, n_terms: Optional[int] = None):
    """K_alpha(z, w) by the truncated series.  Broadcasts over leading axes.

    With z = x + yI (zeta = x + iy) and w = x' + y'L (omega = x' + iy'):
    z^n = Re zeta^n + I Im zeta^n and conj(w)^n = Re omega^n - L Im omega^n.
    """
    scalar = isinstance(z, Quaternion) and isinstance(w, Quaternion)
    z = as_qarray(z)
    w = as_qarray(w)
    xz, yz, Iz = slice_arrays(z)
    xw, yw, Lw = slice_arrays(w)
    RR, RI, IR, II = _power_sums(xz + 1j * yz, xw + 1j * yw, ctx, n_terms)
    out = real_quat(RR) + IR[..., None] * Iz - RI[..., None] * Lw - II[..., None] * qmul(Iz, Lw)
    return Quaternion.from_array(out) if scalar else out


def kernel_eval_closed(alpha: float, z, w):
    """Cross-check of kernel_eval through complex exponentials.

    Equivalent to reducing to the slice of z by the representation formula:
    every real sum above is a combination of exp(alpha zeta omega) and
    exp(alpha zeta conj(omega)).
    """
    z = as_qarray(z)
    w = as_qarray(w)
    xz, yz, Iz = slice_arrays(z)
    xw, yw, Lw = slice_arrays(w)
    zeta = xz + 1j * yz
    omega = xw + 1j * yw
    e1 = np.exp(alpha * zeta * omega)
    e2 = np.exp(alpha * zeta * np.conj(omega))
    RR = 0.5 * (e1 + e2).real
    RI = 0.5 * (e1 - e2).imag
    IR = 0.5 * (e1 + e2).imag
    II = 0.5 * (e2 - e1).real
    return real_quat(RR) + IR[..., None] * Iz - RI[..., None] * Lw - II[..., None] * qmul(Iz, Lw)


def damped_kernel(alpha: float, z, w):
    """K_alpha(z, w) exp(-alpha(|z|^2 + |w|^2)/2) without overflow.

    Same closed form as kernel_eval_closed with the damping folded into the
    exponents, whose real parts are then at most 0.
    """
    z = as_qarray(z)
    w = as_qarray(w)
    xz, yz, Iz = slice_arrays(z)
    xw, yw, Lw = slice_arrays(w)
    zeta = xz + 1j * yz
    omega = xw + 1j * yw
    d = alpha * (np.abs(zeta) ** 2 + np.abs(omega) ** 2) / 2
    e1 = np.exp(alpha * zeta * omega - d)
    e2 = np.exp(alpha * zeta * np.conj(omega) - d)
    RR = 0.5 * (e1 + e2).real
    RI = 0.5 * (e1 - e2).imag
    IR = 0.5 * (e1 + e2).imag
    II = 0.5 * (e2 - e1).real
    return real_quat(RR) + IR[..., None] * Iz - RI[..., None] * Lw - II[..., None] * qmul(Iz, Lw)


def normalized_kernel(ctx: KernelContext, z) -> SliceFunction:
    """k_z(w) = K_alpha(w, z) exp(-alpha |z|^2 / 2) as a slice function of w."""
    z = as_qarray(z)
    xz, yz, L = slice_arrays(z)
    zeta = complex(xz + 1j * yz)
    scale = np.exp(-ctx.alpha * float(z @ z) / 2)
    zr = abs(zeta)

    def fn(x, y):
        omega = x + 1j * y
        # w^n conj(z)^n = (Re w^n + U Im w^n)(Re zeta^n - L Im zeta^n): the stem
        # collects the Re w^n and Im w^n parts
        if zr * ctx.alpha * np.max(np.abs(omega), initial=0.0) > ctx.cap:
            raise OverflowError("probe too far out for the kernel series")
        RR, RI, IR, II = _power_sums(omega, np.full(omega.shape, zeta), ctx)
        a = real_quat(RR) - RI[..., None] * L
        b = real_quat(IR) - II[..., None] * L
        return scale * a, scale * b

    return SliceFunction(StemFunction(fn), "regular_poly")


def monomial_norm(alpha: float, n: int) -> float:
    """||z^n||^2 = n! / alpha^n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    v = lgamma(n + 1) - n * log(alpha)
    if v > 709.0:
        raise OverflowError(f"n!/alpha^n overflows for n={n}, alpha={alpha}")
    return float(np.exp(v))


def _monomial_norms(alpha: float, n: int) -> np.ndarray:
    return np.array([monomial_norm(alpha, k) for k in range(n)])


def inner_product(f: RegularPolynomial, g: RegularPolynomial, alpha: float) -> Quaternion:
    """<f, g> = int conj(g) f dlambda_alpha = sum_n conj(b_n) a_n n!/alpha^n."""
    a = f.coeffs
    b = g.coeffs
    n = min(len(a), len(b))
    w = _monomial_norms(alpha, n)
    terms = qmul(qconj(b[:n]), a[:n]) * w[:, None]
    return Quaternion.from_array(terms.sum(axis=0))


def fock_norm(f: RegularPolynomial, alpha: float) -> float:
    w = _monomial_norms(alpha, len(f.coeffs))
    return float(np.sqrt(np.sum(np.sum(f.coeffs**2, axis=1) * w)))


def _add(f: RegularPolynomial, g: RegularPolynomial, sign: float, unit=None) -> RegularPolynomial:
    n = max(len(f.coeffs), len(g.coeffs))
    a = np.zeros((n, 4))
    a[: len(f.coeffs)] += f.coeffs
    b = g.coeffs if unit is None else qmul(g.coeffs, as_qarray(unit))
    a[: len(b)] += sign * b
    return RegularPolynomial(a)


def polarization_inner_product(f: RegularPolynomial, g: RegularPolynomial, alpha: float,
                               norm: Optional[Callable] = None) -> Quaternion:
    """<f, g> rebuilt from the eight norms ||f +/- g u||, u in {1, i, j, k}."""
    norm = (lambda h: fock_norm(h, alpha)) if norm is None else norm
    out = np.zeros(4)
    for comp, unit in enumerate((None, I_UNIT, J_UNIT, K_UNIT)):
        d = norm(_add(f, g, 1.0, unit)) ** 2 - norm(_add(f, g, -1.0, unit)) ** 2
        out[comp] = d / 4
    return Quaternion.from_array(out)


def _weighted_moduli(f: SliceFunction, p: float, alpha: float, n_gh: int):
    """Stem of f at the Gauss-Hermite nodes for the weight exp(-p alpha |z|^2 / 2)."""
    if p <= 0:
        raise ValueError("p must be positive")
    z, w = gauss_plane(n_gh, p * alpha / 2)
    a, b = f.stem(z.real, z.imag)
    return a, b, w


def slice_p_norm(f: SliceFunction, p: float, alpha: float, I=I_UNIT,
                 rule: QuadratureRule = QuadratureRule()) -> float:
    """||f||_{p,alpha,I} = [(alpha p / 2 pi) int_{C_I} |f e^{-alpha|z|^2/2}|^p dm]^(1/p)."""
    a, b, w = _weighted_moduli(f, p, alpha, rule.n_gh)
    vals = qabs(a + qmul(as_qarray(I), b)) ** p
    _check_window(vals, w, rule)
    return float(((alpha * p / (2 * np.pi)) * (w @ vals)) ** (1 / p))


def global_p_norm(f: SliceFunction, p: float, alpha: float,
                  rule: QuadratureRule = QuadratureRule()) -> float:
    """||f||_{p,alpha} = [(alpha p / pi) int_H |f e^{-alpha|z|^2/2}|^p dV]^(1/p).

    With an antipodal sphere rule this is (sum_J sigma_J ||f||_{p,alpha,J}^p)^(1/p);
    the stem is evaluated once and reused on every node slice.
    """
    sr = sphere_rule(rule.sphere)
    a, b, w = _weighted_moduli(f, p, alpha, rule.n_gh)
    acc = 0.0
    for u, s in zip(sr.units, sr.weights):
        vals = qabs(a + qmul(u, b)) ** p
        _check_window(vals, w, rule)
        acc += s * (alpha * p / (2 * np.pi)) * (w @ vals)
    return float(acc ** (1 / p))


def _check_window(vals, w, rule: QuadratureRule) -> None:
    from .quad_measure import _window_check

    _window_check(np.asarray(vals), w, rule.n_gh, rule.window_tol)


def pointwise_bound_check(f: SliceFunction, p: float, alpha: float, samples, norm: Optional[float] = None,
                          rule: QuadratureRule = QuadratureRule()) -> float:
    """max over samples of |f(z)| e^{-alpha|z|^2/2} / ||f||_{p,alpha}; the bound is 4."""
    samples = np.atleast_2d(as_qarray(samples))
    if norm is None:
        norm = global_p_norm(f, p, alpha, rule)
    vals = qabs(f(samples)) * np.exp(-alpha * np.sum(samples**2, axis=1) / 2)
    ratio = float(vals.max() / norm)
    if ratio > 4:
        raise AssertionError(f"pointwise bound violated: ratio {ratio:.3f} > 4")
    return ratio
