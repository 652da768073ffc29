"""The Gaussian projection P_alpha, its positive companion Q_alpha, the adjoint
formula, Schur-test constants, boundedness threshold probes and the range
preimage construction."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log
from typing import Callable, Optional, Sequence

import numpy as np

from .fock_core import KernelContext, kernel_eval
from .quad_measure import QuadratureRule, gauss_plane, integrate_global
from .quat_core import (
    I_UNIT,
    as_qarray,
    join_components,
    orthogonal_unit,
    qabs,
    qconj,
    qmul,
    real_quat,
    split_components,
)
from .slice_fn import SliceFunction, StemFunction, extend_from_slice, from_intrinsic

_CHUNK = 256


def slice_kernel_integral(F: Callable, zeta, a: float, b: float, n_gh: int = 48) -> np.ndarray:
    """int_C exp(a zeta conj(w)) F(w) (b/pi) exp(-b|w|^2) dm(w) for each target zeta.

    F is complex-valued and vectorised; it may return extra trailing axes
    (several integrands at once), which are carried through.  The Gaussian is
    recentred at c = a zeta / (2b), where the kernel-times-weight peaks:
        exponent = a^2|zeta|^2/(4b) + i a Im(zeta conj(u)) - b|u|^2,  w = c + u,
    so the quadrature sees a unit-modulus phase instead of a growing exponential.
    """
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    shape = zeta.shape
    zeta = zeta.ravel()
    u, wts = gauss_plane(n_gh, b)
    out = None
    for s in range(0, len(zeta), _CHUNK):
        zc = zeta[s:s + _CHUNK, None]
        c = a * zc / (2 * b)
        phase = np.exp(1j * a * np.imag(zc * np.conj(u[None, :])))
        vals = np.asarray(F(c + u[None, :]), dtype=complex)
        extra = vals.shape[2:]
        pref = np.exp(a * a * np.abs(zc[:, 0]) ** 2 / (4 * b)) * (b / np.pi)
        block = np.einsum("pn...,pn,n->p...", vals, phase, wts) * pref.reshape((-1,) + (1,) * len(extra))
        if out is None:
            out = np.empty((len(zeta),) + extra, dtype=complex)
        out[s:s + _CHUNK] = block
    return out.reshape(shape + out.shape[1:])


def _split_fn(f: SliceFunction, I, J):
    def FG(w):
        F, G = split_components(f.on_slice(w, I), I, J)
        return np.stack([F, G], axis=-1)

    return FG


def project_on_slice(f: SliceFunction, alpha: float, z, I=I_UNIT, J=None, n_gh: int = 48,
                     a: Optional[float] = None, b: Optional[float] = None) -> np.ndarray:
    """P_alpha f at points z (complex coordinates) of C_I, computed on C_I alone.

    For slice f the global projection restricted to C_I equals the one-slice
    projection of the splitting components: P(F + G J) = P F + (P G) J.
    The optional (a, b) replace the kernel and weight parameters (used by the
    adjoint formula); both default to alpha.
    """
    J = orthogonal_unit(I) if J is None else J
    a = alpha if a is None else a
    b = alpha if b is None else b
    FG = slice_kernel_integral(_split_fn(f, I, J), z, a, b, n_gh)
    return join_components(FG[..., 0], FG[..., 1], I, J)


def apply_P(f: SliceFunction, alpha: float, rule: QuadratureRule = QuadratureRule(), I=I_UNIT) -> SliceFunction:
    """P_alpha f as a slice function: project on one slice, then extend."""
    J = orthogonal_unit(I)
    n = rule.n_gh

    def on_I(z):
        return project_on_slice(f, alpha, z, I, J, n)

    g = extend_from_slice(on_I, I)
    return SliceFunction(g.stem, "regular_poly")


def apply_P_global(f: SliceFunction, alpha: float, q, rule: QuadratureRule = QuadratureRule()) -> np.ndarray:
    """Cross-check route: P_alpha f(q) by sphere-times-slice quadrature of K(q, w) f(w)."""
    q = np.atleast_2d(as_qarray(q))
    ctx = KernelContext(alpha)

    def g(w):
        K = kernel_eval(ctx, q[:, None, :], w[None, :, :])
        return np.moveaxis(qmul(K, f(w)[None, :, :]), 0, 1)

    return integrate_global(g, alpha, rule, check=False)


def apply_Q(f: Callable, alpha: float, rule: QuadratureRule = QuadratureRule()) -> Callable:
    """Q_alpha f(q) = int |K_alpha(q, w)| f(w) dlambda_alpha(w) for nonnegative f.

    f maps quaternion arrays to nonnegative reals.
    """
    ctx = KernelContext(alpha)

    def Qf(q):
        q = np.atleast_2d(as_qarray(q))

        def g(w):
            vals = np.asarray(f(w), dtype=float)
            if np.any(vals < -1e-14):
                raise ValueError("Q_alpha needs a nonnegative function")
            K = qabs(kernel_eval(ctx, q[:, None, :], w[None, :, :]))
            return (K * vals[None, :]).T

        return integrate_global(g, alpha, rule, check=False)

    return Qf


def gaussian_factor(c: float) -> SliceFunction:
    """The intrinsic function q -> exp(c |q|^2)."""
    return from_intrinsic(lambda z: np.exp(c * np.abs(z) ** 2) + 0j)


def adjoint_P_formula(f: SliceFunction, alpha: float, beta: float,
                      rule: QuadratureRule = QuadratureRule(), I=I_UNIT) -> SliceFunction:
    """Adjoint of P_alpha on L^2(lambda_beta):
        P* f(z) = (alpha/beta) e^{(beta-alpha)|z|^2} int e_*^{alpha z conj(w)} f(w) dlambda_beta(w).
    """
    J = orthogonal_unit(I)
    n = rule.n_gh

    def on_I(z):
        z = np.asarray(z, dtype=complex)
        v = project_on_slice(f, alpha, z, I, J, n, a=alpha, b=beta)
        return (alpha / beta) * np.exp((beta - alpha) * np.abs(z) ** 2)[..., None] * v

    return extend_from_slice(on_I, I)


def inner_product_L2(f: SliceFunction, g: SliceFunction, beta: float,
                     rule: QuadratureRule = QuadratureRule()) -> np.ndarray:
    """<f, g>_beta = int conj(g) f dlambda_beta over H (quaternion array)."""
    return integrate_global(lambda w: qmul(qconj(g(w)), f(w)), beta, rule, check=False)


def gauss_mod(x: float, k: int, coeff=None) -> SliceFunction:
    """f_{x,k}(q) = exp(-x|q|^2) q^k (times an optional right constant)."""
    return from_intrinsic(lambda z: np.exp(-x * np.abs(z) ** 2) * z**k, coeff)


def projected_gauss_mod_coeff(alpha: float, x: float, k: int) -> float:
    """P_alpha f_{x,k} = (alpha/(alpha+x))^(k+1) q^k."""
    return (alpha / (alpha + x)) ** (k + 1)


# --- Schur test ---------------------------------------------------------------


@dataclass
class SchurReport:
    alpha: float
    beta: float
    p: float
    balanced: bool
    delta: Optional[float]
    constants: dict
    exponent_gaps: dict
    sampled: dict = field(default_factory=dict)

    @property
    def max_constant(self) -> float:
        return max(self.constants.values()) if self.constants else np.inf


def schur_constants(alpha: float, beta: float, p: float) -> SchurReport:
    """Closed-form Schur constants with test function h(z) = exp(delta |z|^2).

    For p > 1, delta = alpha/(2q) and, for real z (Gaussian identity),
        int |K(z,w)| h(w)^q dlambda_alpha(w) = alpha/(alpha-q delta) * exp(alpha^2|z|^2/(4(alpha-q delta)))
        int |K(z,w)| (alpha/beta) e^{(beta-alpha)|w|^2} h(z)^p dlambda_beta(z)
            = alpha/(beta-p delta) * exp((beta-alpha+alpha^2/(4(beta-p delta)))|w|^2).
    Both exponents must reproduce q delta and p delta and both constants equal 2
    exactly when p alpha = 2 beta.  For p = 1 the Fubini route gives
    int |K(z,w)| dlambda_beta(z) (alpha/beta) e^{(beta-alpha)|w|^2}
        = (alpha/beta) exp((beta-alpha+alpha^2/(4beta))|w|^2).
    """
    if p < 1:
        raise ValueError("the Schur test needs p >= 1")
    balanced = abs(p * alpha - 2 * beta) <= 1e-12 * max(1.0, p * alpha)
    if p == 1:
        c = alpha / beta
        gap = beta - alpha + alpha**2 / (4 * beta)
        return SchurReport(alpha, beta, p, balanced, None, {"fubini": c}, {"fubini": gap})
    q = p / (p - 1)
    delta = alpha / (2 * q)
    consts, gaps = {}, {}
    if alpha - q * delta > 0:
        consts["first"] = alpha / (alpha - q * delta)
        gaps["first"] = alpha**2 / (4 * (alpha - q * delta)) - q * delta
    else:
        consts["first"] = np.inf
        gaps["first"] = np.inf
    if beta - p * delta > 0:
        consts["second"] = alpha / (beta - p * delta)
        gaps["second"] = beta - alpha + alpha**2 / (4 * (beta - p * delta)) - p * delta
    else:
        consts["second"] = np.inf
        gaps["second"] = np.inf
    return SchurReport(alpha, beta, p, balanced, delta, consts, gaps)


def schur_verify(alpha: float, beta: float, p: float, z_samples: Sequence[float] = (0.0, 0.5, 1.0, 1.5),
                 rule: QuadratureRule = QuadratureRule(n_gh=64)) -> SchurReport:
    """Closed forms plus quadrature of the two Schur integrals at real sample points.

    The sampled ratios (integral / h-power) must stay <= 2 up to quadrature error.
    Unbalanced parameters return the report with balanced=False and nonzero
    exponent gaps, which is the counterexample mode.
    """
    rep = schur_constants(alpha, beta, p)
    ctx = KernelContext(alpha)
    first, second = [], []
    for z in z_samples:
        zq = real_quat(z)
        if p == 1:
            # (alpha/beta) e^{(beta-alpha) z^2} int |K(z, w)| dlambda_beta(w)
            v = integrate_global(lambda w: qabs(kernel_eval(ctx, zq, w)), beta, rule, check=False)
            second.append(float((alpha / beta) * np.exp((beta - alpha) * z * z) * v))
            continue
        q = p / (p - 1)
        d = rep.delta
        v1 = integrate_global(lambda w: qabs(kernel_eval(ctx, zq, w)) * np.exp(q * d * np.sum(w * w, -1)),
                              alpha, rule, check=False)
        first.append(float(v1 / np.exp(q * d * z * z)))
        v2 = integrate_global(lambda w: qabs(kernel_eval(ctx, w, zq)) * np.exp(p * d * np.sum(w * w, -1)),
                              beta, rule, check=False)
        second.append(float((alpha / beta) * np.exp((beta - alpha) * z * z) * v2 / np.exp(p * d * z * z)))
    rep.sampled = {"z": list(map(float, z_samples)), "first": first, "second": second}
    return rep


# --- threshold probes ---------------------------------------------------------


@dataclass
class OperatorProbeReport:
    p: float
    alpha: float
    beta: float
    inequality: str
    verdict: str  # "bounded" or "unbounded"
    expected: str
    rows: list  # (route, k, x, ratio)
    growth: dict  # route/x -> growth factor per doubling of k

    @property
    def correct(self) -> bool:
        return self.verdict == self.expected


def _log_lp_norm_gauss_mod(p: float, beta: float, x: float, k: float) -> float:
    """log of int |e^{-x|z|^2} z^k|^p dlambda_beta = beta Gamma(pk/2+1) / (beta+px)^(pk/2+1)."""
    return log(beta) + lgamma(p * k / 2 + 1) - (p * k / 2 + 1) * log(beta + p * x)


def log_ratio_direct(p: float, alpha: float, beta: float, x: float, k: int) -> float:
    """log ||P_alpha f_{x,k}||_{L^p(beta)} / ||f_{x,k}||_{L^p(beta)}."""
    c = (k + 1) * log(alpha / (alpha + x))
    num = p * c + lgamma(p * k / 2 + 1) - (p * k / 2) * log(beta)  # int |c z^k|^p dlambda_beta
    return (num - _log_lp_norm_gauss_mod(p, beta, x, k)) / p


def log_ratio_adjoint(p: float, alpha: float, beta: float, x: float, k: int) -> float:
    """log ||P* f_{x,k}||_{L^q(beta)} / ||f_{x,k}||_{L^q(beta)}, 1/p + 1/q = 1.

    P* f_{x,k} = (alpha/(beta+x))^(k+1) e^{(beta-alpha)|z|^2} z^k, whose q-norm is
    finite only when beta - q(beta - alpha) > 0.
    """
    q = p / (p - 1)
    bq = beta - q * (beta - alpha)
    if bq <= 0:
        return np.inf
    num = q * (k + 1) * log(alpha / (beta + x)) + log(beta) + lgamma(q * k / 2 + 1) - (q * k / 2 + 1) * log(bq)
    return (num - _log_lp_norm_gauss_mod(q, beta, x, k)) / q


def log_ratio_sup(alpha: float, beta: float, a: float) -> float:
    """p = 1: log |P* f_a (a)| with f_a = e_*^{alpha z a}/|e_*^{alpha z a}|, ||f_a||_inf = 1."""
    return log(alpha / beta) + (beta - alpha + alpha**2 / (4 * beta)) * a * a


def _verdict_from(seqs: dict, ks: Sequence[int], tol: float) -> tuple[str, dict]:
    growth = {}
    bounded = True
    for key, vals in seqs.items():
        vals = np.asarray(vals)
        if not np.all(np.isfinite(vals)):
            growth[key] = np.inf
            bounded = False
            continue
        gf = float(np.exp(vals[-1] - vals[-2]))
        growth[key] = gf
        if gf >= tol:
            bounded = False
    return ("bounded" if bounded else "unbounded"), growth


def threshold_probe(alpha: float, beta: float, p: float, bank: Optional[Sequence[float]] = None,
                    ks: Sequence[int] = tuple(2**j for j in range(11)),
                    growth_tol: float = 1.05) -> OperatorProbeReport:
    """Ratio sequences ||P f||/||f|| over the bank f_{x,k} from the closed forms.

    Routes: direct (P applied to f_{x,k}); adjoint (P* on L^q); for p > 2 the
    same two routes for the reduced problem (q, alpha, beta - q(beta - alpha));
    for p = 1 the sup-norm route over f_a with a = sqrt(k); for p < 1 the k = 0
    sequence with x = 2^j.  The verdict is "bounded" when every sequence grows
    by less than growth_tol over the last doubling of k (a heuristic).
    """
    bank = [0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0] if bank is None else list(bank)
    expected = "bounded" if (p >= 1 and abs(p * alpha - 2 * beta) <= 1e-12 * max(1.0, p * alpha)) else "unbounded"
    ineq = f"p*alpha = {p * alpha:g} vs 2*beta = {2 * beta:g}"
    rows, seqs = [], {}

    def add_route(name, fn, xs):
        for x in xs:
            vals = []
            for k in ks:
                lr = fn(x, k)
                vals.append(lr)
                rows.append((name, k, x, float(np.exp(lr)) if np.isfinite(lr) and lr < 700 else np.inf))
            seqs[f"{name}@x={x:g}"] = vals

    if p < 1:
        for j, k in enumerate(ks):
            xj = 2.0**j
            lr = log_ratio_direct(p, alpha, beta, xj, 0)
            rows.append(("small_p", 0, xj, float(np.exp(lr))))
        seqs["small_p"] = [log_ratio_direct(p, alpha, beta, 2.0**j, 0) for j in range(len(ks))]
        verdict, growth = _verdict_from(seqs, ks, growth_tol)
        verdict = "unbounded"  # p < 1 is excluded outright
        return OperatorProbeReport(p, alpha, beta, "p >= 1 required", verdict, expected, rows, growth)

    add_route("direct", lambda x, k: log_ratio_direct(p, alpha, beta, x, k), bank)
    if p == 1:
        add_route("sup", lambda x, k: log_ratio_sup(alpha, beta, np.sqrt(k)), [0.0])
    else:
        xs = list(bank)
        x0 = _adjoint_critical_x(p, alpha, beta)
        if x0 is not None:
            xs.append(x0)
        add_route("adjoint", lambda x, k: log_ratio_adjoint(p, alpha, beta, x, k), xs)
        if p > 2:
            q = p / (p - 1)
            b2 = beta - q * (beta - alpha)
            if b2 <= 0:
                seqs["reduced"] = [np.inf, np.inf]
            else:
                add_route("reduced_direct", lambda x, k: log_ratio_direct(q, alpha, b2, x, k), bank)
                add_route("reduced_adjoint", lambda x, k: log_ratio_adjoint(q, alpha, b2, x, k), bank)
    verdict, growth = _verdict_from(seqs, ks, growth_tol)
    return OperatorProbeReport(p, alpha, beta, ineq, verdict, expected, rows, growth)


def _adjoint_critical_x(p: float, alpha: float, beta: float) -> Optional[float]:
    """Minimiser x0 of the quadratic that decides the adjoint route, when positive."""
    d = p * alpha - beta
    if d <= 0:
        return None
    x0 = (p * alpha**2 - 2 * beta * d) / (2 * d)
    return float(x0) if x0 > 0 else None


# --- range preimage -------------------------------------------------------------


def range_preimage(f: SliceFunction, alpha: float, beta: float, gamma: float, tol: float = 1e-12) -> SliceFunction:
    """g(z) = (alpha/gamma) f((alpha/gamma) z) exp((beta-alpha)|z|^2), so that P_alpha g = f.

    Requires alpha^2/gamma = 2 alpha - beta.
    """
    if abs(alpha**2 / gamma - (2 * alpha - beta)) > tol * max(1.0, abs(2 * alpha - beta)):
        raise ValueError("parameters must satisfy alpha^2/gamma = 2 alpha - beta")
    c = alpha / gamma
    scaled = f.dilate(c).scale(c)
    return gaussian_factor(beta - alpha).star(scaled)
