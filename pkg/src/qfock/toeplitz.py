"""Finite sections of Toeplitz operators in the orthonormal monomial basis, with
slice-function or discrete-measure symbols, the complex embedding of quaternion
matrices, adjoint symbols, Berezin symbols, boundedness/compactness proxies and
the slice isometries."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .berezin import BerezinContext, berezin
from .bmo import averaging_function as disk_average
from .quad_measure import (
    DiscreteMeasure,
    WindowError,
    _window_check,
    averaging_function as box_average,
    gauss_plane,
    kernel_quantity,
)
from .quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    SphereRuleSpec,
    as_qarray,
    complex_to_quat,
    join_components,
    orthogonal_unit,
    qabs,
    qconj,
    qmul,
    real_quat,
    slice_arrays,
    sphere_rule,
    split_components,
)
from .slice_fn import RegularPolynomial, SliceFunction, extend_from_slice


class TruncationWarning(UserWarning):
    """Probe radius too large for the basis size to be trusted."""


class MeasureConditionError(ValueError):
    """The kernel-integrability surrogate for a measure symbol failed."""


# --- quaternion matrices ----------------------------------------------------------


@dataclass(frozen=True)
class QuatMatrix:
    """n x m quaternion matrix acting by left multiplication on coordinate columns,
    so it commutes with right scalar multiplication."""

    entries: np.ndarray  # (n, m, 4)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 3 or e.shape[-1] != 4:
            raise ValueError("entries must have shape (n, m, 4)")
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def shape(self) -> tuple:
        return self.entries.shape[:2]

    @classmethod
    def identity(cls, n: int) -> "QuatMatrix":
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n), 0] = 1.0
        return cls(e)

    @classmethod
    def diag(cls, q, n: int) -> "QuatMatrix":
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n)] = as_qarray(q)
        return cls(e)

    @classmethod
    def from_chi(cls, C: np.ndarray) -> "QuatMatrix":
        n = C.shape[0] // 2
        A, B = C[:n, :n], C[:n, n:]
        return cls(np.stack([A.real, A.imag, B.real, B.imag], axis=-1))

    def chi(self) -> np.ndarray:
        """Blockwise q = a + b j -> [[a, b], [-conj b, conj a]] as [[A, B], [-conj B, conj A]]."""
        e = self.entries
        A = e[..., 0] + 1j * e[..., 1]
        B = e[..., 2] + 1j * e[..., 3]
        return np.block([[A, B], [-B.conj(), A.conj()]])

    def adjoint(self) -> "QuatMatrix":
        return QuatMatrix(qconj(np.swapaxes(self.entries, 0, 1)))

    def __matmul__(self, other):
        if isinstance(other, QuatMatrix):
            return QuatMatrix(qmul(self.entries[:, :, None, :], other.entries[None, :, :, :]).sum(axis=1))
        v = as_qarray(other)
        return qmul(self.entries, v[None, :, :]).sum(axis=1)

    def __add__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.entries + other.entries)

    def __sub__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.entries - other.entries)

    def frobenius(self) -> float:
        return float(np.sqrt(np.sum(self.entries**2)))


def operator_norm(T: QuatMatrix) -> float:
    """Largest singular value of the complex embedding (equal to the quaternion norm)."""
    return float(np.linalg.svd(T.chi(), compute_uv=False)[0])


def singular_values(T: QuatMatrix) -> np.ndarray:
    """Quaternion singular values: those of chi(T) come in equal pairs; one of each pair."""
    return np.linalg.svd(T.chi(), compute_uv=False)[::2]


def min_eigenvalue(T: QuatMatrix) -> float:
    C = T.chi()
    return float(np.linalg.eigvalsh((C + C.conj().T) / 2)[0])


# --- basis -------------------------------------------------------------------------


def basis_values(z, N: int, alpha: float, damp: bool = False) -> np.ndarray:
    """e_n(z) = sqrt(alpha^n/n!) z^n for n < N at complex z, shape z.shape + (N,).

    With damp=True every value carries the factor exp(-alpha|z|^2/2), which
    keeps all entries at most 1 in modulus.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (N,), dtype=complex)
    cur = np.exp(-alpha * np.abs(z) ** 2 / 2) if damp else np.ones(z.shape, dtype=complex)
    cur = cur.astype(complex)
    for n in range(N):
        if n > 0:
            cur = cur * z * np.sqrt(alpha / n)
        out[..., n] = cur
    return out


@dataclass
class ToeplitzTruncation:
    symbol: str
    alpha: float
    N: int
    matrix: QuatMatrix


def toeplitz_matrix_fn(f: SliceFunction, alpha: float, N: int, n_gh: Optional[int] = None, I=I_UNIT,
                       symbol: str = "function", window_tol: float = 1e-6) -> ToeplitzTruncation:
    """Entries <f * e_n, e_m>_alpha computed on the slice C_I.

    With f = F + G J on C_I and e_n real-coefficient, f * e_n = e_n f there, and
        <f * e_n, e_m> = int conj(e_m) e_n F dlambda + (int conj(e_m) e_n G dlambda) J,
    which does not depend on I.
    """
    n_gh = max(40, N + 16) if n_gh is None else n_gh
    Ia = as_qarray(I)
    J = orthogonal_unit(Ia)
    z, w = gauss_plane(n_gh, alpha)
    w = w * alpha / np.pi
    F, G = split_components(f.on_slice(z, Ia), Ia, J)
    E = basis_values(z, N, alpha)
    try:
        _window_check(np.abs(E[:, -1]) ** 2 * (np.abs(F) + np.abs(G)), w, n_gh, window_tol)
    except WindowError as exc:
        raise WindowError(f"basis size {N} needs more nodes than {n_gh}: {exc}") from None
    EH = E.conj().T
    M0 = EH @ (E * (w * F)[:, None])
    M1 = EH @ (E * (w * G)[:, None])
    return ToeplitzTruncation(symbol, alpha, N, QuatMatrix(join_components(M0, M1, Ia, J)))


def measure_condition(mu: DiscreteMeasure, alpha: float, probes) -> np.ndarray:
    """sum_a w_a |K(z, a)|^2 exp(-alpha|a|^2) at the probes; raises when not finite."""
    probes = np.atleast_2d(as_qarray(probes))
    try:
        v = kernel_quantity(mu, alpha, 2.0, probes) * np.exp(alpha * np.sum(probes**2, axis=1))
    except OverflowError as exc:
        raise MeasureConditionError(str(exc)) from None
    if not np.all(np.isfinite(v)):
        raise MeasureConditionError("kernel integral is not finite at some probe")
    return v


def _measure_entries(points: np.ndarray, weights: np.ndarray, alpha: float, N: int) -> np.ndarray:
    x, y, L = slice_arrays(points)
    zeta = x + 1j * y
    V = basis_values(zeta, N, alpha, damp=True)  # e_n(a) exp(-alpha|a|^2/2)
    prod = V.conj()[:, :, None] * V[:, None, :] * weights[:, None, None]  # (atoms, m, n)
    re = prod.real.sum(axis=0)
    im = np.einsum("amn,ac->mnc", prod.imag, L)
    return real_quat(re) + im


def toeplitz_matrix_measure(mu: DiscreteMeasure, alpha: float, N: int, probes=None,
                            symbol: str = "measure") -> ToeplitzTruncation:
    """Entries sum_a w_a conj(e_m(a)) e_n(a) exp(-alpha|a|^2), exact finite sums."""
    if probes is None:
        probes = real_quat(np.array([0.0, 1.0, -1.0]))
    measure_condition(mu, alpha, probes)
    if len(mu) == 0:
        return ToeplitzTruncation(symbol, alpha, N, QuatMatrix(np.zeros((N, N, 4))))
    return ToeplitzTruncation(symbol, alpha, N, QuatMatrix(_measure_entries(mu.points, mu.weights, alpha, N)))


def density_atoms(f: SliceFunction, alpha: float, n_gh: int = 48, sphere: SphereRuleSpec = SphereRuleSpec(),
                  normalized: bool = True):
    """Atoms and real weights discretising c f dV, where dV = dm(C_J^+) dsigma(J).

    With normalized=True, c = 2 alpha/pi, the constant for which the measure
    symbol reproduces the function symbol; c = 1 gives the bare volume measure.
    """
    sr = sphere_rule(sphere)
    z, w = gauss_plane(n_gh, alpha)
    c = 2 * alpha / np.pi if normalized else 1.0
    pts, ws = [], []
    for u, s in zip(sr.units, sr.weights):
        vals = f.on_slice(z, u)
        if np.abs(vals[:, 1:]).max() > 1e-12:
            raise ValueError("density must be real-valued")
        pts.append(complex_to_quat(z, u))
        # half of the full-slice integral lies in C_J^+; the sphere rule folds the rest
        ws.append(0.5 * s * c * w * np.exp(alpha * np.abs(z) ** 2) * vals[:, 0])
    return np.vstack(pts), np.concatenate(ws)


def density_measure(f: SliceFunction, alpha: float, n_gh: int = 48, sphere: SphereRuleSpec = SphereRuleSpec(),
                    normalized: bool = True) -> DiscreteMeasure:
    """density_atoms as a positive DiscreteMeasure (f must be nonnegative)."""
    p, w = density_atoms(f, alpha, n_gh, sphere, normalized)
    return DiscreteMeasure(p, w)


def toeplitz_matrix_density(f: SliceFunction, alpha: float, N: int, n_gh: int = 48,
                            normalized: bool = True) -> ToeplitzTruncation:
    """Measure-route matrix for the (possibly signed) real density f."""
    p, w = density_atoms(f, alpha, n_gh, normalized=normalized)
    return ToeplitzTruncation("density", alpha, N, QuatMatrix(_measure_entries(p, w, alpha, N)))


# --- adjoints and Berezin symbols ------------------------------------------------


def adjoint_symbol(f: SliceFunction, I=I_UNIT, J=None) -> SliceFunction:
    """g with T_g = (T_f)^*: if f = A + B J on C_I then g = C + D J with
    C(z) = conj(A(z)) and D(z) = -B(conj z)."""
    Ia = as_qarray(I)
    J = orthogonal_unit(Ia) if J is None else as_qarray(J)

    def on_I(z):
        z = np.asarray(z, dtype=complex)
        A, _ = split_components(f.on_slice(z, Ia), Ia, J)
        _, Bc = split_components(f.on_slice(np.conj(z), Ia), Ia, J)
        return join_components(np.conj(A), -Bc, Ia, J)

    return extend_from_slice(on_I, Ia)


def kernel_coefficients(z, N: int, alpha: float) -> np.ndarray:
    """Coefficients of the truncated normalised kernel k_z in the basis e_n:
    conj(e_n(z)) exp(-alpha|z|^2/2) as quaternions on the slice of z."""
    z = as_qarray(z)
    x, y, L = slice_arrays(z)
    V = basis_values(np.asarray(x - 1j * y), N, alpha, damp=True)
    return real_quat(V.real) + V.imag[..., None] * L[..., None, :]


def quadratic_form(M: QuatMatrix, v: np.ndarray) -> np.ndarray:
    """v^* M v for a quaternion column v."""
    return qmul(qconj(v), M @ v).sum(axis=0)


def berezin_symbol(T: Union[QuatMatrix, ToeplitzTruncation], alpha: float, probes, f: Optional[SliceFunction] = None,
                   ctx: Optional[BerezinContext] = None) -> list[dict]:
    """<T k_z, k_z>_alpha at each probe, and for a function symbol f also f~(z) and the gap."""
    M = T.matrix if isinstance(T, ToeplitzTruncation) else T
    N = M.n
    probes = np.atleast_2d(as_qarray(probes))
    limit = 0.6 * np.sqrt(N / alpha)
    radii = np.linalg.norm(probes, axis=1)
    if np.any(radii > limit):
        warnings.warn(f"probe radius {radii.max():.2f} exceeds 0.6 sqrt(N/alpha) = {limit:.2f}", TruncationWarning)
    ft = None
    if f is not None:
        ft = berezin(f, BerezinContext(alpha) if ctx is None else ctx, check=False)(probes)
    rows = []
    for k, z in enumerate(probes):
        form = quadratic_form(M, kernel_coefficients(z, N, alpha))
        row = {"z": z.tolist(), "form": form}
        if ft is not None:
            row["berezin"] = ft[k]
            row["gap"] = form - ft[k]
        rows.append(row)
    return rows


# --- boundedness / compactness proxies -----------------------------------------

Symbol = Union[SliceFunction, DiscreteMeasure]


@dataclass
class ProxyReport:
    norms: dict  # N -> operator norm of the truncation
    berezin_ring: list  # (R, sup of the Berezin-type quantity on |z| = R)
    box_ring: list  # (R, sup of the box / disk average on |z| = R)
    kz_decay: dict  # direction label -> ||T k_{2R z0}|| / ||T k_{R z0}||
    singular_tail: float  # sigma_min / sigma_max at the largest N
    verdicts: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        v = self.verdicts
        return (v["bounded_norms"] == v["bounded_berezin"] == v["bounded_box"]
                and v["compact_kz"] == v["compact_berezin"] == v["compact_box"])

    @property
    def bounded(self) -> bool:
        return self.verdicts["bounded_norms"]

    @property
    def compact(self) -> bool:
        return self.verdicts["compact_kz"]


def _matrix(symbol: Symbol, alpha: float, N: int) -> QuatMatrix:
    if isinstance(symbol, DiscreteMeasure):
        return toeplitz_matrix_measure(symbol, alpha, N).matrix
    return toeplitz_matrix_fn(symbol, alpha, N).matrix


_DIRECTIONS = {
    "real": np.array([1.0, 0, 0, 0]),
    "i": np.array([0.0, 1, 0, 0]),
    "(1+j)/sqrt2": np.array([1.0, 0, 1, 0]) / np.sqrt(2),
    "(1+k)/sqrt2": np.array([1.0, 0, 0, 1]) / np.sqrt(2),
}


def _ring(R: float, units=(I_UNIT, J_UNIT, K_UNIT), n_angles: int = 49) -> np.ndarray:
    th = np.linspace(0, np.pi, n_angles)
    return np.vstack([complex_to_quat(R * np.exp(1j * th), as_qarray(u)) for u in units])


def bounded_compact_proxy(symbol: Symbol, alpha: float = 1.0, N_list: Sequence[int] = (16, 32, 64),
                          ring_radii: Sequence[float] = (1.0, 2.0, 4.0, 8.0), kz_radii: tuple = (2.0, 4.0),
                          r: float = 1.0, growth_tol: float = 1.2, bounded_margin: float = 1.25,
                          decay_factor: float = 0.25, kz_factor: float = 0.5) -> ProxyReport:
    """Three desk-scale readings of boundedness and compactness.

    bounded_norms: truncation norm grows by less than growth_tol over the last doubling of N.
    bounded_berezin / bounded_box: the ring sup at the largest radius is at most
        bounded_margin times the max over the smaller radii.
    compact_berezin / compact_box: the ring sup at the largest radius is below
        decay_factor times the overall max.
    compact_kz: ||T k_z|| drops by more than kz_factor from R to 2R along every direction.
    """
    norms = {}
    mats = {}
    for N in N_list:
        mats[N] = _matrix(symbol, alpha, N)
        norms[N] = operator_norm(mats[N])
    M = mats[N_list[-1]]
    Nmax = N_list[-1]

    def berezin_sup(R):
        pts = _ring(R)
        if isinstance(symbol, DiscreteMeasure):
            return float(kernel_quantity(symbol, alpha, 2.0, pts).max())
        return float(qabs(berezin(symbol, BerezinContext(alpha), check=False)(pts)).max())

    def box_sup(R):
        pts = _ring(R)
        if isinstance(symbol, DiscreteMeasure):
            return float(max(box_average(symbol, p, r) for p in pts))
        return float(qabs(disk_average(symbol, r)(pts)).max())

    bring = [(float(R), berezin_sup(R)) for R in ring_radii]
    xring = [(float(R), box_sup(R)) for R in ring_radii]

    kz = {}
    for label, z0 in _DIRECTIONS.items():
        vals = []
        for R in kz_radii:
            v = kernel_coefficients(R * z0, Nmax, alpha)
            vals.append(float(np.sqrt(np.sum((M @ v) ** 2))))
        kz[label] = vals[1] / vals[0] if vals[0] > 0 else 0.0
    sv = singular_values(M)

    def bounded_ring(rows):
        inner = max(v for _, v in rows[:-1])
        return rows[-1][1] <= bounded_margin * inner + 1e-300

    def vanishing_ring(rows):
        top = max(v for _, v in rows)
        return rows[-1][1] <= decay_factor * top if top > 0 else True

    Ns = list(N_list)
    rep = ProxyReport(norms, bring, xring, kz, float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0)
    rep.verdicts = {
        "bounded_norms": norms[Ns[-1]] <= growth_tol * norms[Ns[-2]] + 1e-12,
        "bounded_berezin": bounded_ring(bring),
        "bounded_box": bounded_ring(xring),
        "compact_kz": all(v < kz_factor for v in kz.values()),
        "compact_berezin": vanishing_ring(bring),
        "compact_box": vanishing_ring(xring),
    }
    return rep


# --- slice isometries -----------------------------------------------------------

ISOMETRIES = ("S_I", "S_J", "S_IJ")


def _isometry_unit(which: str, I, J) -> np.ndarray:
    Ia, Ja = as_qarray(I), as_qarray(J)
    if abs(float(Ia @ Ja)) > 1e-12:
        raise ValueError("J must be orthogonal to I")
    if which == "S_I":
        return Ia
    if which == "S_J":
        return Ja
    if which == "S_IJ":
        return qmul(Ia, Ja)
    raise ValueError(f"unknown isometry {which!r}; choose from {ISOMETRIES}")


def slice_isometry_apply(which: str, g: RegularPolynomial, I=I_UNIT, J=J_UNIT) -> RegularPolynomial:
    """S_u g = u * g (coefficients left-multiplied by u in {I, J, IJ}).

    On C_I with g = H + K J this is (H - K J) I for u = I.
    """
    u = _isometry_unit(which, I, J)
    return RegularPolynomial(qmul(u, g.coeffs))


def slice_isometry_matrix(which: str, N: int, I=I_UNIT, J=J_UNIT) -> QuatMatrix:
    return QuatMatrix.diag(_isometry_unit(which, I, J), N)
