"""Batch experiment runner: named experiments driven by JSON configs, CSV tables
and JSON verdicts.

    qfock list [--json]
    qfock run CONFIG.json | EXPERIMENT [--out DIR] [--seed N]

Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error.
The environment variable QFOCK_OUTPUT_DIR overrides the output directory.
"""
from __future__ import annotations

import argparse
import csv
import difflib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import berezin as bz
from . import bmo
from . import fock_core as fc
from . import proj_ops as po
from . import quad_measure as qm
from . import slice_fn as sf
from . import toeplitz as tp
from .quat_core import (
    I_UNIT,
    J_UNIT,
    K_UNIT,
    Quaternion,
    as_qarray,
    complex_to_quat,
    qabs,
    qconj,
    qmul,
    random_quaternions,
    random_units,
    real_quat,
    slice_arrays,
)

OUTPUT_ENV = "QFOCK_OUTPUT_DIR"
EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


# --- symbol loading ---------------------------------------------------------------


def _sawtooth(x):
    return (2 / np.pi) * np.arcsin(np.sin(x))


BUILTIN_FUNCTIONS: dict[str, Callable[[], sf.SliceFunction]] = {
    "one": lambda: sf.constant(1.0),
    "re": lambda: sf.from_intrinsic(lambda z: z.real + 0j),
    "abs2": lambda: sf.from_intrinsic(lambda z: np.abs(z) ** 2 + 0j),
    "conj": lambda: sf.from_intrinsic(np.conj),
    "z2": lambda: sf.monomial(2),
    "cos_re": lambda: sf.from_intrinsic(lambda z: 1 + np.cos(z.real) + 0j),
    "bump": lambda: sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2) + 0j),
    "step": lambda: sf.from_intrinsic(lambda z: np.tanh(z.real) + 0j),
    "oscillator": lambda: sf.from_intrinsic(lambda z: np.sin(z.real) * np.cos(z.imag) + 0j),
    "log_growth": lambda: sf.from_intrinsic(lambda z: np.log1p(np.abs(z) ** 2) + 0j),
    "sawtooth": lambda: sf.from_intrinsic(lambda z: _sawtooth(z.real) + 0j),
    "exp": lambda: sf.from_intrinsic(np.exp),
    "const_i": lambda: sf.constant(Quaternion(0, 1, 0, 0)),
    "const_j": lambda: sf.constant(Quaternion(0, 0, 1, 0)),
    "const_k": lambda: sf.constant(Quaternion(0, 0, 0, 1)),
    "bump_j": lambda: sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2 / 2) + 0j, Quaternion(0, 0, 1, 0)),
    "fixed_point": lambda: bz.exponential_fixed_point(1.0),
}


def _lattice(L: int = 12) -> qm.DiscreteMeasure:
    m, n = np.meshgrid(np.arange(-L, L + 1), np.arange(0, L + 1), indexing="ij")
    return qm.DiscreteMeasure.from_slice((m + 1j * n).ravel(), 1.0)


_K = np.arange(1, 21, dtype=float)
BUILTIN_MEASURES: dict[str, Callable[[], qm.DiscreteMeasure]] = {
    "atom": lambda: qm.DiscreteMeasure(np.zeros((1, 4)), np.ones(1)),
    "lattice": _lattice,
    "inv_sq": lambda: qm.DiscreteMeasure(real_quat(_K), 1.0 / _K**2),
    "growing": lambda: qm.DiscreteMeasure(real_quat(_K), _K),
    "sphere_ring": lambda: qm.DiscreteMeasure(
        np.vstack([complex_to_quat(np.array([2.0 + 1.0j]), u) for u in (I_UNIT, J_UNIT, K_UNIT)]), np.ones(3)),
}


def load_function(spec) -> sf.SliceFunction:
    """Function from a JSON description, a builtin name, or a path to such a file."""
    if isinstance(spec, str):
        if spec in BUILTIN_FUNCTIONS:
            return BUILTIN_FUNCTIONS[spec]()
        return load_function(_read_json(spec))
    kind = spec.get("kind")
    if kind == "builtin":
        name = spec.get("name")
        if name not in BUILTIN_FUNCTIONS:
            raise ConfigError(f"unknown builtin function {name!r}{_suggest(name, BUILTIN_FUNCTIONS)}")
        return BUILTIN_FUNCTIONS[name]()
    if kind == "poly":
        return sf.RegularPolynomial(spec["coeffs"])
    if kind == "gauss_mod":
        coeff = spec.get("coeff")
        return po.gauss_mod(float(spec["x"]), int(spec["k"]), None if coeff is None else Quaternion(*coeff))
    raise ConfigError(f"unknown function kind {kind!r}")


def load_measure(spec) -> qm.DiscreteMeasure:
    if isinstance(spec, str):
        if spec in BUILTIN_MEASURES:
            return BUILTIN_MEASURES[spec]()
        return load_measure(_read_json(spec))
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in BUILTIN_MEASURES:
            raise ConfigError(f"unknown builtin measure {name!r}{_suggest(name, BUILTIN_MEASURES)}")
        return BUILTIN_MEASURES[name]()
    try:
        return qm.DiscreteMeasure.from_json(spec)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad measure description: {exc}") from None


def _read_json(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"input file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _suggest(name, options) -> str:
    close = difflib.get_close_matches(str(name), list(options), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


# --- experiment plumbing --------------------------------------------------------


@dataclass
class Result:
    header: list
    rows: list
    verdict: dict
    ok: bool
    extra: dict = field(default_factory=dict)  # file name -> JSON-able payload


@dataclass
class Experiment:
    name: str
    description: str
    anchor: str
    fn: Callable[[dict, np.random.Generator], Result]


EXPERIMENTS: dict[str, Experiment] = {}


def experiment(name: str, description: str, anchor: str):
    def deco(fn):
        EXPERIMENTS[name] = Experiment(name, description, anchor, fn)
        return fn

    return deco


def _num(x) -> str:
    return repr(float(x))


def _check(rows, anchor, name, value, tol):
    ok = bool(np.isfinite(value) and value <= tol)
    rows.append([anchor, name, _num(value), _num(tol), int(ok)])
    return ok


@experiment("identity-suite", "algebraic and kernel identities with oracle tolerances", "core-identities")
def _identity_suite(params, rng):
    n = int(params.get("samples", 1000))
    rows, oks = [], []
    a, b, c = (random_quaternions(rng, n) for _ in range(3))
    oks.append(_check(rows, "quaternion-algebra", "associativity",
                      np.abs(qmul(qmul(a, b), c) - qmul(a, qmul(b, c))).max(), 1e-13 * 10))
    oks.append(_check(rows, "quaternion-algebra", "conjugation_antihomomorphism",
                      np.abs(qconj(qmul(a, b)) - qmul(qconj(b), qconj(a))).max(), 1e-13 * 10))
    oks.append(_check(rows, "quaternion-algebra", "norm_multiplicative",
                      np.max(np.abs(qabs(qmul(a, b)) - qabs(a) * qabs(b)) / (qabs(a) * qabs(b))), 1e-13))
    f = sf.RegularPolynomial(random_quaternions(rng, 4))
    g = sf.from_intrinsic(lambda z: np.exp(-np.abs(z) ** 2 / 3) * z + 0j, Quaternion(0.3, 0, 1, -0.5))
    zs = rng.normal(size=20) + 1j * rng.normal(size=20)
    dev = 0.0
    for u in random_units(rng, 5):
        route1 = sf.star_product(f, g).on_slice(zs, u)
        route2 = sf.star_slicewise(f, g, u, zs)
        dev = max(dev, float(np.abs(route1 - route2).max()))
    oks.append(_check(rows, "star-product-dual-route", "stem_vs_slice_formula", dev, 1e-12))
    fi = f.on_slice
    ext = sf.extend_from_slice(lambda z: fi(z, I_UNIT), I_UNIT)
    q = random_quaternions(rng, 50)
    oks.append(_check(rows, "representation-extension", "roundtrip", np.abs(ext(q) - f(q)).max(), 1e-12))
    ctx = fc.KernelContext(1.0)
    oks.append(_check(rows, "kernel-identities", "K(z,0)=1",
                      np.abs(fc.kernel_eval(ctx, q, np.zeros(4)) - real_quat(np.ones(len(q)))).max(), 1e-12))
    val = fc.kernel_eval(ctx, Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0)).arr
    oks.append(_check(rows, "kernel-identities", "K1(i,j)=cosh1-k sinh1",
                      np.abs(val - np.array([np.cosh(1), 0, 0, -np.sinh(1)])).max(), 1e-12))
    h = sf.RegularPolynomial(random_quaternions(rng, 5))
    alpha = 1.0
    z0 = 0.5 * q[0]
    oks.append(_check(rows, "kernel-identities", "reproducing",
                      np.abs(fc.inner_product(h, kernel_polynomial(z0, alpha), alpha).arr - h(z0)).max(), 1e-10))
    ip = fc.polarization_inner_product(h, h, alpha)
    oks.append(_check(rows, "slice-global-isometry", "global_vs_slice_p2",
                      abs(fc.global_p_norm(h, 2, alpha) - fc.slice_p_norm(h, 2, alpha)), 1e-10))
    oks.append(_check(rows, "slice-global-isometry", "polarization",
                      abs(ip.re - fc.fock_norm(h, alpha) ** 2), 1e-10))
    ok = all(oks)
    return Result(["anchor", "check", "deviation", "tolerance", "passed"], rows, {"passed": ok, "checks": len(oks)}, ok)


def kernel_polynomial(z, alpha: float, n_terms: int = 40) -> sf.RegularPolynomial:
    """Truncated K_alpha(., z) = sum_n w^n alpha^n conj(z)^n / n! as a polynomial."""
    zc = qconj(as_qarray(z))
    coeffs = [real_quat(1.0)]
    for n in range(1, n_terms):
        coeffs.append(qmul(coeffs[-1], zc) * (alpha / n))
    return sf.RegularPolynomial(np.array(coeffs))


_DEFAULT_PROBE_CASES = [[2, 1, 1], [1, 2, 1], [4, 1, 2], [2, 2, 1], [1.5, 1, 1], [3, 1, 2]]


@experiment("probe-projection", "ratio sequences of the Gaussian projection on the f_{x,k} bank", "projection-threshold")
def _probe_projection(params, rng):
    cases = params.get("cases", _DEFAULT_PROBE_CASES)
    rows, verdicts, ok = [], {}, True
    for p, alpha, beta in cases:
        rep = po.threshold_probe(alpha, beta, p)
        for route, k, x, ratio in rep.rows:
            rows.append([_num(p), _num(alpha), _num(beta), int(k), _num(x), _num(ratio), route])
        verdicts[f"p={p},alpha={alpha},beta={beta}"] = {"verdict": rep.verdict, "expected": rep.expected,
                                                       "inequality": rep.inequality}
        ok &= rep.correct
    return Result(["p", "alpha", "beta", "k", "x", "ratio", "route"], rows, {"cases": verdicts, "passed": ok}, ok)


@experiment("schur", "Schur-test constants with exponential test functions", "schur-test")
def _schur(params, rng):
    cases = params.get("cases", [[2, 1, 1], [1, 2, 1], [4, 1, 2]])
    rows, ok = [], True
    for p, alpha, beta in cases:
        rep = po.schur_verify(alpha, beta, p)
        for name, c in rep.constants.items():
            gap = rep.exponent_gaps[name]
            rows.append([_num(p), _num(alpha), _num(beta), _num(rep.delta if rep.delta else 0.0), name, _num(c), _num(gap)])
            if rep.balanced:
                ok &= abs(c - 2) <= 1e-9 and abs(gap) <= 1e-9
        samp = rep.sampled["first"] + rep.sampled["second"]
        if rep.balanced:
            ok &= max(samp) <= 2 + 1e-6
    return Result(["p", "alpha", "beta", "delta", "inequality", "constant", "exponent_gap"], rows, {"passed": ok}, ok)


@experiment("range-preimage", "explicit preimages under the Gaussian projection", "projection-range")
def _range_preimage(params, rng):
    alpha = float(params.get("alpha", 1.0))
    beta = float(params.get("beta", 0.5))
    gamma = float(params.get("gamma", alpha**2 / (2 * alpha - beta)))
    f = load_function(params.get("function", {"kind": "poly", "coeffs": [[1, 0, 0, 0], [0, 1, 1, 0], [0, 0, 0, 2]]}))
    try:
        g = po.range_preimage(f, alpha, beta, gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    q = random_quaternions(rng, int(params.get("samples", 12)))
    dev = qabs(po.apply_P(g, alpha)(q) - f(q))
    rows = [[i, *map(_num, q[i]), _num(dev[i])] for i in range(len(q))]
    ok = bool(dev.max() <= 1e-8)
    return Result(["probe", "q0", "q1", "q2", "q3", "projection_deviation"], rows,
                  {"max_deviation": float(dev.max()), "passed": ok}, ok)


@experiment("carleson", "kernel-integral and box-mass suprema of a measure", "carleson-equivalence")
def _carleson(params, rng):
    mu = load_measure(params.get("measure", "lattice"))
    alpha = float(params.get("alpha", 1.0))
    p = float(params.get("p", 2.0))
    r = float(params.get("r", 1.0))
    probes = qm.probe_lattice(float(params.get("extent", 4.0)), float(params.get("spacing", 1.0)))
    prof = qm.carleson_profile(mu, alpha, p, probes, r)
    rows = [[k, *map(_num, row[1:5]), _num(row[5]), _num(row[6])] for k, row in enumerate(prof.table)]
    verdict = {"sup_kernel": prof.sup_kernel, "sup_box": prof.sup_box, "ratio": prof.ratio,
               "finite": bool(np.isfinite(prof.sup_kernel) and np.isfinite(prof.sup_box))}
    return Result(["probe", "q0", "q1", "q2", "q3", "kernel_integral", "box_mass"], rows, verdict, verdict["finite"])


@experiment("vanishing-carleson", "decay of kernel integrals and box masses along rings", "vanishing-carleson")
def _vanishing(params, rng):
    mu = load_measure(params.get("measure", "inv_sq"))
    alpha = float(params.get("alpha", 1.0))
    radii = params.get("radii", [1, 2, 4, 8, 16])
    out = []
    for label, u in (("i", I_UNIT), ("j", J_UNIT)):
        for row in qm.vanishing_profile(mu, alpha, 2.0, u, radii, float(params.get("r", 1.0))):
            out.append([label, _num(row["R"]), _num(row["kernel"]), _num(row["box"])])
    rows_i = qm.vanishing_profile(mu, alpha, 2.0, I_UNIT, radii, float(params.get("r", 1.0)))
    verdict = {"vanishing": qm.decay_verdict(rows_i)}
    expected = params.get("expect")
    ok = True if expected is None else verdict["vanishing"] == bool(expected)
    verdict["passed"] = ok
    return Result(["slice", "R", "kernel_integral_sup", "box_mass_sup"], out, verdict, ok)


def _grid(extent=2.0, n=5):
    return bz.probe_points(extent, n)


@experiment("berezin", "sampled Berezin transform of a function", "berezin-transform")
def _berezin(params, rng):
    f = load_function(params.get("function", "abs2"))
    ctx = bz.BerezinContext(float(params.get("alpha", 1.0)))
    pts = _grid(float(params.get("extent", 2.0)), int(params.get("n", 5)))
    vals = bz.berezin(f, ctx)(pts)
    rows = []
    units = 5 * 5
    for k, (pt, v) in enumerate(zip(pts, vals)):
        x, y, _ = slice_arrays(pt)
        rows.append([_num(x), _num(y), k // units, *map(_num, v)])
    return Result(["x", "y", "unit_index", "f0", "f1", "f2", "f3"], rows, {"points": len(rows)}, True)


@experiment("semigroup", "B_alpha B_beta against B_{alpha beta/(alpha+beta)}", "berezin-semigroup")
def _semigroup(params, rng):
    alpha = float(params.get("alpha", 1.0))
    beta = float(params.get("beta", 1.0))
    names = params.get("functions", ["one", "oscillator", "bump", "step", "bump_j"])
    rows, ok = [], True
    for name in names:
        d = bz.semigroup_check(load_function(name), alpha, beta)
        rows.append([name, _num(alpha), _num(beta), _num(d)])
        ok &= d <= 1e-6
    return Result(["function", "alpha", "beta", "deviation"], rows, {"passed": ok}, ok)


@experiment("fixed-points", "fixed points of the Berezin transform", "berezin-fixed-points")
def _fixed_points(params, rng):
    rep = bz.fixed_point_suite(bz.BerezinContext(float(params.get("alpha", 1.0))))
    rows = [["bounded", "constant_deviation", _num(rep.bounded_fixed)]]
    rows += [["bounded", f"oscillation_n={n}", _num(v)] for n, v in zip((1, 4, 16, 64), rep.oscillation)]
    rows += [["harmonic", "deviation", _num(rep.harmonic_dev)],
             ["exponential", "relative_deviation", _num(rep.exponential_dev)],
             ["exponential", "relative_laplacian", _num(rep.exponential_laplacian)]]
    ok = all(rep.verdicts.values())
    return Result(["case", "quantity", "value"], rows, {**rep.verdicts, "passed": ok}, ok)


@experiment("bmo", "mean oscillation, oscillation and average seminorms on a window", "bmo-decomposition")
def _bmo(params, rng):
    f = load_function(params.get("function", "log_growth"))
    r = float(params.get("r", 1.0))
    alpha = float(params.get("alpha", 1.0))
    window = bmo.Window(float(params.get("extent", 4.0)), int(params.get("n", 9)))
    centers = window.centers()
    rows = []
    for k, u in enumerate(window.units):
        mo = bmo.mean_oscillation(f, 1.0, r, centers, u)
        om = bmo._local_oscillation(f, r, centers, u)
        for c, a, b in zip(centers, mo, om):
            rows.append([k, _num(c.real), _num(c.imag), _num(a), _num(b)])
    dec = bmo.decomposition_check(f, r, alpha, window)
    verdict = {"values": dec.values, "all_finite": dec.all_finite,
               "bmo_finite": bmo.bmo_norm(f, 1.0, r, window).finite}
    return Result(["unit_index", "x", "y", "mean_oscillation", "local_oscillation"], rows, verdict, True)


def _symbol_matrix(params, alpha, N):
    if "measure" in params:
        mu = load_measure(params["measure"])
        return tp.toeplitz_matrix_measure(mu, alpha, N), None
    f = load_function(params.get("symbol", "cos_re"))
    return tp.toeplitz_matrix_fn(f, alpha, N), f


@experiment("toeplitz", "truncated Toeplitz matrix, norms and Berezin symbol", "toeplitz-truncation")
def _toeplitz(params, rng):
    alpha = float(params.get("alpha", 1.0))
    N = int(params.get("N", 16))
    T, f = _symbol_matrix(params, alpha, N)
    probes = _grid(0.4 * np.sqrt(N / alpha), 3)
    table = tp.berezin_symbol(T, alpha, probes, f)
    rows = []
    for row in table:
        gap = row.get("gap", np.full(4, np.nan))
        rows.append([*map(_num, row["z"]), *map(_num, row["form"]), _num(np.linalg.norm(gap))])
    sv = tp.singular_values(T.matrix)
    payload = {"N": N, "alpha": alpha, "entries": T.matrix.entries.tolist(),
               "operator_norm": float(sv[0]), "singular_values": sv.tolist()}
    return Result(["q0", "q1", "q2", "q3", "form0", "form1", "form2", "form3", "berezin_gap"], rows,
                  {"operator_norm": float(sv[0])}, True, {"matrix.json": payload})


@experiment("toeplitz-adjoint", "adjoint symbol reproduces the adjoint matrix", "toeplitz-adjoint")
def _toeplitz_adjoint(params, rng):
    alpha = float(params.get("alpha", 1.0))
    N = int(params.get("N", 12))
    f = load_function(params.get("symbol", "const_j"))
    T = tp.toeplitz_matrix_fn(f, alpha, N).matrix
    G = tp.toeplitz_matrix_fn(tp.adjoint_symbol(f), alpha, N).matrix
    dev = (G - T.adjoint()).frobenius()
    ok = dev <= 1e-8
    return Result(["N", "alpha", "frobenius_deviation"], [[N, _num(alpha), _num(dev)]],
                  {"deviation": dev, "passed": bool(ok)}, bool(ok))


EXPECTED_PROXY = {
    "atom": (True, True), "lattice": (True, False), "inv_sq": (True, True), "growing": (False, False),
    "one": (True, False), "bump": (True, True), "re": (False, False), "cos_re": (True, False),
}


@experiment("bounded-compact", "boundedness/compactness proxies on the verdict table", "toeplitz-bounded-compact")
def _bounded_compact(params, rng):
    alpha = float(params.get("alpha", 1.0))
    names = params.get("symbols", list(EXPECTED_PROXY))
    rows, ok = [], True
    for name in names:
        sym = load_measure(name) if name in BUILTIN_MEASURES else load_function(name)
        rep = tp.bounded_compact_proxy(sym, alpha)
        v = rep.verdicts
        row_ok = rep.consistent
        if name in EXPECTED_PROXY:
            row_ok &= (rep.bounded, rep.compact) == EXPECTED_PROXY[name]
        ok &= row_ok
        rows.append([name, *(int(v[k]) for k in ("bounded_norms", "bounded_berezin", "bounded_box",
                                                 "compact_kz", "compact_berezin", "compact_box")), int(row_ok)])
    return Result(["symbol", "bounded_norms", "bounded_berezin", "bounded_box", "compact_kz",
                   "compact_berezin", "compact_box", "agrees"], rows, {"passed": ok}, ok)


# --- config handling ------------------------------------------------------------

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "experiment": {"type": "string"},
        "params": {"type": "object"},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    output_dir: str = "qfock_out"
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config does not match the schema: {exc.message}") from None
        name = data["experiment"]
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}{_suggest(name, EXPERIMENTS)}")
        return cls(name, dict(data.get("params", {})), data.get("output_dir", "qfock_out"), int(data.get("seed", 0)))


def run(config: ExperimentConfig) -> tuple[int, Path]:
    """Run one experiment; writes <name>.csv and <name>.json into the output directory."""
    out = Path(os.environ.get(OUTPUT_ENV) or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    exp = EXPERIMENTS[config.experiment]
    rng = np.random.default_rng(config.seed)
    res = exp.fn(config.params, rng)
    with open(out / f"{exp.name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"# {exp.anchor}"])
        w.writerow(res.header)
        w.writerows(res.rows)
    verdict = {"experiment": exp.name, "anchor": exp.anchor, "seed": config.seed, "ok": bool(res.ok), **res.verdict}
    (out / f"{exp.name}.json").write_text(json.dumps(verdict, indent=2, sort_keys=True, default=_jsonable) + "\n")
    for fname, payload in res.extra.items():
        (out / f"{exp.name}.{fname}").write_text(json.dumps(payload, default=_jsonable) + "\n")
    return (EXIT_OK if res.ok else EXIT_CHECK), out


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def list_experiments() -> list[dict]:
    return [{"name": e.name, "description": e.description, "anchor": e.anchor} for e in EXPERIMENTS.values()]


def _load_config(arg: str, out: str | None, seed: int | None) -> ExperimentConfig:
    p = Path(arg)
    if p.suffix == ".json" or p.is_file():
        data = _read_json(arg)
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    else:
        data = {"experiment": arg}
    if out is not None:
        data["output_dir"] = out
    if seed is not None:
        data["seed"] = seed
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qfock", description="Quaternionic Fock-space experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    pl = sub.add_parser("list", help="list experiments")
    pl.add_argument("--json", action="store_true", help="machine-readable catalogue")
    pr = sub.add_parser("run", help="run an experiment from a config file or by name")
    pr.add_argument("config", help="path to a JSON config, or an experiment name for the defaults")
    pr.add_argument("--out", default=None, help="output directory")
    pr.add_argument("--seed", type=int, default=None)
    pa = sub.add_parser("run-all", help="run every experiment with its defaults; nonzero exit if any check fails")
    pa.add_argument("--out", default=None, help="output directory")
    pa.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    if args.command == "list":
        cat = list_experiments()
        if args.json:
            print(json.dumps(cat, indent=2))
        else:
            width = max(len(e["name"]) for e in cat)
            for e in cat:
                print(f"{e['name']:<{width}}  {e['description']}  [{e['anchor']}]")
        return EXIT_OK
    if args.command == "run-all":
        worst = EXIT_OK
        for name in EXPERIMENTS:
            cfg = _load_config(name, args.out, args.seed)
            code, out = run(cfg)
            print(f"{name}: {'ok' if code == EXIT_OK else 'CHECK FAILED'} -> {out}")
            worst = max(worst, code)
        return worst
    try:
        cfg = _load_config(args.config, args.out, args.seed)
        code, out = run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{cfg.experiment}: {'ok' if code == EXIT_OK else 'CHECK FAILED'} -> {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
