"""Randomized verification suite and tightness scans.

Every trial draws its own PCG64 stream from ``(seed, trial index)`` so trials
are independent and results do not depend on execution order.  Checker
errors and violations are recorded, never raised.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import core, transforms
from .certificate import BoundCertificate
from .core import IDENTITY_TOL
from .errors import CapExceeded, GrussError, UnknownInequality
from .instance import (
    D_CAP,
    K_CAP,
    N_CAP,
    ModuleInstance,
    check_caps,
    complex_normal,
    random_instance,
    trial_rng,
)
from .module import SCHWARZ_CHECKS, normalize, unit_vector

SEED_MAX = 2**64 - 1
WITNESS_TOL = 1e-9
SINGULAR_MARGIN = 1e-6
FLAVOR_CHOICES = ("cstar", "hstar", "both")


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    trials: int = 1000
    k_max: int = 4
    d_max: int = 4
    n_max: int = 8
    flavor: str = "both"
    slack_scale: float = 1.0
    strict_radius_mode: bool = False

    def __post_init__(self):
        if not 0 <= self.seed <= SEED_MAX:
            raise ValueError(f"seed must lie in 0..2**64-1, got {self.seed}")
        if self.trials < 0:
            raise ValueError(f"trials must be nonnegative, got {self.trials}")
        for name, value, cap in (("k_max", self.k_max, K_CAP), ("d_max", self.d_max, D_CAP), ("n_max", self.n_max, N_CAP)):
            if not 1 <= value <= cap:
                raise CapExceeded(f"{name}={value} outside 1..{cap}")
        if self.flavor not in FLAVOR_CHOICES:
            raise ValueError(f"flavor must be one of {FLAVOR_CHOICES}, got {self.flavor!r}")
        if not (self.slack_scale > 0 and math.isfinite(self.slack_scale)):
            raise ValueError(f"slack_scale must be positive and finite, got {self.slack_scale}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SuiteConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def flavors(self) -> tuple[str, ...]:
        return ("cstar", "hstar") if self.flavor == "both" else (self.flavor,)


@dataclass
class Tally:
    """Running aggregate for one inequality (max reductions only)."""

    trials: int = 0
    passes: int = 0
    max_tightness: float | None = None
    max_residual: float | None = None
    argmax: str | None = None
    failures: list[str] = field(default_factory=list)

    MAX_FAILURES = 5

    def add(self, passed: bool, digest: str, *, tightness=None, residual=None, note: str = "") -> None:
        self.trials += 1
        self.passes += bool(passed)
        if tightness is not None and (self.max_tightness is None or tightness > self.max_tightness):
            self.max_tightness = float(tightness)
            self.argmax = digest
        if residual is not None and (self.max_residual is None or residual > self.max_residual):
            self.max_residual = float(residual)
            if tightness is None:
                self.argmax = digest
        if not passed and len(self.failures) < self.MAX_FAILURES:
            self.failures.append(f"{digest}: {note}" if note else digest)

    @property
    def all_passed(self) -> bool:
        return self.passes == self.trials


@dataclass
class SuiteReport:
    config: SuiteConfig
    kind: str = "verify"
    entries: dict[str, Tally] = field(default_factory=dict)
    wall_time: float = 0.0
    target: str | None = None

    def tally(self, name: str) -> Tally:
        return self.entries.setdefault(name, Tally())

    @property
    def all_passed(self) -> bool:
        return all(t.all_passed for t in self.entries.values())

    @property
    def total_trials(self) -> int:
        return sum(t.trials for t in self.entries.values())


@dataclass(frozen=True)
class TrialParams:
    """Scalar draws shared by the weighted-mean and transform checks."""

    alphas: np.ndarray
    omega1: float
    omega2: float
    m: int


# -- per-inequality evaluators -----------------------------------------------


def _radii(inst: ModuleInstance, flavor: str):
    return (inst.r, inst.s) if inst.flavor == flavor else (None, None)


def _eval_mean_square(inst, prm, cfg):
    return core.check_gruss_mean_square(inst.p, inst.xs, inst.ys, inst.a, inst.b, slack_scale=cfg.slack_scale)


def _eval_radius(inst, prm, cfg):
    r, s = _radii(inst, "cstar")
    return core.check_gruss_radius(inst.p, inst.xs, inst.ys, inst.a, inst.b, r, s, slack_scale=cfg.slack_scale)


def _eval_weighted_mean(inst, prm, cfg):
    r, _ = _radii(inst, "cstar")
    return core.check_weighted_mean(inst.p, prm.alphas, inst.xs, inst.a, r, slack_scale=cfg.slack_scale)


def _eval_algebra(inst, prm, cfg):
    # The algebra as a module over itself: use the first part of each vector.
    return core.check_algebra_gruss(
        inst.p, inst.xs[:, 0], inst.ys[:, 0], inst.a[0], inst.b[0], slack_scale=cfg.slack_scale
    )


def _eval_fourier_pair(inst, prm, cfg):
    return transforms.check_fourier_pair_bound(
        inst.xs, inst.ys, prm.omega1, prm.m, inst.a, inst.b,
        strict=cfg.strict_radius_mode, slack_scale=cfg.slack_scale,
    )


def _eval_mellin_pair(inst, prm, cfg):
    return transforms.check_mellin_pair_bound(
        inst.xs, inst.ys, prm.m, inst.a, inst.b, strict=cfg.strict_radius_mode, slack_scale=cfg.slack_scale
    )


def _eval_two_frequency(inst, prm, cfg):
    return transforms.check_two_frequency_bound(
        inst.xs, inst.ys, prm.omega1, prm.omega2, prm.m, inst.a, inst.b,
        strict=cfg.strict_radius_mode, slack_scale=cfg.slack_scale,
    )


def _eval_fourier_mean(inst, prm, cfg):
    r, _ = _radii(inst, "cstar")
    return transforms.fourier_mean_approx(inst.xs, prm.omega1, prm.m, inst.a, r, slack_scale=cfg.slack_scale).as_bound()


def _eval_mellin_mean(inst, prm, cfg):
    r, _ = _radii(inst, "cstar")
    return transforms.mellin_mean_approx(inst.xs, prm.m, inst.a, r, slack_scale=cfg.slack_scale).as_bound()


def _eval_first_moment(inst, prm, cfg):
    r, _ = _radii(inst, "cstar")
    return transforms.mu_certificates(inst.xs, inst.a, r, slack_scale=cfg.slack_scale)[0]


def _eval_second_moment(inst, prm, cfg):
    r, _ = _radii(inst, "cstar")
    return transforms.mu_certificates(inst.xs, inst.a, r, slack_scale=cfg.slack_scale)[1]


def _eval_trace(inst, prm, cfg):
    r, s = _radii(inst, "hstar")
    return core.check_trace_gruss(inst.p, inst.xs, inst.ys, inst.a, inst.b, r, s, slack_scale=cfg.slack_scale)


def _eval_trace_refined(inst, prm, cfg):
    r, s = _radii(inst, "hstar")
    return core.check_trace_gruss_refined(inst.p, inst.xs, inst.ys, inst.a, inst.b, r, s, slack_scale=cfg.slack_scale)


def _eval_trace_spread(inst, prm, cfg):
    r, _ = _radii(inst, "hstar")
    return core.check_trace_gruss_spread(inst.p, inst.xs, inst.ys, inst.a, r, slack_scale=cfg.slack_scale)


Evaluator = Callable[[ModuleInstance, TrialParams, SuiteConfig], BoundCertificate]

CSTAR_BOUNDS: dict[str, Evaluator] = {
    "3.1": _eval_mean_square,
    "3.8": _eval_radius,
    "3.10": _eval_weighted_mean,
    "3.1i": _eval_algebra,
    "4.4": _eval_fourier_pair,
    "4.8": _eval_mellin_pair,
    "4.10": _eval_two_frequency,
    "4.12": _eval_fourier_mean,
    "4.15": _eval_mellin_mean,
    "4.16": _eval_first_moment,
    "4.17": _eval_second_moment,
}
HSTAR_BOUNDS: dict[str, Evaluator] = {
    "5.2": _eval_trace,
    "5.7": _eval_trace_refined,
    "5.13": _eval_trace_spread,
}
BOUNDS: dict[str, Evaluator] = {**CSTAR_BOUNDS, **HSTAR_BOUNDS}
IDENTITY_IDS = ("2.7", "2.8", "3.2")


def bound_flavor(ineq_id: str) -> str:
    return "hstar" if ineq_id in HSTAR_BOUNDS else "cstar"


# -- trial sampling ----------------------------------------------------------


def _nonsingular_omega(rng: np.random.Generator, m: int) -> float:
    # Keep omega*m away from multiples of pi, where the closed-form
    # geometric sum is singular.
    while True:
        omega = float(rng.uniform(0.0, math.pi))
        if abs(math.sin(omega * m)) > SINGULAR_MARGIN:
            return omega


def sample_trial(rng: np.random.Generator, cfg: SuiteConfig) -> tuple[ModuleInstance, TrialParams]:
    k = int(rng.integers(1, cfg.k_max + 1))
    d = int(rng.integers(1, cfg.d_max + 1))
    n = int(rng.integers(1, cfg.n_max + 1))
    inst = random_instance(rng, k, d, n, "cstar")
    m = int(rng.integers(1, n + 1))
    alphas = complex_normal(rng, n)
    omega1 = _nonsingular_omega(rng, m)
    omega2 = float(rng.uniform(0.0, math.pi))
    return inst, TrialParams(alphas, omega1, omega2, m)


def log_uniform(rng: np.random.Generator, lo: float = 1e-3, hi: float = 1e3) -> float:
    return float(10.0 ** rng.uniform(math.log10(lo), math.log10(hi)))


# -- witness families ----------------------------------------------------------
# Each builds a two-point instance on which the named bound is attained.


def _witness_direction(rng, k: int, d: int, flavor: str) -> np.ndarray:
    return normalize(complex_normal(rng, d, k, k), flavor)


def _pm(centre, radius, e):
    return np.stack([centre + radius * e, centre - radius * e])


def _witness(ineq_id: str, rng: np.random.Generator, k: int, d: int) -> tuple[ModuleInstance, TrialParams]:
    flavor = bound_flavor(ineq_id)
    if ineq_id == "3.1i":
        d = 1
    a = complex_normal(rng, d, k, k)
    b = complex_normal(rng, d, k, k)
    r, s = log_uniform(rng), log_uniform(rng)
    if ineq_id == "3.1i":
        e = unit_vector(k, 1, "cstar")
    else:
        e = _witness_direction(rng, k, d, flavor)
    n = 2
    m = int(rng.integers(1, n + 1))
    omega1 = _nonsingular_omega(rng, m)
    omega2 = _nonsingular_omega(rng, m)
    alphas = complex_normal(rng, n)
    xs, ys = _pm(a, r, e), _pm(b, s, e)

    # Undo the transform weights so the weighted tuples are the plain witness.
    if ineq_id == "4.4":
        ys = np.conj(transforms.phases(omega1, m, n))[:, None, None, None] * ys
    elif ineq_id == "4.10":
        xs = np.conj(transforms.phases(omega1, m, n))[:, None, None, None] * xs
        ys = np.conj(transforms.phases(omega2, m, n))[:, None, None, None] * ys
    elif ineq_id == "4.8":
        ys = ys / transforms.mellin_weights(m, n)[:, None, None, None]
    elif ineq_id in ("3.10", "4.12"):
        w = alphas if ineq_id == "3.10" else transforms.phases(omega1, m, n)
        u = w - w.mean()
        xs = a + r * (np.conj(u) / np.abs(u))[:, None, None, None] * e
    elif ineq_id == "4.15":
        m = 2
        xs = np.stack([a - r * e, a + r * e])
    p = np.full(n, 0.5)
    inst = ModuleInstance.build(p, xs, ys, a, b, flavor)
    return inst, TrialParams(alphas, omega1, omega2, m)


SCAN_IDS = tuple(BOUNDS)


# -- running -----------------------------------------------------------------


def _record_cert(tally: Tally, digest: str, fn: Callable[[], BoundCertificate], *, witness: bool = False) -> None:
    try:
        cert = fn()
    except (GrussError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        tally.add(False, digest, note=f"{type(exc).__name__}: {exc}")
        return
    passed = cert.passed and cert.monotone
    note = f"lhs={cert.lhs:.17g} rhs={list(cert.rhs_chain)}"
    if witness:
        passed = passed and abs(cert.tightness - 1.0) <= WITNESS_TOL
        note += f" tightness={cert.tightness:.17g}"
    tally.add(passed, digest, tightness=cert.tightness, note=note)


def _record_residual(tally: Tally, digest: str, fn: Callable[[], float]) -> None:
    try:
        res = fn()
    except (GrussError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        tally.add(False, digest, note=f"{type(exc).__name__}: {exc}")
        return
    tally.add(res <= IDENTITY_TOL, digest, residual=res, note=f"residual={res:.3e}")


def _run_identities(report: SuiteReport, inst: ModuleInstance, prm: TrialParams, digest: str) -> None:
    p, xs, ys, a, b = inst.p, inst.xs, inst.ys, inst.a, inst.b
    _record_residual(report.tally("2.7"), digest, lambda: core.mean_deviation_residual(p, prm.alphas, xs, a, normalized=True))
    _record_residual(report.tally("2.8"), digest, lambda: core.translation_residual(p, xs, ys, a, b, normalized=True))
    _record_residual(report.tally("3.2"), digest, lambda: core.double_sum_residual(p, xs, ys, normalized=True))


def _schwarz_all(check, inst: ModuleInstance, slack_scale: float) -> BoundCertificate:
    # One certificate per index; keep the worst (largest tightness), failing first.
    certs = [check(x, y, slack_scale=slack_scale) for x, y in zip(inst.xs, inst.ys)]
    return max(certs, key=lambda c: (not c.passed, c.tightness))


def _run_schwarz(report: SuiteReport, inst: ModuleInstance, cfg: SuiteConfig, digest: str) -> None:
    for name, check in SCHWARZ_CHECKS.items():
        _record_cert(report.tally(name), digest, lambda: _schwarz_all(check, inst, cfg.slack_scale))
    _record_cert(report.tally("3.4"), digest, lambda: core.check_gruss_schwarz(inst.p, inst.xs, inst.ys, slack_scale=cfg.slack_scale))


def _run_bounds(report, bounds: Mapping[str, Evaluator], inst, prm, cfg, digest) -> None:
    for name, ev in bounds.items():
        _record_cert(report.tally(name), digest, lambda: ev(inst, prm, cfg))


def _run_witness(report, name: str, rng, inst: ModuleInstance, cfg: SuiteConfig) -> None:
    flavor = "cstar" if name == "3.8" else "hstar"
    r, s = log_uniform(rng), log_uniform(rng)
    e = _witness_direction(rng, inst.k, inst.d, flavor)
    p, xs, ys = core.sharpness_witness_c(inst.a, inst.b, r, s, e, flavor=flavor)
    w = ModuleInstance.build(p, xs, ys, inst.a, inst.b, flavor)
    check = core.check_gruss_radius if flavor == "cstar" else core.check_trace_gruss
    _record_cert(
        report.tally(f"witness-{name}"),
        w.digest(),
        lambda: check(p, xs, ys, inst.a, inst.b, r, s, slack_scale=cfg.slack_scale),
        witness=True,
    )


def run_trial(report: SuiteReport, cfg: SuiteConfig, index: int) -> None:
    rng = trial_rng(cfg.seed, index)
    inst, prm = sample_trial(rng, cfg)
    digest = inst.digest()
    _run_identities(report, inst, prm, digest)
    _run_schwarz(report, inst, cfg, digest)
    flavors = cfg.flavors()
    if "cstar" in flavors:
        _run_bounds(report, CSTAR_BOUNDS, inst, prm, cfg, digest)
    if "hstar" in flavors:
        _run_bounds(report, HSTAR_BOUNDS, inst.with_flavor("hstar"), prm, cfg, digest)
    if "cstar" in flavors:
        _run_witness(report, "3.8", rng, inst, cfg)
    if "hstar" in flavors:
        _run_witness(report, "5.2", rng, inst, cfg)


def run_suite(config: SuiteConfig, trial_indices: Iterable[int] | None = None) -> SuiteReport:
    """Run every check on ``config.trials`` random instances."""
    start = time.perf_counter()
    report = SuiteReport(config, "verify")
    indices = range(config.trials) if trial_indices is None else trial_indices
    for t in indices:
        run_trial(report, config, t)
    report.wall_time = time.perf_counter() - start
    return report


def tightness_scan(config: SuiteConfig, inequality_id: str) -> SuiteReport:
    """Supremum of tightness for one bound over random and witness instances.

    Entries: ``<id>/random`` (random restarts), ``<id>/witness`` (the
    attaining family) and ``<id>`` (both combined).
    """
    if inequality_id not in BOUNDS:
        raise UnknownInequality(f"unknown inequality {inequality_id!r}; choose from {', '.join(SCAN_IDS)}")
    start = time.perf_counter()
    report = SuiteReport(config, "scan", target=inequality_id)
    ev = BOUNDS[inequality_id]
    flavor = bound_flavor(inequality_id)
    combined = report.tally(inequality_id)
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        inst, prm = sample_trial(rng, config)
        inst = inst.with_flavor(flavor)
        digest = inst.digest()
        _record_cert(report.tally(f"{inequality_id}/random"), digest, lambda: ev(inst, prm, config))
        _record_cert(combined, digest, lambda: ev(inst, prm, config))
        w, wprm = _witness(inequality_id, rng, inst.k, inst.d)
        wdigest = w.digest()
        _record_cert(report.tally(f"{inequality_id}/witness"), wdigest, lambda: ev(w, wprm, config), witness=True)
        _record_cert(combined, wdigest, lambda: ev(w, wprm, config))
    report.wall_time = time.perf_counter() - start
    return report


def witness_certificate(ineq_id: str, k: int, d: int, r: float, s: float, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Certificate of the two-point sharpness instance with zero centres and the
    canonical unit direction."""
    if ineq_id not in ("3.8", "5.2"):
        raise UnknownInequality(f"no witness for {ineq_id!r}; choose 3.8 or 5.2")
    check_caps(k, d, 2)
    flavor = "cstar" if ineq_id == "3.8" else "hstar"
    zero = np.zeros((d, k, k), dtype=np.complex128)
    e = unit_vector(k, d, flavor)
    p, xs, ys = core.sharpness_witness_c(zero, zero, r, s, e, flavor=flavor)
    check = core.check_gruss_radius if flavor == "cstar" else core.check_trace_gruss
    return check(p, xs, ys, zero, zero, r, s, slack_scale=slack_scale)
