"""Invariant suite: random samplers, individual checks and the combined report.

Each check returns a :class:`CheckResult` holding the measured error and the
limit it was compared against. The acceptance tests call the same checks with
their own sizes, the ``verify`` subcommand runs :func:`verify_suite`.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.constants import hbar

from .dispersion import CircuitParams, Dispersion, difference_residual, dispersion, xy_terms
from .fock import (
    DsfsParams,
    TruncationError,
    build_space,
    commutator_check,
    dsfs_state,
    hamiltonian_deviation,
    oracle_moments,
    similarity_errors,
)
from .moments import MomentVariant, mean_current, normalization_F, variance
from .nri import roundtrip_error

__all__ = [
    "Status",
    "CheckResult",
    "Report",
    "envelope_box",
    "random_circuit",
    "random_lossless",
    "random_state",
    "check_dispersion_identities",
    "check_lossless_limit",
    "check_residual_order",
    "check_similarity",
    "check_hamiltonian",
    "check_commutator",
    "check_oracle_agreement",
    "check_printed_divergence",
    "check_roundtrip_ladder",
    "verify_suite",
]

DispersionFn = Callable[[CircuitParams], Dispersion]


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    EXPECTED_DIVERGENCE = "EXPECTED-DIVERGENCE"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: Status
    measured: float
    limit: float
    detail: str = ""
    seconds: float = 0.0
    at_least: bool = False

    @property
    def ok(self) -> bool:
        return self.status is not Status.FAIL

    def line(self) -> str:
        op = ">=" if self.at_least else "<="
        text = f"{self.status.value:<19} {self.name}: measured={self.measured:.3e} limit {op} {self.limit:.3e}"
        if self.detail:
            text += f" ({self.detail})"
        return text + f" [{self.seconds:.2f}s]"


@dataclass
class Report:
    level: str
    results: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def format(self) -> str:
        lines = [f"verify ({self.level})"]
        lines += [r.line() for r in self.results]
        n_fail = sum(not r.ok for r in self.results)
        lines.append("all checks passed" if self.ok else f"{n_fail} check(s) failed")
        return "\n".join(lines)


def _result(name, measured, limit, t0, detail="", expected=False, at_least=False) -> CheckResult:
    within = measured >= limit if at_least else measured <= limit
    if not within:
        status = Status.FAIL
    else:
        status = Status.EXPECTED_DIVERGENCE if expected else Status.PASS
    return CheckResult(
        name, status, float(measured), float(limit), detail, time.perf_counter() - t0, at_least
    )


# --- samplers --------------------------------------------------------------


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))


def random_circuit(rng: np.random.Generator) -> CircuitParams:
    """Lossy circuit spanning both sides of RG = 1/(omega^2 LC); one loss may be zero."""
    R = _log_uniform(rng, 1e-3, 1e2)
    G = _log_uniform(rng, 1e-4, 1e1)
    pick = rng.integers(6)
    if pick == 0:
        R = 0.0
    elif pick == 1:
        G = 0.0
    return CircuitParams(
        R=R,
        G=G,
        L=_log_uniform(rng, 1e-6, 1e-2),
        C=_log_uniform(rng, 1e-13, 1e-8),
        z0=_log_uniform(rng, 1e-7, 1e-4),
        omega=_log_uniform(rng, 1e6, 1e11),
    )


def random_lossless(rng: np.random.Generator) -> CircuitParams:
    p = random_circuit(rng)
    return CircuitParams(R=0.0, G=0.0, L=p.L, C=p.C, z0=p.z0, omega=p.omega)


# (|alpha| max, |xi| max, n max) tried per truncation; draws are then kept only
# if the truncated state is converged to 1e-12 in norm
_ENVELOPE = {32: (1.5, 0.6, 3), 64: (2.0, 0.8, 5), 128: (2.0, 1.1, 5)}
ENVELOPE_DEFICIT = 1e-12


def envelope_box(N: int) -> tuple[float, float, int]:
    """Parameter box sampled for oracle comparisons at truncation ``N``."""
    usable = [k for k in _ENVELOPE if k <= N]
    if not usable:
        raise ValueError(f"no oracle envelope for N={N} < {min(_ENVELOPE)}")
    return _ENVELOPE[max(usable)]


def random_state(rng: np.random.Generator, N: int, max_tries: int = 200) -> DsfsParams:
    """DSFS parameters inside the convergence envelope of truncation ``N``."""
    a_max, r_max, n_max = envelope_box(N)
    space = build_space(N)
    for _ in range(max_tries):
        p = DsfsParams(
            alpha_mag=float(rng.uniform(0, a_max)),
            theta=float(rng.uniform(-math.pi, math.pi)),
            xi_mag=float(rng.uniform(0, r_max)),
            phi=float(rng.uniform(-math.pi, math.pi)),
            n=int(rng.integers(0, n_max + 1)),
        )
        try:
            dsfs_state(space, p, deficit_tol=ENVELOPE_DEFICIT)
        except TruncationError:
            continue
        return p
    raise RuntimeError(f"no converged draw in {max_tries} tries at N={N}")


# --- checks ----------------------------------------------------------------


def check_dispersion_identities(
    draws: int, rng: np.random.Generator, dispersion_fn: DispersionFn = dispersion, tol: float = 1e-10
) -> list[CheckResult]:
    t0 = time.perf_counter()
    worst_sq = worst_cross = 0.0
    for _ in range(draws):
        p = random_circuit(rng)
        d = dispersion_fn(p)
        x, y = xy_terms(p)
        k = p.G / (p.omega * p.C) + p.R / (p.omega * p.L)
        r = math.hypot(x - y, k)
        worst_sq = max(worst_sq, abs(d.beta**2 - d.sigma**2 - (y - x)) / r)
        worst_cross = max(worst_cross, abs(2 * d.sigma * d.beta - k) / r)
    return [
        _result("beta^2 - sigma^2 = y - x", worst_sq, tol, t0, f"{draws} draws, relative"),
        _result("2 sigma beta = G/(omega C) + R/(omega L)", worst_cross, tol, t0, f"{draws} draws, relative"),
    ]


def check_lossless_limit(
    draws: int, rng: np.random.Generator, dispersion_fn: DispersionFn = dispersion, tol: float = 1e-12
) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(draws):
        p = random_lossless(rng)
        d = dispersion_fn(p)
        ref = 1.0 / (p.omega * math.sqrt(p.L * p.C))
        err = abs(d.beta - ref) / ref
        if d.sigma != 0.0:
            err = math.inf
        worst = max(worst, err)
    return _result("lossless limit sigma = 0, beta = 1/(omega sqrt(LC))", worst, tol, t0, f"{draws} draws")


def _residual_order(p: CircuitParams, rng, steps: int, form: str) -> float:
    # least-squares log-log slope of the per-period peak residual
    d = dispersion(p)
    gamma = abs(d.gamma)
    ell = float(rng.uniform(0, 2)) / gamma
    amp = complex(*rng.normal(size=2))
    dz = 0.1 / gamma * 0.5 ** np.arange(steps + 1)
    res = [max(difference_residual(p, amp, ell, 0.0, h, form=form, peak=True)) for h in dz]
    return float(np.polyfit(np.log(dz), np.log(res), 1)[0])


def check_residual_order(
    points: int, rng: np.random.Generator, steps: int = 6, min_order: float = 1.8
) -> list[CheckResult]:
    """Convergence order of the one-step residual over a dz halving ladder.

    The line form must reach ``min_order`` at every point. The printed field
    pair is reported as an expected divergence while its order stays below 1.5.
    """
    t0 = time.perf_counter()
    circuits = [random_circuit(rng) for _ in range(points)]
    seeds = rng.integers(2**32, size=points)
    line = min(_residual_order(p, np.random.default_rng(s), steps, "line") for p, s in zip(circuits, seeds))
    line_res = _result("difference residual order", line, min_order, t0,
                       f"worst of {points} points, {steps} halvings", at_least=True)
    t1 = time.perf_counter()
    printed = max(
        _residual_order(p, np.random.default_rng(s), steps, "printed") for p, s in zip(circuits, seeds)
    )
    printed_res = _result("printed field pair residual order", printed, 1.5, t1,
                          "printed voltage solves the difference equations to first order only",
                          expected=True)
    return [line_res, printed_res]


def check_similarity(
    N: int, draws: int, rng: np.random.Generator, alpha_max: float = 2.0, xi_max: float = 1.5,
    tol: float = 1e-8,
) -> CheckResult:
    t0 = time.perf_counter()
    space = build_space(N)
    worst = 0.0
    for _ in range(draws):
        alpha = complex(*rng.normal(size=2))
        alpha *= float(rng.uniform(0, alpha_max)) / abs(alpha)
        xi = complex(*rng.normal(size=2))
        xi *= float(rng.uniform(0, xi_max)) / abs(xi)
        worst = max(worst, max(similarity_errors(space, alpha, xi).values()))
    return _result("displacement/squeeze similarity identities", worst, tol, t0,
                   f"N={N}, {draws} draws, |alpha|<={alpha_max}, |xi|<={xi_max}")


def check_hamiltonian(N: int, rng: np.random.Generator, draws: int = 5, tol: float = 1e-9) -> CheckResult:
    t0 = time.perf_counter()
    space = build_space(N)
    worst = 0.0
    for _ in range(draws):
        p = random_circuit(rng)
        d = dispersion(p)
        ell = float(rng.uniform(0, 10)) / max(d.beta, 1e-300)
        t = float(rng.uniform(0, 10)) / p.omega
        dev = hamiltonian_deviation(space, p, d, ell, t, reference=(0.0, 0.0))
        worst = max(worst, dev / (hbar * p.omega))
    return _result("H = hbar omega (N + 1/2), independent of (l, t)", worst, tol, t0,
                   f"N={N}, deviation in units of hbar omega")


def check_commutator(N: int, rng: np.random.Generator, draws: int = 5, tol: float = 1e-12) -> CheckResult:
    t0 = time.perf_counter()
    space = build_space(N)
    worst = max(commutator_check(space, random_circuit(rng)) for _ in range(draws))
    return _result("[A, A^dag] = hbar omega (omega L G + 1)/(2 L z0)", worst, tol, t0, f"N={N}, relative")


def _oracle_circuit(rng: np.random.Generator) -> tuple[CircuitParams, Dispersion, float]:
    p = random_circuit(rng)
    d = dispersion(p)
    # positions up to a few decay lengths and wavelengths
    ell = float(rng.uniform(0, 3)) / max(d.sigma, d.beta)
    return p, d, ell


def check_oracle_agreement(
    N: int,
    draws: int,
    rng: np.random.Generator,
    mean_tol: float = 1e-8,
    var_tol: float = 1e-6,
    gate_tol: float = 1e-8,
) -> list[CheckResult]:
    """Closed-form mean and rederived variance against the Fock-space oracle.

    Errors are relative to F e^{-sigma l} for the mean (or |mean| if larger)
    and to F^2 e^{-2 sigma l} for the variance. The gate compares the oracle at
    N and 2N.
    """
    t0 = time.perf_counter()
    small, large = build_space(N), build_space(2 * N)
    worst_mean = worst_var = worst_gate = 0.0
    for _ in range(draws):
        q = random_state(rng, N)
        p, d, ell = _oracle_circuit(rng)
        F = normalization_F(p)
        t = float(rng.uniform(0, 2 * math.pi)) / p.omega
        ref = oracle_moments(small, q, F, d, ell, t, p.omega)
        ref2 = oracle_moments(large, q, F, d, ell, t, p.omega)
        amp = F * math.exp(-d.sigma * ell)
        mean = mean_current(F, d, q, ell, t, p.omega)
        var = variance(F, d, q, ell, MomentVariant.REDERIVED, t, p.omega)
        worst_mean = max(worst_mean, abs(mean - ref.mean_j) / max(abs(ref.mean_j), amp))
        worst_var = max(worst_var, abs(var - ref.var_j) / amp**2)
        worst_gate = max(
            worst_gate,
            abs(ref.mean_j - ref2.mean_j) / max(abs(ref2.mean_j), amp),
            abs(ref.var_j - ref2.var_j) / amp**2,
        )
    detail = f"N={N}, {draws} draws"
    return [
        _result("oracle convergence gate N vs 2N", worst_gate, gate_tol, t0, detail),
        _result("closed-form mean vs oracle", worst_mean, mean_tol, t0, detail),
        _result("rederived variance vs oracle", worst_var, var_tol, t0, detail),
    ]


def check_printed_divergence(N: int, rng: np.random.Generator, tol: float = 1e-6) -> CheckResult:
    """Printed vacuum variance over the oracle's; documented to be 2."""
    t0 = time.perf_counter()
    p, d, ell = _oracle_circuit(rng)
    F = normalization_F(p)
    vac = DsfsParams(0.0, 0.0, 0.0, 0.0, 0)
    oracle = oracle_moments(build_space(N), vac, F, d, ell).var_j
    printed = variance(F, d, vac, ell, MomentVariant.PRINTED)
    factor = printed / oracle
    return _result("printed variance / oracle at n=0, xi=0, minus 2", abs(factor - 2.0), tol, t0,
                   f"factor={factor:.8f}, oracle={oracle / (F * F * math.exp(-2 * d.sigma * ell)):.8f} F^2e^(-2 sigma l)",
                   expected=True)


# fixed ladder circuit: the figure-caption line with light loss
_LADDER_CIRCUIT = CircuitParams(R=0.2, G=0.05, L=398e-6, C=995e-12, z0=4e-6, omega=3e9)
_LADDER_STATE = DsfsParams(alpha_mag=1.0, theta=0.0, xi_mag=0.5, phi=math.pi / 3, n=1)


def check_roundtrip_ladder(
    beta_ells=(1e-6, 1e-5, 1e-4, 1e-3),
    p: CircuitParams = _LADDER_CIRCUIT,
    q: DsfsParams = _LADDER_STATE,
    tol: float = 1e-3,
    slope_tol: float = 0.15,
) -> list[CheckResult]:
    t0 = time.perf_counter()
    d = dispersion(p)
    errors = np.array([roundtrip_error(p, q, be / d.beta) for be in beta_ells])
    slope = float(np.polyfit(np.log10(beta_ells), np.log10(errors), 1)[0])
    at_max = float(errors[int(np.argmax(beta_ells))])
    detail = ", ".join(f"{be:.0e}:{e:.2e}" for be, e in zip(beta_ells, errors))
    return [
        _result("rederived NRI roundtrip at largest beta*l", at_max, tol, t0, detail),
        _result("roundtrip error log-log slope vs 1", abs(slope - 1.0), slope_tol, t0, f"slope={slope:.4f}"),
    ]


_LEVELS = {
    # N, oracle draws, dispersion draws, similarity (N, draws)
    "quick": (32, 50, 1000, (32, 5)),
    "full": (128, 1000, 10000, (64, 20)),
}


def verify_suite(
    level: str = "quick", dispersion_fn: DispersionFn = dispersion, seed: int = 20240917
) -> Report:
    """Run every invariant check; ``dispersion_fn`` lets a faulty dispersion be injected."""
    if level not in _LEVELS:
        raise ValueError(f"level must be one of {sorted(_LEVELS)}")
    N, oracle_draws, disp_draws, (sim_N, sim_draws) = _LEVELS[level]
    rng = np.random.default_rng(seed)
    report = Report(level)
    add = report.results.extend
    add(check_dispersion_identities(disp_draws, rng, dispersion_fn))
    add([check_lossless_limit(100, rng, dispersion_fn)])
    add(check_residual_order(10, rng))
    add([check_similarity(sim_N, sim_draws, rng)])
    add([check_hamiltonian(N, rng)])
    add([check_commutator(N, rng)])
    add(check_oracle_agreement(N, oracle_draws, rng))
    add([check_printed_divergence(N, rng)])
    add(check_roundtrip_ladder())
    return report
