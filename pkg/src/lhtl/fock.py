"""Truncated Fock-space oracle.

Ladder operators on span{|0>, ..., |N-1>}, displacement and squeeze unitaries
from matrix exponentials, displaced squeezed Fock states and their exact
current moments. This is the brute-force side of every closed-form check, so
nothing in here uses the closed forms from :mod:`lhtl.moments`.

Truncation defects of the squeeze exponential are not confined to the last
few basis states: a column |k> is only reproduced faithfully if S|k> fits in
the space. States and operator identities are therefore evaluated in a padded
working space and then restricted to the requested one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar

from .dispersion import CircuitParams, Dispersion
from .expm import matrix_exponential

__all__ = [
    "FockSpace",
    "DsfsParams",
    "StateVector",
    "OracleMoments",
    "TruncationError",
    "build_space",
    "displacement_operator",
    "squeeze_operator",
    "dsfs_state",
    "current_operator",
    "oracle_moments",
    "similarity_errors",
    "similarity_checks",
    "hamiltonian_matrix",
    "hamiltonian_deviation",
    "commutator_check",
]

DEFICIT_TOL = 1e-6
# tail norm allowed in the last eighth of a padded working space
CONTAINMENT_TOL = 1e-10
MAX_WORKING_DIM = 4096


class TruncationError(RuntimeError):
    """The truncation dimension is too small for the requested state."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockSpace:
    N: int
    a: np.ndarray = field(repr=False)
    adag: np.ndarray = field(repr=False)

    @property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.N, dtype=float))

    def basis(self, k: int) -> np.ndarray:
        e = np.zeros(self.N, dtype=complex)
        e[k] = 1.0
        return e


def build_space(N: int) -> FockSpace:
    if int(N) != N or N < 2:
        raise ValueError(f"truncation dimension must be an integer >= 2, got {N!r}")
    N = int(N)
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    return FockSpace(N=N, a=_frozen(a), adag=_frozen(a.conj().T.copy()))


@dataclass(frozen=True)
class DsfsParams:
    """Displacement alpha = alpha_mag e^{i theta}, squeeze xi = xi_mag e^{i phi}, Fock number n."""

    alpha_mag: float
    theta: float
    xi_mag: float
    phi: float
    n: int

    def __post_init__(self) -> None:
        if self.alpha_mag < 0 or self.xi_mag < 0:
            raise ValueError("alpha_mag and xi_mag must be nonnegative")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        for name in ("alpha_mag", "theta", "xi_mag", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def alpha(self) -> complex:
        return self.alpha_mag * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def xi(self) -> complex:
        return self.xi_mag * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray = field(repr=False)
    deficit: float
    working_dim: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class OracleMoments:
    mean_j: float
    mean_j2: float
    var_j: float


def _rotate(M: np.ndarray, angle: float) -> np.ndarray:
    """R M R^dagger with R = diag(e^{i k angle})."""
    ph = np.exp(1j * angle * np.arange(M.shape[0]))
    return ph[:, None] * M * ph.conj()[None, :]


def _real_ladder(N: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def _squeeze_generator(N: int, r: float) -> np.ndarray:
    """r/2 (a^dag^2 - a^2) for real a, assembled from its two nonzero diagonals."""
    k = np.arange(N - 2, dtype=float)
    off = 0.5 * r * np.sqrt((k + 1.0) * (k + 2.0))
    return np.diag(off, -2) - np.diag(off, 2)


def displacement_operator(space: FockSpace, alpha: complex) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on the truncated space.

    Evaluated as R D(|alpha|) R^dagger with R = diag(e^{i k arg(alpha)}), which
    is the same matrix as the direct exponential but keeps the exponent real.
    """
    alpha = complex(alpha)
    a = _real_ladder(space.N)
    D = matrix_exponential(abs(alpha) * (a.T - a)).astype(complex)
    return _rotate(D, math.atan2(alpha.imag, alpha.real))


def squeeze_operator(space: FockSpace, xi: complex) -> np.ndarray:
    """S(xi) = exp(xi/2 a^dag^2 - xi*/2 a^2) on the truncated space.

    The exponent only couples states of equal parity, so the two parity blocks
    are exponentiated separately after rotating the phase of xi away.
    """
    xi = complex(xi)
    gen = _squeeze_generator(space.N, abs(xi))
    S = np.zeros((space.N, space.N), dtype=complex)
    for parity in (0, 1):
        idx = np.arange(parity, space.N, 2)
        S[np.ix_(idx, idx)] = matrix_exponential(gen[np.ix_(idx, idx)])
    return _rotate(S, 0.5 * math.atan2(xi.imag, xi.real))


def dsfs_state(
    space: FockSpace,
    p: DsfsParams,
    working_dim: int | None = None,
    deficit_tol: float = DEFICIT_TOL,
) -> StateVector:
    """D(alpha) S(xi) |n>, built in a padded space and restricted to ``space``.

    The truncated unitaries are norm preserving, so the convergence diagnostic
    is the norm lost when the padded state is projected onto the first N
    basis states: ``deficit = 1 - ||P_N psi||``.
    """
    if p.n >= space.N:
        raise ValueError(f"Fock number {p.n} does not fit in N={space.N}")
    W = working_dim or 2 * space.N
    if W < space.N:
        raise ValueError("working_dim must be at least N")
    work = build_space(W)
    S = squeeze_operator(work, p.xi)
    D = displacement_operator(work, p.alpha)
    psi = D @ S[:, p.n]
    kept = psi[: space.N]
    deficit = 1.0 - float(np.linalg.norm(kept))
    if deficit >= deficit_tol:
        raise TruncationError(
            f"N={space.N} loses {deficit:.3e} of the norm for {p}; increase the truncation"
        )
    amplitudes = kept / np.linalg.norm(kept)
    amplitudes.flags.writeable = False
    return StateVector(amplitudes=amplitudes, deficit=deficit, working_dim=W)


def _wave_phase(d: Dispersion, ell: float, t: float, omega: float | None) -> float:
    if t and omega is None:
        raise ValueError("a nonzero time needs omega")
    return d.beta * ell - (omega or 0.0) * t


def current_operator(
    space: FockSpace,
    F: float,
    d: Dispersion,
    ell: float,
    t: float = 0.0,
    omega: float | None = None,
) -> np.ndarray:
    """J = F e^{-sigma l} (a e^{i(beta l - omega t)} + a^dag e^{-i(beta l - omega t)})."""
    if F < 0:
        raise ValueError("F must be nonnegative")
    ph = np.exp(1j * _wave_phase(d, ell, t, omega))
    scale = F * math.exp(-d.sigma * ell)
    J = scale * (space.a * ph + space.adag * np.conj(ph))
    return J


def oracle_moments(
    space: FockSpace,
    p: DsfsParams,
    F: float,
    d: Dispersion,
    ell: float,
    t: float = 0.0,
    omega: float | None = None,
    working_dim: int | None = None,
) -> OracleMoments:
    psi = dsfs_state(space, p, working_dim=working_dim).amplitudes
    J = current_operator(space, F, d, ell, t, omega)
    Jpsi = J @ psi
    mean = np.vdot(psi, Jpsi)
    mean_j2 = np.vdot(psi, J @ Jpsi)
    scale = max(abs(mean), F * math.exp(-d.sigma * ell), np.finfo(float).tiny)
    if abs(mean.imag) > 1e-10 * scale:
        raise ArithmeticError(f"current expectation not real: {mean}")
    mean_j = float(mean.real)
    m2 = float(mean_j2.real)
    return OracleMoments(mean_j=mean_j, mean_j2=m2, var_j=m2 - mean_j**2)


def _containing_space(
    space: FockSpace, build, cols: int, start: int, max_dim: int
) -> tuple[FockSpace, np.ndarray]:
    """Grow a working space until the first ``cols`` columns of ``build(work)``
    keep their norm away from the truncation edge (last eighth of the rows)."""
    W = max(2 * space.N, start)
    while True:
        work = build_space(W)
        U = build(work)
        tail = np.linalg.norm(U[W - W // 8 :, :cols], axis=0).max()
        if tail < CONTAINMENT_TOL:
            return work, U
        if W >= max_dim:
            raise TruncationError(
                f"columns 0..{cols - 1} still leak {tail:.2e} at working dimension {W}"
            )
        W = min(max_dim, int(1.5 * W) // 2 * 2)


def similarity_errors(
    space: FockSpace,
    alpha: complex,
    xi: complex,
    margin: int = 8,
    max_dim: int = MAX_WORKING_DIM,
) -> dict[str, float]:
    """Entry-wise errors of the four conjugation identities on columns 0..N-1-margin.

    D^dag a D = a + alpha,  D^dag a^dag D = a^dag + alpha*,
    S^dag a S = a cosh|xi| + a^dag e^{i phi} sinh|xi|,
    S^dag a^dag S = a^dag cosh|xi| + a e^{-i phi} sinh|xi|.

    The unitaries are formed in a working space large enough that the checked
    columns never reach its edge, so what is measured is the identity itself
    rather than the truncation.
    """
    if space.N < 32:
        raise ValueError("similarity checks need N >= 32")
    cols = space.N - margin
    alpha = complex(alpha)
    xi = complex(xi)
    r, phi = abs(xi), math.atan2(xi.imag, xi.real)
    errors = {}

    # first guesses: mean photon number of the most spread checked column, doubled
    k = cols - 1
    start_d = int(2 * (k + abs(alpha) ** 2 + 4 * abs(alpha) * math.sqrt(k + 1)))
    start_s = int(2 * (k * math.cosh(2 * r) + math.sinh(r) ** 2))
    work, D = _containing_space(
        space, lambda s: displacement_operator(s, alpha), cols, start_d, max_dim
    )
    a, ad = work.a, work.adag
    eye = np.eye(work.N)
    Dh = D.conj().T
    errors["D^dag a D"] = np.abs(Dh @ (a @ D[:, :cols]) - (a + alpha * eye)[:, :cols]).max()
    errors["D^dag a^dag D"] = np.abs(
        Dh @ (ad @ D[:, :cols]) - (ad + alpha.conjugate() * eye)[:, :cols]
    ).max()

    work, S = _containing_space(space, lambda s: squeeze_operator(s, xi), cols, start_s, max_dim)
    a, ad = work.a, work.adag
    Sh = S.conj().T
    c, s = math.cosh(r), math.sinh(r)
    e = complex(math.cos(phi), math.sin(phi))
    errors["S^dag a S"] = np.abs(Sh @ (a @ S[:, :cols]) - (a * c + ad * e * s)[:, :cols]).max()
    errors["S^dag a^dag S"] = np.abs(
        Sh @ (ad @ S[:, :cols]) - (ad * c + a * e.conjugate() * s)[:, :cols]
    ).max()
    return {k: float(v) for k, v in errors.items()}


def similarity_checks(space: FockSpace, alpha: complex, xi: complex) -> float:
    return max(similarity_errors(space, alpha, xi).values())


def _eta_nu(space: FockSpace, p: CircuitParams, d: Dispersion, ell: float, t: float):
    kappa = p.shunt_factor
    ph = np.exp(1j * (d.beta * ell - p.omega * t))
    a, ad = space.a, space.adag
    eta = math.sqrt(hbar * p.omega * kappa / (2 * p.L * p.z0)) * (a * ph + ad * np.conj(ph))
    nu = 1j * math.sqrt(hbar * p.L * p.z0 / (2 * p.omega * kappa)) * (ad * np.conj(ph) - a * ph)
    return eta, nu


def hamiltonian_matrix(
    space: FockSpace, p: CircuitParams, d: Dispersion, ell: float, t: float
) -> np.ndarray:
    """H = omega^2 nu^2 (omega L G + 1)/(2 L z0) + L z0 eta^2 / (2 (omega L G + 1))."""
    eta, nu = _eta_nu(space, p, d, ell, t)
    kappa = p.shunt_factor
    return (p.omega**2 * kappa / (2 * p.L * p.z0)) * (nu @ nu) + (
        p.L * p.z0 / (2 * kappa)
    ) * (eta @ eta)


def hamiltonian_deviation(
    space: FockSpace,
    p: CircuitParams,
    d: Dispersion,
    ell: float,
    t: float,
    reference: tuple[float, float] = (0.0, 0.0),
) -> float:
    """Largest deviation [J] of H from hbar omega (N + 1/2) on the (N-2) block.

    The comparison also includes H evaluated at ``reference`` (l, t), so a
    position or time dependence of the quadratic form shows up as deviation.
    """
    if space.N < 16:
        raise ValueError("hamiltonian check needs N >= 16")
    k = space.N - 2
    target = hbar * p.omega * (space.number + 0.5 * np.eye(space.N))
    H = hamiltonian_matrix(space, p, d, ell, t)[:k, :k]
    H_ref = hamiltonian_matrix(space, p, d, *reference)[:k, :k]
    return float(max(np.abs(H - target[:k, :k]).max(), np.abs(H - H_ref).max()))


def commutator_check(space: FockSpace, p: CircuitParams) -> float:
    """Relative deviation of [A, A^dag] from hbar omega (omega L G + 1)/(2 L z0).

    A = a sqrt(hbar omega (omega L G + 1)/(2 L z0)). Checked on the first N-1
    diagonal entries and all off-diagonal entries; the last diagonal entry is
    the truncation edge and equals -(N-1) times the expected value.
    """
    if space.N < 8:
        raise ValueError("commutator check needs N >= 8")
    expected = hbar * p.omega * p.shunt_factor / (2 * p.L * p.z0)
    A = space.a * math.sqrt(expected)
    comm = A @ A.conj().T - A.conj().T @ A
    diag = np.real(np.diag(comm))
    off = comm - np.diag(np.diag(comm))
    err = max(
        np.abs(diag[:-1] - expected).max(),
        np.abs(off).max(),
    )
    return float(err / expected)
