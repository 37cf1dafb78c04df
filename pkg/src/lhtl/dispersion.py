"""Classical circuit math for the dissipative left-handed line.

Series capacitance C and shunt inductance L (both per-unit-length densities),
with series resistance R and shunt conductance G carrying the loss. The damped
travelling wave has attenuation ``sigma`` and phase constant ``beta``; both are
returned as nonnegative magnitudes, the left-handed sign is applied later when
the refractive index is formed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "CircuitParams",
    "Dispersion",
    "ClassicalField",
    "DispersionError",
    "xy_terms",
    "dispersion",
    "classical_fields",
    "line_fields",
    "difference_residual",
]


class DispersionError(ArithmeticError):
    """Raised when the dispersion pair cannot be represented as finite floats."""


@dataclass(frozen=True)
class CircuitParams:
    """Per-unit-length line constants plus cell length and drive frequency.

    R [Ohm/m], G [S/m], L [H m], C [F m], z0 [m], omega [rad/s].
    """

    R: float
    G: float
    L: float
    C: float
    z0: float
    omega: float

    def __post_init__(self) -> None:
        for name in ("R", "G", "L", "C", "z0", "omega"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.R < 0 or self.G < 0:
            raise ValueError("R and G must be nonnegative")
        for name in ("L", "C", "z0", "omega"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def shunt_factor(self) -> float:
        """The recurring ``omega*L*G + 1`` factor."""
        return self.omega * self.L * self.G + 1.0

    @property
    def series_impedance(self) -> complex:
        """R + 1/(i omega C)."""
        return complex(self.R, -1.0 / (self.omega * self.C))

    @property
    def shunt_admittance(self) -> complex:
        """G + 1/(i omega L)."""
        return complex(self.G, -1.0 / (self.omega * self.L))


@dataclass(frozen=True)
class Dispersion:
    sigma: float
    beta: float

    @property
    def gamma(self) -> complex:
        """Spatial exponent -sigma + i*beta of the phasor carried by e^{+i omega t}."""
        return complex(-self.sigma, self.beta)


@dataclass(frozen=True)
class ClassicalField:
    j: float
    u: float


def xy_terms(p: CircuitParams) -> tuple[float, float]:
    """Return ``(x, y) = (R*G, 1/(omega^2 L C))``."""
    return p.R * p.G, 1.0 / (p.omega**2 * p.L * p.C)


def _loss_term(p: CircuitParams) -> float:
    return p.G / (p.omega * p.C) + p.R / (p.omega * p.L)


def dispersion(p: CircuitParams) -> Dispersion:
    """Attenuation and phase constant of the damped wave.

    sigma^2 = ((x - y) + r) / 2 and beta^2 = (-(x - y) + r) / 2 with
    r = hypot(x - y, K), K = G/(omega C) + R/(omega L). The root that does not
    suffer cancellation is evaluated directly and the other one is recovered
    from sigma*beta = K/2, which keeps both identities at full precision and
    gives sigma == 0 exactly for a lossless line.
    """
    x, y = xy_terms(p)
    diff = x - y
    k = _loss_term(p)
    r = math.hypot(diff, k)
    if diff >= 0.0:
        sigma = math.sqrt(0.5 * (diff + r))
        beta = 0.5 * k / sigma if sigma > 0.0 else 0.0
    else:
        beta = math.sqrt(0.5 * (r - diff))
        sigma = 0.5 * k / beta
    if not (math.isfinite(sigma) and math.isfinite(beta)):
        raise DispersionError(f"non-finite dispersion for {p}: sigma={sigma}, beta={beta}")
    return Dispersion(sigma=sigma, beta=beta)


def classical_fields(
    p: CircuitParams, d: Dispersion, amplitude: complex, ell: float, t: float
) -> ClassicalField:
    """Current and voltage of the damped wave, in the form printed for the model.

    j = e^{-sigma l} [A e^{i(beta l - omega t)} + c.c.]
    u = i omega L/(omega L G + 1) e^{-sigma l} [A* e^{-i(beta l - omega t)} - A e^{i(beta l - omega t)}]

    Both expressions are conjugate-symmetric; the real parts are returned.
    Note that this voltage is not the one that solves the difference
    equations (see :func:`line_fields`).
    """
    phase = cmath.exp(1j * (d.beta * ell - p.omega * t))
    decay = math.exp(-d.sigma * ell)
    fwd = amplitude * phase
    bwd = amplitude.conjugate() * phase.conjugate()
    j = decay * (fwd + bwd)
    u = 1j * p.omega * p.L / p.shunt_factor * decay * (bwd - fwd)
    return ClassicalField(j=j.real, u=u.real)


def _printed_phasors(p: CircuitParams, d: Dispersion, amplitude: complex, ell: float):
    # e^{+i omega t} component of the printed fields
    current = complex(amplitude).conjugate() * cmath.exp(complex(-d.sigma, -d.beta) * ell)
    voltage = 1j * p.omega * p.L / p.shunt_factor * current
    return current, voltage


def _line_phasors(p: CircuitParams, d: Dispersion, amplitude: complex, ell: float):
    current = complex(amplitude).conjugate() * cmath.exp(d.gamma * ell)
    voltage = -d.gamma / p.shunt_admittance * current
    return current, voltage


def line_fields(
    p: CircuitParams, d: Dispersion, amplitude: complex, ell: float, t: float
) -> ClassicalField:
    """Real fields that solve the per-cell difference equations to O(dz^2).

    The e^{+i omega t} phasor is A* e^{(-sigma + i beta) l} (a backward wave, as
    expected on the left-handed branch) and the voltage follows from the
    shunt branch, U = -gamma J / Y. For a real amplitude at t = 0 the current
    equals the printed one; otherwise the two differ in the sign of the
    travelling phase, and the voltages differ everywhere.
    """
    current, voltage = _line_phasors(p, d, amplitude, ell)
    rot = cmath.exp(1j * p.omega * t)
    return ClassicalField(j=2.0 * (current * rot).real, u=2.0 * (voltage * rot).real)


def difference_residual(
    p: CircuitParams,
    amplitude: complex,
    ell: float,
    t: float,
    dz: float,
    form: str = "line",
    peak: bool = False,
) -> tuple[float, float]:
    """Residuals of the two per-cell balance equations over a step ``dz``.

    res_u = |u(l) - j(l) [R + 1/(i omega C)] dz - u(l + dz)|
    res_j = |j(l) - u(l) [G + 1/(i omega L)] dz - j(l + dz)|

    The impedances act on the e^{+i omega t} component and on its conjugate
    with conjugated values, which is what they mean for real time signals.
    ``form="line"`` uses :func:`line_fields`; ``form="printed"`` uses the
    printed field pair and only converges to first order.

    With ``peak=True`` the residuals are the maxima over one period (``t`` is
    ignored). The instantaneous residual passes through zero twice per period,
    which makes convergence orders read at a single instant unreliable.
    """
    if dz <= 0:
        raise ValueError("dz must be positive")
    phasors = {"line": _line_phasors, "printed": _printed_phasors}[form]
    d = dispersion(p)
    j0, u0 = phasors(p, d, amplitude, ell)
    j1, u1 = phasors(p, d, amplitude, ell + dz)
    phasor_u = u0 - j0 * p.series_impedance * dz - u1
    phasor_j = j0 - u0 * p.shunt_admittance * dz - j1
    if peak:
        return 2.0 * abs(phasor_u), 2.0 * abs(phasor_j)
    rot = cmath.exp(1j * p.omega * t)
    return abs(2.0 * (phasor_u * rot).real), abs(2.0 * (phasor_j * rot).real)
