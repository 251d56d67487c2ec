"""Thermal and time evolution of the resonance ladder coefficients.

The creation/annihilation operators attached to a decaying state evolve
diagonally: their scalar coefficients pick up exp(+tau z_R) (creation) or
exp(-tau z_R) (annihilation).  Real tau is the thermal picture with
tau = beta; the substitution tau = -i t (Wick rotation) turns the same law
into time evolution, where the creation coefficient decays like
exp(-Gamma t / 2) and the annihilation coefficient grows by the inverse
factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .friedrichs import ResonancePole
from .numerics import ode_evolve

__all__ = [
    "Mode",
    "LadderCoefficient",
    "MonotonicityTable",
    "thermal_evolve",
    "time_evolve",
    "temperature_monotonicity",
    "verify_ode_solutions",
]

# |Re(tau * z_R)| beyond which exp overflows float64; reported, never saturated
_EXP_GUARD = 700.0


class Mode(enum.Enum):
    IN_CREATION = "in_creation"
    OUT_ANNIHILATION = "out_annihilation"


@dataclass(frozen=True)
class LadderCoefficient:
    """Scalar coefficient of a ladder operator at evolution parameter tau."""

    mode: Mode
    value: complex = 1.0 + 0.0j
    tau: complex = 0.0 + 0.0j

    def __post_init__(self):
        val = complex(self.value)
        if not (np.isfinite(val.real) and np.isfinite(val.imag)):
            raise ValueError("coefficient value must be finite")
        object.__setattr__(self, "value", val)
        object.__setattr__(self, "tau", complex(self.tau))


def _rate(mode: Mode, pole: ResonancePole) -> complex:
    return pole.z if mode is Mode.IN_CREATION else -pole.z


def _evolve(c0: LadderCoefficient, pole: ResonancePole,
            tau: complex) -> LadderCoefficient:
    exponent = tau * _rate(c0.mode, pole)
    if abs(exponent.real) > _EXP_GUARD:
        raise OverflowError(
            f"evolution factor exp({exponent.real:.1f}) overflows float64; "
            "shorten the evolution span")
    return LadderCoefficient(mode=c0.mode,
                             value=c0.value * np.exp(exponent),
                             tau=c0.tau + tau)


def thermal_evolve(c0: LadderCoefficient, pole: ResonancePole,
                   tau: float) -> LadderCoefficient:
    """Evolve by real tau = beta: creation gains exp(+tau z_R), annihilation
    the reciprocal factor."""
    tau = float(tau)
    if tau < 0:
        raise ValueError("thermal branch needs tau >= 0")
    return _evolve(c0, pole, tau)


def time_evolve(c0: LadderCoefficient, pole: ResonancePole,
                t: float) -> LadderCoefficient:
    """Evolve in real time through the Wick substitution tau = -i t.

    Same code path as :func:`thermal_evolve`; the creation coefficient
    decays as exp(-Gamma t / 2) while the annihilation one grows as
    exp(+Gamma t / 2), guarded against float overflow.
    """
    return _evolve(c0, pole, -1j * float(t))


@dataclass(frozen=True)
class MonotonicityTable:
    """(T, |creation factor|, |annihilation factor|) rows over a T grid."""

    temperatures: np.ndarray
    in_factors: np.ndarray
    out_factors: np.ndarray

    @property
    def in_strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.in_factors) < 0))

    @property
    def out_strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.out_factors) > 0))


def temperature_monotonicity(pole: ResonancePole, t_grid,
                             k: float = 1.0) -> MonotonicityTable:
    """Thermal factors across temperatures: hotter means a smaller creation
    coefficient and a larger annihilation coefficient.

    With tau = beta = 1/(kT), the moduli are exp(+beta E_R) and
    exp(-beta E_R); the first column strictly decreases with T, the second
    strictly increases, and their product stays 1.
    """
    temps = np.asarray(t_grid, dtype=float)
    if temps.ndim != 1 or temps.size < 1:
        raise ValueError("temperature grid must be a non-empty 1-d sequence")
    if np.any(temps <= 0) or np.any(np.diff(temps) <= 0):
        raise ValueError("temperatures must be positive and increasing")
    beta = 1.0 / (k * temps)
    if np.any(beta * pole.e_r > _EXP_GUARD):
        raise OverflowError("lowest temperature overflows the thermal factor")
    return MonotonicityTable(temperatures=temps,
                             in_factors=np.exp(beta * pole.e_r),
                             out_factors=np.exp(-beta * pole.e_r))


def verify_ode_solutions(pole: ResonancePole, tau_grid) -> float:
    """Integrate both ladder rate equations and compare with closed forms.

    Runs d/dtau A = +z_R A and d/dtau A = -z_R A through the RK4 stepper
    and returns the largest absolute deviation from exp(+-tau z_R) over
    the grid; the refinement loop keeps this at the 1e-9 scale or better.
    """
    tau = np.asarray(tau_grid, dtype=float)
    worst = 0.0
    for mode in Mode:
        rate = _rate(mode, pole)
        numeric = ode_evolve(rate, 1.0 + 0.0j, tau)
        exact = np.exp(rate * tau)
        worst = max(worst, float(np.max(np.abs(numeric - exact))))
    return worst
