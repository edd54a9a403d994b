"""Effective thermodynamics of a system in contact with a quantum thermostat.

Every quantity here is a closed-form function of ``coth(kappa * omega / T)``
with ``kappa = hbar / (2 k_B)``.  ``T = 0`` (the cold vacuum) is a regular
state, handled by an explicit branch rather than by overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "InvalidParameterError",
    "ThermoParams",
    "EffectiveQuantities",
    "coth_ratio",
    "effective_temperature",
    "effective_influence",
    "effective_diffusion",
    "effective_entropy",
    "temperature_factors",
    "effective_quantities",
]

# Above this argument coth(x) = 1 + 2 exp(-2x) to better than 1e-17.
_LARGE_ARG = 20.0


class InvalidParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ThermoParams:
    """Physical constants and Kelvin temperature; reduced units by default."""

    hbar: float = 1.0
    k_B: float = 1.0
    m: float = 1.0
    omega: float = 1.0
    T: float = 0.0

    def __post_init__(self):
        for name in ("hbar", "k_B", "m", "omega"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise InvalidParameterError(f"T must be >= 0 and finite, got {self.T!r}")

    @property
    def kappa(self) -> float:
        return self.hbar / (2.0 * self.k_B)

    @property
    def reduced_argument(self) -> float:
        """kappa * omega / T; ``inf`` at T = 0."""
        if self.T == 0:
            return math.inf
        return self.kappa * self.omega / self.T


@dataclass(frozen=True)
class EffectiveQuantities:
    kappa: float
    T_eff: float
    J_eff: float
    D_eff: float
    U_eff: float
    S_eff: float
    alpha_sq: float
    upsilon: float
    xi_T: float


def coth_ratio(p: ThermoParams) -> float:
    """coth(kappa*omega/T) with the T = 0 and large-argument branches."""
    x = p.reduced_argument
    if math.isinf(x):
        return 1.0
    if x > _LARGE_ARG:
        return 1.0 + 2.0 * math.exp(-2.0 * x)
    return 1.0 / math.tanh(x)


def _inv_sinh_sq(p: ThermoParams) -> float:
    x = p.reduced_argument
    if math.isinf(x):
        return 0.0
    if x > _LARGE_ARG:
        return 4.0 * math.exp(-2.0 * x)
    s = math.sinh(x)
    return 1.0 / (s * s)


def effective_influence(p: ThermoParams) -> float:
    """(hbar/2) coth(kappa*omega/T); exactly hbar/2 at T = 0."""
    return 0.5 * p.hbar * coth_ratio(p)


def effective_temperature(p: ThermoParams) -> float:
    """kappa*omega*coth(kappa*omega/T), i.e. (omega/k_B) times the effective influence."""
    return p.omega * effective_influence(p) / p.k_B


def effective_diffusion(p: ThermoParams) -> float:
    """Effective self-diffusion coefficient: effective influence per unit mass.

    Tends to hbar/(2m) as T -> 0 and to k_B T/(m omega) at high temperature.
    """
    return effective_influence(p) / p.m


def effective_entropy(p: ThermoParams) -> float:
    # Printed form -k_B (1 + ln(2 J/hbar)); negative for all T, kept as is.
    return -p.k_B * (1.0 + math.log(2.0 * effective_influence(p) / p.hbar))


def temperature_factors(p: ThermoParams) -> tuple[float, float, float]:
    """Return ``(alpha_sq, upsilon, xi_T)``.

    ``upsilon = coth(x)``, ``alpha_sq = sinh(x)**-2`` and
    ``xi_T = 2 upsilon**2 - 1``; at T = 0 this is ``(0, 1, 1)``.
    """
    upsilon = coth_ratio(p)
    return _inv_sinh_sq(p), upsilon, 2.0 * upsilon * upsilon - 1.0


def effective_quantities(p: ThermoParams) -> EffectiveQuantities:
    J = effective_influence(p)
    alpha_sq, upsilon, xi_T = temperature_factors(p)
    return EffectiveQuantities(
        kappa=p.kappa,
        T_eff=effective_temperature(p),
        J_eff=J,
        D_eff=effective_diffusion(p),
        U_eff=p.omega * J,
        S_eff=effective_entropy(p),
        alpha_sq=alpha_sq,
        upsilon=upsilon,
        xi_T=xi_T,
    )
