"""Von Neumann analysis of the implicit three-layer scheme.

Substituting ``y_k^n = eta^n exp(i k h theta)`` into the scheme for
``y_t + a y_q = 0`` gives ``mu eta**2 - 4 eta + 1 = 0`` with
``mu = 3 + 2 i a gamma sin(theta)`` and ``gamma = tau / h``.  The roots have
unit modulus exactly on the closed curve

    mu(phi) = 4 exp(i phi) - exp(2 i phi),

and the scheme is stable for every ``mu`` on or outside that curve.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

__all__ = [
    "DegenerateAmplificationError",
    "AmplificationQuery",
    "StabilityVerdict",
    "GammaCurvePoint",
    "Region",
    "STABLE_SLACK",
    "amplification_mu",
    "amplification_roots",
    "is_stable",
    "gamma_curve",
    "gamma_polygon",
    "curve_region_check",
    "stability_map",
]

STABLE_SLACK = 1e-12
ON_CURVE_RTOL = 1e-9


class DegenerateAmplificationError(ZeroDivisionError):
    """mu = 0 leaves the linear equation -4 eta + 1 = 0; its root is kept on ``root``."""

    def __init__(self):
        super().__init__("mu = 0: amplification equation degenerates to -4 eta + 1 = 0")
        self.root = 0.25


@dataclass(frozen=True)
class AmplificationQuery:
    a: float
    gamma: float
    theta: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


class StabilityVerdict(NamedTuple):
    stable: bool
    max_root_modulus: float
    mu: complex


@dataclass(frozen=True)
class GammaCurvePoint:
    phi: float
    r: float
    s: float

    @property
    def mu(self) -> complex:
        return complex(self.r, self.s)


class Region(str, Enum):
    INSIDE = "InsideGamma"
    OUTSIDE = "OutsideGamma"
    ON = "OnGamma"


def amplification_mu(a: float, gamma: float, theta: float) -> complex:
    return complex(3.0, 2.0 * a * gamma * math.sin(theta))


def amplification_roots(mu: complex) -> tuple[complex, complex]:
    """Both roots of ``mu eta**2 - 4 eta + 1 = 0``, larger modulus first.

    Uses ``eta = (2 +- sqrt(4 - mu)) / mu``; with the principal square root
    ``w = 2 + sqrt(4 - mu)`` never cancels, and the second root is taken as
    ``1 / w`` from Vieta.
    """
    mu = complex(mu)
    if mu == 0:
        raise DegenerateAmplificationError()
    w = 2.0 + cmath.sqrt(4.0 - mu)
    r1, r2 = w / mu, 1.0 / w
    if abs(r2) > abs(r1):
        r1, r2 = r2, r1
    return r1, r2


def is_stable(q: AmplificationQuery) -> StabilityVerdict:
    mu = amplification_mu(q.a, q.gamma, q.theta)
    modulus = max(abs(r) for r in amplification_roots(mu))
    return StabilityVerdict(modulus <= 1.0 + STABLE_SLACK, modulus, mu)


def gamma_curve(phi: float) -> GammaCurvePoint:
    return GammaCurvePoint(
        phi,
        4.0 * math.cos(phi) - math.cos(2.0 * phi),
        4.0 * math.sin(phi) - math.sin(2.0 * phi),
    )


def gamma_polygon(n_samples: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vertices of the curve at ``phi_j = 2 pi j / n``, j = 0..n-1 (counter-clockwise)."""
    phi = 2.0 * np.pi * np.arange(n_samples) / n_samples
    return phi, 4.0 * np.cos(phi) - np.cos(2.0 * phi), 4.0 * np.sin(phi) - np.sin(2.0 * phi)


def _segment_distance(px, py, x0, y0, x1, y1) -> float:
    dx, dy = x1 - x0, y1 - y0
    t = ((px - x0) * dx + (py - y0) * dy) / (dx * dx + dy * dy)
    t = np.clip(t, 0.0, 1.0)
    return float(np.min(np.hypot(x0 + t * dx - px, y0 + t * dy - py)))


def _winding_number(px, py, x0, y0, x1, y1) -> int:
    is_left = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (is_left > 0)
    down = (y0 > py) & (y1 <= py) & (is_left < 0)
    return int(np.sum(up) - np.sum(down))


def curve_region_check(mu: complex, n_samples: int = 4096) -> Region:
    """Locate ``mu`` relative to the polygonal stability boundary."""
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    mu = complex(mu)
    _, r, s = gamma_polygon(n_samples)
    x0, y0 = r, s
    x1, y1 = np.roll(r, -1), np.roll(s, -1)
    if _segment_distance(mu.real, mu.imag, x0, y0, x1, y1) < ON_CURVE_RTOL * (1.0 + abs(mu)):
        return Region.ON
    if _winding_number(mu.real, mu.imag, x0, y0, x1, y1) != 0:
        return Region.INSIDE
    return Region.OUTSIDE


def stability_map(a_gamma, thetas) -> np.ndarray:
    """Largest root modulus on the grid ``a_gamma x thetas``, shape (len(a_gamma), len(thetas))."""
    a_gamma = np.asarray(a_gamma, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    mu = 3.0 + 2j * a_gamma[:, None] * np.sin(thetas)[None, :]
    w = 2.0 + np.sqrt(4.0 - mu)
    return np.maximum(np.abs(w / mu), np.abs(1.0 / w))
