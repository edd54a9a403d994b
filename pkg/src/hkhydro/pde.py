"""Two-velocity hydrodynamic systems and their type classification.

Each system is a 2x2 quasilinear first-order system in (u, v)

    A1 u_t + B1 u_q + C1 v_t + D1 v_q = f1
    A2 u_t + B2 u_q + C2 v_t + D2 v_q = f2

given by its eight coefficient functions of (t, q, u, v).  Classification
uses the quadratic form ``a t_l**2 - 2 b t_l q_l + c q_l**2`` with
``a = [BD]``, ``2b = [AD] + [BC]``, ``c = [AC]`` and
``[XY] = X1 Y2 - X2 Y1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .grid import FieldState

__all__ = [
    "SystemKind",
    "TypeTag",
    "StateVec",
    "PdeSystem",
    "Classification",
    "FieldClassification",
    "WrongTypeError",
    "make_nelson",
    "make_modified_t0",
    "make_general_t",
    "make_system",
    "quadratic_form",
    "classify",
    "classify_field",
    "characteristic_speed",
    "PARABOLIC_RTOL",
]

PARABOLIC_RTOL = 1e-12
_WIDE = np.longdouble


class SystemKind(str, Enum):
    NELSON = "nelson"
    MODIFIED_T0 = "modified-t0"
    GENERAL_T = "general-t"


class TypeTag(str, Enum):
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"
    DEGENERATE = "Degenerate"


_TAGS = (TypeTag.ELLIPTIC, TypeTag.PARABOLIC, TypeTag.HYPERBOLIC, TypeTag.DEGENERATE)


class WrongTypeError(ValueError):
    pass


@dataclass(frozen=True)
class StateVec:
    u: float
    v: float


@dataclass(frozen=True)
class PdeSystem:
    """A 2x2 quasilinear system in coefficient form.

    ``coeffs(t, q, u, v)`` returns ``(A1, B1, C1, D1, A2, B2, C2, D2)`` and
    ``source(t, q, u, v)`` returns ``(f1, f2)``; both accept numpy arrays.
    """

    label: SystemKind
    coeffs: Callable
    source: Callable
    xi_T: Optional[float] = None
    potential_gradient: Optional[Callable] = None

    n_components = 2

    def coefficient_table(self, t, q, s: StateVec) -> tuple:
        return tuple(float(c) for c in self.coeffs(t, q, s.u, s.v))

    def advection_matrix(self, t, q, y) -> np.ndarray:
        """Per-node matrix ``M^-1 K`` of the form ``y_t + A(y) y_q = phi``, shape (n, 2, 2)."""
        u, v = y
        A1, B1, C1, D1, A2, B2, C2, D2 = np.broadcast_arrays(*self.coeffs(t, q, u, v))
        K = np.stack([np.stack([B1, D1], -1), np.stack([B2, D2], -1)], -2).astype(float)
        if _unit_time_coefficients(A1, C1, A2, C2):
            return K
        M = np.stack([np.stack([A1, C1], -1), np.stack([A2, C2], -1)], -2).astype(float)
        return np.linalg.solve(M, K)

    def source_term(self, t, q, y) -> np.ndarray:
        """Right-hand side ``M^-1 f`` of shape (2, n)."""
        u, v = y
        f = np.array(np.broadcast_arrays(*self.source(t, q, u, v), u), dtype=float)[:2]
        A1, _, C1, _, A2, _, C2, _ = np.broadcast_arrays(*self.coeffs(t, q, u, v))
        if _unit_time_coefficients(A1, C1, A2, C2):
            return f
        M = np.stack([np.stack([A1, C1], -1), np.stack([A2, C2], -1)], -2).astype(float)
        return np.linalg.solve(M, f.T[..., None])[..., 0].T


def _unit_time_coefficients(A1, C1, A2, C2) -> bool:
    return bool(np.all(A1 == 1) and np.all(C1 == 0) and np.all(A2 == 0) and np.all(C2 == 1))


def _potential_source(sign: float, potential_gradient):
    def source(t, q, u, v):
        zero = np.zeros(np.broadcast(q, u, v).shape)
        if potential_gradient is None:
            return zero, zero
        return zero, zero + sign * np.asarray(potential_gradient(q), dtype=float)

    return source


def make_nelson(potential_gradient=None) -> PdeSystem:
    """u_t + v u_q + u v_q = 0;  v_t + v v_q - u u_q = alpha(q)."""

    def coeffs(t, q, u, v):
        return 1.0, v, 0.0, u, 0.0, -u, 1.0, v

    return PdeSystem(
        SystemKind.NELSON, coeffs, _potential_source(1.0, potential_gradient),
        potential_gradient=potential_gradient,
    )


def make_modified_t0(potential_gradient=None) -> PdeSystem:
    """u_t + (v + 2u) u_q + u v_q = 0;  v_t + v v_q - u u_q = alpha(q)."""

    def coeffs(t, q, u, v):
        return 1.0, 2.0 * u + v, 0.0, u, 0.0, -u, 1.0, v

    return PdeSystem(
        SystemKind.MODIFIED_T0, coeffs, _potential_source(1.0, potential_gradient),
        potential_gradient=potential_gradient,
    )


def make_general_t(xi: float, potential_gradient=None) -> PdeSystem:
    """Finite-temperature system with u read as the effective diffusion velocity.

    u_t + (v + 2u) u_q + u v_q = 0;  v_t + v v_q - xi u u_q = -alpha(q).
    At ``xi = 1`` the coefficient table is that of :func:`make_modified_t0`.
    """
    xi = float(xi)
    if not (math.isfinite(xi) and xi >= 1.0):
        from .thermo import InvalidParameterError

        raise InvalidParameterError(f"xi must be >= 1, got {xi!r}")

    def coeffs(t, q, u, v):
        return 1.0, 2.0 * u + v, 0.0, u, 0.0, -(xi * u), 1.0, v

    return PdeSystem(
        SystemKind.GENERAL_T, coeffs, _potential_source(-1.0, potential_gradient),
        xi_T=xi, potential_gradient=potential_gradient,
    )


def make_system(kind, xi: float = 1.0, potential_gradient=None) -> PdeSystem:
    kind = SystemKind(kind)
    if kind is SystemKind.NELSON:
        return make_nelson(potential_gradient)
    if kind is SystemKind.MODIFIED_T0:
        return make_modified_t0(potential_gradient)
    return make_general_t(xi, potential_gradient)


@dataclass(frozen=True)
class Classification:
    a: float
    b: float
    c: float
    discriminant: float
    type_tag: TypeTag
    char_slopes: tuple


def quadratic_form(A1, B1, C1, D1, A2, B2, C2, D2):
    """Return ``(a, b, c)`` of the characteristic quadratic form (array-capable)."""
    a = B1 * D2 - B2 * D1
    b = 0.5 * ((A1 * D2 - A2 * D1) + (B1 * C2 - B2 * C1))
    c = A1 * C2 - A2 * C1
    return a, b, c


def _type_codes(a, b, c):
    # codes index into _TAGS
    a, b, c = np.broadcast_arrays(*(np.asarray(x) for x in (a, b, c)))
    disc = b * b - a * c
    scale = np.maximum(1.0, b * b + np.abs(a * c))
    codes = np.where(disc < 0, 0, 2)
    codes = np.where(np.abs(disc) <= PARABOLIC_RTOL * scale, 1, codes)
    codes = np.where((a == 0) & (b == 0) & (c == 0), 3, codes)
    return disc, codes


def _slopes(a, b, c, code) -> tuple:
    # roots of c s^2 - 2 b s + a = 0 with s = dq/dt (t_l = 1); inf marks t_l = 0
    if code in (0, 3):
        return ()
    if code == 1:
        if c != 0:
            return (b / c,)
        return (math.inf,) if a != 0 else ()
    root = math.sqrt(b * b - a * c)
    if c == 0:
        return (a / (2.0 * b), math.inf)
    big = b + math.copysign(root, b)
    s1 = big / c
    s2 = a / big if big != 0 else b / c
    return tuple(sorted((s1, s2)))


def classify(sys: PdeSystem, t: float, q: float, s: StateVec) -> Classification:
    return classify_states(sys, t, np.array([q], dtype=float), [s.u], [s.v]).at(0)


@dataclass
class FieldClassification:
    """Per-node classification arrays plus an aggregate summary."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    discriminant: np.ndarray
    codes: np.ndarray

    def at(self, k: int) -> Classification:
        a, b, c, code = float(self.a[k]), float(self.b[k]), float(self.c[k]), int(self.codes[k])
        return Classification(a, b, c, float(self.discriminant[k]), _TAGS[code], _slopes(a, b, c, code))

    @property
    def type_tags(self) -> list:
        return [_TAGS[k] for k in self.codes]

    def counts(self) -> dict:
        return {tag.value: int(np.sum(self.codes == i)) for i, tag in enumerate(_TAGS)}

    def summary(self) -> dict:
        return {
            "n_points": int(self.codes.size),
            "counts": self.counts(),
            "min_discriminant": float(np.min(self.discriminant)),
            "max_discriminant": float(np.max(self.discriminant)),
        }


def classify_states(sys: PdeSystem, t, q, u, v) -> FieldClassification:
    # extended precision keeps the cancellation in b^2 - ac below one double ulp
    u = np.asarray(u, dtype=_WIDE)
    v = np.asarray(v, dtype=_WIDE)
    coeffs = (np.asarray(x, dtype=_WIDE) for x in np.broadcast_arrays(*sys.coeffs(t, q, u, v), u)[:8])
    a, b, c = quadratic_form(*coeffs)
    disc, codes = _type_codes(a, b, c)
    return FieldClassification(*(np.asarray(x, dtype=float) for x in (a, b, c, disc)), codes)


def classify_field(sys: PdeSystem, field: FieldState) -> FieldClassification:
    return classify_states(sys, field.t, field.q, field.u, field.v)


def characteristic_speed(sys: PdeSystem, s: StateVec, t: float = 0.0, q: float = 0.0) -> float:
    """Transport speed dq/dt of the single characteristic of a parabolic system."""
    cl = classify(sys, t, q, s)
    if cl.type_tag is not TypeTag.PARABOLIC:
        raise WrongTypeError(f"{sys.label.value} is {cl.type_tag.value} at {s}, not Parabolic")
    if sys.label in (SystemKind.MODIFIED_T0, SystemKind.GENERAL_T):
        return s.u + s.v
    return cl.char_slopes[0]
