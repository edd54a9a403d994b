"""Uniform 1D mesh and the (u, v) field living on it."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Boundary(str, Enum):
    PERIODIC = "periodic"
    FAR_FIELD = "far-field"


@dataclass(frozen=True)
class Grid:
    """Mesh with spacing ``h = (q_max - q_min) / n_cells`` and time step ``tau``.

    Periodic grids carry ``n_cells`` nodes (the right endpoint is the left
    one); far-field grids carry ``n_cells + 1`` nodes with both ends pinned.
    """

    q_min: float
    q_max: float
    n_cells: int
    tau: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.n_cells < 8:
            raise ValueError(f"n_cells must be >= 8, got {self.n_cells}")
        if not self.q_max > self.q_min:
            raise ValueError("q_max must exceed q_min")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_gamma(cls, q_min, q_max, n_cells, gamma=1.0, boundary=Boundary.PERIODIC):
        h = (q_max - q_min) / n_cells
        return cls(q_min, q_max, n_cells, gamma * h, boundary)

    @property
    def h(self) -> float:
        return (self.q_max - self.q_min) / self.n_cells

    @property
    def gamma(self) -> float:
        return self.tau / self.h

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def n_nodes(self) -> int:
        return self.n_cells if self.periodic else self.n_cells + 1

    def nodes(self) -> np.ndarray:
        return self.q_min + self.h * np.arange(self.n_nodes)


@dataclass
class FieldState:
    """Diffusion velocity ``u`` and drift velocity ``v`` at time ``t``."""

    t: float
    u: np.ndarray
    v: np.ndarray
    grid: Grid = field(repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        n = self.grid.n_nodes
        if self.u.shape != (n,) or self.v.shape != (n,):
            raise ValueError(
                f"field arrays must have shape ({n},), got {self.u.shape} and {self.v.shape}"
            )
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValueError("field contains non-finite values")

    @property
    def q(self) -> np.ndarray:
        return self.grid.nodes()

    def stacked(self) -> np.ndarray:
        """Array of shape (2, n) with rows (u, v)."""
        return np.stack([self.u, self.v])

    @classmethod
    def from_stacked(cls, t, y, grid):
        return cls(t, y[0].copy(), y[1].copy(), grid)


def gaussian_bump(grid: Grid, u_inf=0.5, v_inf=0.0, epsilon=0.1, sigma=1.0, q0=0.0, t=0.0):
    """Uniform background with a Gaussian perturbation of amplitude ``epsilon`` in u only."""
    q = grid.nodes()
    u = u_inf + epsilon * np.exp(-0.5 * ((q - q0) / sigma) ** 2)
    v = np.full_like(q, v_inf)
    return FieldState(t, u, v, grid)
