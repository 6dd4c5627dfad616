"""Model data for the Ornstein-Uhlenbeck generator in gradient form.

The drift matrix B is constrained to B + B^T = 2I, i.e. identity symmetric
part plus an arbitrary antisymmetric part.  The symmetric part is normalized
to the identity exactly on construction; anything violating the constraint
beyond tolerance is rejected, since the whole operator class is defined by it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermite import BasisTruncation, QuadratureGrid, default_grid

_SYM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OUModel:
    dimension: int
    max_degree: int
    drift: np.ndarray = field(repr=False, default=None)
    grid_order: int = None

    def __post_init__(self):
        B = self.drift
        if B is None:
            B = np.eye(self.dimension)
        B = np.asarray(B, dtype=float)
        if B.shape != (self.dimension, self.dimension):
            raise ValueError(f"drift must be {self.dimension}x{self.dimension}")
        sym = 0.5 * (B + B.T)
        if np.max(np.abs(sym - np.eye(self.dimension))) > _SYM_TOL:
            raise ValueError(
                "drift matrix must satisfy B + B^T = 2I; symmetric part deviates by "
                f"{np.max(np.abs(sym - np.eye(self.dimension))):.3e}"
            )
        anti = 0.5 * (B - B.T)
        object.__setattr__(self, "drift", np.eye(self.dimension) + anti)
        if self.grid_order is None:
            object.__setattr__(self, "grid_order", 2 * self.max_degree + 2)

    def __eq__(self, other):
        return (
            isinstance(other, OUModel)
            and self.dimension == other.dimension
            and self.max_degree == other.max_degree
            and self.grid_order == other.grid_order
            and np.array_equal(self.drift, other.drift)
        )

    def __hash__(self):
        return hash((self.dimension, self.max_degree, self.grid_order,
                     self.drift.tobytes()))

    @property
    def truncation(self) -> BasisTruncation:
        return BasisTruncation(self.dimension, self.max_degree)

    @property
    def grid(self) -> QuadratureGrid:
        if self.grid_order == 2 * self.max_degree + 2:
            return default_grid(self.truncation)
        return QuadratureGrid(self.dimension, self.grid_order)

    @property
    def is_self_adjoint(self) -> bool:
        """True iff the drift is the identity, i.e. the generator is symmetric."""
        return bool(np.allclose(self.drift, np.eye(self.dimension), atol=1e-14))

    @property
    def antisymmetry(self) -> float:
        """Spectral norm of the antisymmetric part (B - B^T)/2."""
        return float(np.linalg.norm(0.5 * (self.drift - self.drift.T), 2))


def isotropic_model(dimension: int, max_degree: int) -> OUModel:
    """Self-adjoint model: B = I."""
    return OUModel(dimension, max_degree)


def rotated_model(b: float, max_degree: int) -> OUModel:
    """Planar non-symmetric model: B = I + b J with J the rotation generator."""
    B = np.array([[1.0, b], [-b, 1.0]])
    return OUModel(2, max_degree, drift=B)
