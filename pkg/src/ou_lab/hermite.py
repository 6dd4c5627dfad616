"""Orthonormal Hermite basis for the standard Gaussian measure.

Everything downstream lives in the coefficient space of the probabilists'
Hermite polynomials h_n, normalized so that

    int h_m(x) h_n(x) dgamma(x) = delta_{mn},
    dgamma(x) = (2 pi)^(-d/2) exp(-|x|^2/2) dx.

With this normalization the three-term recurrence is

    h_0 = 1,   h_1 = x,   h_{n+1}(x) = (x h_n(x) - sqrt(n) h_{n-1}(x)) / sqrt(n+1),

and differentiation acts as h_n' = sqrt(n) h_{n-1}, which keeps all operator
matrices in exact integer/sqrt arithmetic.

Multi-dimensional bases are tensor products indexed by multi-indices ordered
graded-lexicographically; the ordering is fixed once per truncation so matrix
layouts are reproducible across runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class MultiIndex:
    """Tensor Hermite index: one non-negative degree per axis."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.entries):
            raise ValueError(f"multi-index entries must be non-negative, got {self.entries}")

    @property
    def degree(self) -> int:
        return sum(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _graded_lex(d: int, max_degree: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for m in range(max_degree + 1):
        shell = [a for a in product(range(m + 1), repeat=d) if sum(a) == m]
        out.extend(sorted(shell))
    return tuple(out)


@dataclass(frozen=True)
class BasisTruncation:
    """All multi-indices of total degree <= max_degree, graded-lexicographic."""

    dimension: int
    max_degree: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")

    @property
    def index_list(self) -> tuple[tuple[int, ...], ...]:
        return _graded_lex(self.dimension, self.max_degree)

    @property
    def size(self) -> int:
        return math.comb(self.max_degree + self.dimension, self.dimension)

    def position(self, index: Sequence[int]) -> int:
        return _position_map(self.dimension, self.max_degree)[tuple(index)]

    def degrees(self) -> np.ndarray:
        """Total degree of each basis element, in basis order."""
        return np.array([sum(a) for a in self.index_list])


@lru_cache(maxsize=64)
def _position_map(d: int, max_degree: int) -> dict:
    return {a: i for i, a in enumerate(_graded_lex(d, max_degree))}


def gauss_hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating polynomials of degree <= 2*order - 1
    exactly against the standard Gaussian on the line.

    Computed from the symmetric tridiagonal eigenproblem of the three-term
    recurrence (Golub-Welsch); weights are the squared first eigenvector
    components, so they are positive and sum to one.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    off = np.sqrt(np.arange(1, order))
    J = np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(J)
    weights = vecs[0] ** 2
    # the rule is symmetric about 0; enforce it exactly
    skew = np.max(np.abs(nodes + nodes[::-1]))
    if skew > 1e-13:
        raise ArithmeticError(f"Gauss-Hermite nodes lost symmetry: {skew:.3e}")
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights / weights.sum()


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensorized Gauss-Hermite rule for the d-dimensional standard Gaussian."""

    dimension: int
    order: int
    axis_nodes: np.ndarray = field(repr=False, default=None)
    axis_weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.axis_nodes is None:
            x, w = gauss_hermite_rule(self.order)
            object.__setattr__(self, "axis_nodes", x)
            object.__setattr__(self, "axis_weights", w)

    def __eq__(self, other):
        return (
            isinstance(other, QuadratureGrid)
            and self.dimension == other.dimension
            and self.order == other.order
        )

    def __hash__(self):
        return hash((self.dimension, self.order))

    @property
    def points(self) -> np.ndarray:
        """All tensor nodes, shape (order**d, d)."""
        return _tensor_points(self.dimension, self.order)[0]

    @property
    def weights(self) -> np.ndarray:
        return _tensor_points(self.dimension, self.order)[1]


@lru_cache(maxsize=32)
def _tensor_points(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_hermite_rule(order)
    if d == 1:
        return x[:, None], w
    grids = np.meshgrid(*([x] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.ones(1)
    for _ in range(d):
        wt = np.outer(wt, w).ravel()
    return pts, wt


def default_grid(truncation: BasisTruncation) -> QuadratureGrid:
    """Order 2N+2 per axis, so products of two basis elements integrate exactly."""
    return QuadratureGrid(truncation.dimension, 2 * truncation.max_degree + 2)


def hermite_values_1d(max_degree: int, x: np.ndarray) -> np.ndarray:
    """Matrix of h_n(x_j) for n = 0..max_degree; works for complex x."""
    x = np.asarray(x)
    V = np.zeros((max_degree + 1,) + x.shape, dtype=x.dtype if np.iscomplexobj(x) else float)
    V[0] = 1.0
    if max_degree >= 1:
        V[1] = x
    for n in range(1, max_degree):
        V[n + 1] = (x * V[n] - math.sqrt(n) * V[n - 1]) / math.sqrt(n + 1)
    return V


def hermite_eval(index: MultiIndex | Sequence[int], point: Sequence[float]) -> float:
    """Evaluate the tensor basis element h_alpha at a single point."""
    entries = index.entries if isinstance(index, MultiIndex) else tuple(index)
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if len(entries) != point.shape[-1]:
        raise ValueError(f"index has {len(entries)} axes but point has {point.shape[-1]}")
    val = 1.0
    for n, x in zip(entries, point):
        val *= hermite_values_1d(n, np.array([x]))[n][0]
    return val


def basis_matrix(truncation: BasisTruncation, points: np.ndarray) -> np.ndarray:
    """Values h_alpha(x_j): shape (basis size, number of points).

    `points` has shape (P, d); complex points are allowed (analytic
    continuation of the polynomials).
    """
    points = np.asarray(points)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[1] != truncation.dimension:
        raise ValueError("point dimension does not match the basis")
    per_axis = [hermite_values_1d(truncation.max_degree, points[:, j])
                for j in range(truncation.dimension)]
    out_dtype = complex if np.iscomplexobj(points) else float
    V = np.empty((truncation.size, points.shape[0]), dtype=out_dtype)
    for i, alpha in enumerate(truncation.index_list):
        row = per_axis[0][alpha[0]]
        for j in range(1, truncation.dimension):
            row = row * per_axis[j][alpha[j]]
        V[i] = row
    return V


@lru_cache(maxsize=32)
def _grid_basis_matrix(d: int, max_degree: int, order: int) -> np.ndarray:
    trunc = BasisTruncation(d, max_degree)
    pts, _ = _tensor_points(d, order)
    return basis_matrix(trunc, pts)


def grid_basis_matrix(truncation: BasisTruncation, grid: QuadratureGrid) -> np.ndarray:
    if grid.dimension != truncation.dimension:
        raise ValueError("grid and truncation dimensions differ")
    return _grid_basis_matrix(truncation.dimension, truncation.max_degree, grid.order)


@dataclass(frozen=True)
class SpectralFunction:
    """Element of L^2(gamma) as a coefficient vector over the truncated basis."""

    basis: BasisTruncation
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def norm2(self) -> float:
        """L^2(gamma) norm; equals the Euclidean coefficient norm."""
        return float(np.linalg.norm(self.coeffs))

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        if self.basis != other.basis:
            raise ValueError("cannot add functions over different truncations")
        return SpectralFunction(self.basis, self.coeffs + other.coeffs)

    def __rmul__(self, scalar: complex) -> "SpectralFunction":
        return SpectralFunction(self.basis, scalar * self.coeffs)


def unit_function(basis: BasisTruncation, index: Sequence[int]) -> SpectralFunction:
    c = np.zeros(basis.size, dtype=complex)
    c[basis.position(index)] = 1.0
    return SpectralFunction(basis, c)


def expand(
    f: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    basis: BasisTruncation,
    grid: QuadratureGrid,
) -> SpectralFunction:
    """Project samples or a callable onto the truncated basis.

    coeffs[alpha] = sum_i w_i f(x_i) h_alpha(x_i), which is the exact
    L^2(gamma) projection whenever f lies in the truncated span.
    """
    if grid.order < basis.max_degree + 1:
        raise ValueError(
            f"grid order {grid.order} too coarse for degree {basis.max_degree}; "
            f"need at least {basis.max_degree + 1}"
        )
    vals = f(grid.points) if callable(f) else np.asarray(f)
    if vals.shape != (grid.points.shape[0],):
        raise ValueError("sample count does not match the grid")
    V = grid_basis_matrix(basis, grid)
    return SpectralFunction(basis, V @ (grid.weights * vals))


def synthesize(f: SpectralFunction, points: np.ndarray) -> np.ndarray:
    """Pointwise evaluation sum_alpha coeffs[alpha] h_alpha(x)."""
    V = basis_matrix(f.basis, points)
    return f.coeffs @ V


def grid_values(f: SpectralFunction, grid: QuadratureGrid) -> np.ndarray:
    return f.coeffs @ grid_basis_matrix(f.basis, grid)


def lp_norm(f: SpectralFunction, p: float, grid: QuadratureGrid) -> float:
    """Quadrature L^p(gamma) norm, exact for |f|^p of polynomial total degree
    within the rule's exactness range."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not math.isfinite(p):
        raise ValueError("p must be finite")
    vals = grid_values(f, grid)
    return float(np.sum(grid.weights * np.abs(vals) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class SpectralField:
    """Element of L^2(gamma; R^d): one coefficient vector per axis."""

    basis: BasisTruncation
    coeffs: np.ndarray  # shape (d, basis size)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.basis.dimension, self.basis.size):
            raise ValueError(
                f"expected shape {(self.basis.dimension, self.basis.size)}, got {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    def component(self, j: int) -> SpectralFunction:
        return SpectralFunction(self.basis, self.coeffs[j])

    def norm2(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def stacked(self) -> np.ndarray:
        """Axis-major stacking (g_1; ...; g_d) used by all field-space matrices."""
        return self.coeffs.reshape(-1)


def field_from_stacked(basis: BasisTruncation, vec: np.ndarray) -> SpectralField:
    return SpectralField(basis, np.asarray(vec, dtype=complex).reshape(basis.dimension, basis.size))


@dataclass(frozen=True)
class DiracState:
    """Pair (scalar, field) in L^2(gamma) + L^2(gamma; R^d)."""

    scalar: SpectralFunction
    vector: SpectralField

    def __post_init__(self):
        if self.scalar.basis != self.vector.basis:
            raise ValueError("scalar and field parts must share one truncation")

    @property
    def basis(self) -> BasisTruncation:
        return self.scalar.basis

    def norm2(self) -> float:
        return math.hypot(self.scalar.norm2(), self.vector.norm2())

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.scalar.coeffs, self.vector.stacked()])


def dirac_from_stacked(basis: BasisTruncation, vec: np.ndarray) -> DiracState:
    vec = np.asarray(vec, dtype=complex)
    M = basis.size
    return DiracState(
        SpectralFunction(basis, vec[:M]),
        field_from_stacked(basis, vec[M:]),
    )


def scalar_state(f: SpectralFunction) -> DiracState:
    zero = SpectralField(f.basis, np.zeros((f.basis.dimension, f.basis.size), dtype=complex))
    return DiracState(f, zero)
