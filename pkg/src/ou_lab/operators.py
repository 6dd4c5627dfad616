"""Matrix assembly for the gradient, divergence, generator, its field-space
companion, and the Hodge-Dirac block operator.

Coefficient-space conventions:
  scalar space   coefficient vectors of length M = basis size,
  field space    axis-major stacks (g_1; ...; g_d) of length d*M,
  dirac space    (scalar; field) of length (d+1)*M.

The gradient lowers total degree by one, so it maps the truncated space into
itself with no truncation error; the divergence (its exact conjugate
transpose in the orthonormal coefficient representation) raises degree and is
cut at the truncation boundary.  Identity checks involving the divergence are
therefore asserted on inputs a couple of degrees below the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hermite import (
    BasisTruncation,
    DiracState,
    SpectralField,
    SpectralFunction,
    dirac_from_stacked,
    field_from_stacked,
)
from .model import OUModel


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix tagged with its domain and codomain coefficient spaces."""

    domain: str
    codomain: str
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.codomain != self.domain:
            raise ValueError(f"cannot compose {self.domain}<-... with ...<-{other.codomain}")
        return OperatorMatrix(other.domain, self.codomain, self.matrix @ other.matrix)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.codomain, self.domain, self.matrix.conj().T)

    def apply(self, obj):
        vec = _as_vector(obj, self.domain)
        out = self.matrix @ vec
        return _from_vector(out, obj.basis if hasattr(obj, "basis") else obj.scalar.basis,
                            self.codomain)


def _as_vector(obj, space: str) -> np.ndarray:
    if space == "scalar":
        if not isinstance(obj, SpectralFunction):
            raise TypeError("expected a SpectralFunction for the scalar space")
        return obj.coeffs
    if space == "field":
        if not isinstance(obj, SpectralField):
            raise TypeError("expected a SpectralField for the field space")
        return obj.stacked()
    if space == "dirac":
        if not isinstance(obj, DiracState):
            raise TypeError("expected a DiracState for the dirac space")
        return obj.stacked()
    raise ValueError(f"unknown space tag {space!r}")


def _from_vector(vec: np.ndarray, basis: BasisTruncation, space: str):
    if space == "scalar":
        return SpectralFunction(basis, vec)
    if space == "field":
        return field_from_stacked(basis, vec)
    if space == "dirac":
        return dirac_from_stacked(basis, vec)
    raise ValueError(f"unknown space tag {space!r}")


@lru_cache(maxsize=32)
def _gradient_blocks(d: int, max_degree: int) -> tuple[np.ndarray, ...]:
    trunc = BasisTruncation(d, max_degree)
    M = trunc.size
    pos = {a: i for i, a in enumerate(trunc.index_list)}
    blocks = []
    for j in range(d):
        G = np.zeros((M, M))
        for alpha, i in pos.items():
            if alpha[j] >= 1:
                lower = list(alpha)
                lower[j] -= 1
                G[pos[tuple(lower)], i] = math.sqrt(alpha[j])
        blocks.append(G)
    return tuple(blocks)


def assemble_gradient(model: OUModel) -> OperatorMatrix:
    """Directional gradient as a block column: the j-th block sends
    h_alpha to sqrt(alpha_j) h_{alpha - e_j}."""
    blocks = _gradient_blocks(model.dimension, model.max_degree)
    return OperatorMatrix("scalar", "field", np.vstack(blocks))


def assemble_divergence(model: OUModel) -> OperatorMatrix:
    """Gaussian-adjoint of the gradient: exactly its conjugate transpose."""
    return assemble_gradient(model).adjoint()


def drift_on_field(model: OUModel) -> OperatorMatrix:
    """B acting componentwise on field stacks: the Kronecker product B (x) I."""
    M = model.truncation.size
    return OperatorMatrix("field", "field", np.kron(model.drift, np.eye(M)))


def assemble_generator(model: OUModel) -> OperatorMatrix:
    """L = -1/2 div(B grad) on the scalar space.

    Preserves total degree, so the matrix is exact on the whole truncation;
    for B = I it is diag(-|alpha|/2).
    """
    G = assemble_gradient(model)
    Bf = drift_on_field(model)
    L = -0.5 * (G.adjoint().matrix @ Bf.matrix @ G.matrix)
    return OperatorMatrix("scalar", "scalar", L)


def assemble_companion(model: OUModel) -> OperatorMatrix:
    """Field-space companion -1/2 grad(div B), intertwined with the generator
    through the gradient below the truncation boundary."""
    G = assemble_gradient(model)
    Bf = drift_on_field(model)
    C = -0.5 * (G.matrix @ G.adjoint().matrix @ Bf.matrix)
    return OperatorMatrix("field", "field", C)


def assemble_dirac(model: OUModel) -> OperatorMatrix:
    """Block operator [[0, div B], [grad, 0]] on scalar + field space.

    Hermitian exactly when B = I.
    """
    G = assemble_gradient(model)
    Bf = drift_on_field(model)
    M = model.truncation.size
    dM = model.dimension * M
    D = np.zeros((M + dM, M + dM), dtype=float)
    D[:M, M:] = G.adjoint().matrix @ Bf.matrix
    D[M:, :M] = G.matrix
    return OperatorMatrix("dirac", "dirac", D)


def identity_on(model: OUModel, space: str) -> OperatorMatrix:
    M = model.truncation.size
    size = {"scalar": M, "field": model.dimension * M, "dirac": (model.dimension + 1) * M}[space]
    return OperatorMatrix(space, space, np.eye(size))


def degree_mask(truncation: BasisTruncation, max_total_degree: int, space: str = "scalar") -> np.ndarray:
    """Boolean mask selecting coefficients of total degree <= max_total_degree."""
    base = truncation.degrees() <= max_total_degree
    if space == "scalar":
        return base
    if space == "field":
        return np.tile(base, truncation.dimension)
    if space == "dirac":
        return np.concatenate([base, np.tile(base, truncation.dimension)])
    raise ValueError(f"unknown space tag {space!r}")
