"""Matrix functions of the assembled operators: semigroups, wave and unitary
groups, resolvents, fractional powers, Riesz transforms, and the
transform-based integral cross-checks.

Hermitian matrices go through the unitary eigendecomposition; general
matrices go through a similarity eigendecomposition guarded by a condition
estimate (beyond 1e8 the routine refuses, and callers fall back to
scaling-and-squaring, which is how the semigroup itself is always computed).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .model import OUModel
from .operators import (
    OperatorMatrix,
    assemble_companion,
    assemble_dirac,
    assemble_generator,
    assemble_gradient,
)

_COND_LIMIT = 1e8
_HERM_TOL = 1e-12
_KERNEL_CUT = 1e-8


class IllConditionedBasis(RuntimeError):
    """Eigenbasis too ill-conditioned for a reliable functional calculus."""


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    transform: np.ndarray
    inverse: np.ndarray
    condition: float
    hermitian: bool

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return (self.transform * fn(self.eigenvalues)) @ self.inverse


def decompose(matrix: np.ndarray) -> SpectralDecomposition:
    A = np.asarray(matrix)
    scale = np.linalg.norm(A)
    herm = np.linalg.norm(A - A.conj().T) <= _HERM_TOL * max(scale, 1.0)
    if herm:
        vals, vecs = np.linalg.eigh(A)
        dec = SpectralDecomposition(vals, vecs, vecs.conj().T, 1.0, True)
    else:
        vals, vecs = np.linalg.eig(A)
        cond = float(np.linalg.cond(vecs))
        if cond > _COND_LIMIT:
            raise IllConditionedBasis(
                f"eigenvector condition {cond:.3e} exceeds {_COND_LIMIT:.0e}; "
                "use a decomposition-free route"
            )
        dec = SpectralDecomposition(vals, vecs, np.linalg.inv(vecs), cond, False)
    recon = dec.apply(lambda lam: lam)
    err = np.linalg.norm(recon - A)
    if err > 1e-9 * max(scale, 1.0):
        raise IllConditionedBasis(f"reconstruction error {err:.3e} too large")
    return dec


@lru_cache(maxsize=64)
def _cached_decomposition(model: OUModel, which: str) -> SpectralDecomposition:
    mat = {
        "generator": lambda: assemble_generator(model).matrix,
        "companion": lambda: assemble_companion(model).matrix,
        "dirac": lambda: assemble_dirac(model).matrix,
    }[which]()
    return decompose(mat)


def matfun(op: OperatorMatrix, fn: Callable[[np.ndarray], np.ndarray]) -> OperatorMatrix:
    """Apply a scalar function through the eigendecomposition."""
    dec = decompose(op.matrix)
    return OperatorMatrix(op.domain, op.codomain, dec.apply(fn))


def semigroup(model: OUModel, z: complex) -> OperatorMatrix:
    """e^{zL} for Re z >= 0, by scaling-and-squaring on zL.

    Never routed through an eigendecomposition: the non-symmetric generator
    is non-normal and its eigenbasis conditioning degrades with the
    truncation degree.
    """
    if z.real < -1e-14:
        raise ValueError(f"semigroup requires Re z >= 0, got {z}")
    L = assemble_generator(model).matrix
    return OperatorMatrix("scalar", "scalar", expm(z * L.astype(complex)))


def companion_semigroup(model: OUModel, z: complex) -> OperatorMatrix:
    if z.real < -1e-14:
        raise ValueError(f"semigroup requires Re z >= 0, got {z}")
    C = assemble_companion(model).matrix
    return OperatorMatrix("field", "field", expm(z * C.astype(complex)))


def _require_self_adjoint(model: OUModel, what: str) -> None:
    if not model.is_self_adjoint:
        raise ValueError(
            f"{what} exists only in the self-adjoint case B = I; the group "
            "generation fails for non-symmetric drift"
        )


def wave_pair(model: OUModel, t: float) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Cosine and sine families cos(t sqrt(-L)), sin(t sqrt(-L)) for B = I."""
    _require_self_adjoint(model, "the wave pair")
    dec = _cached_decomposition(model, "generator")
    freq = np.sqrt(np.maximum(-dec.eigenvalues.real, 0.0))
    C = dec.apply(lambda lam: np.cos(t * freq))
    S = dec.apply(lambda lam: np.sin(t * freq))
    return (
        OperatorMatrix("scalar", "scalar", C),
        OperatorMatrix("scalar", "scalar", S),
    )


def dirac_group(model: OUModel, t: float, scaled: bool = True) -> OperatorMatrix:
    """Unitary group of the Hodge-Dirac operator for B = I.

    scaled=True gives e^{(i/sqrt2) t D} (the normalization whose square is the
    generator pair); scaled=False gives e^{i t D}, the propagation-speed-one
    group.
    """
    _require_self_adjoint(model, "the Dirac group")
    dec = _cached_decomposition(model, "dirac")
    factor = 1.0 / math.sqrt(2.0) if scaled else 1.0
    U = dec.apply(lambda lam: np.exp(1j * factor * t * lam))
    return OperatorMatrix("dirac", "dirac", U)


def _pinv_sqrt(dec: SpectralDecomposition, cut: float = _KERNEL_CUT) -> np.ndarray:
    """(positive part)^{-1/2} with the numerical kernel mapped to zero."""
    lam = dec.eigenvalues.real
    inv = np.where(lam > cut, 1.0 / np.sqrt(np.maximum(lam, cut)), 0.0)
    return dec.apply(lambda _: inv)


def riesz(model: OUModel) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Riesz transform pair (R, R_bar) for B = I.

    R = grad о (-L)^{-1/2} on the orthocomplement of constants (R kills the
    constants); R_bar = div о (-companion)^{-1/2} supported on the closure of
    the gradient range.
    """
    _require_self_adjoint(model, "the Riesz transforms")
    G = assemble_gradient(model)
    dgen = _cached_decomposition(model, "generator")
    # -L is positive semidefinite here
    neg_gen = SpectralDecomposition(
        -dgen.eigenvalues, dgen.transform, dgen.inverse, dgen.condition, dgen.hermitian
    )
    R = G.matrix @ _pinv_sqrt(neg_gen)
    dcomp = _cached_decomposition(model, "companion")
    neg_comp = SpectralDecomposition(
        -dcomp.eigenvalues, dcomp.transform, dcomp.inverse, dcomp.condition, dcomp.hermitian
    )
    Rbar = G.adjoint().matrix @ _pinv_sqrt(neg_comp)
    return (
        OperatorMatrix("scalar", "field", R),
        OperatorMatrix("field", "scalar", Rbar),
    )


def sign_dirac(model: OUModel) -> OperatorMatrix:
    """sgn(D) for B = I: sign of the eigenvalues, zero on the kernel."""
    _require_self_adjoint(model, "sgn of the Dirac operator")
    dec = _cached_decomposition(model, "dirac")
    sgn = np.where(np.abs(dec.eigenvalues.real) > _KERNEL_CUT,
                   np.sign(dec.eigenvalues.real), 0.0)
    return OperatorMatrix("dirac", "dirac", dec.apply(lambda _: sgn))


def gradient_pseudoinverse(model: OUModel) -> np.ndarray:
    return np.linalg.pinv(assemble_gradient(model).matrix, rcond=1e-12)


def intertwined_pair(model: OUModel, t: float) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Field-space cosine/sine built by intertwining: C_bar(t) grad f = grad C(t) f
    on the gradient range, extended by zero on its orthocomplement."""
    C, S = wave_pair(model, t)
    G = assemble_gradient(model).matrix
    Gp = gradient_pseudoinverse(model)
    return (
        OperatorMatrix("field", "field", G @ C.matrix @ Gp),
        OperatorMatrix("field", "field", G @ S.matrix @ Gp),
    )


def block_group_formula(model: OUModel, t: float) -> OperatorMatrix:
    """The 2x2 block form of e^{(i/sqrt2) t D} assembled from the wave pair,
    the Riesz transforms, and the intertwined field-space families."""
    _require_self_adjoint(model, "the block group formula")
    C, S = wave_pair(model, t)
    Cbar, Sbar = intertwined_pair(model, t)
    R, Rbar = riesz(model)
    M = model.truncation.size
    dM = model.dimension * M
    out = np.zeros((M + dM, M + dM), dtype=complex)
    iroot2 = 1j / math.sqrt(2.0)
    out[:M, :M] = C.matrix
    out[:M, M:] = iroot2 * (Rbar.matrix @ Sbar.matrix)
    out[M:, :M] = iroot2 * (R.matrix @ S.matrix)
    out[M:, M:] = Cbar.matrix
    return OperatorMatrix("dirac", "dirac", out)


def resolvent(model: OUModel, t: float, which: str = "dirac") -> OperatorMatrix:
    """(I - i t D)^{-1} or (I - t^2 L)^{-1} by dense solve."""
    if which == "dirac":
        D = assemble_dirac(model).matrix
        n = D.shape[0]
        if t == 0.0:
            return OperatorMatrix("dirac", "dirac", np.eye(n, dtype=complex))
        A = np.eye(n, dtype=complex) - 1j * t * D
        return OperatorMatrix("dirac", "dirac", np.linalg.solve(A, np.eye(n, dtype=complex)))
    if which == "generator":
        L = assemble_generator(model).matrix
        n = L.shape[0]
        A = np.eye(n) - (t * t) * L
        return OperatorMatrix("scalar", "scalar", np.linalg.solve(A, np.eye(n)))
    raise ValueError(f"unknown resolvent kind {which!r}")


def resolvent_identity_residual(model: OUModel, t: float) -> float:
    """Residual of (I+itD)^{-1} + (I-itD)^{-1} = 2(I + t^2 D^2)^{-1}."""
    D = assemble_dirac(model).matrix
    n = D.shape[0]
    plus = np.linalg.solve(np.eye(n, dtype=complex) + 1j * t * D, np.eye(n, dtype=complex))
    minus = np.linalg.solve(np.eye(n, dtype=complex) - 1j * t * D, np.eye(n, dtype=complex))
    direct = 2.0 * np.linalg.solve(np.eye(n) + (t * t) * (D @ D), np.eye(n))
    return float(np.linalg.norm(plus + minus - direct) / np.linalg.norm(direct))


def frac_power_resolvent(model: OUModel, lam: float, alpha: float) -> OperatorMatrix:
    """(lam - L)^{-alpha} through the eigendecomposition; lam > 0 keeps the
    spectrum away from the branch point."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    L = assemble_generator(model).matrix
    dec = decompose(L)
    vals = (lam - dec.eigenvalues) ** (-alpha)
    return OperatorMatrix("scalar", "scalar", dec.apply(lambda _: vals))


def _gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def weyl_integral(
    model: OUModel,
    t: float,
    moment: int,
    half_range: float | None = None,
    points: int | None = None,
    tolerance: float = 1e-9,
) -> OperatorMatrix:
    """Group-averaged integral (2 pi t)^{-1/2} int phi_m(s) e^{-i s D} ds
    with phi_m(s) = s^m exp(-s^2 / 2t), m in {0, 1, 2}.

    m = 0 reproduces the semigroup pair diag(e^{tL}, e^{t L_bar}); m = 1
    reproduces (-i) D e^{-t D^2 / 2} up to the prefactor carried here
    (the result is exactly D e^{-t D^2/2} after the i/t factor below);
    m = 2 gives t(I - t D^2) e^{-t D^2 / 2}.
    """
    if moment not in (0, 1, 2):
        raise ValueError("moment must be 0, 1 or 2")
    if t <= 0:
        raise ValueError("t must be positive")
    _require_self_adjoint(model, "the group-average integral")
    S = half_range if half_range is not None else 10.0 * math.sqrt(t)
    if S < 8.0 * math.sqrt(t):
        raise ValueError(f"integration half-range {S} too small; need >= {8*math.sqrt(t):.3f}")
    # absolute tail of the weight beyond S, relative to the full mass
    tail = math.erfc(S / math.sqrt(2.0 * t)) * (1.0 + (S * S / t) ** moment)
    if tail > 0.1 * tolerance:
        raise ValueError(f"weight tail {tail:.2e} beyond S exceeds 0.1 x tolerance")
    dec = _cached_decomposition(model, "dirac")
    lam = dec.eigenvalues.real
    if points is None:
        points = max(256, int(6.0 * S * (np.max(np.abs(lam)) + 1.0)))
    s, w = _gauss_legendre(-S, S, points)
    phase = np.exp(-1j * np.outer(s, lam))          # (points, modes)
    weight = (s ** moment) * np.exp(-s * s / (2.0 * t))
    diag = (w * weight) @ phase / math.sqrt(2.0 * math.pi * t)
    if moment == 1:
        diag = diag * (1j / t)   # i/sqrt(2 pi t^3) overall prefactor
    return OperatorMatrix("dirac", "dirac", dec.apply(lambda _: diag))


def heat_pair_direct(model: OUModel, t: float) -> OperatorMatrix:
    """diag(e^{tL}, e^{t L_bar}) as one dirac-space matrix, for cross-checks."""
    M = model.truncation.size
    dM = model.dimension * M
    out = np.zeros((M + dM, M + dM), dtype=complex)
    out[:M, :M] = semigroup(model, t).matrix
    out[M:, M:] = companion_semigroup(model, t).matrix
    return OperatorMatrix("dirac", "dirac", out)


def dirac_heat_direct(model: OUModel, t: float, power: int = 0) -> OperatorMatrix:
    """D^power e^{-t D^2 / 2} through the Dirac eigendecomposition (B = I)."""
    dec = _cached_decomposition(model, "dirac")
    lam = dec.eigenvalues.real
    vals = (lam ** power) * np.exp(-0.5 * t * lam * lam)
    return OperatorMatrix("dirac", "dirac", dec.apply(lambda _: vals))


def subordination(
    model: OUModel,
    z: complex,
    panels: int = 48,
    points_per_panel: int = 16,
    tolerance: float = 1e-8,
) -> OperatorMatrix:
    """Poisson-type subordination e^{-z sqrt(-L)} for Re z >= 0 via the
    half-line integral

        (1/sqrt(pi)) int_0^inf u^{-1/2} e^{-u} exp((z^2 / 4u) L) du,

    evaluated on the rotated ray u = e^{i arg z} x^2 so that the integrand
    decays for every z in the open right half-plane (on the ray both exponents
    share the phase of z, which keeps the semigroup factor contractive).
    Cross-checked downstream against the diagonal e^{-z sqrt(n/2)}.
    """
    _require_self_adjoint(model, "subordination")
    if z == 0:
        M = model.truncation.size
        return OperatorMatrix("scalar", "scalar", np.eye(M, dtype=complex))
    if z.real < 0:
        raise ValueError("requires Re z >= 0")
    theta = cmath.phase(z)
    if abs(theta) > 0.5 * math.pi - 1e-9:
        raise ValueError("purely imaginary z is outside the stable quadrature range")
    dec = _cached_decomposition(model, "generator")
    lam = dec.eigenvalues.real          # <= 0
    rot = cmath.exp(1j * theta)
    coeff = (z * z) / rot / 4.0          # arg(coeff) = arg z; Re(coeff) > 0
    ctheta = math.cos(theta)
    # integrand mass beyond X^2: int_{X^2}^inf x^{-1/2} e^{-x cos(theta)} dx
    V = -math.log(0.05 * tolerance * math.sqrt(ctheta))
    X = math.sqrt(V / ctheta)

    def evaluate(npanels: int) -> np.ndarray:
        edges = np.linspace(0.0, X, npanels + 1)
        total = np.zeros_like(lam, dtype=complex)
        for a, b in zip(edges[:-1], edges[1:]):
            x, w = _gauss_legendre(a, b, points_per_panel)
            # exp(-e^{i theta} x^2) * exp(coeff * lam / x^2) per eigenvalue
            with np.errstate(divide="ignore", invalid="ignore"):
                arg = np.where(x[:, None] > 0, np.outer(1.0 / (x * x), lam) * coeff, 0.0)
            vals = np.exp(-rot * (x * x))[:, None] * np.exp(arg)
            vals[x == 0.0] = 0.0
            total += w @ vals
        return (2.0 * cmath.exp(0.5j * theta) / math.sqrt(math.pi)) * total

    coarse = evaluate(panels)
    fine = evaluate(2 * panels)
    resid = float(np.max(np.abs(fine - coarse)))
    if resid > tolerance:
        raise ArithmeticError(f"subordination quadrature residual {resid:.2e} > {tolerance:.0e}")
    return OperatorMatrix("scalar", "scalar", dec.apply(lambda _: fine))
