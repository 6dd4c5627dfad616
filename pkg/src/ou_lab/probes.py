"""Executable propagation and off-diagonal probes.

Each probe returns measured values together with the bound it is checked
against and the realization residuals that enter the comparison, so every
certificate is reproducible from its own record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import (
    dirac_group,
    heat_pair_direct,
    resolvent,
    semigroup,
    _cached_decomposition,
)
from .hermite import (
    DiracState,
    QuadratureGrid,
    SpectralFunction,
    grid_basis_matrix,
    grid_values,
)
from .mehler import MehlerTime, kernel_apply
from .model import OUModel
from .operators import (
    OperatorMatrix,
    assemble_dirac,
    assemble_gradient,
    degree_mask,
)
from .supports import BumpFunction, SupportSpec, measure_residual, region_distance


def measurement_grid(model: OUModel, order: int = 160) -> QuadratureGrid:
    """Fixed high-order rule used to measure spatial masses, independent of
    the model truncation so that refinement comparisons share one ruler."""
    return QuadratureGrid(model.dimension, max(order, model.grid_order))


# ---------------------------------------------------------------------------
# propagation speed


@dataclass(frozen=True)
class LeakageRecord:
    t: float
    delta: float
    norm_ratio: float
    mass_ratio: float
    residual: float


def evolve_state(model: OUModel, state: DiracState, t: float) -> DiracState:
    """Apply the propagation-speed-one group e^{itD}."""
    U = dirac_group(model, t, scaled=False)
    return U.apply(state)


def leakage(
    model: OUModel,
    spec: SupportSpec,
    t: float,
    delta: float,
    grid: QuadratureGrid | None = None,
) -> LeakageRecord:
    """Relative mass of e^{itD} u outside the carrier enlarged by |t| + delta.

    Finite propagation speed predicts this is controlled by the realization
    residual plus truncation error, uniformly in t.
    """
    grid = grid or measurement_grid(model)
    evolved = evolve_state(model, spec.state, t)
    pts = grid.points
    outside = spec.carrier.distance(pts) > abs(t) + delta
    total = evolved.norm2() ** 2
    mass = 0.0
    if np.any(outside):
        vals = grid_values(evolved.scalar, grid)
        acc = grid.weights[outside] * np.abs(vals[outside]) ** 2
        for j in range(model.dimension):
            vj = grid_values(evolved.vector.component(j), grid)
            acc = acc + grid.weights[outside] * np.abs(vj[outside]) ** 2
        mass = float(np.sum(acc))
    ratio2 = mass / total
    return LeakageRecord(
        t=t,
        delta=delta,
        norm_ratio=math.sqrt(ratio2),
        mass_ratio=ratio2,
        residual=spec.residual,
    )


def schrodinger_leakage(
    model: OUModel,
    spec: SupportSpec,
    t: float,
    delta: float,
    grid: QuadratureGrid | None = None,
) -> LeakageRecord:
    """Control experiment: same mask applied to e^{itL} u, whose propagation
    speed is unbounded, so the mass does not decay under refinement."""
    grid = grid or measurement_grid(model)
    U = semigroup(model, 1j * t)
    f = U.apply(spec.state.scalar)
    pts = grid.points
    outside = spec.carrier.distance(pts) > abs(t) + delta
    vals = grid_values(f, grid)
    mass = float(np.sum(grid.weights[outside] * np.abs(vals[outside]) ** 2))
    total = f.norm2() ** 2
    return LeakageRecord(
        t=t,
        delta=delta,
        norm_ratio=math.sqrt(mass / total),
        mass_ratio=mass / total,
        residual=spec.residual,
    )


# ---------------------------------------------------------------------------
# commutators


def multiplier_matrix(model: OUModel, values: np.ndarray) -> np.ndarray:
    """Scalar multiplication operator from point values on the model grid:
    entries <f h_alpha, h_beta>, exact while total degrees stay inside the
    rule's exactness range; beyond that the aliasing is measured by callers
    via grid doubling."""
    grid = model.grid
    V = grid_basis_matrix(model.truncation, grid)
    return (V * (grid.weights * values)) @ V.T


def bump_on_grid(model: OUModel, eta: BumpFunction) -> np.ndarray:
    return eta(model.grid.points)


def dirac_multiplier(model: OUModel, values: np.ndarray) -> np.ndarray:
    """Block-diagonal multiplication by a scalar function on scalar + field."""
    Me = multiplier_matrix(model, values)
    return np.kron(np.eye(model.dimension + 1), Me)


@dataclass(frozen=True)
class CommutatorRecord:
    closed_form: OperatorMatrix
    algebraic: OperatorMatrix
    deviation: float
    deviation_degree: int
    norm_bound: float
    gradient_sup: float


def commutator(
    model: OUModel,
    eta_values: np.ndarray,
    check_degree: int | None = None,
) -> CommutatorRecord:
    """Commutator [eta, D] built two ways.

    (a) algebraically, as M_eta D - D M_eta with the truncated multiplication
    operator; (b) from the closed form (<grad eta, g>; -(grad eta) f) using
    the spectral gradient of the realized eta.  Returns (b), records the
    deviation from (a) on the subspace of total degree <= check_degree.

    The two agree exactly only while multiplication by eta keeps inputs
    inside the truncation; the honest comparison degree is the boundary
    degree minus the effective degree of eta.
    """
    grid = model.grid
    trunc = model.truncation
    M = trunc.size
    V = grid_basis_matrix(trunc, grid)
    eta_coeffs = V @ (grid.weights * eta_values)
    G = assemble_gradient(model).matrix
    grad_eta = (G @ eta_coeffs).reshape(model.dimension, M)
    parts = [grad_eta[j] @ V for j in range(model.dimension)]
    mult_parts = [multiplier_matrix(model, p) for p in parts]

    dM = model.dimension * M
    closed = np.zeros((M + dM, M + dM), dtype=complex)
    for j in range(model.dimension):
        closed[:M, M + j * M:M + (j + 1) * M] = mult_parts[j]
        closed[M + j * M:M + (j + 1) * M, :M] = -mult_parts[j]

    D = assemble_dirac(model).matrix
    Me = dirac_multiplier(model, eta_values)
    algebraic = Me @ D - D @ Me

    if check_degree is None:
        check_degree = max(trunc.max_degree - 2, 0)
    mask = degree_mask(trunc, check_degree, "dirac")
    dev = float(np.linalg.norm((closed - algebraic)[:, mask], 2))

    grad_sup = float(np.max(np.sqrt(np.sum(
        np.abs(np.stack(parts)) ** 2, axis=0))))
    norm_bound = float(np.linalg.norm(closed, 2))
    return CommutatorRecord(
        closed_form=OperatorMatrix("dirac", "dirac", closed),
        algebraic=OperatorMatrix("dirac", "dirac", algebraic),
        deviation=dev,
        deviation_degree=check_degree,
        norm_bound=norm_bound,
        gradient_sup=grad_sup,
    )


def double_commutator_deviation(model: OUModel, eta_values: np.ndarray,
                                check_degree: int | None = None) -> float:
    """Norm of [eta, [eta, D]] on the low-degree subspace; zero in exact
    arithmetic for untruncated multiplication."""
    rec = commutator(model, eta_values, check_degree)
    Me = dirac_multiplier(model, eta_values)
    C = rec.closed_form.matrix
    double = Me @ C - C @ Me
    mask = degree_mask(model.truncation, rec.deviation_degree, "dirac")
    return float(np.linalg.norm(double[:, mask], 2))


def duhamel_check(
    model: OUModel,
    eta_values: np.ndarray,
    t: float,
    order: int = 32,
    seed: int = 20240 ,
) -> float:
    """Relative residual of the commutator identity

        [eta, e^{itD}] u = it int_0^1 e^{istD} [eta, D] e^{i(1-s)tD} u ds

    on a seeded random state, with Gauss-Legendre in s.  Both sides use the
    same truncated multiplication operator, so the identity is exact up to
    the s-quadrature."""
    dec = _cached_decomposition(model, "dirac")
    lam = dec.eigenvalues.real

    def group(tau: float) -> np.ndarray:
        return dec.apply(lambda _: np.exp(1j * tau * lam))

    Me = dirac_multiplier(model, eta_values)
    n = Me.shape[0]
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u /= np.linalg.norm(u)
    D = assemble_dirac(model).matrix
    comm = Me @ D - D @ Me

    Ut = group(t)
    lhs = Me @ (Ut @ u) - Ut @ (Me @ u)
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    rhs = np.zeros_like(u)
    for sk, wk in zip(s, ws):
        rhs = rhs + wk * (group(sk * t) @ (comm @ (group((1.0 - sk) * t) @ u)))
    rhs = 1j * t * rhs
    scale = max(np.linalg.norm(lhs), 1e-300)
    return float(np.linalg.norm(lhs - rhs) / scale)


@dataclass(frozen=True)
class SeparationBoundRecord:
    t: float
    n: int
    lhs: float
    rhs: float
    hypothesis_residual: float


def mcintosh_morris_bound(
    model: OUModel,
    u: SupportSpec,
    v: SupportSpec,
    eta: BumpFunction,
    t: float,
    n: int,
    hypothesis_tolerance: float = 0.05,
) -> SeparationBoundRecord:
    """Iterated-commutator pairing bound for separated states:

        |<e^{itD} u, v>|  <=  |t|^n ||grad eta||_inf^n ||u|| ||v||,

    valid when eta u = u and eta v = 0.  Those hypotheses hold for the
    realized states only up to their residuals, which are measured and
    attached; the probe refuses when they exceed the stated tolerance."""
    grid = model.grid
    eta_vals = eta(grid.points)
    Me = dirac_multiplier(model, eta_vals)
    uu = u.state.stacked()
    vv = v.state.stacked()
    res_u = float(np.linalg.norm(Me @ uu - uu) / np.linalg.norm(uu))
    res_v = float(np.linalg.norm(Me @ vv) / np.linalg.norm(vv))
    hyp = max(res_u, res_v)
    if hyp > hypothesis_tolerance:
        raise ValueError(
            f"separation hypotheses violated: eta u = u to {res_u:.2e}, "
            f"eta v = 0 to {res_v:.2e}"
        )
    evolved = evolve_state(model, u.state, t)
    lhs = abs(np.vdot(vv, evolved.stacked()))
    grad_sup = eta.gradient_sup(grid.points)
    rhs = (abs(t) * grad_sup) ** n * u.norm2() * v.norm2()
    return SeparationBoundRecord(t=t, n=n, lhs=float(lhs), rhs=float(rhs),
                                 hypothesis_residual=hyp)


# ---------------------------------------------------------------------------
# off-diagonal bounds


@dataclass(frozen=True)
class HeatBoundRecord:
    R: float
    t: float
    pairing: float
    bound_sqrt: float
    bound_statement: float
    residual: float
    mehler_gap: float


def offdiag_heat(
    model: OUModel,
    f: SupportSpec,
    g: SupportSpec,
    t: float,
    gradient_variant: bool = False,
) -> HeatBoundRecord:
    """Heat-semigroup pairing of separated bumps against the Gaussian decay
    bounds.

    bound_sqrt  = sqrt(2t / (pi R^2)) exp(-R^2/2t)   (the proof-chain bound)
    bound_stmt  = (2t / (pi R^2)) exp(-R^2/2t)       (the statement bound)

    for the scalar variant, and sqrt(2/(pi t)) exp(-R^2/2t) for the gradient
    variant.  The certified inequality is pairing <= bound_sqrt + residual
    with the summed realization residuals.
    """
    R = region_distance(f.carrier, g.carrier)
    if R <= 0:
        raise ValueError("carriers must be separated")
    fc = f.state.scalar
    gc = g.state
    evolved = semigroup(model, t).apply(fc)
    if gradient_variant:
        G = assemble_gradient(model)
        grad = G.apply(evolved)
        pairing = abs(np.vdot(gc.vector.stacked(), grad.stacked()))
        norm_g = gc.vector.norm2()
        bound_sqrt = math.sqrt(2.0 / (math.pi * t)) * math.exp(-R * R / (2.0 * t))
        bound_stmt = bound_sqrt
        mehler_gap = 0.0
    else:
        pairing = abs(np.vdot(gc.scalar.coeffs, evolved.coeffs))
        norm_g = gc.scalar.norm2()
        bound_sqrt = math.sqrt(2.0 * t / (math.pi * R * R)) * math.exp(-R * R / (2.0 * t))
        bound_stmt = (2.0 * t / (math.pi * R * R)) * math.exp(-R * R / (2.0 * t))
        kernel_side = kernel_apply(MehlerTime(t, model.dimension), fc, model.grid)
        mehler_gap = float(np.linalg.norm(kernel_side.coeffs - evolved.coeffs))
    norms = fc.norm2() * norm_g
    return HeatBoundRecord(
        R=R,
        t=t,
        pairing=float(pairing / norms),
        bound_sqrt=bound_sqrt,
        bound_statement=bound_stmt,
        residual=f.residual + g.residual,
        mehler_gap=mehler_gap,
    )


@dataclass(frozen=True)
class ResolventFit:
    rows: tuple          # (R, t, pairing, floor, used)
    slope: float
    intercept: float
    r_squared: float
    bisectorial_constant: float


def bisectorial_constant(model: OUModel, t_grid: tuple[float, ...] = (0.05, 0.2, 1.0, 5.0, 25.0)) -> float:
    """max over the t grid of ||(I - itD)^{-1}||_2."""
    return max(
        float(np.linalg.norm(resolvent(model, t, "dirac").matrix, 2)) for t in t_grid
    )


def offdiag_resolvent(
    model: OUModel,
    pairs: list[tuple[SupportSpec, SupportSpec]],
    t_grid: list[float],
    floor_factor: float = 5.0,
) -> ResolventFit:
    """Log-linear fit of |<(I - itD)^{-1} u, v>| against R/|t| over separated
    pairs.

    Points whose pairing is below floor_factor times the static overlap
    |<u, v>| (the realization noise floor) are flagged and excluded from the
    regression; the bisectoriality constant is reported alongside.
    """
    rows = []
    for u, v in pairs:
        R = region_distance(u.carrier, v.carrier)
        if R <= 0:
            raise ValueError("carriers must be separated")
        uu = u.state.stacked()
        vv = v.state.stacked()
        floor = abs(np.vdot(vv, uu)) / (np.linalg.norm(uu) * np.linalg.norm(vv))
        for t in t_grid:
            res = resolvent(model, t, "dirac")
            pairing = abs(np.vdot(vv, res.matrix @ uu))
            pairing /= np.linalg.norm(uu) * np.linalg.norm(vv)
            used = pairing > floor_factor * floor and pairing > 1e-13
            rows.append((R, t, float(pairing), float(floor), bool(used)))
    fit_rows = [(r, t, p) for (r, t, p, fl, used) in rows if used]
    if len(fit_rows) < 3:
        raise ValueError("not enough points above the noise floor to fit")
    A = np.array([[1.0, r / abs(t)] for r, t, _ in fit_rows])
    y = np.array([math.log(p) for _, _, p in fit_rows])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ResolventFit(
        rows=tuple(rows),
        slope=float(coef[1]),
        intercept=float(coef[0]),
        r_squared=r2,
        bisectorial_constant=bisectorial_constant(model),
    )
