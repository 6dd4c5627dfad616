"""Declared supports, bump realizations, and separation functions.

Truncated Hermite expansions are polynomials, hence nowhere zero; "support"
is therefore always a declaration (a carrier set) together with a measured
realization residual: the quadrature mass of the realized function outside
the carrier, relative to its norm.  Every probe built on top reports values
against bounds with that residual attached, never assuming exact supports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from .hermite import (
    BasisTruncation,
    DiracState,
    QuadratureGrid,
    SpectralFunction,
    basis_matrix,
    grid_values,
    scalar_state,
)

DEFAULT_SUPPORT_THRESHOLD = 1e-3


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        below = np.maximum(np.asarray(self.lo) - pts, 0.0)
        above = np.maximum(pts - np.asarray(self.hi), 0.0)
        return np.sqrt(np.sum(below**2 + above**2, axis=1))


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.maximum(
            np.linalg.norm(pts - np.asarray(self.center), axis=1) - self.radius, 0.0
        )


def _part_distance(p, q) -> float:
    if isinstance(p, Ball) and isinstance(q, Ball):
        gap = np.linalg.norm(np.asarray(p.center) - np.asarray(q.center)) - p.radius - q.radius
        return max(float(gap), 0.0)
    if isinstance(p, Box) and isinstance(q, Box):
        gaps = np.maximum(
            np.maximum(np.asarray(q.lo) - np.asarray(p.hi), np.asarray(p.lo) - np.asarray(q.hi)),
            0.0,
        )
        return float(np.linalg.norm(gaps))
    if isinstance(p, Ball):
        return max(float(q.distance(np.asarray(p.center)[None, :])[0]) - p.radius, 0.0)
    return _part_distance(q, p)


@dataclass(frozen=True)
class Region:
    """Finite union of boxes and balls."""

    parts: tuple

    def distance(self, pts: np.ndarray) -> np.ndarray:
        return np.min(np.stack([p.distance(pts) for p in self.parts]), axis=0)


def region_distance(a: Region, b: Region) -> float:
    """Euclidean set distance between the two carriers."""
    return min(_part_distance(p, q) for p in a.parts for q in b.parts)


def interval(lo: float, hi: float) -> Region:
    return Region((Box((lo,), (hi,)),))


def box(lo: Sequence[float], hi: Sequence[float]) -> Region:
    return Region((Box(tuple(lo), tuple(hi)),))


def ball(center: Sequence[float], radius: float) -> Region:
    return Region((Ball(tuple(center), radius),))


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _Phi(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(z / math.sqrt(2.0)))


def _mollified_ramp(r: np.ndarray, a: float, b: float, w: float) -> np.ndarray:
    """Gaussian mollification (width w) of the ramp that is 1 for r <= a and
    0 for r >= b.  Mollification preserves the Lipschitz constant 1/(b-a)."""
    if w <= 0:
        return np.clip((b - r) / (b - a), 0.0, 1.0)
    za = (a - r) / w
    zb = (b - r) / w
    return _Phi(za) + ((b - r) * (_Phi(zb) - _Phi(za)) + w * (_phi(zb) - _phi(za))) / (b - a)


@dataclass(frozen=True)
class BumpFunction:
    """Radial plateau bump: 1 on the plateau ball, 0 outside the carrier
    ball (up to the mollifier tail), values in [0, 1]."""

    center: tuple[float, ...]
    radius: float
    plateau_radius: float
    lipschitz_bound: float
    mollification: float

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return _mollified_ramp(r, self.plateau_radius, self.radius, self.mollification)

    def gradient_sup(self, pts: np.ndarray) -> float:
        """Max |grad| over the given points (the profile is radial, so the
        gradient norm is the radial derivative)."""
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        a, b, w = self.plateau_radius, self.radius, self.mollification
        if w <= 0:
            inside = (r > a) & (r < b)
            return float(np.max(np.where(inside, 1.0 / (b - a), 0.0)))
        slope = (_Phi((b - r) / w) - _Phi((a - r) / w)) / (b - a)
        return float(np.max(np.abs(slope)))


def separation_bump(inner: Region, outer: Region, eps: float = 0.1) -> BumpFunction:
    """Separating function equal to 1 on `inner` and 0 on `outer`, built from
    the clamped distance ramp mollified at width eps * dist(inner, outer);
    its gradient stays below (1 + 2 eps)/dist."""
    D = region_distance(inner, outer)
    if D <= 0:
        raise ValueError("regions must be a positive distance apart")
    part = inner.parts[0]
    if isinstance(part, Ball):
        center, r0 = part.center, part.radius
    else:
        center = tuple(0.5 * (np.asarray(part.lo) + np.asarray(part.hi)))
        r0 = 0.5 * float(np.linalg.norm(np.asarray(part.hi) - np.asarray(part.lo)))
    w = eps * D
    # pull both ends in by 2w so the mollified profile is 1 / 0 on the sets
    # up to Gaussian tails; slope 1/(b - a) <= (1 + 2 eps)/D for eps <= 0.2
    a = r0 + 2.0 * w
    b = r0 + D - 2.0 * w
    if b <= a:
        raise ValueError("separation too small for the requested mollification width")
    return BumpFunction(
        center=tuple(center),
        radius=b,
        plateau_radius=a,
        lipschitz_bound=1.0 / (b - a),
        mollification=w,
    )


@lru_cache(maxsize=16)
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def project_callable(
    basis: BasisTruncation,
    fn: Callable[[np.ndarray], np.ndarray],
    half_width: float,
    center: Sequence[float] | None = None,
    points_per_axis: int = 240,
) -> SpectralFunction:
    """Accurate Gaussian-measure projection of a localized function using a
    tensor Legendre rule over a box around its carrier.

    The generic Gauss-Hermite grid under-resolves features narrower than its
    local node spacing, so localized bumps get a dedicated rule.
    """
    d = basis.dimension
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    xg, wg = _legendre_rule(points_per_axis)
    axes = [half_width * xg + c[j] for j in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.ones(1)
    for _ in range(d):
        wt = np.outer(wt, half_width * wg).ravel()
    density = np.exp(-0.5 * np.sum(pts * pts, axis=1)) / (2.0 * math.pi) ** (0.5 * d)
    V = basis_matrix(basis, pts)
    return SpectralFunction(basis, V @ (wt * density * fn(pts)))


@dataclass(frozen=True)
class SupportSpec:
    """A carrier declaration plus the realized state and measured residual."""

    carrier: Region
    state: DiracState
    threshold: float
    residual: float

    @property
    def basis(self) -> BasisTruncation:
        return self.state.basis

    def norm2(self) -> float:
        return self.state.norm2()


def measure_residual(state: DiracState, carrier: Region, grid: QuadratureGrid) -> float:
    """Relative L^2 quadrature mass of the state outside the carrier."""
    pts = grid.points
    outside = carrier.distance(pts) > 0.0
    if not np.any(outside):
        return 0.0
    mass = grid.weights[outside] * np.abs(grid_values(state.scalar, grid)[outside]) ** 2
    total = state.scalar.norm2() ** 2
    for j in range(state.basis.dimension):
        comp = state.vector.component(j)
        mass = mass + grid.weights[outside] * np.abs(grid_values(comp, grid)[outside]) ** 2
        total += comp.norm2() ** 2
    return float(math.sqrt(float(np.sum(mass)) / total))


def gaussian_bump_support(
    basis: BasisTruncation,
    carrier: Region,
    center: Sequence[float],
    width: float,
    grid: QuadratureGrid,
    threshold: float = DEFAULT_SUPPORT_THRESHOLD,
    normalize: bool = True,
) -> SupportSpec:
    """Scalar Gaussian bump exp(-|x-c|^2 / 2 width^2) declared on `carrier`.

    Analytic profiles trade a small, recorded spill outside the carrier for
    the geometric spectral decay that truncation-refinement certificates
    need; compactly supported profiles of comparable width are not
    resolvable at desk-scale degrees.
    """
    c = np.asarray(center, dtype=float)

    def profile(pts: np.ndarray) -> np.ndarray:
        rel = (pts - c) / width
        return np.exp(-0.5 * np.sum(rel * rel, axis=1))

    half = 8.0 * width + float(np.max(np.abs(c))) + 1.0
    f = project_callable(basis, profile, half_width=half)
    if normalize:
        f = (1.0 / f.norm2()) * f
    state = scalar_state(f)
    residual = measure_residual(state, carrier, grid)
    return SupportSpec(carrier=carrier, state=state, threshold=threshold, residual=residual)


def coherent_bump_support(
    basis: BasisTruncation,
    carrier: Region,
    tilt: Sequence[float],
    grid: QuadratureGrid,
    threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> SupportSpec:
    """Unit-width Gaussian bump written as a tilted exponential.

    Spatially it concentrates near 2*tilt under the Gaussian weight;
    spectrally it occupies O(|tilt|^2) modes, making it the cheapest
    localized state the truncated basis offers (used where the degree budget
    is tight, e.g. two-dimensional resolvent probes).
    """
    t = np.asarray(tilt, dtype=float)
    c = np.zeros(basis.size, dtype=complex)
    for i, alpha in enumerate(basis.index_list):
        val = math.exp(-0.5 * float(t @ t))
        for tj, aj in zip(t, alpha):
            if aj == 0:
                continue
            if tj == 0.0:
                val = 0.0
                break
            val *= math.copysign(1.0, tj) ** aj * math.exp(
                aj * math.log(abs(tj)) - 0.5 * math.lgamma(aj + 1)
            )
        c[i] = val
    f = SpectralFunction(basis, c)
    f = (1.0 / f.norm2()) * f
    state = scalar_state(f)
    residual = measure_residual(state, carrier, grid)
    return SupportSpec(carrier=carrier, state=state, threshold=threshold, residual=residual)
