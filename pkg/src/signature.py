"""Phase-portrait signatures, tube neighbourhoods and signature metrics."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial.distance import cdist

from src.config import AppConfig, resolve
from src.curve_core import (
    ArcLengthCurve,
    CurvatureProfile,
    euclidean_curvature,
    hausdorff_distance,
    period_count,
)
from src.numerics import cumulative_integral, fit_spline, periodic_derivatives, segment_distances
from src.utils import (
    ConstantCurvature,
    KindMismatch,
    NoCommonDomain,
    NonConvexArc,
    NotGraphLike,
    OpenCurve,
    SignatureKind,
    SignatureNotSimple,
    SymmetryResidue,
    VanishingF,
)


logger = logging.getLogger(__name__)


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class PhasePortrait:
    """Sampled signature {(f, f′, ..., f^(i))} in an in-phase parameter s.

    Closed portraits sample [0, length) and may cover only one minimal period
    of a curve that repeats `periods` times per revolution.
    """
    s: np.ndarray
    samples: np.ndarray
    kind: SignatureKind = SignatureKind.EUCLIDEAN
    closed: bool = False
    length: Optional[float] = None
    periods: int = 1

    def __post_init__(self):
        s = np.array(self.s, dtype=float).reshape(-1)
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] < 2 or samples.shape[0] != len(s):
            raise ValueError("portrait samples must be an (N, order + 1) array with order >= 1")
        if len(s) < 2 or np.any(np.diff(s) <= 0):
            raise ValueError("portrait parameter must be strictly increasing")
        if not np.all(np.isfinite(samples)):
            raise ValueError("portrait contains non-finite values")
        length = float(s[-1] - s[0]) if self.length is None else float(self.length)
        s.setflags(write=False)
        samples.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "length", length)

    @classmethod
    def from_graph(cls, u, v, kind: SignatureKind = SignatureKind.EUCLIDEAN) -> "PhasePortrait":
        """Order-1 portrait of the graph v = F(u), parameterized in phase (ds = du/F)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.any(v == 0) or (np.any(v > 0) and np.any(v < 0)):
            raise VanishingF(float(np.min(np.abs(v))), 0.0)
        s = cumulative_integral(1.0 / v, u)
        return cls(s, np.column_stack([u, v]), kind=kind)

    @property
    def order(self) -> int:
        return self.samples.shape[1] - 1

    @property
    def u(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.samples[:, 1]

    def spread(self) -> float:
        """Largest coordinate range relative to max(1, max|u|); 0 for a point signature."""
        scale = max(1.0, float(np.max(np.abs(self.u))))
        return float(np.max(np.ptp(self.samples, axis=0))) / scale

    def in_phase_error(self) -> float:
        """max over interior samples of |d(column j)/ds − column j+1|."""
        worst = 0.0
        for j in range(self.order):
            slope = np.gradient(self.samples[:, j], self.s)
            worst = max(worst, float(np.max(np.abs(slope[1:-1] - self.samples[1:-1, j + 1]))))
        return worst

    def to_profile(self) -> CurvatureProfile:
        return CurvatureProfile(self.s - self.s[0], self.samples, closed=self.closed,
                                domain_length=self.length)


@dataclass(frozen=True, eq=False)
class GraphSamples:
    """Samples of a graph v = F(u), stored with u increasing."""
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(-1)
        v = np.array(self.v, dtype=float).reshape(-1)
        if len(u) < 2 or len(u) != len(v):
            raise ValueError("graph needs at least two (u, v) samples")
        steps = np.diff(u)
        if steps[0] < 0:
            u, v, steps = u[::-1], v[::-1], -steps[::-1]
        bad = np.nonzero(steps <= 0)[0]
        if len(bad):
            raise NotGraphLike(int(bad[0]) + 1)
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_portrait(cls, portrait: PhasePortrait, column: int = 0) -> "GraphSamples":
        """Graph of column+1 over column of the portrait."""
        return cls(portrait.samples[:, column], portrait.samples[:, column + 1])

    @property
    def lower(self) -> float:
        return float(self.u[0])

    @property
    def upper(self) -> float:
        return float(self.u[-1])

    def __call__(self, u) -> np.ndarray:
        return np.interp(u, self.u, self.v)

    def restricted(self, lower: float, upper: float) -> "GraphSamples":
        """Graph on [lower, upper], with interpolated endpoints."""
        inside = (self.u > lower) & (self.u < upper)
        u = np.concatenate([[lower], self.u[inside], [upper]])
        return GraphSamples(u, self(u))


@dataclass(frozen=True, eq=False)
class TubeNeighborhood:
    """Inner tube IT(S, δ) plus the endpoint rectangles that make up T(S, δ)."""
    graph: GraphSamples
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"tube radius must be positive, got {self.delta}")

    @classmethod
    def from_portrait(cls, portrait: PhasePortrait, delta: float) -> "TubeNeighborhood":
        return cls(GraphSamples.from_portrait(portrait), float(delta))

    @property
    def left(self) -> np.ndarray:
        return np.array([self.graph.u[0], self.graph.v[0]])

    @property
    def right(self) -> np.ndarray:
        return np.array([self.graph.u[-1], self.graph.v[-1]])

    def boundary(self) -> np.ndarray:
        """Closed boundary polygon of T(S, δ), counterclockwise."""
        u, v, d = self.graph.u, self.graph.v, self.delta
        (ul, vl), (ur, vr) = self.left, self.right
        bottom = np.column_stack([u, v - d])
        right = np.array([[ur + d, vr - d], [ur + d, vr + d]])
        top = np.column_stack([u, v + d])[::-1]
        left = np.array([[ul - d, vl + d], [ul - d, vl - d]])
        return np.vstack([bottom, right, top, left])


@dataclass(frozen=True, eq=False)
class LiftedSignature:
    """Signature samples with the parameter appended: (κ, ..., κ^(i), t)."""
    samples: np.ndarray
    base_point: np.ndarray
    length: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] < 2:
            raise ValueError("lifted samples must be an (N, order + 2) array")
        if np.any(np.diff(samples[:, -1]) <= 0):
            raise ValueError("lift parameter must be strictly increasing")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))

    @property
    def order(self) -> int:
        return self.samples.shape[1] - 2

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, -1]


# ============================================================================
# Signatures
# ============================================================================

def euclidean_signature(
    curve: ArcLengthCurve,
    order: int,
    one_period: bool = True,
    config: Optional[AppConfig] = None,
) -> PhasePortrait:
    """(κ, κ′, ..., κ^(i)) sampled at the arc-length nodes.

    Closed curves keep one minimal period of κ unless `one_period` is False;
    constant curvature keeps the whole revolution.
    """
    if order < 1:
        raise ValueError(f"signature order must be >= 1, got {order}")
    config = resolve(config)
    profile = euclidean_curvature(curve, order, config)
    if not (curve.closed and one_period):
        return PhasePortrait(profile.s, profile.columns, SignatureKind.EUCLIDEAN,
                             closed=curve.closed, length=profile.length)

    try:
        periods = period_count(profile, config)
    except (ConstantCurvature, SymmetryResidue) as e:
        logger.debug("Keeping the full revolution: %s", e)
        periods = 1
    period = profile.length / periods
    keep = profile.s < period - 1e-9 * period
    return PhasePortrait(profile.s[keep], profile.columns[keep], SignatureKind.EUCLIDEAN,
                         closed=True, length=period, periods=periods)


def affine_frame(
    curve: ArcLengthCurve,
    s,
    exponent: Optional[float] = None,
    config: Optional[AppConfig] = None,
) -> np.ndarray:
    """Affine frame rows (T, N) at arc length s.

    T = γ_s κ^{-p} and N = κ^{-2p}(κ n − p κ_s/κ t) in the Frenet frame (t, n).
    """
    config = resolve(config)
    p = config.affine_exponent if exponent is None else float(exponent)
    profile = euclidean_curvature(curve, 1, config)
    s = np.asarray(s, dtype=float)
    kappa = np.asarray(profile.evaluate(s, 0))
    kappa_s = np.asarray(profile.evaluate(s, 1))
    if np.any(kappa <= 0):
        raise NonConvexArc(float(np.min(kappa)), float(np.ravel(s)[np.argmin(np.ravel(kappa))]))
    tangent = curve.tangent(s)
    normal = np.stack([-tangent[..., 1], tangent[..., 0]], axis=-1)
    t_row = tangent * kappa[..., None] ** (-p)
    n_row = (kappa[..., None] * normal - (p * kappa_s / kappa)[..., None] * tangent) * kappa[..., None] ** (-2 * p)
    return np.stack([t_row, n_row], axis=-2)


def affine_signature(
    curve: ArcLengthCurve,
    config: Optional[AppConfig] = None,
    exponent: Optional[float] = None,
) -> PhasePortrait:
    """(μ, μ_α) sampled in affine arc length α = ∫ κ^p ds.

    μ is the (2, 1) entry of the Cartan matrix A′A⁻¹ of the frame from
    `affine_frame`, written out in κ, κ_s and κ_ss. Closed curves are
    differentiated in the Fourier domain with the top modes cut, which keeps
    the resampling ripple out of the higher derivatives.
    """
    config = resolve(config)
    p = config.affine_exponent if exponent is None else float(exponent)
    s = curve.s
    if curve.closed:
        keep = max(1, int(config.spectral_keep * curve.node_count))
        raw = euclidean_curvature(curve, 0, config).kappa
        kappa, kappa_s, kappa_ss = periodic_derivatives(raw, curve.total_length, 2, keep).T
    else:
        profile = euclidean_curvature(curve, 2, config)
        kappa, kappa_s, kappa_ss = (profile.column(j) for j in range(3))
    if np.any(kappa <= 0):
        worst = int(np.argmin(kappa))
        raise NonConvexArc(float(kappa[worst]), float(s[worst]))

    a = -p * kappa ** (-2 * p - 1) * kappa_s
    b = kappa ** (1 - 2 * p)
    a_s = -p * ((-2 * p - 1) * kappa ** (-2 * p - 2) * kappa_s ** 2 + kappa ** (-2 * p - 1) * kappa_ss)
    b_s = (1 - 2 * p) * kappa ** (-2 * p) * kappa_s
    mu = a_s - b * kappa - a * (b_s + a * kappa) / b

    if curve.closed:
        s_ext = np.append(s, curve.total_length)
        alpha_ext = cumulative_integral(np.append(kappa, kappa[0]) ** p, s_ext)
        alpha, total = alpha_ext[:-1], float(alpha_ext[-1])
        mu_alpha = periodic_derivatives(mu, curve.total_length, 1, keep)[:, 1] * kappa ** (-p)
    else:
        alpha = cumulative_integral(kappa ** p, s)
        total = float(alpha[-1])
        mu_alpha = fit_spline(alpha, mu, degree=config.spline_degree)(alpha, 1)
    logger.debug("Affine signature: alpha length %.9g, mu in [%.6g, %.6g]", total, mu.min(), mu.max())
    return PhasePortrait(alpha, np.column_stack([mu, mu_alpha]), SignatureKind.AFFINE,
                         closed=curve.closed, length=total)


# ============================================================================
# Tubes
# ============================================================================

def inner_tube_contains(tube: TubeNeighborhood, p) -> np.ndarray | bool:
    """p ∈ IT(S, δ): u within the graph's range and |v − F(u)| < δ."""
    p = np.asarray(p, dtype=float)
    u, v = p[..., 0], p[..., 1]
    graph = tube.graph
    inside = (u >= graph.lower) & (u <= graph.upper) & (np.abs(v - graph(u)) < tube.delta)
    return bool(inside) if inside.ndim == 0 else inside


def tube_contains(tube: TubeNeighborhood, p) -> np.ndarray | bool:
    """p ∈ T(S, δ): the inner tube or one of the two endpoint rectangles."""
    p = np.asarray(p, dtype=float)
    u = p[..., 0]
    in_left = (u < tube.graph.lower) & (np.max(np.abs(p - tube.left), axis=-1) < tube.delta)
    in_right = (u > tube.graph.upper) & (np.max(np.abs(p - tube.right), axis=-1) < tube.delta)
    inside = np.asarray(inner_tube_contains(tube, p)) | in_left | in_right
    return bool(inside) if inside.ndim == 0 else inside


def delta_star(tube: TubeNeighborhood) -> float:
    """Radius δ* such that the δ*-neighbourhood of the base samples lies in T(S, δ).

    Exact distance from every base sample to the boundary polygon of the tube.
    """
    base = np.column_stack([tube.graph.u, tube.graph.v])
    polygon = tube.boundary()
    starts, ends = polygon, np.roll(polygon, -1, axis=0)
    return float(segment_distances(base, starts, ends).min())


# ============================================================================
# Metrics
# ============================================================================

def signature_hausdorff(s1: PhasePortrait, s2: PhasePortrait) -> float:
    """Hausdorff distance between two portraits as point sets in R^{i+1}."""
    if s1.kind is not s2.kind or s1.order != s2.order:
        raise KindMismatch(f"{s1.kind.value} order {s1.order}", f"{s2.kind.value} order {s2.order}")
    return hausdorff_distance(s1.samples, s2.samples, a_closed=s1.closed, b_closed=s2.closed, connect=True)


def common_domain(f: GraphSamples, g: GraphSamples) -> tuple[float, float]:
    """Shared u-interval [max lower, min upper]."""
    lower = max(f.lower, g.lower)
    upper = min(f.upper, g.upper)
    if lower >= upper:
        raise NoCommonDomain(lower, upper)
    return lower, upper


def l1_signature_distance(f: GraphSamples, g: GraphSamples) -> float:
    """∫|F − F*| du over the common domain.

    Both graphs are piecewise linear, so on the merged grid with the sign
    changes of F − F* inserted the trapezoid rule is exact.
    """
    lower, upper = common_domain(f, g)
    grid = np.union1d(f.u, g.u)
    grid = np.concatenate([[lower], grid[(grid > lower) & (grid < upper)], [upper]])
    diff = f(grid) - g(grid)

    crossing = np.nonzero(diff[:-1] * diff[1:] < 0)[0]
    if len(crossing):
        roots = grid[crossing] - diff[crossing] * (grid[crossing + 1] - grid[crossing]) / (
            diff[crossing + 1] - diff[crossing])
        grid = np.insert(grid, crossing + 1, roots)
        diff = np.insert(diff, crossing + 1, 0.0)
    return float(trapezoid(np.abs(diff), grid))


def lift_signature(
    curve: ArcLengthCurve,
    order: int,
    base_point_index: int = 0,
    config: Optional[AppConfig] = None,
) -> LiftedSignature:
    """(κ, ..., κ^(i), t) over one full revolution starting at node `base_point_index`."""
    if not curve.closed:
        raise OpenCurve("lift_signature")
    profile = euclidean_curvature(curve, order, config)
    shift = int(base_point_index) % curve.node_count
    columns = np.roll(profile.columns, -shift, axis=0)
    samples = np.column_stack([columns, profile.s])
    return LiftedSignature(samples, curve.nodes[shift], curve.total_length)


def lifted_signature_distance(p1: LiftedSignature, p2: LiftedSignature) -> float:
    """Hausdorff distance between two lifted signatures."""
    if p1.order != p2.order:
        raise KindMismatch(f"lifted order {p1.order}", f"lifted order {p2.order}")
    return hausdorff_distance(p1.samples, p2.samples, connect=True)


def injectivity_gap(signature: PhasePortrait | LiftedSignature, separation: float) -> float:
    """Smallest distance between samples whose parameters differ by more than
    `separation` (a fraction of the length; cyclic for closed portraits)."""
    if isinstance(signature, LiftedSignature):
        points, params, closed = signature.samples, signature.t, False
    else:
        points, params, closed = signature.samples, signature.s, signature.closed
    length = signature.length
    limit = separation * length
    best = np.inf
    for lo in range(0, len(points), 512):
        gap = np.abs(params[lo:lo + 512, None] - params[None, :])
        if closed:
            gap = np.minimum(gap, length - gap)
        dist = cdist(points[lo:lo + 512], points)
        dist[gap <= limit] = np.inf
        best = min(best, float(dist.min()))
    return best


def _injectivity_check(signature, separation: float, tol: float) -> tuple[float, float]:
    """(gap, required gap) for the injectivity heuristic."""
    extent = max(float(np.max(np.ptp(signature.samples, axis=0))), 1e-12)
    gap = injectivity_gap(signature, separation)
    logger.debug("Injectivity gap %.3e (extent %.3e)", gap, extent)
    return gap, tol * extent


def is_injective(
    signature: PhasePortrait | LiftedSignature,
    separation: Optional[float] = None,
    tol: Optional[float] = None,
    config: Optional[AppConfig] = None,
) -> bool:
    """Injectivity heuristic: well-separated samples stay tol·extent apart."""
    config = resolve(config)
    separation = config.injectivity_separation if separation is None else separation
    tol = config.injectivity_tol if tol is None else tol
    gap, required = _injectivity_check(signature, separation, tol)
    return gap >= required


def require_simple(
    signature: PhasePortrait | LiftedSignature,
    config: Optional[AppConfig] = None,
) -> None:
    """Raise SignatureNotSimple unless `signature` passes the injectivity heuristic."""
    config = resolve(config)
    gap, required = _injectivity_check(signature, config.injectivity_separation, config.injectivity_tol)
    if gap < required:
        raise SignatureNotSimple(gap, required)
