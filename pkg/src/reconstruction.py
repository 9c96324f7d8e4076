"""Curves from curvature, curvature from signatures, and frames from Cartan matrices.

Fixed-step RK4 is the working integrator; Picard iteration is kept as a
second solver for the frame equation A′ = K A and is cross-checked against it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.interpolate import make_interp_spline

from src.config import AppConfig, resolve
from src.curve_core import ArcLengthCurve, CurvatureProfile, GroupElement, PlanarCurve, apply_group
from src.numerics import bisect_increasing, cumulative_integral, fit_cubic
from src.signature import GraphSamples, PhasePortrait
from src.utils import (
    DegenerateCurve,
    ForbiddenPoint,
    FrameSingular,
    NoConvergence,
    NotGraphLike,
    SignatureKind,
    VanishingF,
    VertexObstruction,
    sup_norm,
)

if TYPE_CHECKING:
    from src.congruence import Partition


logger = logging.getLogger(__name__)


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class MatrixFunction:
    """n×n matrix samples K(s) on [s0, s1], piecewise linear in between."""
    s: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float)
        if values.ndim != 3 or values.shape[0] != len(s) or values.shape[1] != values.shape[2]:
            raise ValueError("values must be an (N, n, n) array matching s")
        if len(s) < 2 or np.any(np.diff(s) <= 0):
            raise ValueError("s must be strictly increasing with at least two samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix function has non-finite entries")
        s.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, matrix, s0: float, s1: float) -> "MatrixFunction":
        matrix = np.asarray(matrix, dtype=float)
        return cls(np.array([s0, s1]), np.stack([matrix, matrix]))

    @classmethod
    def from_callable(cls, fn: Callable[[float], np.ndarray], s0: float, s1: float,
                      samples: int = 1025) -> "MatrixFunction":
        s = np.linspace(s0, s1, samples)
        return cls(s, np.stack([np.asarray(fn(x), dtype=float) for x in s]))

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def span(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    @property
    def sup_norm(self) -> float:
        """M = max entry of |K| over the samples."""
        return sup_norm(self.values)

    def evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        n = self.dimension
        flat = self.values.reshape(len(self.s), n * n)
        entries = [np.interp(s, self.s, flat[:, k]) for k in range(n * n)]
        return np.stack(entries, axis=-1).reshape(s.shape + (n, n))

    def perturbed(self, direction: "MatrixFunction", delta: float) -> "MatrixFunction":
        """K + δ·E sampled on the union of both grids."""
        grid = np.union1d(self.s, direction.s)
        return MatrixFunction(grid, self.evaluate(grid) + delta * direction.evaluate(grid))


@dataclass(frozen=True, eq=False)
class FrameSolution:
    """Sampled frame A(s) with A(anchor) = initial."""
    s: np.ndarray
    frames: np.ndarray
    initial: np.ndarray
    anchor: float
    iteration_count: int = 0
    sup_error_estimate: float = 0.0
    differences: tuple = field(default_factory=tuple)
    method: str = "rk4"
    iterate_peak: float = 0.0
    iterate_bound: float = math.inf

    def __post_init__(self):
        det = np.linalg.det(self.frames)
        worst = int(np.argmin(np.abs(det)))
        if abs(det[worst]) <= 1e-12:
            raise FrameSingular(float(det[worst]))

    def evaluate(self, s) -> np.ndarray:
        return MatrixFunction(self.s, self.frames).evaluate(s)

    def residual(self, k: MatrixFunction) -> float:
        """max |ΔA/Δs − K A| at interior samples."""
        slope = np.gradient(self.frames, self.s, axis=0)
        return sup_norm((slope - k.evaluate(self.s) @ self.frames)[1:-1])


# ============================================================================
# Euclidean reconstruction
# ============================================================================

def curve_from_curvature(
    h: CurvatureProfile,
    x0=(0.0, 0.0),
    theta0: float = 0.0,
    config: Optional[AppConfig] = None,
    steps: Optional[int] = None,
) -> ArcLengthCurve:
    """Unit-speed curve with curvature h, starting at x0 with tangent angle theta0.

    RK4 on θ′ = κ(s), x′ = cos θ, y′ = sin θ. A closed profile yields a closed
    curve when the endpoint returns to x0 within the default decision threshold.
    """
    config = resolve(config)
    steps = steps or config.integrator_steps
    length = h.domain_length
    if length <= 0:
        raise DegenerateCurve(length)
    step = length / steps
    grid = np.linspace(0.0, length, steps + 1)
    k_nodes = np.asarray(h.evaluate(grid), dtype=float)
    k_mid = np.asarray(h.evaluate(grid[:-1] + 0.5 * step), dtype=float)

    theta, x, y = float(theta0), float(x0[0]), float(x0[1])
    nodes = np.empty((steps + 1, 2))
    nodes[0] = x, y
    for i in range(steps):
        k0, km, k1 = k_nodes[i], k_mid[i], k_nodes[i + 1]
        t2 = theta + 0.5 * step * k0
        t3 = theta + 0.5 * step * km
        t4 = theta + step * km
        x += step * (math.cos(theta) + 2 * math.cos(t2) + 2 * math.cos(t3) + math.cos(t4)) / 6
        y += step * (math.sin(theta) + 2 * math.sin(t2) + 2 * math.sin(t3) + math.sin(t4)) / 6
        theta += step * (k0 + 4 * km + k1) / 6
        nodes[i + 1] = x, y

    if h.closed:
        gap = float(np.linalg.norm(nodes[-1] - nodes[0]))
        if gap <= config.threshold_factor * length:
            return ArcLengthCurve.from_unit_speed(nodes[:-1], length, closed=True,
                                                  spline_degree=config.spline_degree)
        logger.warning("Closed curvature profile does not close up (gap %.3e); returning an open curve", gap)
    return ArcLengthCurve.from_unit_speed(nodes, length, closed=False, spline_degree=config.spline_degree)


def _graph_interpolant(graph: GraphSamples):
    degree = 3 if len(graph.u) >= 4 else 1
    return make_interp_spline(graph.u, graph.v, k=degree)


def _solve_in_phase(
    graph: GraphSamples,
    u0: float,
    steps: int,
    config: AppConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve u′ = F(u), u(0) = u0 until u leaves the graph's range.

    s(u) = ∫ du/F is accumulated by Simpson's rule on a fine u-grid and
    inverted by bisection.
    """
    values = graph.v
    threshold = max(config.vertex_tol * float(np.max(np.abs(values))), config.vertex_floor)
    min_abs = float(np.min(np.abs(values)))
    if min_abs < threshold or (np.any(values > 0) and np.any(values < 0)):
        raise VanishingF(min_abs, threshold)
    if not graph.lower <= u0 <= graph.upper:
        raise ValueError(f"u0={u0} lies outside [{graph.lower}, {graph.upper}]")

    direction = 1.0 if values[0] > 0 else -1.0
    end = graph.upper if direction > 0 else graph.lower
    width = abs(end - u0)
    if width <= 0:
        raise DegenerateCurve(0.0)

    interpolant = _graph_interpolant(graph)
    w_grid = np.linspace(0.0, width, 4 * steps + 1)
    u_grid = np.clip(u0 + direction * w_grid, graph.lower, graph.upper)
    travel = cumulative_integral(1.0 / np.abs(interpolant(u_grid)), w_grid)
    length = float(travel[-1])

    s = np.linspace(0.0, length, steps + 1)
    w = bisect_increasing(fit_cubic(w_grid, travel), s, 0.0, width, config.bisection_tol)
    u = np.clip(u0 + direction * w, graph.lower, graph.upper)
    return s, u, interpolant(u)


def curvature_from_signature(
    signature: PhasePortrait,
    u0: Optional[float] = None,
    config: Optional[AppConfig] = None,
    steps: Optional[int] = None,
) -> CurvatureProfile:
    """κ(s) from an order-1 graph-like signature by solving κ′ = F(κ).

    The domain is the maximal s-interval before κ leaves the signature's range.
    """
    config = resolve(config)
    steps = steps or config.integrator_steps
    graph = GraphSamples.from_portrait(signature)
    u0 = float(signature.u[0]) if u0 is None else float(u0)
    s, u, slope = _solve_in_phase(graph, u0, steps, config)
    logger.debug("In-phase solution from u0=%.6g covers s in [0, %.9g]", u0, s[-1])
    return CurvatureProfile(s, np.column_stack([u, slope]))


# ============================================================================
# Frames
# ============================================================================

def _rk4_frames(k: MatrixFunction, initial: np.ndarray, grid: np.ndarray) -> np.ndarray:
    frames = np.empty((len(grid),) + initial.shape)
    frames[0] = initial
    if len(grid) == 1:
        return frames
    steps = np.diff(grid)
    k_nodes = k.evaluate(grid)
    k_mid = k.evaluate(grid[:-1] + 0.5 * steps)
    a = initial.copy()
    for i, h in enumerate(steps):
        k1 = k_nodes[i] @ a
        k2 = k_mid[i] @ (a + 0.5 * h * k1)
        k3 = k_mid[i] @ (a + 0.5 * h * k2)
        k4 = k_nodes[i + 1] @ (a + h * k3)
        a = a + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        frames[i + 1] = a
    return frames


def integrate_frame(
    k: MatrixFunction,
    initial=None,
    anchor: Optional[float] = None,
    steps: Optional[int] = None,
    config: Optional[AppConfig] = None,
) -> FrameSolution:
    """RK4 for A′ = K A from A(anchor) = initial, forward and backward over K's span."""
    config = resolve(config)
    steps = steps or config.integrator_steps
    s0, s1 = k.span
    anchor = s0 if anchor is None else float(anchor)
    initial = np.eye(k.dimension) if initial is None else np.asarray(initial, dtype=float)
    if not s0 <= anchor <= s1:
        raise ValueError(f"anchor {anchor} outside [{s0}, {s1}]")

    forward_steps = int(round(steps * (s1 - anchor) / (s1 - s0)))
    backward_steps = steps - forward_steps
    forward = np.linspace(anchor, s1, forward_steps + 1) if forward_steps else np.array([anchor])
    backward = np.linspace(anchor, s0, backward_steps + 1) if backward_steps else np.array([anchor])
    a_forward = _rk4_frames(k, initial, forward)
    a_backward = _rk4_frames(k, initial, backward)
    s = np.concatenate([backward[::-1][:-1], forward])
    frames = np.concatenate([a_backward[::-1][:-1], a_forward])
    return FrameSolution(s, frames, initial, anchor)


def picard_error_bound(m: float, n: int, j: int, span: float) -> float:
    """n^{j-1} M^j span^j / j!, the bound on |A_j − A_{j-1}| for U = I."""
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    if m == 0 or span == 0:
        return 0.0
    return math.exp((j - 1) * math.log(n) + j * math.log(m * span) - math.lgamma(j + 1))


def picard_iterations_needed(m: float, n: int, span: float, tol: float, limit: int = 100000) -> int:
    """Smallest j with picard_error_bound(M, n, j, span) < tol.

    Depends on M only, so it holds uniformly for every K with |K| <= M.
    """
    for j in range(1, limit + 1):
        if picard_error_bound(m, n, j, span) < tol:
            return j
    raise NoConvergence(limit, picard_error_bound(m, n, limit, span))


def picard_iterate_bound(m1: float, n: int, span: float) -> float:
    """M1 + e^{n·M1·span}/n, a bound on every iterate when U = I and M1 >= 1."""
    return m1 + math.exp(n * m1 * span) / n


def picard_frame(
    k: MatrixFunction,
    initial=None,
    anchor: Optional[float] = None,
    tol: Optional[float] = None,
    j_max: Optional[int] = None,
    config: Optional[AppConfig] = None,
    steps: Optional[int] = None,
) -> FrameSolution:
    """A_j(s) = U + ∫_{s*}^{s} K A_{j-1} dσ until successive iterates agree within tol.

    The solution records the largest entry seen over all iterates next to
    `picard_iterate_bound` (scaled by n·|U| when U is not the identity).
    Raises NoConvergence (with the last iterate attached) after j_max iterations.
    """
    config = resolve(config)
    tol = config.picard_tol if tol is None else tol
    j_max = config.picard_max_iterations if j_max is None else j_max
    steps = steps or config.integrator_steps
    s0, s1 = k.span
    anchor = s0 if anchor is None else float(anchor)
    initial = np.eye(k.dimension) if initial is None else np.asarray(initial, dtype=float)

    grid = np.union1d(np.linspace(s0, s1, steps + 1), [anchor])
    at = int(np.searchsorted(grid, anchor))
    k_grid = k.evaluate(grid)
    n = k.dimension
    current = np.broadcast_to(initial, (len(grid), n, n)).copy()
    differences: list[float] = []
    scale = 1.0 if np.array_equal(initial, np.eye(n)) else n * sup_norm(initial)
    bound = scale * picard_iterate_bound(max(1.0, k.sup_norm), n, s1 - s0)
    peak = sup_norm(current)

    for j in range(1, j_max + 1):
        integral = cumulative_integral((k_grid @ current).reshape(len(grid), n * n), grid)
        integral = integral.reshape(len(grid), n, n)
        update = initial + integral - integral[at]
        differences.append(sup_norm(update - current))
        current = update
        peak = max(peak, sup_norm(current))
        if differences[-1] < tol:
            logger.debug("Picard converged after %d iterations (step %.3e)", j, differences[-1])
            return FrameSolution(grid, current, initial, anchor, j, differences[-1],
                                 tuple(differences), "picard", peak, bound)

    partial = FrameSolution(grid, current, initial, anchor, j_max, differences[-1],
                            tuple(differences), "picard", peak, bound)
    raise NoConvergence(j_max, differences[-1], partial)


# ============================================================================
# Affine reconstruction
# ============================================================================

def affine_curve_from_mu(
    mu: CurvatureProfile,
    initial=None,
    x0=(0.0, 0.0),
    config: Optional[AppConfig] = None,
    steps: Optional[int] = None,
) -> PlanarCurve:
    """Integrate the affine frame A′ = [[0, 1], [μ, 0]] A, then x = x0 + ∫ T dα."""
    config = resolve(config)
    steps = steps or config.integrator_steps
    length = mu.domain_length
    alpha = np.linspace(0.0, length, steps + 1)
    mu_values = np.asarray(mu.evaluate(alpha), dtype=float)
    cartan = np.zeros((len(alpha), 2, 2))
    cartan[:, 0, 1] = 1.0
    cartan[:, 1, 0] = mu_values
    solution = integrate_frame(MatrixFunction(alpha, cartan), initial, 0.0, steps, config)
    points = np.asarray(x0, dtype=float) + cumulative_integral(solution.frames[:, 0, :], solution.s)

    if mu.closed:
        gap = float(np.linalg.norm(points[-1] - points[0]))
        if gap <= config.threshold_factor * float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1))):
            return PlanarCurve(points[:-1], closed=True)
        logger.warning("Closed affine profile does not close up (gap %.3e)", gap)
    return PlanarCurve(points, closed=False)


# ============================================================================
# Signature → curve
# ============================================================================

def _auto_partition(signature: PhasePortrait, config: AppConfig) -> "Partition":
    from src.congruence import find_partition

    try:
        return find_partition(signature, config)
    except ForbiddenPoint as e:
        raise VertexObstruction(e.s, "no partition exists at this order") from e


def _segment_profile(
    signature: PhasePortrait,
    partition: "Partition",
    steps: int,
    config: AppConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """κ on consecutive partition segments, each solved from its witness graph."""
    s_ext, samples = signature.s - signature.s[0], signature.samples
    if signature.closed:
        s_ext = np.append(s_ext, signature.length)
        samples = np.vstack([samples, samples[:1]])
    total = float(s_ext[-1])

    s_all: list[np.ndarray] = []
    kappa_all: list[np.ndarray] = []
    offset = 0.0
    for (start, stop), order in zip(zip(partition.times[:-1], partition.times[1:]), partition.witness_orders):
        i0 = int(np.argmin(np.abs(s_ext - start)))
        i1 = int(np.argmin(np.abs(s_ext - stop)))
        rows = samples[i0:i1 + 1]
        graph = GraphSamples(rows[:, order - 1], rows[:, order])
        count = max(16, int(round(steps * (stop - start) / total)))
        s_local, values, _ = _solve_in_phase(graph, float(rows[0, order - 1]), count, config)
        for j in range(order - 2, -1, -1):
            values = rows[0, j] + cumulative_integral(values, s_local)
        first = 0 if not s_all else 1
        s_all.append(offset + s_local[first:])
        kappa_all.append(values[first:])
        offset += float(s_local[-1])
    return np.concatenate(s_all), np.concatenate(kappa_all)


def _profile_from_signature(
    signature: PhasePortrait,
    partition: Optional["Partition"],
    steps: int,
    config: AppConfig,
) -> CurvatureProfile:
    if signature.spread() <= config.differentiation_tol:
        value = float(np.mean(signature.u))
        n = steps if signature.closed else steps + 1
        return CurvatureProfile.from_callables(signature.length, n, lambda s: np.full_like(s, value),
                                               closed=signature.closed)

    if partition is None and not signature.closed and signature.order == 1:
        try:
            return curvature_from_signature(signature, config=config, steps=steps)
        except (VanishingF, NotGraphLike) as e:
            at = float(signature.s[int(np.argmin(np.abs(signature.v)))])
            raise VertexObstruction(at, "signature meets the u-axis") from e

    if partition is None:
        partition = _auto_partition(signature, config)
    s, kappa = _segment_profile(signature, partition, steps, config)
    if signature.closed:
        return CurvatureProfile(s[:-1], kappa[:-1], closed=True, domain_length=float(s[-1]))
    return CurvatureProfile(s, kappa)


def _tile(profile: CurvatureProfile, periods: int) -> CurvatureProfile:
    if periods <= 1 or not profile.closed:
        return profile
    length = profile.domain_length
    s = np.concatenate([profile.s + k * length for k in range(periods)])
    columns = np.vstack([profile.columns] * periods)
    return CurvatureProfile(s, columns, closed=True, domain_length=periods * length)


def reconstruct_from_signature(
    signature: PhasePortrait,
    registration: Optional[GroupElement] = None,
    *,
    periods: Optional[int] = None,
    partition: Optional["Partition"] = None,
    x0=(0.0, 0.0),
    theta0: float = 0.0,
    config: Optional[AppConfig] = None,
) -> PlanarCurve:
    """Curve whose signature is `signature`, positioned by `registration`.

    Curvature comes from the in-phase equation, piecewise over a partition when
    the signature meets {(x, 0, ..., 0)} or is closed; closed signatures stored
    over one minimal period are repeated `periods` times.
    """
    config = resolve(config)
    steps = config.integrator_steps
    periods = signature.periods if periods is None else int(periods)
    profile = _tile(_profile_from_signature(signature, partition, steps, config), periods)

    if signature.kind is SignatureKind.AFFINE:
        curve = affine_curve_from_mu(profile, None, x0, config)
    else:
        curve = curve_from_curvature(profile, x0, theta0, config).as_planar()
    logger.info("Reconstructed %s curve of %d samples (%d period(s))",
                "closed" if curve.closed else "open", curve.sample_count, periods)
    if registration is not None:
        curve = apply_group(registration, curve)
    return curve
