"""Planar curves, arc-length resampling, curvature, set distances and group actions.

Every other module consumes the types defined here. All of them are immutable
after construction, so the same curve can be shared across worker threads.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import cdist

from src.config import AppConfig, resolve
from src.numerics import (
    bisect_increasing,
    cross2,
    densify,
    fit_cubic,
    fit_spline,
    polyline_segments,
    segment_distances,
)
from src.utils import (
    ConstantCurvature,
    DegenerateCurve,
    EmptySet,
    GroupKind,
    InsufficientResolution,
    InvalidCurve,
    InvalidGroupElement,
    NotMonotone,
    OpenCurve,
    SymmetryResidue,
)


logger = logging.getLogger(__name__)


# Autocorrelation level a lag must reach to count as a period of kappa.
_PERIOD_PEAK = 0.99
# Largest distance of L/period from an integer.
_PERIOD_RESIDUE = 0.05
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Sampled planar curve Γ.

    Closed curves store each point once; the last sample is adjacent to the first.
    """
    samples: np.ndarray
    closed: bool = False
    analytic_tag: Optional[dict] = None

    def __post_init__(self):
        pts = np.array(self.samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidCurve("samples must be an (N, 2) array", len(pts))
        if not np.all(np.isfinite(pts)):
            raise InvalidCurve("non-finite coordinate", len(pts))
        if self.closed and len(pts) > 1:
            scale = max(1.0, float(np.ptp(pts, axis=0).max()))
            if np.linalg.norm(pts[0] - pts[-1]) <= 1e-12 * scale:
                pts = pts[:-1]
        if len(pts) < 4:
            raise InvalidCurve("at least 4 samples are required", len(pts))
        chords = _chord_lengths(pts, self.closed)
        if np.any(chords <= 0.0):
            index = int(np.argmin(chords))
            raise InvalidCurve(f"samples {index} and {index + 1} coincide", len(pts))
        pts.setflags(write=False)
        object.__setattr__(self, "samples", pts)

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    @property
    def chord_length(self) -> float:
        """Length of the sample polyline."""
        return float(_chord_lengths(self.samples, self.closed).sum())


@dataclass(frozen=True, eq=False)
class ArcLengthCurve:
    """Curve resampled at N nodes equally spaced in arc length."""
    base: PlanarCurve
    total_length: float
    nodes: np.ndarray
    spline_degree: int = 5

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "total_length", float(self.total_length))

    @classmethod
    def from_unit_speed(
        cls,
        nodes: np.ndarray,
        length: float,
        closed: bool,
        analytic_tag: Optional[dict] = None,
        spline_degree: int = 5,
    ) -> "ArcLengthCurve":
        """Wrap nodes that are already equally spaced in arc length."""
        return cls(base=PlanarCurve(nodes, closed=closed, analytic_tag=analytic_tag),
                   total_length=length, nodes=nodes, spline_degree=spline_degree)

    @property
    def closed(self) -> bool:
        return self.base.closed

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        """Arc length between neighbouring nodes."""
        if self.closed:
            return self.total_length / self.node_count
        return self.total_length / (self.node_count - 1)

    @property
    def s(self) -> np.ndarray:
        """Arc-length value of every node."""
        return np.arange(self.node_count) * self.spacing

    @cached_property
    def spline(self):
        """Interpolant of the nodes in s (periodic when closed)."""
        period = self.total_length if self.closed else None
        return fit_spline(self.s, self.nodes, period=period, degree=self.spline_degree)

    def position(self, s) -> np.ndarray:
        return self.spline(self._wrap(s))

    def derivative(self, s, order: int = 1) -> np.ndarray:
        return self.spline(self._wrap(s), order)

    def tangent(self, s) -> np.ndarray:
        """Unit tangent at arc length s."""
        d1 = np.asarray(self.derivative(s, 1), dtype=float)
        return d1 / np.linalg.norm(d1, axis=-1, keepdims=True)

    def speed(self) -> np.ndarray:
        """|dγ/ds| at every node (≈ 1 for a faithful resampling)."""
        return np.linalg.norm(self.derivative(self.s, 1), axis=1)

    def as_planar(self) -> PlanarCurve:
        return PlanarCurve(self.nodes, closed=self.closed, analytic_tag=self.base.analytic_tag)

    def _wrap(self, s):
        s = np.asarray(s, dtype=float)
        if self.closed:
            return np.mod(s, self.total_length)
        return s


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Rigid motion (SE2) or affine map x ↦ linear·x + translation."""
    kind: GroupKind
    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        linear = np.array(self.linear, dtype=float)
        translation = np.array(self.translation, dtype=float).reshape(-1)
        if linear.shape != (2, 2) or translation.shape != (2,):
            raise InvalidGroupElement(self.kind.value, "expected a 2x2 linear part and a 2-vector")
        if not (np.all(np.isfinite(linear)) and np.all(np.isfinite(translation))):
            raise InvalidGroupElement(self.kind.value, "non-finite entries")
        det = float(np.linalg.det(linear))
        if self.kind is GroupKind.SE2:
            if np.max(np.abs(linear @ linear.T - np.eye(2))) > 1e-9 or det <= 0:
                raise InvalidGroupElement("se2", "linear part must be a rotation")
        elif abs(det) <= 1e-12:
            raise InvalidGroupElement("affine", f"determinant {det:.3e} is singular")
        linear.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls, kind: GroupKind = GroupKind.SE2) -> "GroupElement":
        return cls(kind, np.eye(2), np.zeros(2))

    @classmethod
    def rotation(cls, angle: float, translation=(0.0, 0.0)) -> "GroupElement":
        c, s = np.cos(angle), np.sin(angle)
        return cls(GroupKind.SE2, np.array([[c, -s], [s, c]]), np.asarray(translation, dtype=float))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.linear))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.linear.T + self.translation

    def compose(self, other: "GroupElement") -> "GroupElement":
        """self ∘ other (apply `other` first)."""
        kind = GroupKind.SE2 if self.kind is other.kind is GroupKind.SE2 else GroupKind.AFFINE
        return GroupElement(kind, self.linear @ other.linear,
                            self.linear @ other.translation + self.translation)

    def inverse(self) -> "GroupElement":
        inv = np.linalg.inv(self.linear)
        if self.kind is GroupKind.SE2:
            inv = self.linear.T
        return GroupElement(self.kind, inv, -inv @ self.translation)

    def distance_to_identity(self) -> float:
        """max(sup|linear − I|, |translation|)."""
        return max(float(np.max(np.abs(self.linear - np.eye(2)))),
                   float(np.linalg.norm(self.translation)))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "linear": self.linear.tolist(),
            "translation": self.translation.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """κ and its arc-length derivatives κ′..κ^(i) sampled on s ∈ [0, L].

    Closed profiles sample [0, L) and treat L as the period.
    """
    s: np.ndarray
    columns: np.ndarray
    closed: bool = False
    domain_length: Optional[float] = None

    def __post_init__(self):
        s = np.array(self.s, dtype=float).reshape(-1)
        columns = np.array(self.columns, dtype=float)
        if columns.ndim == 1:
            columns = columns[:, None]
        if len(s) < 2 or columns.shape[0] != len(s):
            raise InvalidCurve("profile needs matching s and value rows", len(s))
        if abs(s[0]) > 1e-12 * max(1.0, abs(s[-1])):
            raise InvalidCurve("profile must start at s = 0", len(s))
        if np.any(np.diff(s) <= 0):
            raise InvalidCurve("s must be strictly increasing", len(s))
        if not np.all(np.isfinite(columns)):
            raise InvalidCurve("non-finite curvature value", len(s))
        length = float(s[-1]) if self.domain_length is None else float(self.domain_length)
        if length < s[-1] - 1e-12 * max(1.0, s[-1]):
            raise InvalidCurve("domain length shorter than the sampled range", len(s))
        s.setflags(write=False)
        columns.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "domain_length", length)

    @classmethod
    def from_callables(cls, length: float, n: int, kappa, *derivatives, closed: bool = False) -> "CurvatureProfile":
        """Sample κ and any supplied derivative callables on a uniform grid."""
        s = np.linspace(0.0, length, n, endpoint=not closed)
        columns = np.column_stack([np.broadcast_to(np.asarray(f(s), dtype=float), s.shape)
                                   for f in (kappa, *derivatives)])
        return cls(s, columns, closed=closed, domain_length=length)

    @property
    def order(self) -> int:
        return self.columns.shape[1] - 1

    @property
    def kappa(self) -> np.ndarray:
        return self.columns[:, 0]

    @property
    def length(self) -> float:
        return self.domain_length

    def column(self, j: int) -> np.ndarray:
        return self.columns[:, j]

    @cached_property
    def _splines(self) -> list[CubicSpline]:
        period = self.domain_length if self.closed else None
        return [fit_cubic(self.s, self.columns[:, j], period=period) for j in range(self.order + 1)]

    def evaluate(self, s, j: int = 0) -> np.ndarray:
        """Interpolated column j at arbitrary arc length."""
        s = np.asarray(s, dtype=float)
        if self.closed:
            s = np.mod(s, self.domain_length)
        return self._splines[j](s)

    def with_order(self, order: int) -> "CurvatureProfile":
        """Profile with at least `order` derivative columns (missing ones by spline differentiation)."""
        if order <= self.order:
            return self
        period = self.domain_length if self.closed else None
        columns = [self.columns[:, j] for j in range(self.order + 1)]
        while len(columns) <= order:
            spline = fit_spline(self.s, columns[-1], period=period, degree=5)
            columns.append(spline(self.s, 1))
        return CurvatureProfile(self.s, np.column_stack(columns), self.closed, self.domain_length)

    def inverse(self, value, tol: float = 1e-12) -> np.ndarray:
        """s with κ(s) = value for strictly monotone κ."""
        sign = 1.0 if self.kappa[-1] >= self.kappa[0] else -1.0
        end = self.s[-1]
        return bisect_increasing(lambda x: sign * self.evaluate(x), sign * np.asarray(value, dtype=float),
                                 0.0, end, tol)

    def truncated(self, length: float) -> "CurvatureProfile":
        """Open profile restricted to [0, length]."""
        length = min(float(length), float(self.s[-1]))
        keep = self.s < length
        s = np.append(self.s[keep], length)
        columns = np.vstack([self.columns[keep], [self.evaluate(length, j) for j in range(self.order + 1)]])
        if len(s) > 1 and s[-1] - s[-2] <= 1e-12 * max(1.0, length):
            s, columns = s[:-1], columns[:-1]
        return CurvatureProfile(s, columns, closed=False)


# ============================================================================
# Operations
# ============================================================================

def resample_by_arclength(curve: PlanarCurve, n: int, config: Optional[AppConfig] = None) -> ArcLengthCurve:
    """Unit-speed resampling of `curve` at `n` nodes.

    An interpolating spline of `config.spline_degree` (periodic for closed
    curves) is fitted through the samples in chord-length parameter; its
    length is accumulated by Gauss-Legendre quadrature of the speed on a grid
    `config.resample_density` times denser than max(n, samples), and the
    nodes are placed by inverting that table.
    """
    config = resolve(config)
    if n < 4:
        raise InsufficientResolution(n, 0, "resampling needs n >= 4")
    degree = config.spline_degree
    pts = curve.samples
    if curve.closed:
        pts = np.vstack([pts, pts[:1]])
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    if curve.closed:
        interpolant = fit_spline(t[:-1], pts[:-1], period=t[-1], degree=degree)
    else:
        interpolant = fit_spline(t, pts, degree=degree)

    dense = config.resample_density * max(n, curve.sample_count)
    tau = np.linspace(0.0, t[-1], dense + 1)
    half = 0.5 * np.diff(tau)
    mid = 0.5 * (tau[:-1] + tau[1:])
    quad_points = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    speed = np.linalg.norm(interpolant(quad_points, 1), axis=-1)
    s_dense = np.concatenate([[0.0], np.cumsum(half * (speed @ _GAUSS_WEIGHTS))])
    length = float(s_dense[-1])

    scale = max(1.0, float(np.ptp(curve.samples, axis=0).max()))
    if length <= 1e-12 * scale:
        raise DegenerateCurve(length)

    targets = np.linspace(0.0, length, n, endpoint=not curve.closed)
    tau_of_s = fit_spline(s_dense, tau, degree=degree)
    nodes = interpolant(tau_of_s(targets))
    logger.debug("Resampled %d samples to %d nodes, L=%.12g", curve.sample_count, n, length)
    return ArcLengthCurve(base=curve, total_length=length, nodes=nodes, spline_degree=degree)


def euclidean_curvature(curve: ArcLengthCurve, order: int, config: Optional[AppConfig] = None) -> CurvatureProfile:
    """Signed curvature κ = cross(γ′, γ″)/|γ′|³ and derivatives up to `order`.

    κ comes from the position spline; κ′..κ‴ from a spline of the κ column,
    higher orders by refitting the previous column. Raises
    InsufficientResolution when the tangent turns more than
    `config.max_turn_per_node` between nodes.
    """
    config = resolve(config)
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    n = curve.node_count
    needed = max(16, 8 * (order + 1))
    if n < needed:
        raise InsufficientResolution(n, order, f"at least {needed} nodes are required")

    s = curve.s
    d1 = curve.derivative(s, 1)
    d2 = curve.derivative(s, 2)
    kappa = cross2(d1, d2) / np.linalg.norm(d1, axis=1) ** 3

    turn = curve.spacing * float(np.max(np.abs(kappa)))
    if turn > config.max_turn_per_node:
        raise InsufficientResolution(n, order, f"tangent turns {turn:.3f} rad between nodes")

    period = curve.total_length if curve.closed else None
    columns = [kappa]
    if order >= 1:
        degree = config.spline_degree
        spline = fit_spline(s, kappa, period=period, degree=degree)
        for j in range(1, order + 1):
            if j <= degree - 2:
                columns.append(spline(s, j))
            else:
                refit = fit_spline(s, columns[-1], period=period, degree=degree)
                columns.append(refit(s, 1))
    return CurvatureProfile(s, np.column_stack(columns), closed=curve.closed,
                            domain_length=curve.total_length)


def hausdorff_distance(
    a: np.ndarray,
    b: np.ndarray,
    *,
    a_closed: bool = False,
    b_closed: bool = False,
    connect: bool = False,
    refine: int = 0,
) -> float:
    """Hausdorff distance between two sampled sets of any dimension.

    With `connect`, each set is read as a polyline and distances are measured
    to its segments (accuracy O(h²) in the sample spacing h); `refine` inserts
    extra points inside the query polyline's segments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        raise EmptySet("A")
    if b.size == 0:
        raise EmptySet("B")
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    forward = _directed_distance(a, b, a_closed, b_closed, connect, refine)
    backward = _directed_distance(b, a, b_closed, a_closed, connect, refine)
    return max(forward, backward)


def _directed_distance(p, q, p_closed, q_closed, connect, refine) -> float:
    if connect:
        p = densify(p, p_closed, refine)
        if len(q) >= 2:
            starts, ends = polyline_segments(q, q_closed)
            return float(segment_distances(p, starts, ends).max())
    worst = 0.0
    for lo in range(0, len(p), 512):
        worst = max(worst, float(cdist(p[lo:lo + 512], q).min(axis=1).max()))
    return worst


def apply_group(g: GroupElement, curve: PlanarCurve) -> PlanarCurve:
    """Pointwise image g·Γ; closedness is preserved."""
    return PlanarCurve(g.apply(curve.samples), closed=curve.closed)


def curve_distance(a: PlanarCurve | ArcLengthCurve, b: PlanarCurve | ArcLengthCurve) -> float:
    """Hausdorff distance between the two traces (no optimization over g)."""
    a_pts, a_closed = _trace(a)
    b_pts, b_closed = _trace(b)
    return hausdorff_distance(a_pts, b_pts, a_closed=a_closed, b_closed=b_closed, connect=True)


def rigid_alignment(a: ArcLengthCurve, s_a: float, b: ArcLengthCurve, s_b: float) -> GroupElement:
    """Rigid motion taking b's point and unit tangent at s_b onto a's at s_a."""
    ta = a.tangent(s_a)
    tb = b.tangent(s_b)
    angle = np.arctan2(ta[1], ta[0]) - np.arctan2(tb[1], tb[0])
    rotation = GroupElement.rotation(angle)
    translation = a.position(s_a) - rotation.apply(b.position(s_b))
    return GroupElement(GroupKind.SE2, rotation.linear, translation)


def _trace(curve) -> tuple[np.ndarray, bool]:
    if isinstance(curve, ArcLengthCurve):
        return curve.nodes, curve.closed
    return curve.samples, curve.closed


def _chord_lengths(pts: np.ndarray, closed: bool) -> np.ndarray:
    starts, ends = polyline_segments(pts, closed)
    return np.linalg.norm(ends - starts, axis=1)


def minimal_period(profile: CurvatureProfile, config: Optional[AppConfig] = None) -> float:
    """Smallest period ℓ of κ on a closed profile.

    Circular autocorrelation of the centred κ sequence; the first peak past the
    main lobe that reaches the period level is refined by a parabola through
    its neighbours. Returns L when κ has no shorter period.
    """
    config = resolve(config)
    if not profile.closed:
        raise OpenCurve("minimal_period")
    kappa = profile.kappa
    spread = float(np.ptp(kappa))
    if spread <= config.flat_tol * max(1.0, float(np.max(np.abs(kappa)))):
        raise ConstantCurvature(float(np.mean(kappa)))

    n = len(kappa)
    centred = kappa - kappa.mean()
    spectrum = np.fft.rfft(centred)
    corr = np.fft.irfft(spectrum * np.conj(spectrum), n=n)
    corr = corr / corr[0]

    outside = np.nonzero(corr[1:] < 0.5)[0]
    if len(outside) == 0:
        return profile.domain_length
    step = profile.domain_length / n
    for j in range(int(outside[0]) + 1, n):
        left, here, right = corr[j - 1], corr[j], corr[(j + 1) % n]
        if here >= _PERIOD_PEAK and here >= left and here >= right:
            denom = left - 2.0 * here + right
            offset = 0.5 * (left - right) / denom if denom != 0 else 0.0
            period = (j + float(np.clip(offset, -0.5, 0.5))) * step
            logger.debug("kappa period %.9g (lag %d, corr %.6f)", period, j, here)
            return period
    return profile.domain_length


def normalize_minimal_period(curve: PlanarCurve, tol: float = 1e-9) -> PlanarCurve:
    """Drop repeated traversals of a closed sample sequence (e.g. a circle sampled over 4π)."""
    if not curve.closed:
        return curve
    pts = curve.samples
    n = len(pts)
    scale = max(1.0, float(np.ptp(pts, axis=0).max()))
    for k in range(n // 4, 1, -1):
        if n % k:
            continue
        shift = n // k
        if np.max(np.linalg.norm(pts - np.roll(pts, -shift, axis=0), axis=1)) <= tol * scale:
            logger.info("Curve samples repeat %d times; keeping one traversal", k)
            return PlanarCurve(pts[:shift], closed=True, analytic_tag=curve.analytic_tag)
    return curve


def require_monotone(profile: CurvatureProfile) -> float:
    """Sign of κ′ when it is bounded away from zero, else NotMonotone."""
    derivative = profile.with_order(1).column(1)
    if np.all(derivative > 0):
        return 1.0
    if np.all(derivative < 0):
        return -1.0
    raise NotMonotone(float(np.min(np.abs(derivative))))


def period_count(profile: CurvatureProfile, config: Optional[AppConfig] = None) -> int:
    """Number of minimal periods of κ in one revolution (L / ℓ rounded)."""
    ratio = profile.domain_length / minimal_period(profile, config)
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > _PERIOD_RESIDUE:
        raise SymmetryResidue(ratio)
    return count
