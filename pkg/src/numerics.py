"""Numeric kernels shared by the geometry modules."""

from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid
from scipy.interpolate import BSpline, CubicSpline, make_interp_spline


# Rows of the query set processed per vectorized block.
_CHUNK = 256


def fit_spline(x: np.ndarray, y: np.ndarray, period: float | None = None, degree: int = 5) -> BSpline:
    """Interpolating spline of `y` over `x` (rows of y are samples).

    With `period` set, x covers [x0, x0 + period) and the spline is periodic.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    degree = min(degree, len(x) - 1)
    if degree % 2 == 0:
        degree -= 1
    if period is not None:
        x = np.append(x, x[0] + period)
        y = np.concatenate([y, y[:1]], axis=0)
        return make_interp_spline(x, y, k=degree, bc_type="periodic")
    return make_interp_spline(x, y, k=degree)


def fit_cubic(x: np.ndarray, y: np.ndarray, period: float | None = None) -> CubicSpline:
    """Cubic spline (periodic when `period` is given, not-a-knot otherwise)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if period is not None:
        x = np.append(x, x[0] + period)
        y = np.concatenate([y, y[:1]], axis=0)
        return CubicSpline(x, y, bc_type="periodic")
    return CubicSpline(x, y)


def cumulative_integral(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Cumulative integral along axis 0 starting at 0 (Simpson when possible)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(x) < 3:
        return cumulative_trapezoid(y, x=x, axis=0, initial=0)
    return cumulative_simpson(y, x=x, axis=0, initial=0)


def bisect_increasing(
    fn: Callable[[np.ndarray], np.ndarray],
    targets: np.ndarray,
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = 200,
) -> np.ndarray:
    """Solve fn(u) = target for every target, fn strictly increasing on [lo, hi]."""
    targets = np.asarray(targets, dtype=float)
    a = np.full(targets.shape, float(lo))
    b = np.full(targets.shape, float(hi))
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        below = fn(mid) < targets
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
        if np.max(b - a, initial=0.0) <= tol:
            break
    return 0.5 * (a + b)


def segment_distances(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest of the given segments (any dimension)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    direction = ends - starts
    length_sq = np.einsum("ij,ij->i", direction, direction)
    safe = np.where(length_sq > 0, length_sq, 1.0)

    best = np.empty(len(points))
    for lo in range(0, len(points), _CHUNK):
        block = points[lo:lo + _CHUNK]
        rel = block[:, None, :] - starts[None, :, :]
        t = np.einsum("pij,ij->pi", rel, direction) / safe
        t = np.clip(np.where(length_sq > 0, t, 0.0), 0.0, 1.0)
        nearest = starts[None, :, :] + t[:, :, None] * direction[None, :, :]
        dist = np.linalg.norm(block[:, None, :] - nearest, axis=2)
        best[lo:lo + _CHUNK] = dist.min(axis=1)
    return best


def polyline_segments(points: np.ndarray, closed: bool) -> tuple[np.ndarray, np.ndarray]:
    """Segment endpoint arrays of a polyline (wrapping when closed)."""
    points = np.asarray(points, dtype=float)
    if closed and len(points) > 2:
        return points, np.roll(points, -1, axis=0)
    return points[:-1], points[1:]


def densify(points: np.ndarray, closed: bool, refine: int) -> np.ndarray:
    """Insert `refine` evenly spaced points inside every polyline segment."""
    if refine <= 0 or len(points) < 2:
        return np.asarray(points, dtype=float)
    starts, ends = polyline_segments(points, closed)
    weights = np.arange(refine + 1) / (refine + 1)
    inner = starts[:, None, :] + weights[None, :, None] * (ends - starts)[:, None, :]
    dense = inner.reshape(-1, points.shape[1])
    if not closed:
        dense = np.vstack([dense, points[-1:]])
    return dense


def cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """z-component of the planar cross product, row-wise."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def periodic_derivatives(values: np.ndarray, period: float, order: int, keep: int) -> np.ndarray:
    """Values and derivatives up to `order` of uniformly sampled periodic data.

    Differentiates in the Fourier domain after discarding every mode above
    `keep`; columns are the derivative orders 0..order.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    coeffs = np.fft.rfft(values)
    coeffs[keep + 1:] = 0.0
    wavenumber = 2j * np.pi * np.fft.rfftfreq(n, d=period / n)
    columns = [np.fft.irfft(coeffs * wavenumber ** j, n) for j in range(order + 1)]
    return np.column_stack(columns)
