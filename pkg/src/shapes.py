"""Analytic test curves and the analytic form of the curve file format."""

from typing import Any, Callable

import numpy as np
from scipy.special import fresnel

from src.curve_core import CurvatureProfile, PlanarCurve
from src.reconstruction import curve_from_curvature


def _tagged(points: np.ndarray, closed: bool, kind: str, **params) -> PlanarCurve:
    return PlanarCurve(points, closed=closed, analytic_tag={"kind": kind, "params": params})


def _polar(radius: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    r = radius(theta)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def circle(radius: float = 1.0, center=(0.0, 0.0), n: int = 512, turns: int = 1) -> PlanarCurve:
    """Counterclockwise circle; turns > 1 repeats the samples (a multiply traversed trace)."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    theta = np.linspace(0.0, 2 * np.pi * turns, n * turns, endpoint=False)
    points = np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return _tagged(points, True, "circle", radius=radius, center=list(center), turns=turns)


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 512, center=(0.0, 0.0)) -> PlanarCurve:
    """Counterclockwise ellipse starting at the vertex (a, 0)."""
    if a <= 0 or b <= 0:
        raise ValueError(f"semi-axes must be positive, got {a}, {b}")
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    points = np.asarray(center, dtype=float) + np.column_stack([a * np.cos(theta), b * np.sin(theta)])
    return _tagged(points, True, "ellipse", a=a, b=b, center=list(center))


def parabola(x_range=(-1.0, 1.0), n: int = 512, coefficient: float = 1.0) -> PlanarCurve:
    """y = coefficient·x² over x_range."""
    x = np.linspace(x_range[0], x_range[1], n)
    return _tagged(np.column_stack([x, coefficient * x ** 2]), False, "parabola",
                   x_range=list(x_range), coefficient=coefficient)


def clothoid(length: float = 2.0, n: int = 512, rate: float = 1.0) -> PlanarCurve:
    """Arc with κ(s) = rate·s, from the origin heading along +x."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    s = np.linspace(0.0, length, n)
    scale = np.sqrt(np.pi / rate)
    sin_part, cos_part = fresnel(s / scale)
    return _tagged(scale * np.column_stack([cos_part, sin_part]), False, "clothoid",
                   length=length, rate=rate)


def log_spiral(a: float = 1.0, b: float = 0.2, theta_range=(0.0, np.pi), n: int = 512) -> PlanarCurve:
    """Arc of r = a·e^{bθ}; its curvature 1/(r√(1+b²)) is strictly monotone."""
    theta = np.linspace(theta_range[0], theta_range[1], n)
    r = a * np.exp(b * theta)
    return _tagged(np.column_stack([r * np.cos(theta), r * np.sin(theta)]), False, "log_spiral",
                   a=a, b=b, theta_range=list(theta_range))


def custom_curvature(
    coefficients,
    length: float,
    n: int = 1024,
    x0=(0.0, 0.0),
    theta0: float = 0.0,
) -> PlanarCurve:
    """Curve whose curvature is the polynomial Σ c_k s^k on [0, length]."""
    coefficients = [float(c) for c in coefficients]
    profile = CurvatureProfile.from_callables(
        length, n, lambda s: np.polynomial.polynomial.polyval(s, coefficients))
    arc = curve_from_curvature(profile, x0, theta0, steps=n - 1)
    return _tagged(arc.nodes, False, "custom_curvature", coefficients=coefficients, length=length)


def limacon(a: float = 1.0, b: float = 2.0, n: int = 1024) -> PlanarCurve:
    """r = a + b·cos θ; b > a gives an inner loop and one self-intersection."""
    return _tagged(_polar(lambda t: a + b * np.cos(t), n), True, "limacon", a=a, b=b)


def flower(r0: float = 1.0, amplitude: float = 0.2, petals: int = 4, n: int = 1024) -> PlanarCurve:
    """r = r0 + amplitude·cos(petals·θ), symmetric under rotation by 2π/petals."""
    return _tagged(_polar(lambda t: r0 + amplitude * np.cos(petals * t), n), True, "flower",
                   r0=r0, amplitude=amplitude, petals=petals)


def egg(n: int = 1024) -> PlanarCurve:
    """Convex closed curve without rotational symmetry."""
    return _tagged(_polar(lambda t: 1.0 + 0.05 * np.cos(2 * t) + 0.02 * np.sin(3 * t), n), True, "egg")


GENERATORS: dict[str, Callable[..., PlanarCurve]] = {
    "circle": circle,
    "ellipse": ellipse,
    "parabola": parabola,
    "clothoid": clothoid,
    "log_spiral": log_spiral,
    "custom_curvature": custom_curvature,
    "limacon": limacon,
    "flower": flower,
    "egg": egg,
}


def curve_from_spec(spec: dict[str, Any]) -> PlanarCurve:
    """Build a curve from the analytic form {"kind": ..., "params": {...}, "n": int}.

    Raises:
        ValueError: Unknown kind or parameters the generator does not accept
    """
    kind = spec.get("kind")
    if kind not in GENERATORS:
        raise ValueError(f"Unknown curve kind '{kind}'. Valid options: {', '.join(GENERATORS)}")
    params = dict(spec.get("params") or {})
    if "n" in spec:
        params["n"] = int(spec["n"])
    try:
        return GENERATORS[kind](**params)
    except TypeError as e:
        raise ValueError(f"Bad parameters for '{kind}': {e}") from e
