"""Shared utilities, exceptions, and data models for sigcurve."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

import numpy as np


# ============================================================================
# Custom Exceptions
# ============================================================================

class SigcurveError(Exception):
    """Base class for every mathematical-domain error raised by the library."""


class InvalidCurve(SigcurveError):
    """Curve samples violate the representation invariants."""

    def __init__(self, reason: str, sample_count: int = 0):
        """
        Args:
            reason: What is wrong with the samples
            sample_count: Number of samples received
        """
        self.reason = reason
        self.sample_count = sample_count
        super().__init__(f"Invalid curve ({sample_count} samples): {reason}")


class DegenerateCurve(SigcurveError):
    """Curve length is below a meaningful threshold."""

    def __init__(self, length: float):
        self.length = length
        super().__init__(f"Curve length {length:.3e} is too small to resample")


class InsufficientResolution(SigcurveError):
    """Node spacing too coarse for the requested derivative order."""

    def __init__(self, node_count: int, order: int, message: str = ""):
        """
        Args:
            node_count: Number of arc-length nodes available
            order: Requested derivative order
            message: Additional details
        """
        self.node_count = node_count
        self.order = order
        super().__init__(f"{node_count} nodes are too few for order {order}: {message}")


class EmptySet(SigcurveError):
    """A set distance was requested on an empty point set."""

    def __init__(self, which: str):
        self.which = which
        super().__init__(f"Point set '{which}' is empty")


class InvalidGroupElement(SigcurveError):
    """Linear part does not belong to the declared group."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"Invalid {kind} element: {message}")


class KindMismatch(SigcurveError):
    """Two signatures of different kind or order were compared."""

    def __init__(self, left: str, right: str):
        self.left = left
        self.right = right
        super().__init__(f"Cannot compare {left} with {right}")


class NonConvexArc(SigcurveError):
    """Euclidean curvature is not positive, so affine arc length is undefined."""

    def __init__(self, min_curvature: float, at_s: float):
        self.min_curvature = min_curvature
        self.at_s = at_s
        super().__init__(f"Curvature {min_curvature:.3e} <= 0 at s={at_s:.6g}")


class NotGraphLike(SigcurveError):
    """Signature u-column is not strictly monotone."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"u-column loses strict monotonicity at sample {index}")


class NoCommonDomain(SigcurveError):
    """Two graph functions share no u-interval."""

    def __init__(self, lower: float, upper: float):
        self.lower = lower
        self.upper = upper
        super().__init__(f"Empty common domain [{lower:.6g}, {upper:.6g}]")


class OpenCurve(SigcurveError):
    """Operation requires a closed curve."""

    def __init__(self, operation: str):
        self.operation = operation
        super().__init__(f"{operation} requires a closed curve")


class VanishingF(SigcurveError):
    """Signature graph meets (or changes sign across) the u-axis."""

    def __init__(self, min_abs: float, threshold: float):
        self.min_abs = min_abs
        self.threshold = threshold
        super().__init__(f"min|F| = {min_abs:.3e} is below {threshold:.3e}")


class NoConvergence(SigcurveError):
    """Picard iteration hit its iteration cap above tolerance."""

    def __init__(self, iterations: int, estimate: float, partial: Any = None):
        """
        Args:
            iterations: Iterations performed
            estimate: Last sup-norm successive difference
            partial: Best available FrameSolution
        """
        self.iterations = iterations
        self.estimate = estimate
        self.partial = partial
        super().__init__(f"No convergence after {iterations} iterations (last step {estimate:.3e})")


class VertexObstruction(SigcurveError):
    """Signature meets the hyperplane {(x, 0, ..., 0)} and no partition exists."""

    def __init__(self, s: float, message: str = ""):
        self.s = s
        super().__init__(f"Signature meets the vertex hyperplane at s={s:.6g}. {message}".strip())


class DeltaTooLarge(SigcurveError):
    """Tube radius outside the admissible range."""

    def __init__(self, delta: float, limit: float):
        self.delta = delta
        self.limit = limit
        super().__init__(f"delta={delta:.6g} must be below {limit:.6g}")


class NotMonotone(SigcurveError):
    """Curvature is not strictly monotone on the arc."""

    def __init__(self, min_abs_derivative: float):
        self.min_abs_derivative = min_abs_derivative
        super().__init__(f"kappa' vanishes or changes sign (min |kappa'| = {min_abs_derivative:.3e})")


class VertexPresent(SigcurveError):
    """Curve has a vertex where a vertex-free curve is required."""

    def __init__(self, s: float, derivative: float):
        self.s = s
        self.derivative = derivative
        super().__init__(f"Vertex at s={s:.6g} (|kappa'| = {derivative:.3e})")


class FrameSingular(SigcurveError):
    """Affine frame is singular at the registration anchor."""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(f"Frame determinant {determinant:.3e} is singular")


class ForbiddenPoint(SigcurveError):
    """Sample with every derivative coordinate below the margin threshold."""

    def __init__(self, index: int, s: float, point: np.ndarray):
        self.index = index
        self.s = s
        self.point = np.asarray(point)
        super().__init__(f"Forbidden signature point at sample {index} (s={s:.6g})")


class SignatureNotSimple(SigcurveError):
    """Closed signature traverses some point more than once per period."""

    def __init__(self, min_distance: float, tol: float):
        self.min_distance = min_distance
        self.tol = tol
        super().__init__(f"Signature revisits itself (gap {min_distance:.3e} < {tol:.3e})")


class ConstantCurvature(SigcurveError):
    """Curvature is constant, so its minimal period is undefined."""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Curvature is constant ({value:.6g}); minimal period undefined")


class SymmetryResidue(SigcurveError):
    """L / period is not close to an integer."""

    def __init__(self, ratio: float):
        self.ratio = ratio
        super().__init__(f"Length/period ratio {ratio:.6g} is not an integer")


class NotAVertex(SigcurveError):
    """Insertion point is not a vertex."""

    def __init__(self, s: float, derivative: float, tol: float):
        self.s = s
        self.derivative = derivative
        super().__init__(f"|kappa'({s:.6g})| = {derivative:.3e} exceeds vertex tolerance {tol:.3e}")


class CurveFormatError(SigcurveError):
    """Input file is malformed."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"Malformed input '{path}': {message}")


class ConfigError(Exception):
    """Configuration loading or validation error."""

    def __init__(self, config_key: str, message: str = ""):
        """
        Args:
            config_key: The configuration key that caused the error
            message: Additional error details
        """
        self.config_key = config_key
        super().__init__(f"Configuration error for '{config_key}': {message}")


# ============================================================================
# Data Models and Enums
# ============================================================================

class GroupKind(Enum):
    """Transformation group acting on curves."""
    SE2 = "se2"          # rotations + translations
    AFFINE = "affine"    # invertible linear part + translation


class SignatureKind(Enum):
    """Which differential invariants a portrait holds."""
    EUCLIDEAN = "euclidean"  # (kappa, kappa_s, ...)
    AFFINE = "affine"        # (mu, mu_alpha)


class Verdict(Enum):
    """Outcome of a congruence decision."""
    CONGRUENT = "congruent"
    NOT_CONGRUENT = "not_congruent"
    UNDECIDABLE = "undecidable"


def parse_kind(value: str) -> GroupKind:
    """Map CLI/JSON spellings onto GroupKind."""
    normalized = value.strip().lower()
    if normalized in ("se2", "euclid", "euclidean", "rigid"):
        return GroupKind.SE2
    if normalized in ("affine", "aff"):
        return GroupKind.AFFINE
    raise ValueError(f"Unknown group kind '{value}'")


@dataclass
class TrialResult:
    """Result of one independent trial run by the trial pool.

    Attributes:
        sequence: Trial number; results are ordered by it
        value: Payload returned by the worker
        error: Exception raised by the worker, if any
    """
    sequence: int
    value: Any = None
    error: Optional[BaseException] = None


def sup_norm(values: np.ndarray) -> float:
    """Max-entry norm used for every matrix and vector bound."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))
