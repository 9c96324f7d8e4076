"""Congruence decisions: registration, partitions, open and closed curve tests.

A verdict is CONGRUENT only when a registered Hausdorff distance is within
the decision threshold; signature comparisons decide NOT_CONGRUENT early and
obstructions (forbidden signature points) give UNDECIDABLE.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from src.config import AppConfig, resolve
from src.curve_core import (
    ArcLengthCurve,
    CurvatureProfile,
    GroupElement,
    PlanarCurve,
    apply_group,
    curve_distance,
    euclidean_curvature,
    normalize_minimal_period,
    period_count,
    resample_by_arclength,
    rigid_alignment,
)
from src.numerics import cross2, cumulative_integral, polyline_segments
from src.robustness import explicit_bound
from src.signature import (
    LiftedSignature,
    PhasePortrait,
    affine_frame,
    affine_signature,
    euclidean_signature,
    lifted_signature_distance,
    require_simple,
    signature_hausdorff,
)
from src.trial_pool import run_trials
from src.utils import (
    ConstantCurvature,
    DeltaTooLarge,
    ForbiddenPoint,
    FrameSingular,
    GroupKind,
    NotAVertex,
    NotMonotone,
    SignatureNotSimple,
    SymmetryResidue,
    Verdict,
)


logger = logging.getLogger(__name__)


# Rows of segment pairs tested per block in the intersection sweep.
_SWEEP_CHUNK = 256
# |sin| of the crossing angle below which a segment pair counts as tangential.
_TANGENTIAL_SIN = 1e-6


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True)
class Partition:
    """Times 0 = t0 < ... < tn = L with a witness derivative order per segment."""
    times: tuple
    witness_orders: tuple
    margins: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("partition times must be strictly increasing")
        if len(self.witness_orders) != len(times) - 1 or len(self.margins) != len(times) - 1:
            raise ValueError("need one witness order and margin per segment")
        if min(self.witness_orders) < 1 or min(self.margins) <= 0:
            raise ValueError("witness orders must be >= 1 with positive margins")

    @property
    def segment_count(self) -> int:
        return len(self.witness_orders)

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "witness_orders": [int(k) for k in self.witness_orders],
            "margins": [float(m) for m in self.margins],
        }


@dataclass(frozen=True, eq=False)
class CongruenceVerdict:
    verdict: Verdict
    kind: GroupKind
    g: Optional[GroupElement]
    registered_distance: float
    threshold: float
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.CONGRUENT and not self.registered_distance <= self.threshold:
            raise ValueError("a congruent verdict needs registered_distance <= threshold")

    @property
    def congruent(self) -> bool | str:
        if self.verdict is Verdict.UNDECIDABLE:
            return "undecidable"
        return self.verdict is Verdict.CONGRUENT

    def to_dict(self) -> dict:
        distance = self.registered_distance
        return {
            "congruent": self.congruent,
            "kind": self.kind.value,
            "registered_distance": None if not np.isfinite(distance) else float(distance),
            "threshold": float(self.threshold),
            "g": None if self.g is None else {
                "linear": self.g.linear.tolist(),
                "translation": self.g.translation.tolist(),
            },
            "evidence": self.evidence,
        }


@dataclass(frozen=True, eq=False)
class SelfIntersections:
    """Transverse crossings (t_i, t_j, point) with t_i < t_j, sorted by t_i."""
    crossings: list
    tangential: int = 0

    @property
    def count(self) -> int:
        return len(self.crossings)

    def parameters(self) -> np.ndarray:
        """Both parameters of every crossing, sorted."""
        return np.sort(np.array([t for ti, tj, _ in self.crossings for t in (ti, tj)], dtype=float))


# ============================================================================
# Registration
# ============================================================================

def _frame_columns(curve: ArcLengthCurve, s: float, config: AppConfig) -> np.ndarray:
    return affine_frame(curve, s, config=config).T


def register(
    a: ArcLengthCurve,
    b: ArcLengthCurve,
    kind: GroupKind = GroupKind.SE2,
    anchor_a: float = 0.0,
    anchor_b: float = 0.0,
    config: Optional[AppConfig] = None,
) -> GroupElement:
    """Group element moving b's frame at anchor_b onto a's frame at anchor_a.

    SE2 aligns point and unit tangent; the affine kind aligns the full affine
    frame, G = C_a C_b⁻¹ with the frame vectors as columns.
    """
    config = resolve(config)
    if kind is GroupKind.SE2:
        return rigid_alignment(a, anchor_a, b, anchor_b)
    frame_a = _frame_columns(a, anchor_a, config)
    frame_b = _frame_columns(b, anchor_b, config)
    det = float(np.linalg.det(frame_b))
    if abs(det) <= 1e-12:
        raise FrameSingular(det)
    linear = frame_a @ np.linalg.inv(frame_b)
    translation = a.position(anchor_a) - linear @ b.position(anchor_b)
    return GroupElement(GroupKind.AFFINE, linear, translation)


def _affine_midpoint(curve: ArcLengthCurve, config: AppConfig) -> float:
    """Arc length at half the affine arc length."""
    kappa = euclidean_curvature(curve, 0, config).kappa
    alpha = cumulative_integral(np.clip(kappa, 0.0, None) ** config.affine_exponent, curve.s)
    return float(np.interp(0.5 * alpha[-1], alpha, curve.s))


# ============================================================================
# Partitions
# ============================================================================

def _noise_floor(signature: PhasePortrait, config: AppConfig) -> np.ndarray:
    """Per-column level below which a derivative sample is indistinguishable from zero.

    Columns whose peak never clears the floor never witness.
    """
    samples = signature.samples
    floor = config.differentiation_tol * max(1.0, float(np.max(np.abs(samples[:, 0]))))
    levels = np.full(signature.order + 1, np.inf)
    for k in range(1, signature.order + 1):
        if float(np.max(np.abs(samples[:, k]))) > floor:
            levels[k] = floor
    return levels


def _witness_order(row: np.ndarray, floor: np.ndarray, preferred: np.ndarray) -> int:
    """Smallest order clearing its preferred level, else the order furthest above the floor."""
    order = len(row) - 1
    strong = [k for k in range(1, order + 1) if abs(row[k]) >= max(floor[k], preferred[k])]
    if strong:
        return strong[0]
    ratios = [abs(row[k]) / floor[k] for k in range(1, order + 1)]
    return 1 + int(np.argmax(ratios))


def forbidden_points(signature: PhasePortrait, config: Optional[AppConfig] = None) -> np.ndarray:
    """Sample indices where every derivative column is within noise of zero."""
    config = resolve(config)
    levels = _noise_floor(signature, config)
    above = np.abs(signature.samples[:, 1:]) >= levels[None, 1:]
    return np.nonzero(~np.any(above, axis=1))[0]


def find_partition(signature: PhasePortrait, config: Optional[AppConfig] = None) -> Partition:
    """Greedy partition: each segment keeps the witness order chosen at its
    start while that derivative stays above half its starting magnitude.

    The smallest order whose magnitude is at least `partition_margin` of its
    column peak wins; near vertices the order furthest above the noise floor
    takes over. Raises ForbiddenPoint when some sample has no witness.
    """
    config = resolve(config)
    s = signature.s - signature.s[0]
    samples = signature.samples
    bad = forbidden_points(signature, config)
    if len(bad):
        index = int(bad[0])
        raise ForbiddenPoint(index, float(s[index]), samples[index])

    floor = _noise_floor(signature, config)
    preferred = config.partition_margin * np.max(np.abs(samples), axis=0)
    if signature.closed:
        s = np.append(s, signature.length)
        samples = np.vstack([samples, samples[:1]])

    last = len(s) - 1
    times, orders, margins = [0.0], [], []
    i = 0
    while i < last:
        order = _witness_order(samples[i], floor, preferred)
        column = samples[:, order]
        start = abs(column[i])
        direction = np.sign(column[i])
        j = i + 1
        while j <= last and direction * column[j] >= start / 2:
            j += 1
        end = max(j - 1, i + 1)
        margin = float(np.min(direction * column[i:end + 1]))
        if margin <= 0:
            raise ForbiddenPoint(end, float(s[end]), samples[end])
        times.append(float(s[end]))
        orders.append(order)
        margins.append(margin)
        i = end

    logger.debug("Partition with %d segments, witness orders %s", len(orders), orders)
    return Partition(tuple(times), tuple(orders), tuple(margins))


# ============================================================================
# Open curves
# ============================================================================

def _default_threshold(lengths, config: AppConfig) -> float:
    return config.threshold_factor * max(lengths)


def _fallback_gate(length: float, threshold: float) -> float:
    """Signature gate from the curvature-closeness bound L²δ/2 ≤ threshold."""
    return 2 * threshold / length ** 2


def _delta_gate(profile: CurvatureProfile, threshold: float, config: AppConfig) -> float:
    """Largest δ with ε(δ) ≤ threshold, by bisection; fallback gate when none exists."""
    fallback = _fallback_gate(profile.length, threshold)
    slope = np.abs(profile.column(1))
    limit = min(abs(profile.kappa[-1] - profile.kappa[0]) / 2, float(slope.min()))
    lo, hi = 0.0, limit * (1 - 1e-9)
    try:
        if explicit_bound(profile, hi, config).eps <= threshold:
            return hi
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if explicit_bound(profile, mid, config).eps <= threshold:
                lo = mid
            else:
                hi = mid
    except (DeltaTooLarge, NotMonotone):
        return fallback
    return lo if lo > 0 else fallback


def _vertex_free(profile: CurvatureProfile, config: AppConfig) -> bool:
    slope = np.abs(profile.column(1))
    eta = max(config.vertex_tol * float(slope.max()), config.vertex_floor)
    return bool(np.all(slope >= eta))


def congruence_open(
    a: PlanarCurve,
    b: PlanarCurve,
    kind: GroupKind = GroupKind.SE2,
    threshold: Optional[float] = None,
    config: Optional[AppConfig] = None,
) -> CongruenceVerdict:
    """Decide whether two open curves are congruent under `kind`.

    Signatures are compared first (gate from the explicit bound for vertex-free
    curves, from L²δ/2 otherwise); the registered distance settles the rest.
    """
    config = resolve(config)
    arc_a = resample_by_arclength(a, config.resample_nodes, config)
    arc_b = resample_by_arclength(b, config.resample_nodes, config)
    threshold = _default_threshold((arc_a.total_length, arc_b.total_length), config) \
        if threshold is None else float(threshold)
    length = max(arc_a.total_length, arc_b.total_length)
    evidence: dict = {"route": "open"}

    if kind is GroupKind.AFFINE:
        sig_a, sig_b = affine_signature(arc_a, config), affine_signature(arc_b, config)
        gate = _fallback_gate(length, threshold)
        anchors = (_affine_midpoint(arc_a, config), _affine_midpoint(arc_b, config))
        evidence["signature"] = "affine"
    else:
        prof_a = euclidean_curvature(arc_a, 2, config)
        prof_b = euclidean_curvature(arc_b, 2, config)
        anchors = (0.0, 0.0)
        if _vertex_free(prof_a, config) and _vertex_free(prof_b, config):
            sig_a = euclidean_signature(arc_a, 1, config=config)
            sig_b = euclidean_signature(arc_b, 1, config=config)
            gate = min(_delta_gate(prof_a, threshold, config), _delta_gate(prof_b, threshold, config))
            evidence["signature"] = "order 1, vertex free"
        else:
            sig_a = euclidean_signature(arc_a, 2, config=config)
            sig_b = euclidean_signature(arc_b, 2, config=config)
            try:
                evidence["partition_a"] = find_partition(sig_a, config).to_dict()
                evidence["partition_b"] = find_partition(sig_b, config).to_dict()
            except ForbiddenPoint as e:
                evidence["reason"] = f"VertexObstruction: {e}"
                logger.info("No partition for the order-2 signature: %s", e)
                return CongruenceVerdict(Verdict.UNDECIDABLE, kind, None, float("nan"), threshold, evidence)
            gate = _fallback_gate(length, threshold)
            evidence["signature"] = "order 2, partitioned"

    d_sig = signature_hausdorff(sig_a, sig_b)
    g = register(arc_a, arc_b, kind, anchors[0], anchors[1], config)
    distance = curve_distance(arc_a, apply_group(g, arc_b.as_planar()))
    evidence.update({"signature_distance": d_sig, "gate": gate})

    if d_sig > gate:
        verdict = Verdict.NOT_CONGRUENT
        evidence["reason"] = "signatures differ beyond the gate"
    elif distance <= threshold:
        verdict = Verdict.CONGRUENT
    else:
        verdict = Verdict.NOT_CONGRUENT
        evidence["reason"] = "registered distance exceeds the threshold"
    logger.info("Open comparison: d_sig=%.3e gate=%.3e distance=%.3e -> %s",
                d_sig, gate, distance, verdict.value)
    return CongruenceVerdict(verdict, kind, g, distance, threshold, evidence)


# ============================================================================
# Closed curves
# ============================================================================

def _closed_arc(curve: PlanarCurve, config: AppConfig) -> ArcLengthCurve:
    if not curve.closed:
        raise ValueError("closed-curve comparison needs closed curves")
    return resample_by_arclength(normalize_minimal_period(curve), config.resample_nodes, config)


def _symmetry_index(profile: CurvatureProfile, config: AppConfig) -> int:
    try:
        return period_count(profile, config)
    except (ConstantCurvature, SymmetryResidue):
        return 1


def _start_candidates(profile: CurvatureProfile, target: np.ndarray, slack: float) -> list[float]:
    """Arc lengths where the closed signature of `profile` passes closest to `target`.

    Cyclic local minima of the sample distance, refined on the interpolated
    signature.
    """
    columns = profile.columns
    dist = np.linalg.norm(columns - target[None, :], axis=1)
    steps = np.linalg.norm(np.diff(np.vstack([columns, columns[:1]]), axis=0), axis=1)
    limit = float(steps.max()) + slack
    minima = np.nonzero((dist <= np.roll(dist, 1)) & (dist < np.roll(dist, -1)) & (dist <= limit))[0]
    h = profile.s[1] - profile.s[0]
    order = profile.order

    def gap(s: float) -> float:
        point = np.array([profile.evaluate(s, j) for j in range(order + 1)])
        return float(np.linalg.norm(point - target))

    found = []
    for j in minima:
        centre = float(profile.s[j])
        best = minimize_scalar(gap, bounds=(centre - h, centre + h), method="bounded",
                               options={"xatol": 1e-12})
        found.append(float(np.mod(best.x, profile.domain_length)))
    return found


def _lift_at(profile: CurvatureProfile, start: float, t: np.ndarray) -> LiftedSignature:
    columns = np.column_stack([profile.evaluate(start + t, j) for j in range(profile.order + 1)])
    return LiftedSignature(np.column_stack([columns, t]), np.zeros(2), profile.domain_length)


def _intersections_match(a: SelfIntersections, b: SelfIntersections, shift: float,
                         length: float, config: AppConfig) -> bool:
    if a.count != b.count:
        return False
    if a.count == 0:
        return True
    ta = a.parameters()
    tb = np.sort(np.mod(b.parameters() - shift, length))
    tol = config.intersection_tol * max(1.0, length)
    return bool(np.all(np.abs(ta - tb) <= tol))


def congruence_closed(
    a: PlanarCurve,
    b: PlanarCurve,
    threshold: Optional[float] = None,
    config: Optional[AppConfig] = None,
) -> CongruenceVerdict:
    """Decide rigid congruence of two closed curves.

    Aligns B's parameterization at every point whose signature matches A's
    signature at s = 0, compares minimal periods and self-intersection
    parameter sequences, then registers and measures. Falls back to lifted
    signatures when a signature is not simple.
    """
    config = resolve(config)
    arc_a, arc_b = _closed_arc(a, config), _closed_arc(b, config)
    length = max(arc_a.total_length, arc_b.total_length)
    threshold = _default_threshold((arc_a.total_length, arc_b.total_length), config) \
        if threshold is None else float(threshold)
    kind = GroupKind.SE2
    prof_a = euclidean_curvature(arc_a, 1, config)
    prof_b = euclidean_curvature(arc_b, 1, config)
    evidence: dict = {"route": "closed"}

    sig_a = euclidean_signature(arc_a, 1, config=config)
    sig_b = euclidean_signature(arc_b, 1, config=config)
    try:
        require_simple(sig_a, config)
        require_simple(sig_b, config)
    except SignatureNotSimple as e:
        logger.info("%s; comparing lifted signatures", e)
        lifted = congruence_lifted(a, b, threshold, config)
        evidence.update(lifted.evidence)
        evidence["reason"] = "SignatureNotSimple: compared lifted signatures"
        verdict = Verdict.NOT_CONGRUENT if lifted.verdict is Verdict.NOT_CONGRUENT else Verdict.UNDECIDABLE
        return CongruenceVerdict(verdict, kind, lifted.g, lifted.registered_distance, threshold, evidence)

    index_a, index_b = _symmetry_index(prof_a, config), _symmetry_index(prof_b, config)
    period_a, period_b = arc_a.total_length / index_a, arc_b.total_length / index_b
    gate = _fallback_gate(length, threshold)
    d_sig = signature_hausdorff(sig_a, sig_b)
    evidence.update({
        "index": [index_a, index_b],
        "periods": [period_a, period_b],
        "signature_distance": d_sig,
        "gate": gate,
        "ambiguous_vertices": _flat_runs(prof_a, config) or _flat_runs(prof_b, config),
    })
    if index_a != index_b or abs(period_a - period_b) > config.intersection_tol * max(1.0, length):
        evidence["reason"] = "minimal periods differ"
        return CongruenceVerdict(Verdict.NOT_CONGRUENT, kind, None, float("nan"), threshold, evidence)
    if d_sig > gate:
        evidence["reason"] = "signatures differ beyond the gate"
        return CongruenceVerdict(Verdict.NOT_CONGRUENT, kind, None, float("nan"), threshold, evidence)

    crossings_a = self_intersections(arc_a, config)
    crossings_b = self_intersections(arc_b, config)
    evidence["intersections"] = [crossings_a.count, crossings_b.count]
    candidates = _start_candidates(prof_b, prof_a.columns[0], d_sig)
    evidence["candidates"] = candidates

    def try_start(start: float) -> tuple[float, Optional[GroupElement]]:
        if not _intersections_match(crossings_a, crossings_b, start, arc_b.total_length, config):
            return float("inf"), None
        g = rigid_alignment(arc_a, 0.0, arc_b, start)
        return curve_distance(arc_a, apply_group(g, arc_b.as_planar())), g

    results = [r.value for r in run_trials(try_start, candidates, config)]
    if not results or all(g is None for _, g in results):
        evidence["reason"] = "self-intersection sequences differ"
        return CongruenceVerdict(Verdict.NOT_CONGRUENT, kind, None, float("nan"), threshold, evidence)
    distance, g = min(results, key=lambda item: item[0])
    verdict = Verdict.CONGRUENT if distance <= threshold else Verdict.NOT_CONGRUENT
    if verdict is Verdict.NOT_CONGRUENT:
        evidence["reason"] = "registered distance exceeds the threshold"
    logger.info("Closed comparison: %d candidate start(s), best distance %.3e -> %s",
                len(candidates), distance, verdict.value)
    return CongruenceVerdict(verdict, kind, g, distance, threshold, evidence)


def _flat_runs(profile: CurvatureProfile, config: AppConfig, run: int = 4) -> bool:
    """True when |κ′| stays below the vertex tolerance for `run` consecutive samples."""
    slope = np.abs(profile.column(1))
    eta = max(config.vertex_tol * float(slope.max()), config.vertex_floor)
    flat = (slope < eta).astype(int)
    if not flat.any():
        return False
    window = np.convolve(np.concatenate([flat, flat[:run - 1]]), np.ones(run, dtype=int), mode="valid")
    return bool(np.any(window >= run))


def congruence_lifted(
    a: PlanarCurve,
    b: PlanarCurve,
    threshold: Optional[float] = None,
    config: Optional[AppConfig] = None,
) -> CongruenceVerdict:
    """Closed-curve comparison through lifted signatures (κ, κ′, t).

    Requires equal indices of symmetry. UNDECIDABLE when the lifted
    signatures agree but no registration lands within the threshold.
    """
    config = resolve(config)
    arc_a, arc_b = _closed_arc(a, config), _closed_arc(b, config)
    threshold = _default_threshold((arc_a.total_length, arc_b.total_length), config) \
        if threshold is None else float(threshold)
    kind = GroupKind.SE2
    prof_a = euclidean_curvature(arc_a, 1, config)
    prof_b = euclidean_curvature(arc_b, 1, config)
    index_a, index_b = _symmetry_index(prof_a, config), _symmetry_index(prof_b, config)
    evidence: dict = {"route": "lifted", "index": [index_a, index_b]}
    if index_a != index_b:
        evidence["reason"] = "indices of symmetry differ"
        return CongruenceVerdict(Verdict.NOT_CONGRUENT, kind, None, float("nan"), threshold, evidence)

    gate = _fallback_gate(max(arc_a.total_length, arc_b.total_length), threshold)
    lifted_a = _lift_at(prof_a, 0.0, arc_a.s)
    best = (float("inf"), 0.0)
    for start in _start_candidates(prof_b, prof_a.columns[0], gate):
        gap = lifted_signature_distance(lifted_a, _lift_at(prof_b, start, arc_b.s))
        best = min(best, (gap, start))
    evidence.update({"lifted_distance": best[0], "gate": gate})
    if best[0] > gate:
        evidence["reason"] = "lifted signatures differ beyond the gate"
        return CongruenceVerdict(Verdict.NOT_CONGRUENT, kind, None, float("nan"), threshold, evidence)

    g = rigid_alignment(arc_a, 0.0, arc_b, best[1])
    distance = curve_distance(arc_a, apply_group(g, arc_b.as_planar()))
    verdict = Verdict.CONGRUENT if distance <= threshold else Verdict.UNDECIDABLE
    return CongruenceVerdict(verdict, kind, g, distance, threshold, evidence)


# ============================================================================
# Self-intersections and symmetry
# ============================================================================

def self_intersections(
    curve: PlanarCurve | ArcLengthCurve,
    config: Optional[AppConfig] = None,
) -> SelfIntersections:
    """Transverse crossings of non-adjacent polyline segments.

    Parameters are arc length for an ArcLengthCurve and cumulative chord length
    for raw samples (after dropping repeated traversals). Nearly parallel
    overlapping pairs are counted as tangential, not reported.
    """
    if isinstance(curve, ArcLengthCurve):
        points, closed = curve.nodes, curve.closed
        params = curve.s
    else:
        curve = normalize_minimal_period(curve)
        points, closed = curve.samples, curve.closed
        chords = np.linalg.norm(np.diff(points, axis=0), axis=1)
        params = np.concatenate([[0.0], np.cumsum(chords)])

    starts, ends = polyline_segments(points, closed)
    direction = ends - starts
    spans = np.linalg.norm(direction, axis=1)
    count = len(starts)
    scale = max(1.0, float(np.ptp(points, axis=0).max()))

    crossings = []
    tangential = 0
    index = np.arange(count)
    for lo in range(0, count, _SWEEP_CHUNK):
        rows = index[lo:lo + _SWEEP_CHUNK]
        offset = starts[None, :, :] - starts[rows, None, :]
        denom = cross2(direction[rows, None, :], direction[None, :, :])
        pair = index[None, :] > rows[:, None] + 1
        if closed:
            pair &= ~((rows[:, None] == 0) & (index[None, :] == count - 1))
        sine = np.abs(denom) / np.maximum(spans[rows, None] * spans[None, :], 1e-300)
        parallel = pair & (sine < _TANGENTIAL_SIN)
        if parallel.any():
            along = np.abs(cross2(offset, direction[rows, None, :])) / spans[rows, None]
            near = np.linalg.norm(offset, axis=2) <= spans[rows, None] + spans[None, :]
            tangential += int(np.count_nonzero(parallel & (along <= 1e-9 * scale) & near))
        safe = np.where(sine < _TANGENTIAL_SIN, 1.0, denom)
        t = cross2(offset, direction[None, :, :]) / safe
        u = cross2(offset, direction[rows, None, :]) / safe
        hit = pair & (sine >= _TANGENTIAL_SIN) & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)
        for r, j in zip(*np.nonzero(hit)):
            i = rows[r]
            point = starts[i] + t[r, j] * direction[i]
            crossings.append((float(params[i] + t[r, j] * _param_span(params, i, curve, closed)),
                              float(params[j] + u[r, j] * _param_span(params, j, curve, closed)),
                              point))

    crossings.sort(key=lambda item: item[0])
    if tangential:
        logger.debug("Excluded %d tangential segment pairs", tangential)
    return SelfIntersections(crossings, tangential)


def _param_span(params: np.ndarray, i: int, curve, closed: bool) -> float:
    if i + 1 < len(params):
        return float(params[i + 1] - params[i])
    if isinstance(curve, ArcLengthCurve):
        return float(curve.total_length - params[i])
    return float(curve.chord_length - params[i])


def index_of_symmetry(curve: ArcLengthCurve, config: Optional[AppConfig] = None) -> int:
    """L divided by the minimal period of κ (ConstantCurvature for circles)."""
    return period_count(euclidean_curvature(curve, 0, config), config)


# ============================================================================
# Non-uniqueness generator
# ============================================================================

def insert_constant_curvature(
    curve: ArcLengthCurve,
    at_vertex_s: float,
    arc_length: float,
    config: Optional[AppConfig] = None,
) -> PlanarCurve:
    """Splice a circular arc of curvature κ(at_vertex_s) and length `arc_length`
    into the curve at a vertex.

    The part after the vertex is carried along rigidly, so curvature stays
    continuous. Closed curves are cut at s = 0 and come back open.
    """
    config = resolve(config)
    profile = euclidean_curvature(curve, 1, config)
    slope = float(profile.evaluate(at_vertex_s, 1))
    eta = max(config.vertex_tol * float(np.max(np.abs(profile.column(1)))), config.vertex_floor)
    if abs(slope) > eta:
        raise NotAVertex(float(at_vertex_s), slope, eta)
    if arc_length < 0:
        raise ValueError(f"arc_length must be >= 0, got {arc_length}")
    if arc_length == 0:
        return curve.as_planar()

    s = curve.s
    nodes = curve.nodes
    if curve.closed:
        s = np.append(s, curve.total_length)
        nodes = np.vstack([nodes, nodes[:1]])
    gap = 1e-9 * curve.spacing
    head = nodes[s < at_vertex_s - gap]
    tail = nodes[s > at_vertex_s + gap]

    origin = curve.position(at_vertex_s)
    tangent = curve.tangent(at_vertex_s)
    normal = np.array([-tangent[1], tangent[0]])
    kappa = float(profile.evaluate(at_vertex_s))
    count = max(2, int(np.ceil(arc_length / curve.spacing)))
    sigma = np.linspace(0.0, arc_length, count + 1)

    if abs(kappa) <= config.flat_tol:
        arc = origin + sigma[:, None] * tangent
        moved = tail + arc_length * tangent
    else:
        centre = origin + normal / kappa
        arc = centre + _rotate(origin - centre, kappa * sigma)
        turn = kappa * arc_length
        moved = centre + _rotate(tail - centre, np.full(len(tail), turn))

    logger.info("Inserted a constant-curvature arc (kappa=%.6g, length=%.6g) at s=%.6g",
                kappa, arc_length, at_vertex_s)
    return PlanarCurve(np.vstack([head, arc, moved]), closed=False)


def _rotate(vectors: np.ndarray, angles: np.ndarray) -> np.ndarray:
    vectors = np.broadcast_to(np.asarray(vectors, dtype=float), (len(angles), 2))
    c, s = np.cos(angles), np.sin(angles)
    return np.column_stack([c * vectors[:, 0] - s * vectors[:, 1], s * vectors[:, 0] + c * vectors[:, 1]])
