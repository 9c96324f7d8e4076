"""Envelopes, explicit closeness bounds and the experiments that check them.

All envelope computations run in the upper half-plane: a profile with
decreasing curvature is negated first (κ ← −κ) and results are mapped back.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import spearmanr

from src.config import AppConfig, resolve
from src.curve_core import (
    CurvatureProfile,
    PlanarCurve,
    apply_group,
    curve_distance,
    euclidean_curvature,
    require_monotone,
    resample_by_arclength,
    rigid_alignment,
)
from src.numerics import cumulative_integral
from src.reconstruction import (
    MatrixFunction,
    curvature_from_signature,
    curve_from_curvature,
    integrate_frame,
)
from src.signature import GraphSamples, PhasePortrait, common_domain, l1_signature_distance, signature_hausdorff
from src.trial_pool import run_trials
from src.utils import DeltaTooLarge, NoCommonDomain, VanishingF, VertexPresent, sup_norm


logger = logging.getLogger(__name__)


# Sine modes in a seeded smooth perturbation.
_PERTURBATION_MODES = 4
# Range of the tube fill drawn per experiment trial.
_FILL_RANGE = (0.25, 0.95)


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class Reparameterization:
    """Samples of ρ± solving ρ′ = 1 ± δ/|κ′(ρ)|, ρ(0) = 0, until ρ = L."""
    s: np.ndarray
    rho: np.ndarray
    sign: int
    delta: float
    m: float

    def __call__(self, s) -> np.ndarray:
        return np.interp(s, self.s, self.rho)

    @property
    def end(self) -> float:
        return float(self.s[-1])

    def sandwich_violation(self) -> float:
        """Largest excess over s(1 − δ/m) ≤ ρ(s) ≤ s(1 + δ/m); 0 when it holds."""
        r = self.delta / self.m
        below = np.max(self.s * (1 - r) - self.rho)
        above = np.max(self.rho - self.s * (1 + r))
        return max(0.0, float(below), float(above))


@dataclass(frozen=True, eq=False)
class EnvelopeSet:
    """Top/bottom tube curves and the curvature envelopes τ ≥ κ, κ* ≥ β.

    `profile`, `tau` and `beta` live in the upper half-plane; `upper` and
    `lower` evaluate the envelopes in the caller's orientation.
    """
    delta: float
    m: float
    M: float
    length: float
    ell_tau: float
    L_tau: float
    ell_beta: float
    L_beta: float
    sign: float
    profile: CurvatureProfile
    rho_plus: Reparameterization
    rho_minus: Reparameterization
    sigma_plus: PhasePortrait
    sigma_minus: PhasePortrait
    s: np.ndarray
    tau: np.ndarray
    beta: np.ndarray

    @property
    def reflected(self) -> bool:
        return self.sign < 0

    def tau_at(self, s) -> np.ndarray:
        return self.profile.evaluate((np.asarray(s, dtype=float) + self.ell_tau) * (1 + self.delta / self.m))

    def beta_at(self, s) -> np.ndarray:
        return self.profile.evaluate(np.asarray(s, dtype=float) * (1 - self.delta / self.m))

    def beta_extended(self, s) -> np.ndarray:
        """β continued linearly with slope m past ℓ_β up to L_β."""
        s = np.asarray(s, dtype=float)
        head = self.beta_at(np.minimum(s, self.ell_beta))
        tail = self.m * (s - self.ell_beta) + self.profile.kappa[-1]
        return np.where(s <= self.ell_beta, head, tail)

    def upper(self, s) -> np.ndarray:
        return self.tau_at(s) if self.sign > 0 else -self.beta_at(s)

    def lower(self, s) -> np.ndarray:
        return self.beta_at(s) if self.sign > 0 else -self.tau_at(s)


@dataclass(frozen=True)
class BoundReport:
    """Every constant entering the explicit curve-closeness bound ε(δ)."""
    delta: float
    m: float
    m1: float
    m2: float
    M: float
    length: float
    ell_tau: float
    L_tau: float
    ell_beta: float
    L_beta: float
    alpha1: float
    alpha2: float
    alpha3: float
    eps: float
    ell_tau_free: float
    L_tau_free: float
    eps_free: float
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "m": self.m,
            "m1": self.m1,
            "m2": self.m2,
            "M": self.M,
            "L": self.length,
            "ell_tau": self.ell_tau,
            "L_tau": self.L_tau,
            "L_beta": self.L_beta,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "alpha3": self.alpha3,
            "eps": self.eps,
            "inverse_free": {
                "ell_tau": self.ell_tau_free,
                "L_tau": self.L_tau_free,
                "eps": self.eps_free,
            },
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class FrameGapRow:
    delta: float
    frame_gap: float
    curve_gap: float
    curve_bound: float


@dataclass(frozen=True)
class ExperimentRow:
    """One perturbation trial."""
    trial: int
    amplitude: float
    delta_measured: float
    d_curves: float
    eps_bound: float
    in_hypothesis: bool
    passed: bool


@dataclass
class ExperimentTable:
    rows: list[ExperimentRow] = field(default_factory=list)

    def extend(self, other: "ExperimentTable") -> None:
        self.rows.extend(other.rows)

    @property
    def pass_count(self) -> int:
        return sum(1 for row in self.rows if row.passed)

    def spearman(self) -> float:
        """Rank correlation of delta_measured against d_curves (NaN below two rows)."""
        if len(self.rows) < 2:
            return float("nan")
        result = spearmanr([r.delta_measured for r in self.rows], [r.d_curves for r in self.rows])
        return float(result.statistic)

    def summary(self) -> str:
        outside = sum(1 for row in self.rows if not row.in_hypothesis)
        failed = len(self.rows) - self.pass_count - outside
        return (f"{len(self.rows)} trials: {self.pass_count} passed, {failed} failed, "
                f"{outside} out of hypothesis")


# ============================================================================
# Envelopes
# ============================================================================

def _upper_half_plane(kappa: CurvatureProfile) -> tuple[CurvatureProfile, float]:
    """(κ with κ′ > 0, sign) so that κ_original = sign · κ_returned."""
    profile = kappa.with_order(1)
    sign = require_monotone(profile)
    if sign > 0:
        return profile, 1.0
    return CurvatureProfile(profile.s, -profile.columns, closed=False,
                            domain_length=profile.domain_length), -1.0


def _slope_range(profile: CurvatureProfile) -> tuple[float, float]:
    slope = np.abs(profile.column(1))
    return float(slope.min()), float(slope.max())


def solve_rho(
    kappa: CurvatureProfile,
    delta: float,
    sign: int,
    config: Optional[AppConfig] = None,
    steps: Optional[int] = None,
) -> Reparameterization:
    """RK4 for ρ′ = 1 + sign·δ/|κ′(ρ)| from ρ(0) = 0 until ρ reaches L.

    |κ′| is read from a table clamped below at m, so every stage slope lies in
    [1 − δ/m, 1 + δ/m].
    """
    config = resolve(config)
    steps = steps or config.integrator_steps
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    profile, _ = _upper_half_plane(kappa)
    m, _ = _slope_range(profile)
    if delta >= m:
        raise DeltaTooLarge(delta, m)

    length = profile.domain_length
    table_s = np.linspace(0.0, length, 4 * steps + 1)
    table = np.maximum(np.abs(profile.evaluate(table_s, 1)), m)

    def slope(rho: float) -> float:
        return 1.0 + sign * delta / float(np.interp(rho, table_s, table))

    h = length / steps
    s_values = [0.0]
    rho_values = [0.0]
    s, rho = 0.0, 0.0
    limit = int(math.ceil(steps / (1 - delta / m))) + 2
    for _ in range(limit):
        k1 = slope(rho)
        k2 = slope(rho + 0.5 * h * k1)
        k3 = slope(rho + 0.5 * h * k2)
        k4 = slope(rho + h * k3)
        step = h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if rho + step >= length:
            s_end = s + h * (length - rho) / step
            if s_end > s:
                s_values.append(s_end)
                rho_values.append(length)
            break
        s, rho = s + h, rho + step
        s_values.append(s)
        rho_values.append(rho)

    return Reparameterization(np.array(s_values), np.array(rho_values), sign, float(delta), m)


def _check_delta(profile: CurvatureProfile, delta: float, m: float) -> None:
    limit = min(abs(profile.kappa[-1] - profile.kappa[0]) / 2, m)
    if not 0 < delta < limit:
        raise DeltaTooLarge(delta, limit)


def _envelope_constants(profile: CurvatureProfile, delta: float, m: float, config: AppConfig) -> dict:
    r = delta / m
    length = profile.domain_length
    k0, k_end = profile.kappa[0], profile.kappa[-1]
    if delta == 0:
        ell_tau = 0.0
        L_tau = length
    else:
        ell_tau = float(profile.inverse(k0 + delta, config.bisection_tol)) / (1 + r)
        L_tau = float(profile.inverse(k_end - delta, config.bisection_tol)) / (1 + r) - ell_tau
    ell_beta = length / (1 - r)
    return {
        "ell_tau": ell_tau,
        "L_tau": L_tau,
        "ell_beta": ell_beta,
        "L_beta": ell_beta + r,
    }


def envelopes(
    kappa: CurvatureProfile,
    delta: float,
    config: Optional[AppConfig] = None,
) -> EnvelopeSet:
    """ρ±, the top/bottom portraits σ±, and τ/β on [0, L_τ].

    Requires strictly monotone κ and 0 < δ < min(|κ(0) − κ(L)|/2, m).
    """
    config = resolve(config)
    profile, sign = _upper_half_plane(kappa)
    m, M = _slope_range(profile)
    _check_delta(profile, delta, m)
    constants = _envelope_constants(profile, delta, m, config)

    rho_plus = solve_rho(profile, delta, 1, config)
    rho_minus = solve_rho(profile, delta, -1, config)
    sigma = {}
    for rho, offset in ((rho_plus, delta), (rho_minus, -delta)):
        at = rho.rho
        samples = np.column_stack([profile.evaluate(at), profile.evaluate(at, 1) + offset])
        sigma[rho.sign] = PhasePortrait(rho.s, sign * samples)

    r = delta / m
    grid = np.linspace(0.0, constants["L_tau"], config.integrator_steps + 1)
    envelope = EnvelopeSet(
        delta=float(delta), m=m, M=M, length=profile.domain_length, sign=sign, profile=profile,
        rho_plus=rho_plus, rho_minus=rho_minus,
        sigma_plus=sigma[1], sigma_minus=sigma[-1],
        s=grid,
        tau=profile.evaluate((grid + constants["ell_tau"]) * (1 + r)),
        beta=profile.evaluate(grid * (1 - r)),
        **constants,
    )
    logger.debug("Envelopes for delta=%.3g: ell_tau=%.6g L_tau=%.6g L_beta=%.6g",
                 delta, envelope.ell_tau, envelope.L_tau, envelope.L_beta)
    return envelope


def _eps(delta: float, m: float, M: float, ell_tau: float, L_tau: float, L_beta: float) -> float:
    r = delta / m
    return max(r, abs(L_tau - L_beta) + L_tau ** 2 * M * (delta * L_tau / m + ell_tau * (1 + r)) / 2)


def explicit_bound(
    kappa: CurvatureProfile,
    delta: float,
    config: Optional[AppConfig] = None,
) -> BoundReport:
    """The curve-closeness bound ε(δ) with all intermediate constants.

    δ = 0 is allowed and gives ε = 0.
    """
    config = resolve(config)
    profile, _ = _upper_half_plane(kappa)
    m, M = _slope_range(profile)
    if delta != 0:
        _check_delta(profile, delta, m)
    c = _envelope_constants(profile, delta, m, config)
    length = profile.domain_length
    r = delta / m

    alpha1 = M * (delta * length / m + c["ell_tau"] * (1 + r))
    alpha2 = M * length * delta / m
    ell_tau_free = delta / (m * (1 + r))
    L_tau_free = (length - r) / (1 + r) - ell_tau_free
    if delta == 0:
        ell_tau_free, L_tau_free = 0.0, length

    return BoundReport(
        delta=float(delta), m=m, m1=m, m2=m, M=M, length=length,
        ell_tau=c["ell_tau"], L_tau=c["L_tau"], ell_beta=c["ell_beta"], L_beta=c["L_beta"],
        alpha1=alpha1, alpha2=alpha2, alpha3=max(alpha1, alpha2),
        eps=_eps(delta, m, M, c["ell_tau"], c["L_tau"], c["L_beta"]),
        ell_tau_free=ell_tau_free, L_tau_free=L_tau_free,
        eps_free=_eps(delta, m, M, ell_tau_free, L_tau_free, c["L_beta"]),
        notes=(
            "m1 = m2 = m = min|kappa'| over [0, L]",
            "the shift in the upper reparameterization is read as ell_tau",
            "hypothesis enforced as delta < min(|kappa(0) - kappa(L)|/2, m)",
        ),
    )


# ============================================================================
# Synthetic tube members and sandwich checks
# ============================================================================

def _trial_streams(seed: int, trial: int) -> list[np.random.SeedSequence]:
    """(fill, noise) streams of a trial: child `trial` of SeedSequence(seed), split in two."""
    return np.random.SeedSequence(seed, spawn_key=(trial,)).spawn(2)


def _smooth_noise(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Seeded sum of sines on x ∈ [0, 1], scaled so max|η| = 1 on x."""
    weights = rng.normal(size=_PERTURBATION_MODES)
    phases = rng.uniform(0.0, 2 * np.pi, size=_PERTURBATION_MODES)
    modes = np.arange(1, _PERTURBATION_MODES + 1)
    raw = np.sin(np.pi * x[:, None] * modes[None, :] + phases[None, :]) @ weights
    peak = float(np.max(np.abs(raw)))
    return raw / peak if peak > 0 else raw


def synthetic_tube_member(
    kappa: CurvatureProfile,
    delta: float,
    seed: int | np.random.SeedSequence,
    fill: float = 0.9,
    config: Optional[AppConfig] = None,
) -> CurvatureProfile:
    """κ* whose portrait is the graph F + fill·δ·η(u), solved from κ*(0) = κ(0).

    Lies in the inner tube of radius δ whenever 0 ≤ fill < 1. `seed` may be
    an integer or a spawned SeedSequence.
    """
    config = resolve(config)
    profile, sign = _upper_half_plane(kappa)
    m, _ = _slope_range(profile)
    if delta >= m:
        raise DeltaTooLarge(delta, m)
    u, slope = profile.kappa, profile.column(1)
    x = (u - u[0]) / (u[-1] - u[0])
    noise = _smooth_noise(x, np.random.default_rng(seed))
    portrait = PhasePortrait.from_graph(u, slope + fill * delta * noise)
    member = curvature_from_signature(portrait, float(u[0]), config)
    return CurvatureProfile(member.s, sign * member.columns)


def rho_sandwich_violation(
    kappa: CurvatureProfile,
    kappa_star: CurvatureProfile,
    delta: float,
    config: Optional[AppConfig] = None,
) -> float:
    """Largest violation of κ(ρ⁻(s)) ≤ κ*(s) ≤ κ(ρ⁺(s)) on the shared s-range."""
    profile, sign = _upper_half_plane(kappa)
    rho_plus = solve_rho(profile, delta, 1, config)
    rho_minus = solve_rho(profile, delta, -1, config)
    end = min(rho_plus.end, rho_minus.end, kappa_star.length)
    s = kappa_star.s[kappa_star.s <= end]
    star = sign * kappa_star.evaluate(s)
    excess = np.maximum(star - profile.evaluate(rho_plus(s)), profile.evaluate(rho_minus(s)) - star)
    return max(0.0, float(np.max(excess)))


def envelope_sandwich_violation(envelope: EnvelopeSet, kappa_star: Optional[CurvatureProfile] = None) -> float:
    """Largest violation of β ≤ κ* ≤ τ on [0, L_τ] (κ itself when κ* is omitted)."""
    if kappa_star is None:
        star = envelope.profile.evaluate(envelope.s)
        s = envelope.s
    else:
        s = envelope.s[envelope.s <= kappa_star.length]
        star = envelope.sign * kappa_star.evaluate(s)
    excess = np.maximum(star - envelope.tau_at(s), envelope.beta_at(s) - star)
    return max(0.0, float(np.max(excess)))


# ============================================================================
# Closeness bounds and their harnesses
# ============================================================================

def _shared_grid(a: CurvatureProfile, b: CurvatureProfile) -> tuple[np.ndarray, float]:
    length = min(a.length, b.length)
    grid = np.union1d(a.s, b.s)
    return grid[grid <= length], length


def closeness_bound_curvature(kappa: CurvatureProfile, kappa_star: CurvatureProfile) -> float:
    """L²·sup|κ − κ*|/2 on the common arc-length domain."""
    grid, length = _shared_grid(kappa, kappa_star)
    gap = sup_norm(kappa.evaluate(grid) - kappa_star.evaluate(grid))
    return length ** 2 * gap / 2


def curvature_closeness_trial(
    kappa: CurvatureProfile,
    kappa_star: CurvatureProfile,
    config: Optional[AppConfig] = None,
) -> tuple[float, float]:
    """(measured distance, bound) for two curves sharing start point and tangent."""
    _, length = _shared_grid(kappa, kappa_star)
    curve = curve_from_curvature(kappa.truncated(length), config=config)
    other = curve_from_curvature(kappa_star.truncated(length), config=config)
    return curve_distance(curve, other), closeness_bound_curvature(kappa, kappa_star)


def _slope_bounds(f: GraphSamples, g: GraphSamples) -> tuple[float, float]:
    values = np.concatenate([f.v, g.v])
    min_abs = float(np.min(np.abs(values)))
    if min_abs == 0 or (np.any(values > 0) and np.any(values < 0)):
        raise VanishingF(min_abs, 0.0)
    return min_abs, float(np.max(np.abs(values)))


def l1_curvature_bound(f: GraphSamples, f_star: GraphSamples, delta: float) -> float:
    """δM/m², the bound on |u(s) − u*(s)| for in-phase solutions of F and F*."""
    m, M = _slope_bounds(f, f_star)
    return delta * M / m ** 2


def l1_curve_bound(f: GraphSamples, f_star: GraphSamples, delta: float) -> float:
    """Bound on the registered distance of the curves defined by F over [x1, y1]
    and F* over [x2, y2] when ∫|F − F*| = δ."""
    x1, y1, x2, y2 = f.lower, f.upper, f_star.lower, f_star.upper
    start, stop = max(x1, x2), min(y1, y2)
    if start >= stop:
        raise NoCommonDomain(start, stop)
    m, M = _slope_bounds(f, f_star)
    return max(
        abs(x1 - x2) / m,
        abs(y1 - y2) / m + delta * M * abs(start - stop) / (2 * m ** 3) + M * delta / m ** 2,
    )


def _solve_graph(graph: GraphSamples, config: AppConfig) -> CurvatureProfile:
    u, v = graph.u, graph.v
    if v[0] < 0:
        u, v = u[::-1], v[::-1]
    return curvature_from_signature(PhasePortrait.from_graph(u, v), config=config)


def l1_curvature_trial(
    f: GraphSamples,
    f_star: GraphSamples,
    config: Optional[AppConfig] = None,
) -> tuple[float, float, float]:
    """(max|u − u*|, δM/m², δ) for solutions started together at the common domain's entry."""
    config = resolve(config)
    lower, upper = common_domain(f, f_star)
    f, f_star = f.restricted(lower, upper), f_star.restricted(lower, upper)
    delta = l1_signature_distance(f, f_star)
    u = _solve_graph(f, config)
    u_star = _solve_graph(f_star, config)
    grid = np.linspace(0.0, min(u.length, u_star.length), 2049)
    measured = sup_norm(u.evaluate(grid) - u_star.evaluate(grid))
    return measured, l1_curvature_bound(f, f_star, delta), delta


def l1_curve_trial(
    f: GraphSamples,
    f_star: GraphSamples,
    config: Optional[AppConfig] = None,
) -> tuple[float, float, float]:
    """(registered distance, bound, δ) for the curves of two order-1 signatures.

    The curves are aligned at the common curvature value where both enter
    the shared domain.
    """
    config = resolve(config)
    delta = l1_signature_distance(f, f_star)
    kappa = _solve_graph(f, config)
    kappa_star = _solve_graph(f_star, config)
    lower, upper = common_domain(f, f_star)
    anchor = lower if f.v[0] > 0 else upper

    curve = curve_from_curvature(kappa, config=config)
    other = curve_from_curvature(kappa_star, config=config)
    g = rigid_alignment(curve, float(kappa.inverse(anchor, config.bisection_tol)),
                        other, float(kappa_star.inverse(anchor, config.bisection_tol)))
    measured = curve_distance(curve, apply_group(g, other.as_planar()))
    return measured, l1_curve_bound(f, f_star, delta), delta


def frame_closeness_sweep(
    k: MatrixFunction,
    direction: MatrixFunction,
    deltas,
    config: Optional[AppConfig] = None,
) -> list[FrameGapRow]:
    """Frame and curve gaps for K* = K + δE over a sweep of δ.

    Curves are x(s) = ∫ (first frame row) ds, so the curve gap is at most
    span times the frame gap.
    """
    config = resolve(config)
    base = integrate_frame(k, config=config)
    base_curve = cumulative_integral(base.frames[:, 0, :], base.s)
    s0, s1 = k.span
    rows = []
    for delta in deltas:
        other = integrate_frame(k.perturbed(direction, float(delta)), config=config)
        frame_gap = sup_norm(other.frames - base.frames)
        curve_gap = sup_norm(cumulative_integral(other.frames[:, 0, :], other.s) - base_curve)
        rows.append(FrameGapRow(float(delta), frame_gap, curve_gap, (s1 - s0) * frame_gap))
    return rows


# ============================================================================
# Experiments
# ============================================================================

def _vertex_check(profile: CurvatureProfile, config: AppConfig) -> Optional[tuple[float, float]]:
    slope = np.abs(profile.column(1))
    eta = max(config.vertex_tol * float(slope.max()), config.vertex_floor)
    worst = int(np.argmin(slope))
    if slope[worst] < eta:
        return float(profile.s[worst]), float(slope[worst])
    return None


def _portrait(profile: CurvatureProfile) -> PhasePortrait:
    return PhasePortrait(profile.s, profile.with_order(1).columns[:, :2])


def perturbation_experiment(
    curve: PlanarCurve,
    amplitude: float,
    trials: int,
    seed: int,
    allow_vertices: bool = False,
    config: Optional[AppConfig] = None,
    first_trial: int = 0,
) -> ExperimentTable:
    """Perturb the curve's signature inside a tube of radius `amplitude`,
    reconstruct, and compare the registered distance with ε(amplitude).

    Trial t draws from child t of SeedSequence(seed). The baseline is
    reconstructed through the same pipeline, so its own integration error
    cancels out of d_curves.
    """
    config = resolve(config)
    arc = resample_by_arclength(curve, config.resample_nodes, config)
    profile = euclidean_curvature(arc, 1, config)
    vertex = _vertex_check(profile, config)
    if vertex is not None and not allow_vertices:
        raise VertexPresent(*vertex)
    in_hypothesis = vertex is None
    numbers = range(first_trial, first_trial + trials)

    if in_hypothesis:
        eps = explicit_bound(profile, amplitude, config).eps if amplitude > 0 else 0.0
        baseline = synthetic_tube_member(profile, amplitude, seed, fill=0.0, config=config)
        base_curve = curve_from_curvature(baseline, config=config)
        base_portrait = _portrait(baseline)

        def run_one(trial: int) -> ExperimentRow:
            fill_stream, noise_stream = _trial_streams(seed, trial)
            fill = float(np.random.default_rng(fill_stream).uniform(*_FILL_RANGE))
            member = synthetic_tube_member(profile, amplitude, noise_stream, fill, config)
            offset = fill * amplitude
            measured = max(signature_hausdorff(base_portrait, _portrait(member)), offset)
            d_curves = curve_distance(base_curve, curve_from_curvature(member, config=config))
            return ExperimentRow(trial, float(amplitude), measured, d_curves, eps, True,
                                 d_curves <= eps + config.comparison_tol)
    else:
        logger.warning("Curve has a vertex near s=%.6g; rows are outside the bound's hypothesis", vertex[0])
        profile = CurvatureProfile(profile.s, profile.columns)
        base_curve = curve_from_curvature(profile, config=config)
        base_portrait = _portrait(profile)
        x = profile.s / profile.length

        def run_one(trial: int) -> ExperimentRow:
            _, noise_stream = _trial_streams(seed, trial)
            noise = _smooth_noise(x, np.random.default_rng(noise_stream))
            perturbed = CurvatureProfile(profile.s, profile.kappa + amplitude * noise)
            measured = signature_hausdorff(base_portrait, _portrait(perturbed))
            d_curves = curve_distance(base_curve, curve_from_curvature(perturbed, config=config))
            return ExperimentRow(trial, float(amplitude), measured, d_curves, float("nan"), False, False)

    results = run_trials(run_one, list(numbers), config)
    table = ExperimentTable([result.value for result in results])
    logger.info("Amplitude %.3g: %s", amplitude, table.summary())
    return table


def sweep_experiment(
    curve: PlanarCurve,
    amplitudes,
    trials: int,
    seed: int,
    allow_vertices: bool = False,
    config: Optional[AppConfig] = None,
) -> ExperimentTable:
    """perturbation_experiment over several amplitudes, trials numbered globally."""
    table = ExperimentTable()
    for index, amplitude in enumerate(amplitudes):
        table.extend(perturbation_experiment(curve, float(amplitude), trials, seed, allow_vertices,
                                             config, first_trial=index * trials))
    return table
