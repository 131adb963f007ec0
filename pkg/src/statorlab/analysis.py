"""Quantitative pipeline: circle sampling, mode identification,
sinusoid fitting and strobe-phase tracking.

The central fit is f(theta) = A sin(n theta + phi) + delta, solved in its
linear reparametrization a sin(n theta) + b cos(n theta) + delta so a
3x3 normal-equation solve (QR fallback) replaces any iterative optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, NoModeError, SamplingError,
                     UndefinedIndexError)
from .grids import DisplacementField, circle_values

AMPLITUDE_FLOOR = 1e-15     # m; below this a fitted sinusoid has no phase


@dataclass(frozen=True)
class CircleSample:
    """Values sampled at uniform angles around one circle."""

    radius: float
    theta: np.ndarray
    values: np.ndarray
    source: str = "simulation"      # "simulation" | "hologram"

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 1 or th.size < 4:
            raise SamplingError(f"need at least 4 angular samples, got {th.size}")
        if np.any(np.diff(th) <= 0.0):
            raise SamplingError("theta samples must be strictly increasing")
        if th[0] < 0.0 or th[-1] >= 2.0 * math.pi:
            raise SamplingError("theta samples must lie in [0, 2 pi)")
        spacing = np.diff(th)
        if np.ptp(spacing) > 1e-9 * spacing.mean():
            raise SamplingError("theta samples must be uniform")
        if np.asarray(self.values).shape != th.shape:
            raise SamplingError("values and theta shapes differ")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("non-finite sample values")

    @property
    def count(self) -> int:
        return self.theta.size

    @classmethod
    def from_field(cls, fld: DisplacementField, radius: float | None = None,
                   count: int | None = None, source: str = "simulation"
                   ) -> "CircleSample":
        theta, vals = circle_values(fld, radius=radius, count=count)
        r = radius if radius is not None else getattr(fld.grid, "radius")
        return cls(radius=float(r), theta=theta, values=vals, source=source)


def detect_mode_number(sample: CircleSample) -> int:
    """Dominant circumferential harmonic of the centered sample.

    Candidates run up to count/8 (eight samples per lobe pair keeps the
    projection honest); exact ties resolve to the lower harmonic because
    the scan ascends.
    """
    n_max = sample.count // 8
    if n_max < 1:
        raise SamplingError(
            f"{sample.count} samples cannot resolve any harmonic "
            "(need at least 8)")
    centered = sample.values - sample.values.mean()
    rms = float(np.sqrt(np.mean(centered ** 2)))
    if rms < 1e-300:
        raise NoModeError("sample is constant; no harmonic content")
    k = np.arange(1, n_max + 1)
    coeff = np.abs(np.exp(-1.0j * np.outer(k, sample.theta)) @ centered) * (2.0 / sample.count)
    best = int(np.argmax(coeff))
    if coeff[best] < 1e-9 * rms:
        raise NoModeError(
            f"all harmonic coefficients below the noise floor "
            f"({coeff[best]:.3e} vs rms {rms:.3e})")
    return int(k[best])


@dataclass(frozen=True)
class FitResult:
    """Parameters of f = A sin(n theta + phi) + delta plus fit quality.

    ``covariance`` holds the diagonal variances in (A, n, phi, delta)
    order; n is fixed by the caller so its entry is identically zero.
    """

    A: float
    n: int
    phi: float
    delta: float
    rms_residual: float
    covariance: tuple

    def __post_init__(self):
        if self.A < 0.0:
            raise DomainError("amplitude convention requires A >= 0")
        if not -math.pi < self.phi <= math.pi:
            raise DomainError("phi must be normalized to (-pi, pi]")


def fit_eq1(sample: CircleSample, n: int) -> FitResult:
    """Least-squares sinusoid fit at a known harmonic.

    Linear in (a, b, delta) with A = sqrt(a^2+b^2), phi = atan2(b, a);
    normal equations with an lstsq (QR) fallback if the 3x3 system is
    ill-conditioned.  When A falls below the amplitude floor the phase is
    reported as 0 by convention.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"harmonic n must be an integer >= 1, got {n}")
    need = max(4, 2 * n + 2)
    if sample.count < need:
        raise SamplingError(
            f"{sample.count} samples under-resolve n={n} "
            f"(need at least {need})")
    v = np.asarray(sample.values, dtype=float)
    X = np.column_stack([np.sin(n * sample.theta),
                         np.cos(n * sample.theta),
                         np.ones(sample.count)])
    G = X.T @ X
    rhs = X.T @ v
    try:
        p = np.linalg.solve(G, rhs)
        if not np.all(np.isfinite(p)):
            raise np.linalg.LinAlgError("non-finite solution")
    except np.linalg.LinAlgError:
        p = np.linalg.lstsq(X, v, rcond=None)[0]
    a, b, d = (float(x) for x in p)
    resid = v - X @ p
    rms_residual = float(np.sqrt(np.mean(resid ** 2)))
    A = math.hypot(a, b)
    phi = math.atan2(b, a)
    if phi <= -math.pi:
        phi = math.pi

    dof = sample.count - 3
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    try:
        cov_lin = sigma2 * np.linalg.inv(G)
    except np.linalg.LinAlgError:
        cov_lin = np.full((3, 3), math.nan)
    var_a, var_b, var_d = cov_lin[0, 0], cov_lin[1, 1], cov_lin[2, 2]
    cov_ab = cov_lin[0, 1]
    floor = max(AMPLITUDE_FLOOR, 1e-12 * max(abs(d), rms_residual))
    if A < floor:
        phi = 0.0
        var_A = float(max(var_a, var_b))
        var_phi = 0.0
    else:
        var_A = float((a * a * var_a + b * b * var_b + 2 * a * b * cov_ab) / A ** 2)
        var_phi = float((b * b * var_a + a * a * var_b - 2 * a * b * cov_ab) / A ** 4)
    return FitResult(A=A, n=int(n), phi=phi, delta=d,
                     rms_residual=rms_residual,
                     covariance=(var_A, 0.0, var_phi, float(var_d)))


@dataclass(frozen=True)
class StrobeTrack:
    """Traveling/standing classification across strobe phases."""

    classification: str          # "traveling" | "standing" | "mixed"
    rotation_rate: float         # spatial deg per strobe deg, signed
    standing_wave_ratio: float   # max A / min A over strobe phases
    n: int
    amplitude_cv: float
    phase_spread_deg: float      # deviation of phi around its mod-pi mean


def _mod_pi_spread(phi: np.ndarray) -> float:
    """Largest deviation (deg) of the phases from their mod-pi mean."""
    mean_dir = 0.5 * np.angle(np.mean(np.exp(2.0j * phi)))
    dev = np.angle(np.exp(2.0j * (phi - mean_dir))) / 2.0
    return float(np.degrees(np.max(np.abs(dev))))


def track_strobe_phase(fits, cv_threshold: float = 0.05,
                       slope_tolerance: float = 0.10,
                       phase_tolerance_deg: float = 5.0) -> StrobeTrack:
    """Classify a strobe-phase sweep of sinusoid fits.

    Traveling: amplitude steady (CV below threshold) and phase advancing
    one electrical radian per strobe radian within the slope tolerance
    (spatial rate = slope/n; the sign just encodes the travel direction).
    Standing: phase locked modulo pi flips and squared amplitude tracing
    a sinusoid in twice the strobe phase.  Anything else is mixed.
    """
    fits = sorted(fits, key=lambda item: item[0])
    if len(fits) < 3:
        raise SamplingError(f"need at least 3 strobe phases, got {len(fits)}")
    ns = {f.n for _, f in fits}
    if len(ns) != 1:
        raise DomainError(f"fits mix harmonics {sorted(ns)}")
    n = ns.pop()
    s = np.radians([deg for deg, _ in fits])
    A = np.array([f.A for _, f in fits])
    phi = np.unwrap([f.phi for _, f in fits])

    mean_A = float(A.mean())
    cv = float(A.std() / mean_A) if mean_A > 0.0 else math.inf
    slope = float(np.polyfit(s, phi, 1)[0])
    rate = slope / n
    swr = float(A.max() / A.min()) if A.min() > 0.0 else math.inf

    spread = _mod_pi_spread(np.asarray(phi))
    # squared amplitude of a standing sweep is sinusoidal at 2 s
    Y = np.column_stack([np.ones_like(s), np.cos(2 * s), np.sin(2 * s)])
    fitted = Y @ np.linalg.lstsq(Y, A ** 2, rcond=None)[0]
    a2_scale = float(np.sqrt(np.mean((A ** 2) ** 2)))
    a2_miss = (float(np.sqrt(np.mean((A ** 2 - fitted) ** 2))) / a2_scale
               if a2_scale > 0.0 else 0.0)

    if cv < cv_threshold and abs(abs(slope) - 1.0) <= slope_tolerance:
        kind = "traveling"
    elif spread <= phase_tolerance_deg and a2_miss < 0.1:
        kind = "standing"
    else:
        kind = "mixed"
    return StrobeTrack(classification=kind, rotation_rate=rate,
                       standing_wave_ratio=swr, n=n, amplitude_cv=cv,
                       phase_spread_deg=spread)


def asymmetry_index(fits) -> float:
    """Worst residual-to-amplitude ratio across strobe phases.

    Zero for a pure single-harmonic pattern; grows with any foreign
    harmonic content (e.g. a manufacturing-defect admixture).
    """
    items = list(fits)
    if len(items) < 2:
        raise SamplingError(f"need at least 2 strobe phases, got {len(items)}")
    ratios = []
    for _, f in items:
        if f.A < AMPLITUDE_FLOOR:
            raise UndefinedIndexError(
                f"fitted amplitude {f.A:.3e} m below {AMPLITUDE_FLOOR:g} m; "
                "residual ratio is undefined")
        ratios.append(f.rms_residual / f.A)
    return float(max(ratios))
