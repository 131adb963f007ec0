"""Synthetic holographic observables.

Two instrument models, both per-pixel maps of dynamics fields:

* time-averaged exposure of a vibrating surface: intensity follows
  J0(k a)^2 where a is the local vibration amplitude and k the
  interferometric sensitivity (4 pi / lambda for normal illumination and
  observation), so nodal lines render brightest;
* stroboscopic double exposure: the wrapped phase of k times the
  displacement difference between two strobe instants of the drive cycle.

Unwrapping is deliberately one-dimensional along closed circles (the
downstream pipeline samples circles anyway); no 2-D unwrap is attempted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import j0, jn_zeros

from .errors import DomainError, UnwrapError
from .grids import (DisplacementField, RasterGrid, RingGrid, bilinear_sample,
                    require_same_grid)


@dataclass(frozen=True)
class OpticalConfig:
    """Laser wavelength, interferometric sensitivity and strobe settings."""

    wavelength: float = 532e-9
    sensitivity_factor: float | None = None   # rad/m, defaults to 4 pi / lambda
    strobe_duty: float = 0.05
    amplitude_clip: float = 2e-6               # m, guards the J0 argument
    noise_sigma: float = 0.0                   # rad, additive phase noise

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")
        if self.sensitivity_factor is None:
            object.__setattr__(self, "sensitivity_factor",
                               4.0 * math.pi / self.wavelength)
        if self.sensitivity_factor <= 0.0:
            raise DomainError(
                f"sensitivity_factor must be positive, got {self.sensitivity_factor}")
        if not 0.0 < self.strobe_duty <= 0.2:
            raise DomainError(
                f"strobe_duty must be in (0, 0.2], got {self.strobe_duty}")
        if self.amplitude_clip <= 0.0:
            raise DomainError(
                f"amplitude_clip must be positive, got {self.amplitude_clip}")
        if self.noise_sigma < 0.0:
            raise DomainError(
                f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class FringeImage:
    """Time-averaged fringe intensity in [0, 1]; off-annulus pixels masked."""

    grid: object
    intensity: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.intensity.shape != self.grid.shape:
            raise DomainError("intensity shape does not match grid")
        valid = self.intensity[self.grid.mask]
        if valid.size and (valid.min() < 0.0 or valid.max() > 1.0):
            raise DomainError("fringe intensity outside [0, 1]")

    @property
    def mask(self) -> np.ndarray:
        return self.grid.mask

    @property
    def width(self) -> int:
        return self.grid.shape[-1]

    @property
    def height(self) -> int:
        return self.grid.shape[0] if len(self.grid.shape) == 2 else 1


@dataclass(frozen=True)
class PhaseMap:
    """Wrapped stroboscopic phase in (-pi, pi] with its strobe instants."""

    grid: object
    phase: np.ndarray
    strobe_phase_a: float      # degrees of the electrical cycle
    strobe_phase_b: float

    def __post_init__(self):
        if self.phase.shape != self.grid.shape:
            raise DomainError("phase shape does not match grid")
        valid = self.phase[self.grid.mask]
        if valid.size and (valid.min() <= -math.pi or valid.max() > math.pi):
            raise DomainError("wrapped phase outside (-pi, pi]")

    @property
    def mask(self) -> np.ndarray:
        return self.grid.mask


def wrap_phase(x):
    """Map radians into the principal interval (-pi, pi]."""
    return np.mod(np.asarray(x, dtype=float) - np.pi, -2.0 * np.pi) + np.pi


def time_averaged(amplitude_field: DisplacementField,
                  optics: OpticalConfig) -> FringeImage:
    """Render the J0^2 fringe image of a vibration-envelope field.

    Zero amplitude maps to intensity 1.0 (the bright nodal lines).  The
    amplitude enters through |a|, so a sign flip of the field changes
    nothing.  Amplitudes beyond ``optics.amplitude_clip`` are clipped with
    a warning instead of erroring.
    """
    a = np.abs(amplitude_field.values)
    mask = amplitude_field.mask
    if np.any(a[mask] > optics.amplitude_clip):
        warnings.warn(
            f"amplitudes above {optics.amplitude_clip:g} m clipped in "
            "time-averaged rendering", RuntimeWarning, stacklevel=2)
        a = np.minimum(a, optics.amplitude_clip)
    intensity = np.zeros(amplitude_field.values.shape)
    intensity[mask] = j0(optics.sensitivity_factor * a[mask]) ** 2
    return FringeImage(amplitude_field.grid, intensity,
                       label=f"time-averaged {amplitude_field.label}".strip())


def first_dark_fringe_amplitude(optics: OpticalConfig) -> float:
    """Vibration amplitude of the innermost dark time-averaged fringe.

    The first zero of J0 divided by the sensitivity factor; 101.8 nm for
    532 nm in the default reflection geometry.
    """
    return float(jn_zeros(0, 1)[0]) / optics.sensitivity_factor


def stroboscopic(field_a: DisplacementField, field_b: DisplacementField,
                 optics: OpticalConfig, strobe_phases=(0.0, 0.0),
                 rng: np.random.Generator | None = None) -> PhaseMap:
    """Wrapped phase of the displacement difference between two strobes.

    Swapping the two fields negates the phase (mod 2 pi).  With
    ``optics.noise_sigma`` > 0 an additive Gaussian phase noise is drawn
    from ``rng`` before wrapping (pass a seeded generator for
    reproducibility; required when the noise model is on).
    """
    require_same_grid(field_a.grid, field_b.grid, "stroboscopic")
    raw = optics.sensitivity_factor * (field_b.values - field_a.values)
    if optics.noise_sigma > 0.0:
        if rng is None:
            raise DomainError(
                "noise_sigma > 0 needs an explicit seeded rng for "
                "reproducible output")
        raw = raw + rng.normal(0.0, optics.noise_sigma, size=raw.shape)
    phase = np.zeros(raw.shape)
    mask = field_a.mask
    phase[mask] = wrap_phase(raw[mask])
    return PhaseMap(field_a.grid, phase,
                    strobe_phase_a=float(strobe_phases[0]),
                    strobe_phase_b=float(strobe_phases[1]))


def _unwrap_closed(phases: np.ndarray, where: str) -> np.ndarray:
    """Cumulative 1-D unwrap around a closed uniform circle.

    The wrapped sample-to-sample differences must sum to zero winding
    around the loop (a single-valued displacement field guarantees it);
    a nonzero winding means the sampling is too coarse or the data are
    inconsistent, and is reported rather than silently absorbed.
    """
    diffs = wrap_phase(np.diff(phases, append=phases[:1]))
    winding = diffs.sum() / (2.0 * math.pi)
    if abs(winding - round(winding)) > 1e-6:
        raise UnwrapError(
            f"non-integer winding {winding:.3e} on {where}; wrapped input "
            "is not self-consistent")
    if round(winding) != 0:
        raise UnwrapError(
            f"closure failure on {where}: winding number {int(round(winding))} "
            "(sampling too coarse for the phase gradient)")
    u = np.empty_like(phases)
    u[0] = phases[0]
    u[1:] = phases[0] + np.cumsum(diffs[:-1])
    # the 2 pi branch of the whole circle is unobservable; take the one
    # with the smallest mean magnitude (pistonless convention)
    u -= 2.0 * math.pi * round(float(u.mean()) / (2.0 * math.pi))
    return u


def unwrap_to_displacement(pmap: PhaseMap, optics: OpticalConfig,
                           radius: float | None = None,
                           count: int | None = None) -> DisplacementField:
    """Displacement difference along a closed circle of the phase map.

    Ring-grid maps unwrap in place; raster maps need a ``radius`` and are
    sampled as interpolated phasors (interpolating cos/sin rather than
    the wrapped angle keeps branch cuts out of the interpolation).
    Returns the difference field in meters on a ring grid.
    """
    grid = pmap.grid
    if isinstance(grid, RingGrid):
        u = _unwrap_closed(pmap.phase, f"ring r={grid.radius:.6g} m")
        return DisplacementField(grid, u / optics.sensitivity_factor,
                                 time=0.0, label="unwrapped strobe difference")
    if not isinstance(grid, RasterGrid):
        raise DomainError(f"unsupported grid kind {type(grid).__name__}")
    if radius is None:
        raise DomainError("raster phase maps need an explicit circle radius")
    if not grid.inner_radius <= radius <= grid.outer_radius:
        raise DomainError(
            f"circle radius {radius} outside annulus "
            f"[{grid.inner_radius}, {grid.outer_radius}]")
    count = count or 360
    ring = RingGrid(radius=radius, count=count)
    coss = bilinear_sample(grid, np.cos(pmap.phase), ring.r, ring.theta)
    sins = bilinear_sample(grid, np.sin(pmap.phase), ring.r, ring.theta)
    sampled = np.arctan2(sins, coss)
    sampled[sampled <= -math.pi] = math.pi
    u = _unwrap_closed(sampled, f"circle r={radius:.6g} m")
    return DisplacementField(ring, u / optics.sensitivity_factor,
                             time=0.0, label="unwrapped strobe difference")
