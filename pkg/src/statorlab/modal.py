"""Out-of-plane eigenmodes of the effective annular plate.

The plate operator is separated circumferentially: for each harmonic ``n``
the transverse displacement is ``w(r, theta) = W(r) * cos(n theta)`` (or
``sin``), which reduces the thin-plate eigenproblem to a 1-D generalized
symmetric problem in the radial profile ``W``.  The radial discretization
uses C1 cubic Hermite elements (nodal unknowns ``W`` and ``dW/dr``), so the
fourth-order bending operator is handled conformingly.

Per harmonic, with ``L W = W'' + W'/r - n^2 W / r^2``, the bilinear forms
are

    k(W, V) = c_n * Int D(r) [ (L W)(L V)
              - (1 - nu) (W'' (V'/r - n^2 V/r^2) + V'' (W'/r - n^2 W/r^2))
              + 2 (1 - nu) n^2 (W'/r - W/r^2)(V'/r - V/r^2) ] r dr
    m(W, V) = c_n * Int mu(r) W V r dr

with ``c_n = 2 pi`` for ``n = 0`` and ``pi`` otherwise.  The center fixture
clamps the plate for ``r <= fixture_radius`` (W = W' = 0); all other edges
are free (natural boundary conditions of the form above).
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import LinAlgError, cholesky, eigh, solve

from .errors import DiscretizationError, DomainError, NumericalError
from .geometry import EffectivePlate

EIG_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Discretization:
    """Radial mesh resolution and element quadrature order."""

    radial_nodes: int = 64
    quadrature_order: int = 6

    def __post_init__(self):
        if self.radial_nodes < 8:
            raise DiscretizationError(
                f"radial_nodes must be >= 8, got {self.radial_nodes}")
        if self.quadrature_order < 4:
            raise DiscretizationError(
                f"quadrature_order must be >= 4, got {self.quadrature_order}")


def harmonic_weight(n: int) -> float:
    """Angular integral of cos^2 / sin^2: 2 pi for n = 0, pi otherwise."""
    return 2.0 * np.pi if n == 0 else np.pi


def _active_mesh(plate: EffectivePlate, disc: Discretization) -> np.ndarray:
    """Node radii on the moving domain [fixture_radius, outer_radius].

    Region breakpoints (e.g. the tooth band edge) are forced onto the mesh
    so each element sees constant D and mu.
    """
    a, b = plate.fixture_radius, plate.outer_radius
    forced = [a] + [bp for bp in plate.breakpoints if a < bp < b] + [b]
    spans = np.diff(forced)
    # distribute nodes proportionally to span length, >= 2 elements per span
    counts = np.maximum(2, np.rint(disc.radial_nodes * spans / (b - a)).astype(int))
    while counts.sum() > disc.radial_nodes - 1 and np.any(counts > 2):
        counts[np.argmax(counts)] -= 1
    while counts.sum() < disc.radial_nodes - 1:
        counts[np.argmin(counts / spans * spans.mean())] += 1
    pieces = [np.linspace(forced[i], forced[i + 1], counts[i] + 1)[:-1]
              for i in range(len(spans))]
    return np.concatenate(pieces + [[b]])


def _hermite(xi: np.ndarray, h: float):
    """Cubic Hermite shape functions on one element, derivatives wrt r."""
    xi2, xi3 = xi * xi, xi * xi * xi
    N = np.stack([1.0 - 3.0 * xi2 + 2.0 * xi3,
                  h * (xi - 2.0 * xi2 + xi3),
                  3.0 * xi2 - 2.0 * xi3,
                  h * (xi3 - xi2)])
    dN = np.stack([(6.0 * xi2 - 6.0 * xi) / h,
                   1.0 - 4.0 * xi + 3.0 * xi2,
                   (6.0 * xi - 6.0 * xi2) / h,
                   3.0 * xi2 - 2.0 * xi])
    d2N = np.stack([(12.0 * xi - 6.0) / h**2,
                    (6.0 * xi - 4.0) / h,
                    (6.0 - 12.0 * xi) / h**2,
                    (6.0 * xi - 2.0) / h])
    return N, dN, d2N


def _assemble_full(plate: EffectivePlate, n: int, disc: Discretization):
    """Assemble (K, M, nodes) on the active domain, clamp not yet applied."""
    nodes = _active_mesh(plate, disc)
    ndof = 2 * nodes.size
    K = np.zeros((ndof, ndof))
    M = np.zeros((ndof, ndof))
    xi_q, w_q = np.polynomial.legendre.leggauss(disc.quadrature_order)
    xi_q = 0.5 * (xi_q + 1.0)          # map to [0, 1]
    w_q = 0.5 * w_q
    nu = plate.poisson_ratio
    cn = harmonic_weight(n)

    for e in range(nodes.size - 1):
        r1, r2 = nodes[e], nodes[e + 1]
        h = r2 - r1
        N, dN, d2N = _hermite(xi_q, h)
        r = r1 + xi_q * h
        D = plate.D(0.5 * (r1 + r2)) * np.ones_like(r)
        mu = plate.mu(0.5 * (r1 + r2)) * np.ones_like(r)
        Ke = np.zeros((4, 4))
        Me = np.zeros((4, 4))
        for q in range(xi_q.size):
            rq = r[q]
            lap = d2N[:, q] + dN[:, q] / rq - (n * n) * N[:, q] / rq**2
            curv_r = d2N[:, q]
            curv_t = dN[:, q] / rq - (n * n) * N[:, q] / rq**2
            twist = dN[:, q] / rq - N[:, q] / rq**2
            Ke += (w_q[q] * h * rq * D[q]) * (
                np.outer(lap, lap)
                - (1.0 - nu) * (np.outer(curv_r, curv_t) + np.outer(curv_t, curv_r))
                + 2.0 * (1.0 - nu) * n * n * np.outer(twist, twist))
            Me += (w_q[q] * h * rq * mu[q]) * np.outer(N[:, q], N[:, q])
        sl = slice(2 * e, 2 * e + 4)
        K[sl, sl] += cn * Ke
        M[sl, sl] += cn * Me

    return K, M, nodes


def assemble(plate: EffectivePlate, n: int, disc: Discretization | None = None):
    """Stiffness and mass matrices for harmonic ``n`` with the clamp applied.

    The two DOFs (W, W') of every node with ``r <= fixture_radius`` are
    eliminated; the mesh starts at the fixture edge so that is node 0.

    Returns
    -------
    (K, M) : ndarray, ndarray
        Symmetric stiffness (positive semi-definite) and mass (positive
        definite) matrices on the free DOFs.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"harmonic n must be a non-negative integer, got {n}")
    disc = disc or Discretization()
    K, M, _ = _assemble_full(plate, int(n), disc)
    K, M = K[2:, 2:], M[2:, 2:]
    try:
        cholesky(M)
    except LinAlgError as exc:
        raise DiscretizationError(
            f"singular mass matrix for n={n} at {disc.radial_nodes} nodes") from exc
    return K, M


@dataclass(frozen=True)
class Mode:
    """One mass-normalized eigenmode of the plate.

    The full shape is ``W(r) * cos(n theta)`` or ``W(r) * sin(n theta)``;
    ``radial_nodes``/``radial_values``/``radial_slopes`` tabulate W and
    dW/dr on the solver mesh (the plate is motionless for r below the
    fixture radius).  ``angular_leak`` optionally admixes foreign harmonics
    ``(m, weight)`` into the angular pattern, the hook used to emulate a
    manufacturing-defect asymmetry; it is not produced by the solver.
    """

    n: int
    orientation: str               # "cos" | "sin"
    frequency: float               # Hz
    radial_nodes: np.ndarray       # m, ascending, starts at fixture radius
    radial_values: np.ndarray      # mass-normalized W at the nodes
    radial_slopes: np.ndarray      # dW/dr at the nodes
    boundary: str = "clamped-at-fixture/free-at-edges"
    family: int = 0                # radial family index (0 = lowest)
    angular_leak: tuple = ()
    _spline: CubicHermiteSpline | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.orientation not in ("cos", "sin"):
            raise DomainError(f"orientation must be 'cos' or 'sin', got {self.orientation}")
        if self.frequency <= 0.0:
            raise NumericalError(
                f"non-positive eigenfrequency {self.frequency} Hz retained", harmonic=self.n)
        object.__setattr__(self, "_spline", CubicHermiteSpline(
            self.radial_nodes, self.radial_values, self.radial_slopes))

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.frequency

    @property
    def fixture_radius(self) -> float:
        return float(self.radial_nodes[0])

    @property
    def outer_radius(self) -> float:
        return float(self.radial_nodes[-1])

    def radial(self, r):
        """W(r), zero inside the clamped center."""
        r = np.asarray(r, dtype=float)
        out = np.where(r < self.radial_nodes[0], 0.0, self._spline(np.clip(r, self.radial_nodes[0], None)))
        return out

    def angular(self, theta):
        theta = np.asarray(theta, dtype=float)
        trig = np.cos if self.orientation == "cos" else np.sin
        out = trig(self.n * theta)
        for m, weight in self.angular_leak:
            out = out + weight * trig(m * theta)
        return out

    def radial_moment(self) -> float:
        """Int W(r) r dr over the active annulus (exact per-element Gauss)."""
        xi, w = np.polynomial.legendre.leggauss(3)   # degree-4 integrand
        xi = 0.5 * (xi + 1.0)
        w = 0.5 * w
        total = 0.0
        for e in range(self.radial_nodes.size - 1):
            r1, r2 = self.radial_nodes[e], self.radial_nodes[e + 1]
            h = r2 - r1
            r = r1 + xi * h
            total += h * np.sum(w * self._spline(r) * r)
        return float(total)


def mode_shape_eval(mode: Mode, r, theta):
    """Displacement shape ``W(r) * trig(n theta)`` at ``(r, theta)``.

    ``r`` must lie inside the plate annulus (clamped region included,
    where the shape is zero).
    """
    r_arr = np.asarray(r, dtype=float)
    # inner bound: fixture mesh start is inside the physical annulus, use the
    # plate inner bore when known (motionless web), else the mesh start
    if np.any(r_arr > mode.outer_radius * (1 + 1e-12)) or np.any(r_arr < 0.0):
        raise DomainError(
            f"radius outside the stator annulus (outer {mode.outer_radius:.6g} m)")
    value = mode.radial(r_arr) * mode.angular(theta)
    return value if value.shape else float(value)


@dataclass(frozen=True)
class ModalBasis:
    """Ascending-frequency list of modes plus solve metadata."""

    modes: tuple
    discretization: Discretization
    provenance: str
    default_damping: float = 0.02
    damping_overrides: dict | None = None

    def __post_init__(self):
        freqs = [m.frequency for m in self.modes]
        if any(f2 < f1 - 1e-12 * max(f1, 1.0) for f1, f2 in zip(freqs, freqs[1:])):
            raise NumericalError("basis not sorted by ascending frequency")

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.frequency for m in self.modes])

    def harmonics(self) -> list:
        return sorted({m.n for m in self.modes})

    def select(self, n: int, orientation: str | None = None, family: int = 0) -> list:
        out = [m for m in self.modes if m.n == n and m.family == family]
        if orientation is not None:
            out = [m for m in out if m.orientation == orientation]
        return out

    def frequency_for(self, n: int, family: int = 0) -> float:
        """Lowest-family eigenfrequency of harmonic ``n`` [Hz]."""
        found = self.select(n, family=family)
        if not found:
            raise DomainError(f"harmonic n={n} (family {family}) not present in basis")
        return found[0].frequency

    def damping_for(self, n: int) -> float:
        if self.damping_overrides and n in self.damping_overrides:
            return self.damping_overrides[n]
        return self.default_damping

    def with_damping(self, zeta: float) -> "ModalBasis":
        """Same modes with a uniform damping ratio (overrides dropped)."""
        if not 0.0 <= zeta < 1.0:
            raise DomainError(f"damping ratio must be in [0, 1), got {zeta}")
        return ModalBasis(self.modes, self.discretization, self.provenance,
                          default_damping=zeta, damping_overrides=None)

    def with_pair_defect(self, n: int, frequency_split: float = 0.0,
                         shape_leak: float = 0.0, leak_harmonic: int | None = None
                         ) -> "ModalBasis":
        """Emulate a manufacturing defect on the degenerate pair of harmonic ``n``.

        The sine partner's frequency is raised by the relative
        ``frequency_split`` and, when ``shape_leak`` is nonzero, a foreign
        harmonic (default ``n + 1``) is admixed into both partners' angular
        patterns with that weight.  Purely a perturbation proxy; the
        perturbed shapes are no longer exactly mass-orthonormal.
        """
        if not self.select(n):
            raise DomainError(f"harmonic n={n} not present in basis")
        leak_m = leak_harmonic if leak_harmonic is not None else n + 1
        new = []
        for m in self.modes:
            if m.n == n and m.family == 0:
                changes = {}
                if shape_leak:
                    changes["angular_leak"] = ((leak_m, shape_leak),)
                if m.orientation == "sin" and frequency_split:
                    changes["frequency"] = m.frequency * (1.0 + frequency_split)
                if changes:
                    m = _replace_mode(m, **changes)
            new.append(m)
        new.sort(key=lambda md: (md.frequency, md.n, md.orientation))
        return ModalBasis(tuple(new), self.discretization, self.provenance + "+defect",
                          self.default_damping, self.damping_overrides)


def eig_residual(K: np.ndarray, M: np.ndarray, lam: float, w: np.ndarray) -> float:
    """||K w - lam M w|| / ||K w|| evaluated in extended precision.

    Plain float64 evaluation of ``K @ w`` rounds at ~eps*||K||*||w||, which
    for the lowest modes of a stiff plate swamps the true residual; the
    80-bit accumulation keeps the measurement out of the gate.
    """
    Kl = K.astype(np.longdouble)
    wl = w.astype(np.longdouble)
    Kw = Kl @ wl
    r = Kw - np.longdouble(lam) * (M.astype(np.longdouble) @ wl)
    return float(np.linalg.norm(r) / np.linalg.norm(Kw))


def _polish_eigenpair(K: np.ndarray, M: np.ndarray, lam: float, w: np.ndarray):
    """Refine an eigenpair against the extended-precision residual.

    LAPACK's backward error is relative to ||K||, far above ||K w|| for the
    lowest modes of a stiff plate.  Each pass recomputes the Rayleigh
    quotient and residual in 80-bit arithmetic and applies a float64
    correction solve with a slightly offset shift (the near-singularity of
    K - 0.99 lam M is what makes inverse iteration work, so the
    ill-conditioning warning is suppressed, not a defect).
    """
    Kl = K.astype(np.longdouble)
    Ml = M.astype(np.longdouble)
    best = (eig_residual(K, M, lam, w), lam, w)
    for _ in range(3):
        wl = w.astype(np.longdouble)
        lam = float((wl @ (Kl @ wl)) / (wl @ (Ml @ wl)))
        r = (Kl @ wl - np.longdouble(lam) * (Ml @ wl)).astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                d = solve(K - 0.99 * lam * M, r, assume_a="sym")
            except LinAlgError:
                break
        w = w - d
        w = w / np.sqrt(w @ M @ w)
        score = eig_residual(K, M, lam, w)
        if score < best[0]:
            best = (score, lam, w)
        if score < 0.5 * EIG_RESIDUAL_TOL:
            break
    return best[1], best[2]


def _replace_mode(mode: Mode, **changes) -> Mode:
    fields = dict(n=mode.n, orientation=mode.orientation, frequency=mode.frequency,
                  radial_nodes=mode.radial_nodes, radial_values=mode.radial_values,
                  radial_slopes=mode.radial_slopes, boundary=mode.boundary,
                  family=mode.family, angular_leak=mode.angular_leak)
    fields.update(changes)
    return Mode(**fields)


def solve_modes(plate: EffectivePlate, n_max: int, modes_per_n: int = 1,
                n_min: int = 0, disc: Discretization | None = None) -> ModalBasis:
    """Solve ``K w = omega^2 M w`` per harmonic and build the sorted basis.

    Each harmonic ``n >= 1`` contributes its lowest ``modes_per_n`` radial
    families as cosine/sine pairs sharing one radial solve (so the pair is
    degenerate down to the last bit); ``n = 0`` modes are single.
    """
    if n_max < n_min:
        raise DomainError(f"n_max ({n_max}) must be >= n_min ({n_min})")
    disc = disc or Discretization()
    modes = []
    for n in range(n_min, n_max + 1):
        K, M, nodes = _assemble_full(plate, n, disc)
        Kc, Mc = K[2:, 2:], M[2:, 2:]
        # equilibrate: slope DOFs carry 1/length units, rescale before LAPACK
        s = np.ones(Kc.shape[0])
        s[1::2] = float(np.mean(np.diff(nodes)))
        S = np.outer(s, s)
        try:
            evals, evecs = eigh(Kc * S, Mc * S,
                                subset_by_index=(0, min(modes_per_n, Kc.shape[0]) - 1))
        except LinAlgError as exc:
            raise NumericalError("eigensolver failed to converge",
                                 harmonic=n, radial_nodes=disc.radial_nodes) from exc
        for k in range(evals.size):
            lam = evals[k]
            if lam <= 0.0:
                raise NumericalError(f"non-positive eigenvalue {lam:.3e}",
                                     harmonic=n, radial_nodes=disc.radial_nodes)
            w = s * evecs[:, k]
            w = w / np.sqrt(w @ Mc @ w)
            lam, w = _polish_eigenpair(Kc, Mc, lam, w)
            resid = eig_residual(Kc, Mc, lam, w)
            if resid > EIG_RESIDUAL_TOL:
                raise NumericalError(
                    f"eigenpair residual {resid:.3e} above tolerance (the float64 "
                    f"storage floor rises with mesh density; try fewer radial nodes)",
                    harmonic=n, radial_nodes=disc.radial_nodes)
            # fix the sign convention: the outer rim moves up
            if w[-2] < 0.0:
                w = -w
            vals = np.concatenate([[0.0], w[0::2]])
            slopes = np.concatenate([[0.0], w[1::2]])
            freq = float(np.sqrt(lam) / (2.0 * np.pi))
            common = dict(n=n, frequency=freq, radial_nodes=nodes,
                          radial_values=vals, radial_slopes=slopes, family=k)
            modes.append(Mode(orientation="cos", **common))
            if n >= 1:
                modes.append(Mode(orientation="sin", **common))

    modes.sort(key=lambda m: (m.frequency, m.n, m.orientation))
    damping = plate.material.modal_damping_ratio if plate.material else 0.02
    overrides = dict(plate.material.damping_overrides) if (
        plate.material and plate.material.damping_overrides) else None
    prov = hashlib.sha256(
        (plate.provenance_hash() + repr(disc)).encode()).hexdigest()[:16]
    return ModalBasis(tuple(modes), disc, prov, damping, overrides)


@dataclass(frozen=True)
class CalibrationResult:
    plate: EffectivePlate
    scale: float                 # factor applied to D(r)
    target_n: int
    target_frequency: float
    previous_frequency: float


def calibrate(plate: EffectivePlate, target: tuple, basis: ModalBasis | None = None,
              disc: Discretization | None = None) -> CalibrationResult:
    """Rescale D(r) so the lowest mode of harmonic ``target[0]`` hits ``target[1]`` Hz.

    Frequencies scale as sqrt(D), so the factor is
    ``(f_target / f_current)^2``; every frequency ratio in the basis is
    preserved exactly.
    """
    n, f_target = int(target[0]), float(target[1])
    if f_target <= 0.0:
        raise DomainError(f"target frequency must be positive, got {f_target}")
    if basis is not None:
        f_current = basis.frequency_for(n)
        disc = disc or basis.discretization
    else:
        disc = disc or Discretization()
        probe = solve_modes(plate, n_max=n, n_min=n, modes_per_n=1, disc=disc)
        f_current = probe.frequency_for(n)
    scale = (f_target / f_current) ** 2
    return CalibrationResult(plate=plate.scaled(scale), scale=scale, target_n=n,
                             target_frequency=f_target, previous_frequency=f_current)


def basis_table(basis: ModalBasis) -> list:
    """Rows (n, orientation, frequency_Hz) in deterministic basis order."""
    return [(m.n, m.orientation, m.frequency) for m in basis]


def format_radial_profiles(basis: ModalBasis) -> str:
    """Structured text dump of the radial profiles (binary-free)."""
    lines = [f"# statorlab radial profiles, provenance {basis.provenance}",
             f"# modes {len(basis)}  radial_nodes {basis.discretization.radial_nodes}"]
    for m in basis:
        lines.append(f"mode n={m.n} orientation={m.orientation} family={m.family} "
                     f"frequency_hz={m.frequency!r} boundary={m.boundary}")
        lines.append("r_m W dW_dr")
        for r, v, s in zip(m.radial_nodes, m.radial_values, m.radial_slopes):
            lines.append(f"{r!r} {v!r} {s!r}")
        lines.append("")
    return "\n".join(lines) + "\n"
