"""Truncated oscillator spaces and photon-level measurement families.

A FockSpace carries the dense ladder/number/quadrature matrices on levels
0..n_max (m = omega = 1 scalings: x = (a + a^dag)/sqrt(2)).  On top of it:
exact photon-counting measurement operators |0><n|, a coherent-outcome
family discretized on a quadrature grid in the complex-amplitude plane, and
an Ehrenfest-relation residual check for harmonic dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .measurement import KrausSet
from .states import StateVector

_SUPPORT_TOL = 1e-6


class TruncationError(ValueError):
    """A request would push significant amplitude against the truncation edge."""


class FockSpace:
    """Dense operators on the truncated number basis 0..n_max."""

    def __init__(self, n_max: int = 20) -> None:
        n_max = int(n_max)
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        self.n_max = n_max
        d = n_max + 1
        ladder = np.diag(np.sqrt(np.arange(1.0, d)), k=1)
        self.annihilate = ladder
        self.create = ladder.conj().T.copy()
        self.number = np.diag(np.arange(d, dtype=float)).astype(complex)
        self.position = (self.annihilate + self.create) / math.sqrt(2.0)
        self.momentum = 1j * (self.create - self.annihilate) / math.sqrt(2.0)
        for m in (self.annihilate, self.create, self.number, self.position, self.momentum):
            m.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"FockSpace(n_max={self.n_max})"


def _coherent_amplitudes(space: FockSpace, alpha: complex) -> np.ndarray:
    """Exact coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!) on levels 0..n_max."""
    amps = np.empty(space.dim, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, space.dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent_state(space: FockSpace, alpha: complex) -> StateVector:
    """Truncated coherent state, renormalized on the kept levels.

    Requires |alpha|^2 <= n_max / 4 so the discarded tail is negligible;
    beyond that the truncated vector no longer represents the intended state
    and a TruncationError is raised.
    """
    if abs(alpha) ** 2 > space.n_max / 4.0:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha) ** 2:g} exceeds n_max/4 = {space.n_max / 4:g}"
        )
    amps = _coherent_amplitudes(space, alpha)
    return StateVector((space.dim,), amps / np.linalg.norm(amps))


def photon_counting_set(space: FockSpace) -> KrausSet:
    """Measurement family M_n = |0><n|: reads out n and leaves the vacuum.

    Completeness is exact on the truncated space (sum M^dag M = I to the
    last bit), and every selective update destroys the detected excitation.
    """
    d = space.dim
    ops = []
    for n in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[0, n] = 1.0
        ops.append(m)
    return KrausSet(ops, labels=list(range(d)), completeness_tol=1e-14)


@dataclass(frozen=True)
class CoherentGrid:
    """Quadrature nodes in the complex-amplitude plane.

    ``points`` are the nodes alpha_j, ``weights`` the positive area elements
    dA_j, ``radius`` the declared coverage |alpha| <= R of the rule.
    """

    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    radius: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pts.size != w.size or pts.size == 0:
            raise ValueError("points and weights must be nonempty and match")
        if np.any(w <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if self.radius <= 0.0:
            raise ValueError("declared radius must be positive")
        pts.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.points.size


def polar_grid(radius: float, n_radial: int = 64, n_angular: int = 64) -> CoherentGrid:
    """Polar quadrature over the disc |alpha| <= radius.

    Gauss-Legendre nodes in the squared radius u = |alpha|^2 (so the area
    element dA = du dphi / 2 is handled exactly) and a uniform angle grid,
    which integrates every phase harmonic e^{i k phi} with |k| < n_angular
    exactly.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if n_radial < 1 or n_angular < 1:
        raise ValueError("need at least one node in each direction")
    nodes, wts = np.polynomial.legendre.leggauss(n_radial)
    u = 0.5 * (nodes + 1.0) * radius ** 2
    w_u = 0.5 * wts * radius ** 2
    phi = 2.0 * math.pi * np.arange(n_angular) / n_angular
    w_phi = 2.0 * math.pi / n_angular
    rr = np.sqrt(u)
    points = np.multiply.outer(rr, np.exp(1j * phi)).reshape(-1)
    weights = np.multiply.outer(0.5 * w_u, np.full(n_angular, w_phi)).reshape(-1)
    return CoherentGrid(points, weights, float(radius))


def default_coherent_grid(space: FockSpace) -> CoherentGrid:
    """Default 64 x 64 polar rule with radius ceil(2.5 sqrt(n_max))."""
    return polar_grid(float(math.ceil(2.5 * math.sqrt(space.n_max))), 64, 64)


def coherent_measurement_set(space: FockSpace, grid: CoherentGrid | None = None) -> KrausSet:
    """Coherent-outcome measurement family on a quadrature grid.

    Each node alpha contributes M_alpha = sqrt(dA/pi) |alpha~><P alpha| with
    |alpha~> the normalized truncated coherent state and <P alpha| the exact
    coherent amplitudes restricted to the space.  The POVM weights then
    quadrature the exact resolution of identity entry by entry, so the
    completeness deviation is pure quadrature error; it is reported by
    ``validate_kraus`` rather than enforced here.  Post-states of outcome
    alpha are the coherent projector |alpha~><alpha~|.

    The grid must declare coverage radius >= 2 sqrt(n_max).
    """
    if grid is None:
        grid = default_coherent_grid(space)
    r_min = 2.0 * math.sqrt(space.n_max)
    if grid.radius < r_min:
        raise ValueError(
            f"grid radius {grid.radius:g} too small; need >= 2 sqrt(n_max) = {r_min:g}"
        )
    ops = []
    for alpha, area in zip(grid.points, grid.weights):
        bra = _coherent_amplitudes(space, alpha)
        ket = bra / np.linalg.norm(bra)
        ops.append(math.sqrt(area / math.pi) * np.outer(ket, bra.conj()))
    return KrausSet(ops, labels=list(range(len(ops))), completeness_tol=None)


@dataclass(frozen=True)
class EhrenfestReport:
    """Residual audit of d<p>/dt = -m omega^2 <x> on a uniform grid."""

    max_residual: float
    dt: float
    t: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)


def ehrenfest_check(
    space: FockSpace, initial: StateVector, omega: float, mass: float, t_grid
) -> EhrenfestReport:
    """Check the momentum Ehrenfest relation for harmonic dynamics.

    The state is evolved densely under H = p^2/(2m) + m omega^2 x^2 / 2 and
    the centered difference of <p> is compared with -m omega^2 <x> at every
    interior grid point; the report carries the worst residual.  The grid
    must be uniform with at least three points.  The initial state must keep
    its population below n_max/2 (tail mass above it under 1e-6), otherwise
    truncation artifacts would masquerade as physics.
    """
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if t_grid.size < 3:
        raise ValueError("need at least three grid points")
    steps = np.diff(t_grid)
    dt = float(steps[0])
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
        raise ValueError("time grid must be uniform and increasing")
    if initial.dim != space.dim:
        raise ValueError(f"state dim {initial.dim} != space dim {space.dim}")
    cut = space.n_max // 2
    tail = float(np.sum(np.abs(initial.amps[cut + 1 :]) ** 2))
    if tail > _SUPPORT_TOL:
        raise TruncationError(
            f"initial state carries {tail:g} population above level {cut}; "
            "enlarge the space before trusting the dynamics"
        )
    ham = space.momentum @ space.momentum / (2.0 * mass) \
        + 0.5 * mass * omega ** 2 * (space.position @ space.position)
    amps = oracle.evolve_dense_grid(ham, initial, t_grid)
    exp_x = np.einsum("ti,ij,tj->t", amps.conj(), space.position, amps).real
    exp_p = np.einsum("ti,ij,tj->t", amps.conj(), space.momentum, amps).real
    dpdt = (exp_p[2:] - exp_p[:-2]) / (2.0 * dt)
    residuals = np.abs(dpdt + mass * omega ** 2 * exp_x[1:-1])
    residuals.flags.writeable = False
    interior = t_grid[1:-1].copy()
    interior.flags.writeable = False
    return EhrenfestReport(
        max_residual=float(np.max(residuals)),
        dt=dt,
        t=interior,
        residuals=residuals,
    )
