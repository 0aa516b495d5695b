"""Pointer-basis diagnostics.

Three ways of seeing why the monitored basis is special: the tripartite
branch structure system+pointer+environment, the decay of system-pointer
correlations when the readout basis is rotated away from the pointer basis,
and a predictability sieve that ranks candidate pointer bases by how pure an
initially-aligned pointer stays.  A separate many-outcome apparatus model
handles pointer dephasing through a user-supplied environment-overlap kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import oracle
from .spin_bath import SpinBathConfig, environment_branch
from .states import (
    BasisSpec,
    DensityMatrix,
    DimensionCapError,
    StateVector,
    purity,
    reduced_density,
)


@dataclass(frozen=True)
class TriConfig:
    """System amplitudes plus the pointer-environment coupling.

    ``a``/``b`` weight the two measurement branches; ``bath`` supplies the
    environment spins and couplings that dephase the pointer (its own qubit
    amplitudes are not consulted here).
    """

    a: complex
    b: complex
    bath: SpinBathConfig

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")
        if not isinstance(self.bath, SpinBathConfig):
            raise TypeError("bath must be a SpinBathConfig")

    @property
    def n_spins(self) -> int:
        return self.bath.n_spins


def tridecompose_state(cfg: TriConfig, t: float) -> StateVector:
    """Joint system+pointer+environment state at time t.

    The state keeps the branch form
    a |up, up, E_up(t)> + b |down, down, E_down(t)>: system and pointer stay
    perfectly correlated while the environment branches drift apart.  Dims
    are (2, 2) + (2,)*N; N > 13 exceeds the dense cap.
    """
    n = cfg.n_spins
    if n > 13:
        raise DimensionCapError(
            f"tripartite state with {n} bath spins exceeds the dense cap"
        )
    env_dim = 2 ** n
    up = environment_branch(cfg.bath, t, "up")
    down = environment_branch(cfg.bath, t, "down")
    amps = np.zeros(4 * env_dim, dtype=complex)
    amps[:env_dim] = cfg.a * up.amps          # |up, up, ...>
    amps[3 * env_dim :] = cfg.b * down.amps   # |down, down, ...>
    return StateVector((2, 2) + (2,) * n, amps)


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def basis_correlation_decay(cfg: TriConfig, theta: float, t_grid) -> np.ndarray:
    """System-pointer correlation strength in a rotated readout basis.

    Both the system and pointer readout bases are rotated by ``theta``
    (radians, in [0, pi/2]) away from the pointer basis.  At each time the
    joint state is built explicitly, the environment is traced out, and the
    correlation is scored from the diagonal of rho_SA in the rotated product
    basis as

        C = | sqrt(P00 P11) - sqrt(P01 P10) |,

    the contrast between the aligned and the anti-aligned branch pairing.
    theta = 0 reproduces the preserved pointer correlation |a b| at every
    time; rotated bases lose correlation as the branch overlap decays.
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    u2 = np.kron(_rotation(theta), _rotation(theta))
    out = np.empty(t_grid.size)
    for j, t in enumerate(t_grid):
        rho_sa = reduced_density(tridecompose_state(cfg, t), keep=(0, 1))
        diag = np.clip(np.real(np.diag(u2.T @ rho_sa.mat @ u2)), 0.0, None)
        aligned = math.sqrt(diag[0] * diag[3])
        crossed = math.sqrt(diag[1] * diag[2])
        out[j] = abs(aligned - crossed)
    return out


def predictability_sieve(
    candidates: Sequence[BasisSpec], cfg: TriConfig, t_grid
) -> list[tuple[BasisSpec, float]]:
    """Rank candidate pointer bases by how predictable they stay.

    For each candidate basis, the pointer alone is initialized in each basis
    column (the system is left out), coupled to the environment of ``cfg``,
    and evolved exactly under the diagonal dephasing Hamiltonian; the score
    is the time-averaged purity of the reduced pointer state, averaged over
    the columns.  A basis of conserved states scores exactly 1; nothing can
    score higher.

    Returns the candidates sorted by descending score, ties keeping input
    order.
    """
    candidates = list(candidates)
    if len(candidates) < 2:
        raise ValueError("the sieve needs at least two candidate bases")
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if t_grid.size == 0:
        raise ValueError("empty time grid")
    bath = cfg.bath
    n = bath.n_spins
    if 2 ** (n + 1) > 2 ** 15:
        raise DimensionCapError(f"sieve with {n} bath spins exceeds the dense cap")
    ham = oracle.dephasing_hamiltonian(bath.g)
    env = np.ones(1, dtype=complex)
    for alpha_k, beta_k in zip(bath.alpha, bath.beta):
        env = np.kron(env, np.array([alpha_k, beta_k]))
    half = env.size
    scored = []
    for basis in candidates:
        if basis.dim != 2:
            raise ValueError("sieve candidates must be single-qubit bases")
        col_scores = []
        for col in range(2):
            amps0 = np.kron(basis.matrix[:, col], env)
            mean_purity = 0.0
            block = 256
            for lo in range(0, t_grid.size, block):
                ts = t_grid[lo : lo + block]
                phases = np.exp(-1j * np.outer(ts, ham.energies))
                amps_t = (phases * amps0).reshape(ts.size, 2, half)
                gram = np.einsum("bij,bkj->bik", amps_t, amps_t.conj())
                mean_purity += float(np.sum(np.abs(gram) ** 2))
            col_scores.append(mean_purity / t_grid.size)
        scored.append(float(np.mean(col_scores)))
    order = sorted(range(len(candidates)), key=lambda i: -scored[i])
    return [(candidates[i], scored[i]) for i in order]


@dataclass(frozen=True)
class ApparatusModel:
    """Many-outcome pointer dephased by an environment-overlap kernel.

    The pointer space has dimension n+1: index 0 is the ready state (empty
    after premeasurement), indices 1..n carry branch amplitudes
    ``amplitudes`` with sum |c_i|^2 = 1.  ``kappa(i, j, t, mix)`` must return
    the environment-branch overlap <chi_j|chi_i> at time t for mixture
    component ``mix``: kappa(i, i, t, mix) = 1, |kappa| <= 1, and
    kappa(j, i, ...) = conj(kappa(i, j, ...)).  Optional ``weights`` mix
    several environment components convexly.
    """

    amplitudes: np.ndarray
    kappa: Callable[[int, int, float, int], complex]
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if c.size < 1:
            raise ValueError("need at least one branch amplitude")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"sum |c_i|^2 = {norm!r}, expected 1")
        c.flags.writeable = False
        object.__setattr__(self, "amplitudes", c)
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).reshape(-1)
            if np.any(w < 0):
                raise ValueError("mixture weights must be nonnegative")
            if abs(float(w.sum()) - 1.0) > 1e-12:
                raise ValueError("mixture weights must sum to 1")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def n_outcomes(self) -> int:
        return self.amplitudes.size

    @property
    def dim(self) -> int:
        return self.amplitudes.size + 1


def apparatus_reduced_state(model: ApparatusModel, t: float) -> DensityMatrix:
    """Pointer state at time t under the overlap kernel.

    Entry (i, j) for branch indices i != j is c_i conj(c_j) times the
    (mixture-averaged) kernel value; diagonals stay |c_i|^2 forever.  The
    ready row and column (index 0) are identically zero.
    """
    n = model.n_outcomes
    c = model.amplitudes
    weights = model.weights if model.weights is not None else np.array([1.0])
    mat = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n):
        mat[i + 1, i + 1] = abs(c[i]) ** 2
    for i in range(n):
        for j in range(i + 1, n):
            avg = 0.0 + 0.0j
            for mix, w in enumerate(weights):
                kij = complex(model.kappa(i, j, t, mix))
                kji = complex(model.kappa(j, i, t, mix))
                if abs(kji - np.conj(kij)) > 1e-9:
                    raise ValueError(
                        f"kappa is not Hermitian at (i={i}, j={j}, t={t}, mix={mix})"
                    )
                if abs(kij) > 1.0 + 1e-9:
                    raise ValueError(f"|kappa| > 1 at (i={i}, j={j}, t={t}, mix={mix})")
                avg += w * kij
            mat[i + 1, j + 1] = c[i] * np.conj(c[j]) * avg
            mat[j + 1, i + 1] = np.conj(mat[i + 1, j + 1])
    return DensityMatrix((n + 1,), mat)
