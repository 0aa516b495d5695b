"""Brute-force reference propagators.

This module is the package's independent cross-check: it never uses the
closed-form dephasing product.  Everything is computed by explicitly
evolving a joint state vector (diagonal phases or a dense eigendecomposition)
and partial-tracing, so agreement with the analytic layer is a real test and
not a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import DIM_CAP, DimensionCapError, StateVector, reduced_density

#: Dense (eigendecomposition) evolution is capped well below the vector cap.
DENSE_CAP = 2 ** 12

_HERM_ATOL = 1e-10


class UndefinedRatioError(ValueError):
    """Off-diagonal ratio r is undefined when a branch amplitude vanishes."""


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Hamiltonian already diagonal in the computational product basis.

    ``energies[j]`` is the eigenvalue on basis index j; propagation is the
    elementwise phase exp(-i * E_j * t) (hbar = 1).
    """

    dims: tuple[int, ...]
    energies: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        total = int(np.prod(dims))
        if total > DIM_CAP:
            raise DimensionCapError(
                f"diagonal Hamiltonian dimension {total} exceeds cap {DIM_CAP}"
            )
        energies = np.array(self.energies, dtype=float).reshape(-1)
        if energies.size != total:
            raise ValueError(
                f"got {energies.size} energies for total dimension {total}"
            )
        energies.flags.writeable = False
        object.__setattr__(self, "energies", energies)


def evolve_diagonal(ham: DiagonalHamiltonian, psi0: StateVector, t: float) -> StateVector:
    """Evolve ``psi0`` for time t under a diagonal Hamiltonian.

    Returns a new StateVector with amplitudes amps_j * exp(-i E_j t).
    """
    if ham.dims != psi0.dims:
        raise ValueError(f"dimension mismatch: {ham.dims} vs {psi0.dims}")
    return StateVector(psi0.dims, psi0.amps * np.exp(-1j * ham.energies * float(t)))


def _checked_dense(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {h.shape}")
    if h.shape[0] > DENSE_CAP:
        raise DimensionCapError(
            f"dense evolution capped at dimension {DENSE_CAP}, got {h.shape[0]}"
        )
    dev = float(np.max(np.abs(h - h.conj().T)))
    if dev > _HERM_ATOL:
        raise ValueError(f"Hamiltonian is not Hermitian: max deviation {dev:g}")
    return h


def evolve_dense(h, psi0: StateVector, t: float) -> StateVector:
    """Evolve under a dense Hermitian Hamiltonian via eigendecomposition.

    Parameters
    ----------
    h : (d, d) array_like
        Hermitian within 1e-10; d is capped at 2**12.
    psi0 : StateVector
    t : float

    Returns
    -------
    StateVector at time t, exp(-i H t) |psi0>.
    """
    h = _checked_dense(h)
    if h.shape[0] != psi0.dim:
        raise ValueError(f"Hamiltonian dim {h.shape[0]} != state dim {psi0.dim}")
    evals, evecs = np.linalg.eigh(h)
    coeff = evecs.conj().T @ psi0.amps
    amps = evecs @ (np.exp(-1j * evals * float(t)) * coeff)
    return StateVector(psi0.dims, amps)


def evolve_dense_grid(h, psi0: StateVector, t_grid) -> np.ndarray:
    """Amplitudes of exp(-i H t)|psi0> for every t in a grid.

    One eigendecomposition is shared across the whole grid.  Returns a
    (len(t_grid), dim) complex array; rows are unit vectors.
    """
    h = _checked_dense(h)
    if h.shape[0] != psi0.dim:
        raise ValueError(f"Hamiltonian dim {h.shape[0]} != state dim {psi0.dim}")
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    evals, evecs = np.linalg.eigh(h)
    coeff = evecs.conj().T @ psi0.amps
    phases = np.exp(-1j * np.outer(t_grid, evals))
    return (phases * coeff) @ evecs.T


def dephasing_hamiltonian(couplings) -> DiagonalHamiltonian:
    """Diagonal pure-dephasing Hamiltonian for one qubit coupled to N spins.

    In the sigma_z product basis (qubit first, then the spins, index 0 = up)
    the energies are E(s_0, s_1..s_N) = -s_0 * sum_k g_k s_k with s = +/-1.
    The sign convention makes the up-branch amplitude of spin k rotate as
    exp(+i g_k t) under exp(-i H t).
    """
    g = np.asarray(couplings, dtype=float).reshape(-1)
    if g.size < 1:
        raise ValueError("need at least one coupling")
    n = g.size
    if 2 ** (n + 1) > DIM_CAP:
        raise DimensionCapError(
            f"{n} bath spins need dimension {2 ** (n + 1)} > cap {DIM_CAP}"
        )
    dim = 2 ** (n + 1)
    idx = np.arange(dim)[:, None]
    shifts = np.arange(n, -1, -1)[None, :]  # qubit is the leftmost factor
    signs = 1 - 2 * ((idx >> shifts) & 1)  # (dim, n+1), +1 for up
    energies = -(signs[:, 0] * (signs[:, 1:] @ g))
    return DiagonalHamiltonian((2,) * (n + 1), energies)


def oracle_r(cfg, t: float) -> complex:
    """Dephasing factor obtained by explicit joint evolution.

    Builds the full qubit+bath product state from ``cfg`` (a
    :class:`~decolab.spin_bath.SpinBathConfig`), evolves it with
    :func:`evolve_diagonal` under :func:`dephasing_hamiltonian`, partial
    traces down to the qubit, and returns the off-diagonal entry divided by
    a * conj(b).  Limited to N <= 14 bath spins.
    """
    n = cfg.n_spins
    if n > 14:
        raise DimensionCapError(f"oracle limited to 14 bath spins, got {n}")
    a, b = complex(cfg.a), complex(cfg.b)
    if a == 0 or b == 0:
        raise UndefinedRatioError(
            "off-diagonal ratio undefined: a branch amplitude is zero"
        )
    amps = np.array([a, b], dtype=complex)
    for alpha_k, beta_k in zip(cfg.alpha, cfg.beta):
        amps = np.kron(amps, np.array([alpha_k, beta_k], dtype=complex))
    psi0 = StateVector((2,) * (n + 1), amps)
    ham = dephasing_hamiltonian(cfg.g)
    psi_t = evolve_diagonal(ham, psi0, t)
    rho_a = reduced_density(psi_t, keep=0)
    return complex(rho_a.mat[0, 1] / (a * np.conj(b)))
