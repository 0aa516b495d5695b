import numpy as np
import pytest
from scipy.linalg import expm

from decolab.oracle import (
    DiagonalHamiltonian,
    UndefinedRatioError,
    dephasing_hamiltonian,
    evolve_dense,
    evolve_dense_grid,
    evolve_diagonal,
    oracle_r,
)
from decolab.spin_bath import SpinBathConfig, decoherence_factor
from decolab.states import DimensionCapError, StateVector

rng = np.random.default_rng(2002)


def random_state(dim):
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector((dim,), amps / np.linalg.norm(amps))


def random_hermitian(dim):
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2


# ------------------------------------------------------------ diagonal


def test_evolve_diagonal_zero_time_is_identity():
    ham = DiagonalHamiltonian((2, 2), [0.3, -0.1, 0.7, 0.0])
    psi = random_state(4)
    psi4 = StateVector((2, 2), psi.amps)
    np.testing.assert_allclose(evolve_diagonal(ham, psi4, 0.0).amps, psi4.amps)


def test_evolve_diagonal_composes_as_semigroup():
    ham = DiagonalHamiltonian((4,), rng.normal(size=4))
    psi = random_state(4)
    s, t = 0.7, 1.9
    two_step = evolve_diagonal(ham, evolve_diagonal(ham, psi, s), t)
    one_step = evolve_diagonal(ham, psi, s + t)
    np.testing.assert_allclose(two_step.amps, one_step.amps, atol=1e-12)


def test_evolve_diagonal_preserves_norm():
    ham = DiagonalHamiltonian((8,), rng.normal(size=8))
    for _ in range(10):
        psi = random_state(8)
        out = evolve_diagonal(ham, psi, float(rng.uniform(0, 50)))
        assert abs(np.linalg.norm(out.amps) - 1.0) < 1e-13


def test_diagonal_hamiltonian_validation():
    with pytest.raises(ValueError):
        DiagonalHamiltonian((2,), [1.0, 2.0, 3.0])
    with pytest.raises(DimensionCapError):
        DiagonalHamiltonian((2,) * 16, np.zeros(2 ** 16))


# ------------------------------------------------------------ dense


def test_evolve_dense_zero_hamiltonian_is_identity():
    psi = random_state(5)
    out = evolve_dense(np.zeros((5, 5)), psi, 3.7)
    np.testing.assert_allclose(out.amps, psi.amps, atol=1e-13)


def test_evolve_dense_matches_diagonal_on_diagonal_input():
    energies = rng.normal(size=6)
    ham = DiagonalHamiltonian((6,), energies)
    psi = random_state(6)
    t = 2.3
    lhs = evolve_dense(np.diag(energies), psi, t)
    rhs = evolve_diagonal(ham, psi, t)
    np.testing.assert_allclose(lhs.amps, rhs.amps, atol=1e-12)


def test_evolve_dense_matches_matrix_exponential():
    for dim in (2, 5, 9):
        h = random_hermitian(dim)
        psi = random_state(dim)
        t = float(rng.uniform(0.1, 4.0))
        want = expm(-1j * h * t) @ psi.amps
        got = evolve_dense(h, psi, t).amps
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_evolve_dense_grid_matches_pointwise():
    h = random_hermitian(7)
    psi = random_state(7)
    t_grid = np.linspace(0.0, 5.0, 11)
    rows = evolve_dense_grid(h, psi, t_grid)
    assert rows.shape == (11, 7)
    for i, t in enumerate(t_grid):
        np.testing.assert_allclose(rows[i], evolve_dense(h, psi, t).amps, atol=1e-11)


def test_evolve_dense_rejects_non_hermitian():
    with pytest.raises(ValueError):
        evolve_dense(np.array([[0.0, 1.0], [0.0, 0.0]]), random_state(2), 1.0)


# ------------------------------------------------------------ dephasing


def test_dephasing_hamiltonian_single_spin_energies():
    # E(s0, s1) = -s0 g s1: (up,up) -> -g, (up,down) -> +g and mirrored
    g = 0.8
    ham = dephasing_hamiltonian([g])
    np.testing.assert_allclose(ham.energies, [-g, g, g, -g], atol=1e-15)


def test_dephasing_single_spin_phases_by_hand():
    # aligned qubit/spin amplitudes rotate as e^{+igt}, anti-aligned e^{-igt}
    g, t = 0.6, 1.7
    a, b = 0.6, 0.8
    alpha, beta = 0.28, 0.96
    psi0 = StateVector((2, 2), [a * alpha, a * beta, b * alpha, b * beta])
    out = evolve_diagonal(dephasing_hamiltonian([g]), psi0, t)
    ph = np.exp(1j * g * t)
    want = [a * alpha * ph, a * beta / ph, b * alpha / ph, b * beta * ph]
    np.testing.assert_allclose(out.amps, want, atol=1e-14)


def test_dephasing_hamiltonian_matches_bitwise_reference():
    # independent sign bookkeeping: loop over basis indices and bits
    g = rng.uniform(0.2, 1.0, size=4)
    ham = dephasing_hamiltonian(g)
    for idx in range(2 ** 5):
        bits = [(idx >> (4 - k)) & 1 for k in range(5)]
        s = [1 - 2 * bit for bit in bits]
        want = -s[0] * sum(gk * sk for gk, sk in zip(g, s[1:]))
        assert abs(ham.energies[idx] - want) < 1e-12


# ------------------------------------------------------------ oracle_r


def test_oracle_r_at_zero_time_is_one():
    cfg = SpinBathConfig.random(5, rng)
    assert abs(oracle_r(cfg, 0.0) - 1.0) < 1e-13


def test_oracle_r_eigenstate_environment_keeps_modulus_one():
    n = 5
    cfg = SpinBathConfig(0.6, 0.8, np.linspace(0.3, 1.1, n), np.ones(n), np.zeros(n))
    for t in rng.uniform(0.0, 30.0, 8):
        assert abs(abs(oracle_r(cfg, float(t))) - 1.0) < 1e-12


def test_oracle_r_undefined_for_vanishing_branch():
    cfg = SpinBathConfig(1.0, 0.0, [0.5], [1 / np.sqrt(2)], [1 / np.sqrt(2)])
    with pytest.raises(UndefinedRatioError):
        oracle_r(cfg, 1.0)


def test_oracle_r_agrees_with_closed_form():
    for _ in range(15):
        n = int(rng.integers(1, 9))
        cfg = SpinBathConfig.random(n, rng)
        if abs(cfg.a) < 1e-3 or abs(cfg.b) < 1e-3:
            continue
        for t in rng.uniform(0.0, 20.0, 4):
            dev = abs(decoherence_factor(cfg, float(t)) - oracle_r(cfg, float(t)))
            assert dev < 1e-10


def test_oracle_r_respects_spin_cap():
    cfg = SpinBathConfig.balanced(np.ones(15))
    with pytest.raises(DimensionCapError):
        oracle_r(cfg, 1.0)
