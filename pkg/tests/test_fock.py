import math

import numpy as np
import pytest

from decolab.fock import (
    FockSpace,
    TruncationError,
    coherent_measurement_set,
    coherent_state,
    default_coherent_grid,
    ehrenfest_check,
    photon_counting_set,
    polar_grid,
)
from decolab.measurement import kraus_update, povm_probabilities, validate_kraus
from decolab.oracle import evolve_dense_grid
from decolab.states import StateVector

rng = np.random.default_rng(6006)


def fock_level(space, n):
    amps = np.zeros(space.dim)
    amps[n] = 1.0
    return StateVector((space.dim,), amps)


# ------------------------------------------------------------ operators


def test_ladder_commutator_away_from_truncation_edge():
    space = FockSpace(10)
    comm = space.annihilate @ space.create - space.create @ space.annihilate
    # [a, a^dag] = 1 except on the top level where the ladder is cut
    want = np.eye(space.dim)
    want[-1, -1] = -space.n_max
    np.testing.assert_allclose(comm, want, atol=1e-12)


def test_number_operator_counts():
    space = FockSpace(7)
    np.testing.assert_allclose(
        space.create @ space.annihilate, space.number, atol=1e-12
    )


def test_quadratures_are_hermitian():
    space = FockSpace(6)
    for quad in (space.position, space.momentum):
        np.testing.assert_allclose(quad, quad.conj().T, atol=1e-14)


def test_operator_matrices_are_frozen():
    space = FockSpace(4)
    with pytest.raises(ValueError):
        space.position[0, 0] = 1.0


# ------------------------------------------------------------ coherent states


def test_coherent_state_poisson_statistics():
    space = FockSpace(30)
    alpha = 1.3 + 0.4j
    psi = coherent_state(space, alpha)
    mu = abs(alpha) ** 2
    for n in range(8):
        want = math.exp(-mu) * mu ** n / math.factorial(n)
        assert abs(abs(psi.amps[n]) ** 2 - want) < 1e-12


def test_coherent_state_is_near_eigenstate_of_annihilation():
    space = FockSpace(40)
    alpha = 1.1 - 0.6j
    psi = coherent_state(space, alpha)
    resid = space.annihilate @ psi.amps - alpha * psi.amps
    # only the truncation edge contributes
    assert np.linalg.norm(resid) < 1e-10


def test_coherent_state_truncation_guard():
    with pytest.raises(TruncationError):
        coherent_state(FockSpace(8), 2.0)  # |alpha|^2 = 4 > 8/4


# ------------------------------------------------------------ photon counting


def test_photon_counting_is_exactly_complete():
    kset = photon_counting_set(FockSpace(15))
    assert kset.completeness_deviation() < 1e-14


def test_photon_counting_reads_fock_level():
    space = FockSpace(9)
    probs = povm_probabilities(fock_level(space, 2).density(), photon_counting_set(space))
    want = np.zeros(space.dim)
    want[2] = 1.0
    np.testing.assert_allclose(probs, want, atol=1e-14)


def test_photon_counting_poissonian_on_coherent_input():
    space = FockSpace(25)
    probs = povm_probabilities(
        coherent_state(space, 1.0).density(), photon_counting_set(space)
    )
    for n in range(6):
        assert abs(probs[n] - math.exp(-1.0) / math.factorial(n)) < 1e-9


def test_photon_counting_destroys_the_detected_photon():
    space = FockSpace(9)
    rec = kraus_update(fock_level(space, 4).density(), photon_counting_set(space), 4)
    assert rec.probability == pytest.approx(1.0, abs=1e-14)
    assert rec.post_state.mat[0, 0].real > 1.0 - 1e-12


# ------------------------------------------------------------ coherent POVM


def test_polar_grid_weights_tile_the_disc():
    grid = polar_grid(3.0, 12, 16)
    assert len(grid) == 12 * 16
    assert grid.weights.sum() == pytest.approx(math.pi * 9.0, rel=1e-12)
    assert np.max(np.abs(grid.points)) < 3.0


def test_default_grid_covers_the_support():
    space = FockSpace(10)
    grid = default_coherent_grid(space)
    assert grid.radius == math.ceil(2.5 * math.sqrt(10))
    assert grid.radius >= 2.0 * math.sqrt(10)


def test_coherent_set_rejects_small_radius():
    space = FockSpace(10)
    with pytest.raises(ValueError):
        coherent_measurement_set(space, polar_grid(2.0, 8, 8))


def test_coherent_set_completeness_improves_with_density():
    space = FockSpace(8)
    radius = float(math.ceil(2.5 * math.sqrt(8)))
    devs = [
        coherent_measurement_set(space, polar_grid(radius, n, n)).completeness_deviation()
        for n in (8, 16, 32)
    ]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.02


def test_coherent_set_default_grid_is_tight():
    kset = coherent_measurement_set(FockSpace(10))
    report = validate_kraus(kset)
    assert report.deviation < 1e-10


def test_coherent_outcome_projects_onto_coherent_state():
    space = FockSpace(12)
    grid = polar_grid(8.0, 6, 6)
    kset = coherent_measurement_set(space, grid)
    rho = coherent_state(space, 0.9).density()
    probs = povm_probabilities(rho, kset)
    i = int(np.argmax(probs))
    rec = kraus_update(rho, kset, i)
    alpha_i = grid.points[i]
    target = coherent_state(space, alpha_i) if abs(alpha_i) ** 2 <= 3 else None
    if target is not None:
        fid = np.real(target.amps.conj() @ rec.post_state.mat @ target.amps)
        assert fid > 1.0 - 1e-10


# ------------------------------------------------------------ Ehrenfest


def test_ehrenfest_residual_small_for_coherent_state():
    space = FockSpace(20)
    psi = coherent_state(space, 1.0)
    t = np.arange(0.0, 1.0 + 1e-12, 1e-3)
    report = ehrenfest_check(space, psi, 1.0, 1.0, t)
    assert report.max_residual < 1e-5
    assert report.dt == pytest.approx(1e-3)
    assert report.t.size == t.size - 2


def test_ehrenfest_residual_scales_quadratically_in_dt():
    space = FockSpace(20)
    psi = coherent_state(space, 1.0)
    coarse = ehrenfest_check(space, psi, 1.0, 1.0, np.arange(0.0, 1.0, 2e-3))
    fine = ehrenfest_check(space, psi, 1.0, 1.0, np.arange(0.0, 1.0, 1e-3))
    assert 3.5 < coarse.max_residual / fine.max_residual < 4.5


def test_ehrenfest_position_tracks_classical_rotation():
    # <x>(t) = sqrt(2) |alpha| cos(omega t - arg alpha) for harmonic motion
    space = FockSpace(24)
    alpha = 1.2 * np.exp(0.3j)
    psi = coherent_state(space, alpha)
    ham = space.momentum @ space.momentum / 2 + space.position @ space.position / 2
    t = np.linspace(0.0, 6.0, 61)
    amps = evolve_dense_grid(ham, psi, t)
    exp_x = np.einsum("ti,ij,tj->t", amps.conj(), space.position, amps).real
    want = math.sqrt(2.0) * abs(alpha) * np.cos(t - np.angle(alpha))
    np.testing.assert_allclose(exp_x, want, atol=1e-9)


def test_ehrenfest_grid_validation():
    space = FockSpace(12)
    psi = coherent_state(space, 0.5)
    with pytest.raises(ValueError):
        ehrenfest_check(space, psi, 1.0, 1.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        ehrenfest_check(space, psi, 1.0, 1.0, [0.0, 0.1, 0.5])


def test_ehrenfest_rejects_states_crowding_the_truncation():
    space = FockSpace(8)
    with pytest.raises(TruncationError):
        ehrenfest_check(space, fock_level(space, 7), 1.0, 1.0, np.linspace(0, 1, 11))
