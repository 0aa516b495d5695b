"""Measurement calculus: projective collapse, Kraus updates, POVM statistics.

Probabilities follow the Born rule, selective post-states follow the
projection postulate (or its Kraus generalization M rho M^dag / p).  Sampling
is inverse-CDF over the cumulative Born weights with a seedable PRNG, so
every stochastic path is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .states import BasisSpec, DensityMatrix, StateVector

_IMPOSSIBLE_P = 1e-14
_PROJ_ATOL = 1e-10


class ImpossibleOutcomeError(ValueError):
    """Selective update requested for an outcome of (numerically) zero weight."""


class KrausSet:
    """A finite family of measurement operators M_i.

    Completeness sum_i M_i^dag M_i = I is enforced at construction within
    ``completeness_tol`` (default 1e-10).  Pass ``completeness_tol=None`` for
    deliberately approximate families such as quadrature discretizations of a
    continuous POVM; their actual deviation is reported by
    :func:`validate_kraus` instead.
    """

    def __init__(self, operators, labels=None, completeness_tol: Optional[float] = 1e-10):
        ops = [np.array(m, dtype=complex) for m in operators]
        if len(ops) == 0:
            raise ValueError("a KrausSet needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2:
            raise ValueError("Kraus operators must be matrices")
        for m in ops:
            if m.shape != shape:
                raise ValueError("all Kraus operators must share one shape")
            m.flags.writeable = False
        if labels is None:
            labels = list(range(len(ops)))
        labels = list(labels)
        if len(labels) != len(ops):
            raise ValueError("labels and operators must have matching length")
        self.operators = tuple(ops)
        self.labels = tuple(labels)
        self.completeness_tol = completeness_tol
        if completeness_tol is not None:
            dev = self.completeness_deviation()
            if dev > completeness_tol:
                raise ValueError(
                    f"sum M^dag M deviates from identity by {dev:g} "
                    f"(tolerance {completeness_tol:g})"
                )

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]

    def completeness_deviation(self) -> float:
        """Max-norm deviation of sum M^dag M from the identity."""
        acc = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for m in self.operators:
            acc += m.conj().T @ m
        return float(np.max(np.abs(acc - np.eye(self.dim_in))))

    def to_dict(self) -> dict:
        """JSON-ready form; complex entries become [re, im] pairs, row-major."""
        return {
            "shape": [self.dim_out, self.dim_in],
            "labels": list(self.labels),
            "completeness_tol": self.completeness_tol,
            "operators": [
                [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
                for m in self.operators
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, completeness_tol="stored") -> "KrausSet":
        """Inverse of :meth:`to_dict`.

        ``completeness_tol`` defaults to the stored value; pass a float or
        None to override.
        """
        rows, cols = (int(x) for x in data["shape"])
        ops = []
        for flat in data["operators"]:
            arr = np.array([complex(re, im) for re, im in flat], dtype=complex)
            if arr.size != rows * cols:
                raise ValueError("operator entry count does not match shape")
            ops.append(arr.reshape(rows, cols))
        tol = data.get("completeness_tol", 1e-10) if completeness_tol == "stored" else completeness_tol
        return cls(ops, labels=data.get("labels"), completeness_tol=tol)


class Projector:
    """Hermitian idempotent operator (P^2 = P within 1e-10)."""

    def __init__(self, mat) -> None:
        mat = np.array(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"projector must be square, got shape {mat.shape}")
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm > _PROJ_ATOL:
            raise ValueError(f"projector not Hermitian: deviation {herm:g}")
        idem = float(np.max(np.abs(mat @ mat - mat)))
        if idem > _PROJ_ATOL:
            raise ValueError(f"projector not idempotent: deviation {idem:g}")
        mat.flags.writeable = False
        self.mat = mat

    @classmethod
    def onto(cls, vectors) -> "Projector":
        """Projector onto the span of orthonormal column vectors."""
        v = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if v.shape[0] < v.shape[1]:  # accept rows or columns
            v = v.T
        return cls(v @ v.conj().T)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.mat).real)))


@dataclass(frozen=True)
class MeasurementRecord:
    """One selective measurement event: outcome label, its Born weight, post-state."""

    outcome: object
    probability: float
    post_state: DensityMatrix


def premeasure_cnot(system: StateVector, apparatus: StateVector) -> StateVector:
    """Entangle a qubit with a two-level pointer via a controlled flip.

    The pointer must arrive in its ready state (amplitudes (1, 0) within
    1e-12); the output on basis (system, pointer) maps (a, b) to amplitudes
    (a, 0, 0, b) — outcome branches perfectly correlated with the system.
    """
    if system.dims != (2,) or apparatus.dims != (2,):
        raise ValueError("premeasure_cnot expects two single-qubit states")
    ready = np.array([1.0, 0.0])
    if float(np.max(np.abs(apparatus.amps - ready))) > 1e-12:
        raise ValueError("apparatus must start in the ready state (1, 0)")
    joint = np.kron(system.amps, apparatus.amps)
    flipped = joint[[0, 1, 3, 2]]  # pointer flips iff the control is down
    return StateVector((2, 2), flipped)


def born_probability(rho: DensityMatrix, proj: Projector) -> float:
    """Tr[P rho], clamped to [0, 1]."""
    if proj.dim != rho.dim:
        raise ValueError(f"projector dim {proj.dim} != state dim {rho.dim}")
    p = float(np.trace(proj.mat @ rho.mat).real)
    return min(max(p, 0.0), 1.0)


def _lifted_weights(state: StateVector, basis: BasisSpec):
    """Born weights and conditional (unnormalized) states for a basis measurement.

    Returns (probs, branch_amps) where branch_amps[i] is the unnormalized
    post-measurement amplitude vector for outcome i.
    """
    n = len(state.dims)
    if basis.dim == state.dim and (n == 1 or basis.subsystem == 0):
        # Basis spans the full space.
        coeff = basis.matrix.conj().T @ state.amps
        probs = np.abs(coeff) ** 2
        branches = [coeff[i] * basis.matrix[:, i] for i in range(basis.dim)]
        return probs, branches
    if basis.subsystem >= n:
        raise ValueError(
            f"basis subsystem {basis.subsystem} out of range for dims {state.dims}"
        )
    if basis.dim != state.dims[basis.subsystem]:
        raise ValueError(
            f"basis dimension {basis.dim} does not match subsystem "
            f"dimension {state.dims[basis.subsystem]}"
        )
    pre = int(np.prod(state.dims[: basis.subsystem], initial=1))
    d = basis.dim
    post = state.dim // (pre * d)
    resh = state.amps.reshape(pre, d, post)
    # coeff[i, p, q] = sum_s conj(U[s, i]) psi[p, s, q]
    coeff = np.einsum("si,psq->ipq", basis.matrix.conj(), resh)
    probs = np.sum(np.abs(coeff) ** 2, axis=(1, 2))
    branches = []
    for i in range(d):
        amp = np.einsum("s,pq->psq", basis.matrix[:, i], coeff[i]).reshape(-1)
        branches.append(amp)
    return probs, branches


def outcome_distribution(state: StateVector, basis: BasisSpec) -> np.ndarray:
    """Born probabilities for every outcome of a projective basis measurement."""
    probs, _ = _lifted_weights(state, basis)
    return probs


def collapse_sample(state: StateVector, basis: BasisSpec, rng_seed) -> MeasurementRecord:
    """Sample one projective outcome and collapse.

    The basis either spans the whole space (the post-state is then exactly
    the selected basis column) or one subsystem, in which case the lifted
    projector |u_i><u_i| (x) I is applied and the result renormalized.
    Sampling is inverse-CDF over the cumulative Born weights using
    ``np.random.default_rng(rng_seed)``; passing the same seed replays the
    same outcome.
    """
    probs, branches = _lifted_weights(state, basis)
    rng = np.random.default_rng(rng_seed)
    cum = np.cumsum(probs)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    i = min(i, len(probs) - 1)
    p = float(probs[i])
    if p <= _IMPOSSIBLE_P:
        # The sampled register can only land here through degenerate weights;
        # fall back to the most likely outcome to keep the record meaningful.
        i = int(np.argmax(probs))
        p = float(probs[i])
    post_amps = branches[i] / np.sqrt(p)
    post = StateVector(state.dims, post_amps).density()
    return MeasurementRecord(outcome=i, probability=min(p, 1.0), post_state=post)


def sample_outcomes(state: StateVector, basis: BasisSpec, n_shots: int, rng_seed) -> np.ndarray:
    """Outcome counts for ``n_shots`` independent collapses (shared PRNG stream).

    Equivalent in law to repeating :func:`collapse_sample`; returns an integer
    count per basis outcome.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    probs, _ = _lifted_weights(state, basis)
    rng = np.random.default_rng(rng_seed)
    cum = np.cumsum(probs)
    draws = np.searchsorted(cum, rng.random(int(n_shots)) * cum[-1], side="right")
    draws = np.minimum(draws, len(probs) - 1)
    return np.bincount(draws, minlength=len(probs))


def luders_update(rho: DensityMatrix, proj: Projector) -> DensityMatrix:
    """Selective projective update P rho P / Tr[P rho].

    Raises
    ------
    ImpossibleOutcomeError
        If the outcome weight is at or below 1e-14.
    """
    if proj.dim != rho.dim:
        raise ValueError(f"projector dim {proj.dim} != state dim {rho.dim}")
    p = float(np.trace(proj.mat @ rho.mat).real)
    if p <= _IMPOSSIBLE_P:
        raise ImpossibleOutcomeError(
            f"outcome weight {p:g} is numerically zero; selective update undefined"
        )
    post = proj.mat @ rho.mat @ proj.mat / p
    post = (post + post.conj().T) / 2.0  # wash out rounding asymmetry
    return DensityMatrix(rho.dims, post)


def povm_probabilities(rho: DensityMatrix, kraus: KrausSet) -> np.ndarray:
    """Outcome distribution p_i = Tr[M_i^dag M_i rho].

    Entries are clamped at 0; for a complete set they sum to 1 within the
    set's completeness tolerance.
    """
    if kraus.dim_in != rho.dim:
        raise ValueError(f"Kraus input dim {kraus.dim_in} != state dim {rho.dim}")
    probs = np.empty(len(kraus))
    for i, m in enumerate(kraus.operators):
        probs[i] = max(float(np.trace(m.conj().T @ m @ rho.mat).real), 0.0)
    return probs


def kraus_update(rho: DensityMatrix, kraus: KrausSet, index: int) -> MeasurementRecord:
    """Selective generalized update M_i rho M_i^dag / p_i for outcome ``index``."""
    if kraus.dim_in != rho.dim:
        raise ValueError(f"Kraus input dim {kraus.dim_in} != state dim {rho.dim}")
    m = kraus.operators[index]
    sigma = m @ rho.mat @ m.conj().T
    p = float(np.trace(sigma).real)
    if p <= _IMPOSSIBLE_P:
        raise ImpossibleOutcomeError(
            f"outcome {kraus.labels[index]!r} has weight {p:g}; update undefined"
        )
    post = (sigma + sigma.conj().T) / (2.0 * p)
    dims = rho.dims if kraus.dim_out == rho.dim else (kraus.dim_out,)
    return MeasurementRecord(
        outcome=kraus.labels[index],
        probability=min(p, 1.0),
        post_state=DensityMatrix(dims, post),
    )


@dataclass(frozen=True)
class KrausReport:
    """Completeness audit of a KrausSet; informational, never raised."""

    deviation: float
    tolerance: float
    passed: bool


def validate_kraus(kraus: KrausSet, tol: float = 1e-10) -> KrausReport:
    """Report how far sum M^dag M is from the identity, against ``tol``.

    Never raises: deliberately truncated sets (e.g. quadrature grids for a
    continuous outcome family) are expected to fail the strict default and
    be judged by their reported deviation instead.
    """
    dev = kraus.completeness_deviation()
    return KrausReport(deviation=dev, tolerance=float(tol), passed=bool(dev <= tol))
