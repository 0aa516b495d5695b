"""Measurement updating rules, from sampling to generalized operators.

Correlates a qubit with a pointer, samples outcomes at the Born weights,
shows that a repeated projective measurement reproduces its outcome, and
contrasts that with an unsharp two-operator measurement which does not.
"""

import argparse

import numpy as np

from decolab import (
    BasisSpec,
    KrausSet,
    Projector,
    StateVector,
    born_probability,
    collapse_sample,
    kraus_update,
    luders_update,
    outcome_distribution,
    premeasure_cnot,
    sample_outcomes,
    validate_kraus,
)

Z_BASIS = BasisSpec(0, np.eye(2))


def correlate_and_sample(seed):
    print("=== premeasurement and Born sampling ===")
    system = StateVector((2,), [0.6, 0.8])
    ready = StateVector((2,), [1.0, 0.0])
    joint = premeasure_cnot(system, ready)
    print(f"system (a, b) = (0.6, 0.8); joint amplitudes = {np.round(joint.amps, 3)}")
    print("only the aligned branches survive: the pointer copies the qubit")

    basis = BasisSpec(0, np.eye(4))
    probs = outcome_distribution(joint, basis)
    shots = 10_000
    counts = sample_outcomes(joint, basis, shots, seed)
    print(f"{'outcome':>8s} {'Born':>7s} {'freq':>7s}   ({shots} shots, seed {seed})")
    for name, p, c in zip(["up,up", "up,dn", "dn,up", "dn,dn"], probs, counts):
        print(f"{name:>8s} {p:7.4f} {c / shots:7.4f}")
    print()


def projective_repetition(seed):
    print("=== projective measurements repeat ===")
    psi = StateVector((2,), [1.0, 1.0] / np.sqrt(2.0))
    first = collapse_sample(psi, Z_BASIS, seed)
    collapsed = StateVector((2,), Z_BASIS.matrix[:, first.outcome])
    again = outcome_distribution(collapsed, Z_BASIS)
    print(f"|+x> measured along z: outcome {first.outcome} "
          f"(weight {first.probability:.2f})")
    print(f"re-measuring the post-state: P(same outcome) = {again[first.outcome]:.1f}")

    # the density-matrix form of the same update is idempotent
    rho = psi.density()
    proj = Projector.onto(np.eye(2)[:, :1])
    once = luders_update(rho, proj)
    twice = luders_update(once, proj)
    print(f"update applied twice changes nothing: "
          f"max|difference| = {np.max(np.abs(once.mat - twice.mat)):.1e}")
    print()


def unsharp_readout():
    print("=== an unsharp readout need not repeat ===")
    # two noisy operators: outcome 0 favors |0> without fully projecting
    m0 = np.diag([np.sqrt(0.9), np.sqrt(0.1)])
    m1 = np.diag([np.sqrt(0.1), np.sqrt(0.9)])
    kset = KrausSet([m0, m1], labels=["dim", "bright"])
    report = validate_kraus(kset)
    print(f"completeness deviation of the pair: {report.deviation:.1e}")

    rho = StateVector((2,), [1.0, 1.0] / np.sqrt(2.0)).density()
    rec = kraus_update(rho, kset, 0)
    print(f"outcome 'dim' on |+x>: probability {rec.probability:.2f}")
    p0 = born_probability(rec.post_state, Projector.onto(np.eye(2)[:, :1]))
    print(f"post-state is tilted, not collapsed: <0|rho'|0> = {p0:.3f}")
    rerun = float(np.trace(m0 @ rec.post_state.mat @ m0.conj().T).real)
    print(f"repeating the readout gives 'dim' with probability {rerun:.3f}, not 1")
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=12, help="outcome sampling seed")
    args = parser.parse_args()

    correlate_and_sample(args.seed)
    projective_repetition(args.seed)
    unsharp_readout()


if __name__ == "__main__":
    main()
