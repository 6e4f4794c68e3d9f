"""The transpose as a physical process on a system with prior correlations.

The transpose is not completely positive, yet it is an inverse-of-channel map:
T = Xi o Phi^{-1} with Phi and Xi channels. This script finds the factorization,
builds the two dilation unitaries and runs the context circuit on random states.

    python3 demos/transpose_walkthrough.py
"""
import numpy as np

from hptp_kit import atlas, classify, compose, inverse, sp_decompose
from hptp_kit.decompose import coverage_monte_carlo, coverage_ratio
from hptp_kit.dilate import example1_circuit, simulate_context_circuit
from hptp_kit.linalg import max_abs
from hptp_kit.maps import choi_distance


def main():
    t = atlas.transpose()
    c = classify(t)
    print(f"transpose: verdict {c.verdict.value}, SDP value y* = {c.y_star:.6f}")

    # largest lambda with Xi = T o (lambda id + (1 - lambda) Tr(.) I/2) still CP
    d = sp_decompose(t, np.eye(2) / 2)
    print(f"largest lambda: {d.lam:.12f}")
    print(f"|Xi o Phi^-1 - T| = {choi_distance(compose(d.xi, inverse(d.phi)), t):.2e}")
    print("Choi spectrum of Xi:", np.round(np.linalg.eigvalsh(d.xi.choi), 6))

    # Phi maps the Bloch ball onto a ball of radius lambda: 1/27 of the volume
    print(f"coverage: exact {coverage_ratio(d):.6f}, sampled {coverage_monte_carlo(d, 50_000, 0):.6f}")

    circuit = example1_circuit(1 / 3)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        r1, r2 = simulate_context_circuit(circuit, rho)
        worst = max(worst, max_abs(r2 - r1.T))
    print(f"context circuit: max |rho'' - rho'^T| over 20 states = {worst:.2e}")


if __name__ == "__main__":
    main()
