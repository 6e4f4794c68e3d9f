"""A map that is SN but not SP.

Psi fixes |0><0| but sends some pure state to a non-positive operator. It is
invertible on the image of a channel Phi that only ever outputs the pure state,
so Psi o Phi = Phi, but there is no full-rank state with a positive image.

    python3 demos/example2_sn_not_sp.py
"""
import numpy as np

from hptp_kit import atlas, classify, compose, is_positive, is_sn, sn_decompose
from hptp_kit.maps import choi_distance


def main():
    psi, phi = atlas.example2_psi(), atlas.example2_phi()
    c = classify(psi)
    print(f"verdict {c.verdict.value}, y* = {c.y_star:.2e} (zero: boundary of SP)")

    sn = is_sn(psi)
    print("SN witness state:\n", np.round(sn.witness, 6))

    pos = is_positive(psi)
    out = psi(np.outer(pos.witness, pos.witness.conj()))
    print(f"positivity: {pos.status.value}, lowest eigenvalue of the image {np.linalg.eigvalsh(out)[0]:.6f}")

    print(f"|Psi o Phi - Phi| = {choi_distance(compose(psi, phi), phi):.2e}")
    d = sn_decompose(psi)
    print(f"SN factorization residual |Psi o Phi' - Xi'| = {choi_distance(compose(psi, d.phi), d.xi):.2e}")


if __name__ == "__main__":
    main()
