"""Where random HPTP maps land in the hierarchy CP, P, SPR, SP, SN.

Also checks the dichotomy: a map is SP exactly when the negated dual is not SN.

    python3 demos/hierarchy_sweep.py [count]
"""
import sys
from collections import Counter

from hptp_kit import atlas, classify, duality_dichotomy


def main(count=20):
    verdicts = Counter()
    for seed in range(count):
        c = classify(atlas.random_hptp(2, 2, seed))
        verdicts[c.verdict.value] += 1
        assert c.check_inclusions()
    print(f"{count} random qubit HPTP maps:")
    for name, k in verdicts.most_common():
        print(f"  {name:12s} {k}")

    branches = Counter(duality_dichotomy(atlas.random_hptp(2, 2, s)).branch.value for s in range(count))
    print("dichotomy branches:", dict(branches))

    ups = atlas.indefinite_replacement([[2, 0], [0, -1]])
    print(f"replacement by diag(2, -1): {classify(ups).verdict.value}, y* = {classify(ups).y_star:.6f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20)
