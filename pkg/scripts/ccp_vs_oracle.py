"""Compare the bounded CCP check with the manipulation oracles on random total 3x3 matrices.

Prints, per matrix, the CCP verdict, the tally-oracle verdict and (with
--profiles) the profile-oracle verdict, then the disagreement counts.
"""

import argparse
import random
from fractions import Fraction

from scorevoting.oracle import OracleBounds, find_manipulation_all_W, find_tally_manipulation
from scorevoting.properties import check_ccp, is_total
from scorevoting.score import ScoreFunction


def random_matrix(rng, m):
    return [[Fraction(rng.randint(1, 8), rng.randint(1, 3)) if i == j else Fraction(rng.randint(-3, 3), rng.randint(1, 3))
             for j in range(m)] for i in range(m)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--max-tally", type=int, default=4)
    ap.add_argument("--profiles", type=int, default=0, help="also run the profile oracle with this many voters")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    total = tally_dis = prof_dis = 0
    for k in range(args.samples):
        sf = ScoreFunction.of(random_matrix(rng, 3))
        if not is_total(sf, stop_early=True).total:
            continue
        total += 1
        ccp = check_ccp(sf, max_tally=args.max_tally).holds_on_bounds
        tally_ok = find_tally_manipulation(sf, args.max_tally) is None
        tally_dis += ccp != tally_ok
        line = f"{k:4d} ccp={'holds' if ccp else 'fails'} tally_oracle={'clean' if tally_ok else 'witness'}"
        if args.profiles:
            prof_ok = find_manipulation_all_W(sf, OracleBounds(n=args.profiles)) is None
            prof_dis += ccp != prof_ok
            line += f" profile_oracle={'clean' if prof_ok else 'witness'}"
        print(line)
    print(f"total matrices: {total}; tally-oracle disagreements: {tally_dis}", end="")
    print(f"; profile-oracle disagreements: {prof_dis}" if args.profiles else "")


if __name__ == "__main__":
    main()
