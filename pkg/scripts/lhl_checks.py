"""Hashing lemmas and coding bounds on one family, as a slack table.

    python3 scripts/lhl_checks.py --n 3 --m 1 --family toeplitz --count 5
"""

import argparse
import sys

from oneshot_equiv import lhl
from oneshot_equiv.algorithms import InstanceConfig, random_instance
from oneshot_equiv.gf2 import certify_family
from oneshot_equiv.suite import derive_seed, make_family


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--family", choices=["toeplitz", "all-linear"], default="toeplitz")
    p.add_argument("--count", type=int, default=5)
    args = p.parse_args()

    fam = make_family(args.family, args.n, args.m)
    cert = certify_family(fam)
    print(f"{fam.name}: {len(fam)} members, delta = {cert.delta_universal}")
    failed = 0
    for i in range(args.count):
        inst = random_instance(derive_seed(args.seed, "lhl-script", i), InstanceConfig(args.n, args.m))
        reps = [lhl.check_lhl_universal2(inst, fam), lhl.check_lhl_almost_universal2(inst, fam), lhl.check_lhl_dual_universal2(inst, fam)]
        reps += [lhl.check_coding_theorems(inst, fam, w) for w in ("Lemma6", "Lemma8", "Lemma10")]
        reps += lhl.check_four_root(inst, fam)
        for r in reps:
            failed += not r.passed
            print(f"{inst.seed:>11} {r.check:<26} lhs={float(r.lhs):.6f} rhs={float(r.rhs):.6f} slack={r.slack:+.3e}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
