"""Compare the QKD security bounds with the measured hashing distance.

    python3 scripts/qkd_demo.py --n 3 --m 1 --count 5
"""

import argparse
import math
import sys

from oneshot_equiv import lhl
from oneshot_equiv.algorithms import InstanceConfig, random_instance
from oneshot_equiv.suite import derive_seed, make_family


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--count", type=int, default=5)
    args = p.parse_args()

    fam = make_family("toeplitz", args.n, args.m)
    cols = ["measured_d1", "lhl", "pec", "reverse", "ucr", "ucr_measured"]
    print(f"{'seed':>11} {'h_th':>9} " + " ".join(f"{c:>12}" for c in cols))
    ok = True
    for i in range(args.count):
        inst = random_instance(derive_seed(args.seed, "qkd-script", i), InstanceConfig(args.n, args.m))
        h_th = max(0.0, math.floor(lhl.hmin_ze(inst).value * 1e6) / 1e6)
        b = lhl.qkd_bounds(inst, fam, h_th)
        ok &= all(r.passed for r in lhl.qkd_conversion_demo(inst, fam, h_th))
        print(f"{inst.seed:>11} {h_th:>9.6f} " + " ".join(f"{getattr(b, c):>12.6f}" for c in cols))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
