"""Per-phase cost of randomized policies under the hole-chasing adversary as n and k grow."""

import argparse
import math
import time

from compcache.adversaries import AdversaryConfig, tp_distributional_adversary
from compcache.model import ProblemParams
from compcache.policies import PolicyKind


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--phases", type=int, default=100)
    ap.add_argument("--clones", type=int, default=1000)
    ap.add_argument("--policy", action="append", default=None)
    ap.add_argument("--grid", default="1x1,3x3,7x3,3x7,7x7")
    args = ap.parse_args(argv)
    kinds = [PolicyKind.parse(p) for p in (args.policy or ["tp", "cw"])]
    print("policy,n,k,per_phase_cost,stderr,log_n_log_k,seconds")
    for cell in args.grid.split(","):
        n, k = (int(x) for x in cell.split("x"))
        for kind in kinds:
            t0 = time.perf_counter()
            cfg = AdversaryConfig(ProblemParams(n, k), steps=args.phases, clones=args.clones)
            r = tp_distributional_adversary(kind, cfg)
            ref = math.log2(n + 1) * math.log2(k + 1)
            print(f"{kind.value},{n},{k},{r.per_phase_cost:.3f},{r.per_phase_stderr:.3f},"
                  f"{ref:.2f},{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
