"""Cruel-adversary ratio of deterministic policies against the exact optimum, per (n, k)."""

import argparse

from compcache.adversaries import AdversaryConfig, cruel_paging_adversary
from compcache.model import ProblemParams
from compcache.policies import PolicyKind


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--max-k", type=int, default=3)
    args = ap.parse_args(argv)
    print("policy,n,k,capacity_ratio,alg_cost,opt_cost,opt_exact,ratio")
    for kind in (PolicyKind.DET_MARKING, PolicyKind.LRU):
        for n in range(1, args.max_n + 1):
            for k in range(1, args.max_k + 1):
                params = ProblemParams(n, k)
                r = cruel_paging_adversary(kind, AdversaryConfig(params, steps=args.steps))
                print(f"{kind.value},{n},{k},{params.capacity_ratio},{r.alg_cost},{r.opt_cost},"
                      f"{r.opt_exact},{r.ratio:.3f}")


if __name__ == "__main__":
    main()
