"""Partition the worked example sequence and replay it under every policy."""

from compcache.harness import derive_seeds, expect
from compcache.model import ProblemParams, items
from compcache.phases import partition
from compcache.policies import PolicyKind

SEQ = items(*"a1 b1 d1 c1 a2 a3 b2 a4 b3 c2 b4 a5 c3 d2 b1 c4 a3 a2 a1 a3 b2 b3 b5 d3".split())


def main():
    params = ProblemParams(3, 2)
    stats = partition(SEQ, params).finalize()
    for i, ((lo, hi), p) in enumerate(zip(stats.D, stats.P), start=1):
        types = "".join(sorted(stats.types[i - 1]))
        tag = " (open)" if stats.incomplete and i == stats.num_phases else ""
        print(f"phase {i}{tag}: D={lo}..{hi} P={p} T={{{types}}}")
    print()
    seeds = derive_seeds(0, 1000)
    for kind in PolicyKind:
        rep = expect(SEQ, params, kind, seeds)
        print(f"{kind.value:12s} faults {rep.faults:6.2f} +- {rep.faults_stderr:.2f}  per phase {rep.phase_faults}")


if __name__ == "__main__":
    main()
