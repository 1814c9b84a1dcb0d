"""Request-sequence generators: lower-bound adversaries and synthetic workloads."""

from __future__ import annotations

import math
import random
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .harness import Simulation, derive_seed
from .model import CacheState, Item, ProblemParams, apply_request, needs_eviction
from .oracle import MAX_DISTINCT, opt_cost
from .phases import PhaseTracker
from .policies import Policy, PolicyKind


class AdversaryError(ValueError):
    pass


@dataclass
class AdversaryConfig:
    params: ProblemParams
    steps: int = 1000  # requests after warmup (cruel), complete phases (tp)
    seed: int = 0
    clones: int = 1000
    types: Optional[int] = None  # workload generators only
    items_per_type: Optional[int] = None
    zipf_s: float = 1.0

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


def type_token(i: int, width: int) -> str:
    return f"t{i:0{width}d}"


def universe(num_types: int, per_type: int) -> list[Item]:
    """Canonical item universe; zero-padded tokens keep string order = numeric order."""
    tw = len(str(max(num_types - 1, 0)))
    iw = len(str(max(per_type - 1, 0)))
    return [
        Item(type_token(t, tw), f"{i:0{iw}d}")
        for t in range(num_types)
        for i in range(per_type)
    ]


# -- deterministic lower bound ----------------------------------------------


@dataclass
class CruelResult:
    sigma: list
    alg_cost: int
    opt_cost: int
    opt_exact: bool

    @property
    def ratio(self) -> float:
        return self.alg_cost / max(1, self.opt_cost)


def cruel_paging_adversary(policy: PolicyKind, cfg: AdversaryConfig) -> CruelResult:
    """Always request the one item the policy does not hold.

    The universe has n+1 types with k+1 items each, one more item than the
    cache can hold, so after a warmup pass over every item exactly one item
    is missing at any time and the policy faults on every request.
    """
    if not policy.resolve(cfg.params).is_deterministic:
        raise AdversaryError(f"{policy.value} is randomized; the cruel adversary needs a deterministic policy")
    n, k = cfg.params.n, cfg.params.k
    uni = universe(n + 1, k + 1)
    sim = Simulation(cfg.params, policy, cfg.seed, log=False)
    sigma = list(uni)
    sim.run(sigma)
    for _ in range(cfg.steps):
        (missing,) = [e for e in uni if e not in sim.state.cached]
        sigma.append(missing)
        sim.step(missing)
    sim.finish()
    if len(uni) <= MAX_DISTINCT:
        opt, exact = opt_cost(sigma, cfg.params, witness=False).cost, True
    else:
        # paging with C+1 pages and C slots: after warmup, at most one fault per C requests
        c = cfg.params.capacity_ratio
        opt, exact = len(uni) + math.ceil(cfg.steps / c), False
    return CruelResult(sigma, sim.faults, opt, exact)


# -- distributional adversary against type-preference policies --------------


@dataclass
class DistributionalResult:
    sigma: list
    phases: int
    per_phase_cost: float  # mean over clones of faults per measured phase
    per_phase_stderr: float
    phase_costs: list = field(repr=False)  # mean over clones, per measured phase
    clone_costs: list = field(repr=False)  # per clone, total over measured phases


class _Clone:
    __slots__ = ("policy", "state", "faults", "hole")

    def __init__(self, kind, params, seed):
        self.policy = Policy(kind, params, seed)
        self.state = CacheState(params)
        self.faults = 0
        self.hole = None  # the single uncached item, once the cache is full


def tp_distributional_adversary(policy: PolicyKind, cfg: AdversaryConfig) -> DistributionalResult:
    """Drive a randomized policy toward its hole with one new item per phase.

    There are n+1 types of k+1 items, so once warm every replica of the
    policy misses exactly one item (its hole). Each phase starts with the
    request that closed the previous one; the adversary first requests the
    remaining items of that type, then repeatedly takes the not yet drained
    type most likely to hold the hole and requests its items, most likely
    hole first. Probabilities are the fractions of ``cfg.clones`` independent
    replicas, all fed the same sequence. The partition depends only on the
    sequence, so one tracker serves every replica.

    The first phase is the warmup and is not measured; ``cfg.steps`` phases
    are measured after it.
    """
    if cfg.clones < 100:
        raise AdversaryError("the distributional adversary needs at least 100 clones")
    params = cfg.params
    n, k = params.n, params.k
    uni = universe(n + 1, k + 1)
    by_type: dict = {}
    for e in uni:
        by_type.setdefault(e.type_id, []).append(e)
    kind = policy.resolve(params)
    clones = [_Clone(kind, params, derive_seed(cfg.seed, c)) for c in range(cfg.clones)]
    tracker = PhaseTracker(params)
    sigma: list = []
    phase_faults: list = []

    def request(e: Item) -> bool:
        j = len(sigma) + 1
        ev = tracker.observe(j, e)
        sigma.append(e)
        if ev.phase_ended:
            if ev.phase == 2:
                for c in clones:
                    c.faults = 0
            else:
                phase_faults.append([c.faults for c in clones])
        for c in clones:
            st = c.state
            if e not in st.cached:
                victim = c.policy.victim(st, tracker, e) if needs_eviction(st, e) else None
                c.state, _ = apply_request(st, e, victim)
                c.faults += 1
                if victim is not None:
                    c.hole = victim
            c.policy.on_request(j, e)
        return ev.phase_ended

    def hole_counts() -> Counter:
        return Counter(c.hole for c in clones if c.hole is not None)

    # warmup: the first phase requests every item, type by type
    for e in uni:
        ended = request(e)
    assert ended and tracker.phase == 2, "warmup must close exactly one phase"

    def drain(items_left: list) -> bool:
        """Request ``items_left`` most-likely-hole first; True if a phase ended."""
        left = list(items_left)
        while left:
            holes = hole_counts()
            nxt = max(left, key=lambda e: (holes[e], _neg(e)))
            left.remove(nxt)
            if request(nxt):
                return True
        return False

    while tracker.phase - 2 < cfg.steps:
        start_type = sigma[-1].type_id
        rest = [e for e in by_type[start_type] if e != sigma[-1]]
        ended = drain(rest)
        pending = [t for t in sorted(by_type) if t != start_type]
        while not ended:
            if not pending:
                raise AdversaryError("phase did not end after every type was drained")
            holes = hole_counts()
            weight = {t: sum(holes[e] for e in by_type[t]) for t in pending}
            t = max(pending, key=lambda t: (weight[t], _neg_type(t)))
            pending.remove(t)
            ended = drain(by_type[t])

    # phase_faults[p] holds cumulative clone faults when measured phase p+1 closed
    cum = phase_faults[: cfg.steps]
    per_phase, prev = [], [0] * len(clones)
    for row in cum:
        per_phase.append(statistics.fmean(a - b for a, b in zip(row, prev)))
        prev = row
    totals = cum[-1] if cum else [0] * len(clones)
    per_clone = [x / max(1, cfg.steps) for x in totals]
    mean = statistics.fmean(per_clone)
    stderr = statistics.stdev(per_clone) / math.sqrt(len(per_clone)) if len(per_clone) > 1 else 0.0
    return DistributionalResult(sigma, cfg.steps, mean, stderr, per_phase, totals)


def _neg(e: Item):
    # max() with canonical tie-break toward the smallest item
    return tuple(-ord(ch) for ch in e.type_id), tuple(-ord(ch) for ch in e.item_id)


def _neg_type(t: str):
    return tuple(-ord(ch) for ch in t)


# -- synthetic workloads ----------------------------------------------------


def _workload_universe(cfg: AdversaryConfig) -> list[Item]:
    m = cfg.types if cfg.types is not None else (cfg.params.m or cfg.params.n + 1)
    per = cfg.items_per_type if cfg.items_per_type is not None else cfg.params.k + 1
    if m < 1 or per < 1:
        raise AdversaryError("empty item universe")
    return universe(m, per)


def gen_uniform(cfg: AdversaryConfig) -> list[Item]:
    uni = _workload_universe(cfg)
    rng = random.Random(cfg.seed)
    return [uni[rng.randrange(len(uni))] for _ in range(cfg.steps)]


def zipf_weights(size: int, s: float = 1.0) -> list[float]:
    raw = [1.0 / (r ** s) for r in range(1, size + 1)]
    z = sum(raw)
    return [w / z for w in raw]


def gen_zipf(cfg: AdversaryConfig) -> list[Item]:
    """i.i.d. draws where the r-th item in canonical order has weight 1/r^s."""
    uni = _workload_universe(cfg)
    rng = random.Random(cfg.seed)
    return rng.choices(uni, weights=zipf_weights(len(uni), cfg.zipf_s), k=cfg.steps)
