"""Victim selection for faults that need an eviction.

Every random choice sorts its candidates canonically and draws an index
from the policy's own ``random.Random`` stream (Mersenne Twister), so a
run is reproducible from its seed.

All strategies assume the phase tracker has already processed the current
request: marks erased by a phase end are then available for eviction,
and the requested item itself is marked.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .model import CacheState, Item, ProblemParams, eviction_candidates
from .phases import PhaseTracker


class NoCandidate(RuntimeError):
    pass


class PolicyKind(enum.Enum):
    DET_MARKING = "det-marking"
    TP1 = "tp1"
    TP2 = "tp2"
    TP = "tp"
    CW = "cw"
    LRU = "lru"
    RANDOM = "rand"

    @classmethod
    def parse(cls, token: str) -> "PolicyKind":
        try:
            return cls(token)
        except ValueError:
            valid = " | ".join(k.value for k in cls)
            raise ValueError(f"unknown policy {token!r}; expected one of {valid}") from None

    def resolve(self, params: ProblemParams) -> "PolicyKind":
        if self is PolicyKind.TP:
            return PolicyKind.TP1 if params.k < params.n else PolicyKind.TP2
        return self

    @property
    def is_marking(self) -> bool:
        return self in MARKING

    @property
    def is_type_preference(self) -> bool:
        return self in TYPE_PREFERENCE

    @property
    def is_deterministic(self) -> bool:
        return self in (PolicyKind.DET_MARKING, PolicyKind.LRU)


MARKING = frozenset(
    {PolicyKind.DET_MARKING, PolicyKind.TP1, PolicyKind.TP2, PolicyKind.TP, PolicyKind.CW}
)
# CW may use a cache-wide eviction on an unrepresented type, so it is not one.
TYPE_PREFERENCE = frozenset(
    {PolicyKind.DET_MARKING, PolicyKind.TP1, PolicyKind.TP2, PolicyKind.TP}
)


@dataclass
class PolicyContext:
    state: CacheState
    tracker: PhaseTracker
    rng: random.Random
    requested: Item
    last_use: Mapping = field(default_factory=dict)

    @property
    def t(self):
        return self.requested.type_id

    def unmarked_of_type(self, t) -> list:
        mk = self.tracker.marks.get(t)
        return sorted(e for e in self.state.cached if e.type_id == t and not (mk and e in mk))

    def is_represented(self, t) -> bool:
        return self.state.count(t) > self.state.params.k

    def wide_types(self) -> set:
        """T + {t}: represented types together with the requested type."""
        return self.state.represented_types() | {self.t}


def _pick(rng: random.Random, candidates: list):
    return candidates[rng.randrange(len(candidates))]


def type_eviction(ctx: PolicyContext) -> Item:
    cands = ctx.unmarked_of_type(ctx.t)
    if not cands:
        raise NoCandidate(f"no unmarked cached item of type {ctx.t!r}")
    return _pick(ctx.rng, cands)


def _wide_unmarked(ctx: PolicyContext) -> list:
    wide = ctx.wide_types()
    marks = ctx.tracker.marks
    return sorted(
        e
        for e in ctx.state.cached
        if e.type_id in wide and e not in marks.get(e.type_id, ())
    )


def cache_wide_eviction(ctx: PolicyContext) -> Item:
    cands = _wide_unmarked(ctx)
    if not cands:
        raise NoCandidate("no unmarked item of a represented or requested type")
    return _pick(ctx.rng, cands)


def skewed_cache_wide_eviction(ctx: PolicyContext) -> Item:
    by_type: dict = {}
    for e in _wide_unmarked(ctx):
        by_type.setdefault(e.type_id, []).append(e)
    if not by_type:
        raise NoCandidate("no unmarked item of a represented or requested type")
    t2 = _pick(ctx.rng, sorted(by_type))
    return _pick(ctx.rng, by_type[t2])


def _least_recent(ctx: PolicyContext, cands) -> Item:
    return min(cands, key=lambda e: (ctx.last_use.get(e, 0), e))


def select_victim(kind: PolicyKind, ctx: PolicyContext) -> Item:
    kind = kind.resolve(ctx.state.params)
    t = ctx.t
    if kind is PolicyKind.TP1:
        if not ctx.is_represented(t) and ctx.unmarked_of_type(t):
            return type_eviction(ctx)
        return cache_wide_eviction(ctx)
    if kind is PolicyKind.TP2:
        own = ctx.unmarked_of_type(t)
        if own:
            if not ctx.is_represented(t):
                return type_eviction(ctx)
            if ctx.requested in ctx.tracker.prev_items():
                return type_eviction(ctx)
        return skewed_cache_wide_eviction(ctx)
    if kind is PolicyKind.CW:
        if t not in ctx.tracker.prev_types() and ctx.unmarked_of_type(t):
            return type_eviction(ctx)
        return cache_wide_eviction(ctx)
    if kind is PolicyKind.DET_MARKING:
        cands = ctx.unmarked_of_type(t) or _wide_unmarked(ctx)
        if not cands:
            raise NoCandidate("marking invariant broken: nothing unmarked to evict")
        return _least_recent(ctx, cands)
    cands = sorted(eviction_candidates(ctx.state, t))
    if not cands:
        raise NoCandidate(f"no eviction candidate for type {t!r}")
    if kind is PolicyKind.LRU:
        return _least_recent(ctx, cands)
    if kind is PolicyKind.RANDOM:
        return _pick(ctx.rng, cands)
    raise ValueError(f"unhandled policy {kind}")


class Policy:
    """A policy instance bound to one simulation: owns its stream and recency table."""

    def __init__(self, kind: PolicyKind, params: ProblemParams, seed: Optional[int] = 0):
        self.requested_kind = kind
        self.kind = kind.resolve(params)
        self.params = params
        self.seed = seed
        self.rng = random.Random(seed)
        self.last_use: dict = {}

    @property
    def name(self) -> str:
        return self.requested_kind.value

    def on_request(self, index: int, e: Item) -> None:
        self.last_use[e] = index

    def victim(self, state: CacheState, tracker: PhaseTracker, e: Item) -> Item:
        ctx = PolicyContext(state, tracker, self.rng, e, self.last_use)
        return select_victim(self.kind, ctx)
