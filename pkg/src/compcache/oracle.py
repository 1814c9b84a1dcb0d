"""Exact offline optimum by dynamic programming over cached sets, and OPT lower bounds.

Only lazy schedules are searched: an optimal schedule never needs to evict
unless the requested item does not fit. States are bitmasks over the
distinct items of the sequence in first-appearance order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import Item, ProblemParams
from .phases import PhaseStats, partition

MAX_DISTINCT = 14


class InstanceTooLarge(ValueError):
    pass


@dataclass
class OptResult:
    cost: int
    witness: Optional[list]  # victim (or None) per request
    states_explored: int
    prefix_costs: list  # optimal cost of each prefix sigma[:j], j = 1..|sigma|

    def to_dict(self) -> dict:
        out = {"cost": self.cost, "states_explored": self.states_explored}
        if self.witness is not None:
            out["witness"] = [None if v is None else [v.type_id, v.item_id] for v in self.witness]
        return out


class _Encoding:
    def __init__(self, sigma: Sequence[Item], params: ProblemParams):
        order: dict = {}
        for e in sigma:
            order.setdefault(e, len(order))
        if len(order) > MAX_DISTINCT:
            raise InstanceTooLarge(
                f"{len(order)} distinct items; the exact oracle handles at most {MAX_DISTINCT}"
            )
        self.params = params
        self.items = list(order)
        self.bit = {e: 1 << i for e, i in order.items()}
        self.type_mask: dict = {}
        for e, b in self.bit.items():
            self.type_mask[e.type_id] = self.type_mask.get(e.type_id, 0) | b
        self.masks = list(self.type_mask.values())
        self.item_type_mask = [self.type_mask[e.type_id] for e in self.items]
        self._overflow: dict = {}

    def overflow(self, s: int) -> int:
        v = self._overflow.get(s)
        if v is None:
            k = self.params.k
            v = 0
            for tm in self.masks:
                c = (s & tm).bit_count()
                if c > k:
                    v += c - k
            self._overflow[s] = v
        return v

    def successors(self, s: int, e: Item):
        """Yield ``(cost, next_state, victim_index_or_None)`` for a lazy step."""
        b = self.bit[e]
        if s & b:
            yield 0, s, None
            return
        k, n = self.params.k, self.params.n
        tm = self.type_mask[e.type_id]
        if (s & tm).bit_count() < k or self.overflow(s) < n:
            yield 1, s | b, None
            return
        rest = s
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            vtm = self.item_type_mask[v]
            if vtm == tm or (s & vtm).bit_count() > k:
                yield 1, (s ^ low) | b, v


def opt_cost(sigma: Sequence[Item], params: ProblemParams, witness: bool = True) -> OptResult:
    """Minimum fault count over all lazy schedules starting from an empty cache.

    With ``witness=True`` also reconstructs the schedule whose victim sequence
    is lexicographically first among the optimal ones (no eviction sorts
    before any item).
    """
    enc = _Encoding(sigma, params)
    layer = {0: 0}
    layers = [layer] if witness else None
    prefix = []
    explored = 1
    for e in sigma:
        nxt: dict = {}
        for s, c in layer.items():
            for dc, s2, _ in enc.successors(s, e):
                c2 = c + dc
                if c2 < nxt.get(s2, c2 + 1):
                    nxt[s2] = c2
        layer = nxt
        explored += len(layer)
        prefix.append(min(layer.values()))
        if witness:
            layers.append(layer)
    cost = prefix[-1] if prefix else 0
    if not witness:
        return OptResult(cost, None, explored, prefix)

    # cost-to-go over the reachable states, backwards
    togo = {s: 0 for s in layers[-1]}
    togos = [togo]
    for j in range(len(sigma) - 1, -1, -1):
        e = sigma[j]
        cur = {}
        for s in layers[j]:
            cur[s] = min(dc + togo[s2] for dc, s2, _ in enc.successors(s, e))
        togo = cur
        togos.append(togo)
    togos.reverse()

    victims = []
    s = 0
    for j, e in enumerate(sigma):
        best = None
        target = togos[j][s]
        for dc, s2, v in enc.successors(s, e):
            if dc + togos[j + 1][s2] != target:
                continue
            key = None if v is None else enc.items[v]
            if best is None or (key is not None and best[0] is not None and key < best[0]):
                best = (key, s2)
        victims.append(best[0])
        s = best[1]
    assert togos[0][0] == cost
    return OptResult(cost, victims, explored, prefix)


def phase_lower_bound(sigma: Sequence[Item], params: ProblemParams) -> int:
    """Number of complete phases: every algorithm faults at least once in each."""
    return partition(sigma, params).phase - 1


def opt_lb_estimate(stats: PhaseStats) -> Fraction:
    """Amortized OPT lower bound: 1/4 of sum over complete phases and their types
    of (new items + stale excess at the type's previous phase)."""
    total = 0
    for i in range(1, stats.i_end + 1):
        for t in stats.T(i):
            prev = stats.i_minus[(t, i)]
            total += stats.g.get((t, i), 0) + stats.ell.get((t, prev), 0)
    return Fraction(total, 4)
