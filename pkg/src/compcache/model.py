"""Items, request sequences and the feasibility-constrained cache state.

The cache is modelled as a single set of items. Because items of the same
type can be swapped between the main cache and the companion cache for free,
the physical slot an item occupies never affects cost; only the per-type
counts matter. A set of items fits iff the total per-type excess over ``k``
is at most ``n``.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence


class ModelError(ValueError):
    """Raised on an illegal cache transition."""


@dataclass(frozen=True)
class ProblemParams:
    n: int
    k: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError(f"need n >= 1 and k >= 1, got n={self.n}, k={self.k}")
        if self.m is not None:
            if self.m < 1:
                raise ValueError(f"m must be positive, got {self.m}")
            if self.m <= self.n:
                warnings.warn(
                    f"m={self.m} <= n={self.n}: the companion cache can hold every type",
                    stacklevel=3,
                )

    @property
    def capacity_ratio(self) -> int:
        """Deterministic competitive ratio (n+1)(k+1)-1."""
        return (self.n + 1) * (self.k + 1) - 1


class Item(NamedTuple):
    """A memory item. Ordered lexicographically on ``(type_id, item_id)``."""

    type_id: str
    item_id: str

    def __str__(self):
        return f"{self.type_id}:{self.item_id}"


RequestSequence = Sequence[Item]


def items(*tokens: str) -> list[Item]:
    """Shorthand: ``items("a1", "b2")`` -> ``[Item("a", "1"), Item("b", "2")]``.

    The type is the leading run of letters, the id the remainder.
    """
    out = []
    for tok in tokens:
        split = len(tok) - len(tok.lstrip("abcdefghijklmnopqrstuvwxyz"))
        if split == 0 or split == len(tok):
            raise ValueError(f"cannot split token {tok!r} into type and id")
        out.append(Item(tok[:split], tok[split:]))
    return out


@dataclass(frozen=True)
class CacheState:
    """An immutable feasible set of cached items.

    Per-type counts and the companion overflow are maintained alongside the
    set so that transitions cost O(1) in the number of types.
    """

    params: ProblemParams
    cached: frozenset = frozenset()
    counts: dict = field(default=None, compare=False, repr=False)
    overflow: int = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.counts is None:
            counts = Counter(e.type_id for e in self.cached)
            object.__setattr__(self, "counts", dict(counts))
        if self.overflow is None:
            k = self.params.k
            object.__setattr__(
                self, "overflow", sum(c - k for c in self.counts.values() if c > k)
            )
        if self.overflow > self.params.n:
            raise ModelError(
                f"infeasible cache: overflow {self.overflow} > n={self.params.n}"
            )

    @classmethod
    def of(cls, params: ProblemParams, cached: Iterable[Item]) -> "CacheState":
        return cls(params, frozenset(cached))

    def __contains__(self, e):
        return e in self.cached

    def __len__(self):
        return len(self.cached)

    def count(self, t) -> int:
        return self.counts.get(t, 0)

    def represented_types(self) -> set:
        k = self.params.k
        return {t for t, c in self.counts.items() if c > k}

    def sorted_items(self) -> list[Item]:
        return sorted(self.cached)


def overflow(state: CacheState) -> int:
    """Number of companion slots in use: sum over types of max(0, count - k)."""
    return state.overflow


def is_represented(state: CacheState, t) -> bool:
    return state.count(t) > state.params.k


def needs_eviction(state: CacheState, e: Item) -> bool:
    if e in state.cached:
        raise ModelError(f"{e} is already cached")
    return state.count(e.type_id) >= state.params.k and state.overflow == state.params.n


def eviction_candidates(state: CacheState, t) -> set:
    """Cached items whose removal makes room for an item of type ``t``.

    Removing an item of an unrepresented type other than ``t`` frees a main
    cache slot the new item cannot use, so only type ``t`` itself and the
    represented types qualify.
    """
    k = state.params.k
    return {e for e in state.cached if e.type_id == t or state.counts[e.type_id] > k}


def apply_request(
    state: CacheState, e: Item, victim: Optional[Item] = None
) -> tuple[CacheState, bool]:
    """Serve a request for ``e``; returns the new state and whether it faulted."""
    if e in state.cached:
        if victim is not None:
            raise ModelError(f"victim {victim} given for a hit on {e}")
        return state, False

    counts = dict(state.counts)
    cached = set(state.cached)
    k = state.params.k
    ovf = state.overflow
    if needs_eviction(state, e):
        if victim is None:
            raise ModelError(f"request for {e} needs an eviction but no victim was given")
        if victim == e:
            raise ModelError("the victim cannot be the requested item")
        if victim not in cached:
            raise ModelError(f"victim {victim} is not cached")
        vt = victim.type_id
        if vt != e.type_id and counts[vt] <= k:
            raise ModelError(f"victim {victim} is not an eviction candidate for {e}")
        cached.remove(victim)
        if counts[vt] > k:
            ovf -= 1
        counts[vt] -= 1
        if counts[vt] == 0:
            del counts[vt]
    elif victim is not None:
        raise ModelError(f"victim {victim} given but {e} fits without eviction")

    t = e.type_id
    c = counts.get(t, 0)
    if c >= k:
        ovf += 1
    counts[t] = c + 1
    cached.add(e)
    return CacheState(state.params, frozenset(cached), counts, ovf), True
