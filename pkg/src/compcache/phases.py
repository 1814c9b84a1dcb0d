"""Online phase partitioning, marks, and per-phase analysis statistics.

Each request index is *issued during* exactly one phase (the ``D`` ranges,
consecutive) and is *associated with* at most one phase (the ``P`` sets,
possibly interleaved). A type accumulates its pending request indices and
its marked (distinct) items; the phase ends on the request that pushes
the summed per-type excess of marked items over ``k`` above ``n``. At that
point every type with positive excess is closed: its pending indices move
into the current ``P`` and its marks are erased.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .model import Item, ProblemParams


class PhaseError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseEvent:
    phase: int
    phase_ended: bool
    types_closed: frozenset = frozenset()


@dataclass
class PhaseStats:
    """Finalized partition plus the new/stale/hole diagnostics.

    Maps are keyed by ``(type, phase)``; missing keys mean zero (``g``,
    ``ell``) or "type not in the phase". ``i_plus`` uses ``None`` for the
    ``infinity`` convention.
    """

    params: ProblemParams
    i_end: int
    D: list
    P: list
    incomplete: bool
    types: list
    items: list
    g: dict = field(default_factory=dict)
    L: dict = field(default_factory=dict)
    ell: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)
    i_minus: dict = field(default_factory=dict)
    i_plus: dict = field(default_factory=dict)

    @property
    def num_phases(self) -> int:
        return len(self.P)

    def T(self, i: int) -> frozenset:
        """Types of phase ``i`` (1-based); phase 0 and phases past the end are empty."""
        if 1 <= i <= len(self.types):
            return self.types[i - 1]
        return frozenset()

    def I(self, i: int) -> frozenset:
        if 1 <= i <= len(self.items):
            return self.items[i - 1]
        return frozenset()

    def to_dict(self) -> dict:
        def key(ti):
            return f"{ti[0]},{ti[1]}"

        return {
            "n": self.params.n,
            "k": self.params.k,
            "i_end": self.i_end,
            "incomplete_last": self.incomplete,
            "D": [list(d) for d in self.D],
            "P": [list(p) for p in self.P],
            "types_per_phase": [sorted(ts) for ts in self.types],
            "g": {key(ti): v for ti, v in sorted(self.g.items())},
            "ell": {key(ti): v for ti, v in sorted(self.ell.items())},
            "h": {str(i): v for i, v in sorted(self.h.items())},
            "i_minus": {key(ti): v for ti, v in sorted(self.i_minus.items())},
        }


class PhaseTracker:
    """Single-owner, online state of the partitioner.

    Feed requests in order with :meth:`observe`. During phase ``i`` the
    previous phase is already closed, so :meth:`prev_items` and
    :meth:`prev_types` are available to policies.
    """

    def __init__(self, params: ProblemParams):
        self.params = params
        self.phase = 1
        self.marks: dict = {}  # type -> marked items
        self.pending: dict = {}  # type -> pending request indices
        self.excess: dict = {}  # marked items beyond k, nonzero entries only
        self.total_excess = 0
        self.D: list = []  # [first, last] per phase
        self.P: list = []  # closed phases only
        self.P_types: list = []
        self.P_items: list = []
        self.holes: dict = {}
        self.requests: list = []

    @property
    def processed(self) -> int:
        return len(self.requests)

    def observe(self, index: int, e: Item) -> PhaseEvent:
        if index != len(self.requests) + 1:
            raise PhaseError(f"expected index {len(self.requests) + 1}, got {index}")
        k, t0 = self.params.k, e.type_id
        marks0 = self.marks.get(t0)
        size0 = len(marks0) if marks0 else 0
        is_new = not marks0 or e not in marks0
        m_t0 = max(0, size0 + is_new - k)
        total = self.total_excess - self.excess.get(t0, 0) + m_t0

        ended, closed = False, frozenset()
        if total > self.params.n:
            closed = set(self.excess)
            if m_t0 > 0:
                closed.add(t0)
            closed = frozenset(closed)
            assoc = []
            for t in closed:
                assoc.extend(self.pending.pop(t, ()))
                self.marks.pop(t, None)
                self.excess.pop(t, None)
            assoc.sort()
            self.P.append(assoc)
            self.P_items.append(frozenset(self.requests[j - 1] for j in assoc))
            self.P_types.append(closed)
            self.total_excess = sum(self.excess.values())
            self.phase += 1
            ended = True

        if len(self.D) < self.phase:
            self.D.append([index, index])
        else:
            self.D[-1][1] = index
        self.requests.append(e)
        self.pending.setdefault(t0, []).append(index)
        mk = self.marks.setdefault(t0, set())
        mk.add(e)
        ex = max(0, len(mk) - k)
        self.total_excess += ex - self.excess.get(t0, 0)
        if ex:
            self.excess[t0] = ex
        return PhaseEvent(self.phase, ended, closed)

    def is_marked(self, e: Item) -> bool:
        mk = self.marks.get(e.type_id)
        return bool(mk) and e in mk

    def marked_items(self) -> set:
        return set().union(*self.marks.values()) if self.marks else set()

    def marked_overflow(self) -> int:
        return self.total_excess

    def prev_types(self) -> frozenset:
        """Types closed into the previous phase (empty in phase 1)."""
        return self.P_types[self.phase - 2] if self.phase >= 2 else frozenset()

    def prev_items(self) -> frozenset:
        """Items associated with the previous phase (empty in phase 1)."""
        return self.P_items[self.phase - 2] if self.phase >= 2 else frozenset()

    def record_holes(self, i: int, cached) -> int:
        """Update the running hole maximum of phase ``i`` from an issue-time snapshot.

        A hole is an item associated with the previous phase that is not cached.
        """
        ref = self.P_items[i - 2] if i >= 2 else ()
        holes = sum(1 for e in ref if e not in cached)
        self.holes[i] = max(self.holes.get(i, 0), holes)
        return holes

    def finalize(self) -> PhaseStats:
        """Snapshot the statistics. Does not mutate the tracker."""
        return compute_stats(
            self.params,
            self.requests,
            [tuple(d) for d in self.D],
            self.P,
            self.pending,
            self.holes,
        )


def compute_stats(params, requests, D, closed_P, pending, holes) -> PhaseStats:
    k = params.k
    P = [list(p) for p in closed_P]
    i_end = len(P)
    residual = sorted(j for idx in pending.values() for j in idx)
    incomplete = bool(residual)
    if incomplete:
        P.append(residual)
    items = [frozenset(requests[j - 1] for j in p) for p in P]
    types = [frozenset(e.type_id for e in its) for its in items]

    stats = PhaseStats(
        params=params,
        i_end=i_end,
        D=D,
        P=P,
        incomplete=incomplete,
        types=types,
        items=items,
        h={i: holes.get(i, 0) for i in range(1, len(D) + 1)},
    )
    last_seen: dict = {}
    for i, (its, ts) in enumerate(zip(items, types), start=1):
        for t in sorted(ts):
            prev = last_seen.get(t, 0)
            stats.i_minus[(t, i)] = prev
            if prev:
                stats.i_plus[(t, prev)] = i
            L = frozenset(e for e in its if e.type_id == t)
            stats.L[(t, i)] = L
            old = stats.items[prev - 1] if prev else frozenset()
            stats.g[(t, i)] = sum(1 for e in L if e not in old)
            last_seen[t] = i
    for (t, i), L in stats.L.items():
        stats.i_plus.setdefault((t, i), None)
        if i < i_end and t not in types[i]:
            stats.ell[(t, i)] = len(L) - k
        else:
            stats.ell[(t, i)] = 0
    return stats


def partition(requests: Iterable[Item], params: ProblemParams) -> PhaseTracker:
    tracker = PhaseTracker(params)
    for j, e in enumerate(requests, start=1):
        tracker.observe(j, e)
    return tracker


def phase_report(requests: Iterable[Item], params: ProblemParams) -> dict:
    return partition(requests, params).finalize().to_dict()
