"""Simulation lab for online caching on the (n,k)-companion cache."""

from .model import (
    CacheState,
    Item,
    ProblemParams,
    apply_request,
    eviction_candidates,
    is_represented,
    needs_eviction,
    overflow,
)
from .oracle import opt_cost, opt_lb_estimate, phase_lower_bound
from .phases import PhaseStats, PhaseTracker, partition
from .policies import Policy, PolicyKind, select_victim
from .harness import SimReport, compare, expect, run

__all__ = [
    "CacheState",
    "Item",
    "Policy",
    "PolicyKind",
    "PhaseStats",
    "PhaseTracker",
    "ProblemParams",
    "SimReport",
    "apply_request",
    "compare",
    "eviction_candidates",
    "expect",
    "is_represented",
    "needs_eviction",
    "opt_cost",
    "opt_lb_estimate",
    "overflow",
    "partition",
    "phase_lower_bound",
    "run",
    "select_victim",
]
