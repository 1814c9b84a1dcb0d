import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from compcache.adversaries import universe
from compcache.model import CacheState, Item, ProblemParams, apply_request, items
from compcache.oracle import (
    MAX_DISTINCT,
    InstanceTooLarge,
    opt_cost,
    opt_lb_estimate,
    phase_lower_bound,
)
from compcache.phases import partition

from conftest import WORKED, WORKED_PARAMS
from oracles import belady_faults, brute_force_opt


def test_single_item_repeated():
    assert opt_cost([Item("x", "1")] * 100, ProblemParams(1, 1)).cost == 1


def test_distinct_items_that_fit():
    sigma = items("a1", "a2", "b1", "c1", "c2")
    assert opt_cost(sigma * 3, ProblemParams(1, 2)).cost == 5


def test_two_by_two_example():
    sigma = items("a1", "a2", "b1", "b2") * 2
    res = opt_cost(sigma, ProblemParams(1, 1))
    assert res.cost == 5
    assert res.prefix_costs == [1, 2, 3, 4, 4, 4, 5, 5]


def test_empty_sequence():
    res = opt_cost([], ProblemParams(2, 2))
    assert res.cost == 0 and res.witness == [] and res.prefix_costs == []


def test_too_large():
    sigma = [Item("a", str(i)) for i in range(MAX_DISTINCT + 1)]
    with pytest.raises(InstanceTooLarge):
        opt_cost(sigma, ProblemParams(1, 1))
    opt_cost(sigma[:-1], ProblemParams(1, 1))


def replay(sigma, params, witness):
    s = CacheState(params)
    faults = 0
    for e, v in zip(sigma, witness):
        s, f = apply_request(s, e, v)
        faults += f
    return faults


small_instances = st.builds(
    lambda n, k, ntypes, per, picks: (
        ProblemParams(n, k),
        [universe(ntypes, per)[p % (ntypes * per)] for p in picks],
    ),
    st.integers(1, 2),
    st.integers(1, 2),
    st.integers(1, 3),
    st.integers(1, 3),
    st.lists(st.integers(0, 100), max_size=14),
)


@given(small_instances)
@settings(max_examples=200, deadline=None)
def test_witness_replays_to_cost(case):
    params, sigma = case
    res = opt_cost(sigma, params)
    assert len(res.witness) == len(sigma)
    assert replay(sigma, params, res.witness) == res.cost
    # prefix costs are monotone and end at the total
    assert all(a <= b for a, b in zip(res.prefix_costs, res.prefix_costs[1:]))
    assert (res.prefix_costs[-1] if sigma else 0) == res.cost


@given(small_instances)
@settings(max_examples=60, deadline=None)
def test_matches_brute_force(case):
    params, sigma = case
    sigma = sigma[:8]
    assert opt_cost(sigma, params, witness=False).cost == brute_force_opt(sigma, params.n, params.k)


@pytest.mark.parametrize("n, k", [(1, 1), (2, 1), (1, 2)])
def test_full_universe_is_plain_paging(n, k):
    """With n+1 types of k+1 items every set of all-but-one item fits, so the
    problem is paging with (n+1)(k+1)-1 slots and furthest-in-future is optimal."""
    uni = universe(n + 1, k + 1)
    params = ProblemParams(n, k)
    rng = random.Random(n * 10 + k)
    for _ in range(50):
        sigma = [rng.choice(uni) for _ in range(30)]
        assert opt_cost(sigma, params, witness=False).cost == belady_faults(sigma, params.capacity_ratio)


def test_phase_bound_worked_example():
    assert phase_lower_bound(WORKED, WORKED_PARAMS) == 3
    assert phase_lower_bound(WORKED[:10], WORKED_PARAMS) == 0
    assert phase_lower_bound(WORKED[:11], WORKED_PARAMS) == 1


def test_lb_estimate_worked_example():
    stats = partition(WORKED, WORKED_PARAMS).finalize()
    assert opt_lb_estimate(stats) == Fraction(17, 4)


def test_lb_estimate_empty():
    assert opt_lb_estimate(partition([], ProblemParams(1, 1)).finalize()) == 0


@given(small_instances)
@settings(max_examples=200, deadline=None)
def test_bounds_below_opt(case):
    params, sigma = case
    opt = opt_cost(sigma, params, witness=False).cost
    assert phase_lower_bound(sigma, params) <= opt
    assert opt_lb_estimate(partition(sigma, params).finalize()) <= opt


@given(small_instances, st.lists(st.integers(0, 100), max_size=4))
@settings(max_examples=100, deadline=None)
def test_opt_monotone_under_extension(case, more):
    params, sigma = case
    uni = sorted(set(sigma)) or [Item("a", "0")]
    longer = sigma + [uni[p % len(uni)] for p in more]
    assert opt_cost(sigma, params, witness=False).cost <= opt_cost(longer, params, witness=False).cost


def test_witness_prefers_no_eviction_then_smallest():
    # a3 must evict a1 or a2 (n=1, k=1 already overflowing); neither is requested again
    sigma = items("a1", "a2", "a3")
    res = opt_cost(sigma, ProblemParams(1, 1))
    assert res.witness == [None, None, Item("a", "1")]


def test_exhaustive_tiny_alphabet():
    uni = items("a1", "a2", "b1")
    params = ProblemParams(1, 1)
    for length in range(6):
        for sigma in itertools.product(uni, repeat=length):
            # everything fits: cost is the number of distinct items
            assert opt_cost(list(sigma), params, witness=False).cost == len(set(sigma))
