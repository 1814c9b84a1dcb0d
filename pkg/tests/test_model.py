import itertools
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from compcache.model import (
    CacheState,
    Item,
    ModelError,
    ProblemParams,
    apply_request,
    eviction_candidates,
    is_represented,
    items,
    needs_eviction,
    overflow,
)

from oracles import fits_by_assignment


def state(n, k, *tokens):
    return CacheState.of(ProblemParams(n, k), items(*tokens))


def test_params_validation():
    with pytest.raises(ValueError):
        ProblemParams(0, 1)
    with pytest.raises(ValueError):
        ProblemParams(1, 0)
    with pytest.warns(UserWarning):
        ProblemParams(3, 2, m=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ProblemParams(3, 2, m=4)
    assert ProblemParams(3, 2).capacity_ratio == 11


def test_item_order_is_lexicographic():
    a = items("b1", "a2", "a1", "c0")
    assert sorted(a) == items("a1", "a2", "b1", "c0")
    assert Item("a", "1") == Item("a", "1")
    assert Item("a", "1") != Item("b", "1")


@pytest.mark.parametrize(
    "n, k, tokens, expected",
    [
        (3, 2, (), 0),
        (3, 2, ("a1", "a2", "a3", "a4", "b1", "b2", "b3"), 3),
        (1, 1, ("a1", "a2", "b1"), 1),
    ],
)
def test_overflow(n, k, tokens, expected):
    assert overflow(state(n, k, *tokens)) == expected


def test_infeasible_state_rejected():
    with pytest.raises(ModelError):
        state(1, 1, "a1", "a2", "b1", "b2")


def test_is_represented():
    assert not is_represented(state(3, 2), "a")
    assert is_represented(state(3, 2, "a1", "a2", "a3"), "a")
    assert not is_represented(state(3, 2, "a1", "a2"), "a")


def test_needs_eviction():
    (b1,) = items("b1")
    assert not needs_eviction(state(1, 1), b1)
    assert needs_eviction(state(1, 1, "a1", "a2", "b1"), Item("b", "2"))
    assert not needs_eviction(state(1, 1, "a1", "a2"), b1)
    with pytest.raises(ModelError):
        needs_eviction(state(1, 1, "b1"), b1)


def test_eviction_candidates():
    s = state(1, 1, "a1", "a2", "b1")
    assert eviction_candidates(s, "b") == set(items("a1", "a2", "b1"))
    assert eviction_candidates(s, "c") == set(items("a1", "a2"))
    s = state(3, 2, "a1", "a2", "b1", "b2", "c1")
    assert eviction_candidates(s, "a") == set(items("a1", "a2"))


def test_apply_request_hit_and_miss():
    s = state(1, 1, "a1")
    s2, fault = apply_request(s, Item("a", "1"))
    assert s2 is s and not fault
    s3, fault = apply_request(s, Item("b", "1"))
    assert fault and s3.cached == frozenset(items("a1", "b1"))


def test_apply_request_with_victim():
    s = state(1, 1, "a1", "a2", "b1")
    s2, fault = apply_request(s, Item("b", "2"), Item("a", "2"))
    assert fault
    assert s2.cached == frozenset(items("a1", "b1", "b2"))
    assert s2.overflow == 1


def test_apply_request_errors():
    s = state(1, 1, "a1", "a2", "b1")
    b2 = Item("b", "2")
    with pytest.raises(ModelError):
        apply_request(s, b2)
    with pytest.raises(ModelError):
        apply_request(s, b2, Item("z", "9"))
    with pytest.raises(ModelError):
        apply_request(s, b2, b2)
    s = state(1, 1, "a1", "b1")
    with pytest.raises(ModelError):
        # c1 fits without eviction, and b1 is not a candidate anyway
        apply_request(s, Item("c", "1"), Item("b", "1"))
    s = state(1, 1, "a1", "a2", "b1")
    with pytest.raises(ModelError):
        apply_request(s, Item("c", "1"), Item("b", "1"))
    with pytest.raises(ModelError):
        apply_request(s, Item("a", "1"), Item("b", "1"))


def _universe(types, per):
    return [Item(t, str(i)) for t in types for i in range(per)]


@pytest.mark.parametrize("n, k", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_candidates_exhaustive(n, k):
    """Every feasible cached set, every uncached item: removing a candidate makes room,
    removing any other item does not."""
    uni = _universe("abc", k + 2)
    params = ProblemParams(n, k)
    for r in range(len(uni) + 1):
        for subset in itertools.combinations(uni, r):
            if not fits_by_assignment(subset, n, k):
                continue
            s = CacheState.of(params, subset)
            assert s.overflow <= n
            for e in uni:
                if e in s:
                    continue
                grown = set(subset) | {e}
                assert needs_eviction(s, e) == (not fits_by_assignment(grown, n, k))
                if not needs_eviction(s, e):
                    continue
                cands = eviction_candidates(s, e.type_id)
                for v in subset:
                    assert fits_by_assignment(grown - {v}, n, k) == (v in cands)


@st.composite
def request_runs(draw):
    n = draw(st.integers(1, 3))
    k = draw(st.integers(1, 3))
    uni = _universe("abcd"[: draw(st.integers(1, 4))], draw(st.integers(1, k + 2)))
    seq = draw(st.lists(st.sampled_from(uni), max_size=40))
    picks = draw(st.lists(st.integers(0, 10**6), min_size=len(seq), max_size=len(seq)))
    return ProblemParams(n, k), seq, picks


@given(request_runs())
@settings(max_examples=200, deadline=None)
def test_random_runs_stay_feasible(run):
    params, seq, picks = run
    s = CacheState(params)
    faults = 0
    for e, pick in zip(seq, picks):
        victim = None
        if e not in s and needs_eviction(s, e):
            cands = sorted(eviction_candidates(s, e.type_id))
            victim = cands[pick % len(cands)]
        s, fault = apply_request(s, e, victim)
        faults += fault
        assert e in s
        assert fits_by_assignment(s.cached, params.n, params.k) if len(s) <= 10 else True
        assert s.overflow == sum(max(0, c - params.k) for c in s.counts.values())
    assert faults >= len(set(seq))
