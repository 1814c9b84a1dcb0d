from collections import Counter

import pytest

from compcache.adversaries import (
    AdversaryConfig,
    AdversaryError,
    cruel_paging_adversary,
    gen_uniform,
    gen_zipf,
    tp_distributional_adversary,
    universe,
    zipf_weights,
)
from compcache.harness import Simulation
from compcache.model import ProblemParams
from compcache.policies import PolicyKind


def test_universe_tokens_sort_numerically():
    uni = universe(12, 11)
    assert uni == sorted(uni)
    assert len(set(uni)) == 132
    assert uni[0].type_id == "t00" and uni[-1].item_id == "10"


def test_cruel_every_request_faults_after_warmup():
    params = ProblemParams(1, 1)
    res = cruel_paging_adversary(PolicyKind.DET_MARKING, AdversaryConfig(params, steps=30))
    assert len(res.sigma) == 4 + 30
    sim = Simulation(params, PolicyKind.DET_MARKING).run(res.sigma)
    assert all(ev.fault for ev in sim.events[4:])
    assert res.alg_cost == 34
    assert res.opt_exact


def test_cruel_no_steps():
    for n, k in [(1, 1), (2, 1), (1, 3)]:
        res = cruel_paging_adversary(PolicyKind.DET_MARKING, AdversaryConfig(ProblemParams(n, k), steps=0))
        assert res.alg_cost == (n + 1) * (k + 1) == res.opt_cost


def test_cruel_also_beats_lru():
    res = cruel_paging_adversary(PolicyKind.LRU, AdversaryConfig(ProblemParams(1, 1), steps=300))
    assert res.ratio >= 2.7


def test_cruel_rejects_randomized():
    for kind in (PolicyKind.TP, PolicyKind.CW, PolicyKind.RANDOM):
        with pytest.raises(AdversaryError):
            cruel_paging_adversary(kind, AdversaryConfig(ProblemParams(1, 1), steps=5))


def test_cruel_large_instance_uses_bound():
    res = cruel_paging_adversary(PolicyKind.DET_MARKING, AdversaryConfig(ProblemParams(3, 3), steps=45))
    assert not res.opt_exact
    assert res.opt_cost == 16 + 3


def test_distributional_sanity_window():
    cfg = AdversaryConfig(ProblemParams(1, 1), steps=50, clones=1000, seed=3)
    res = tp_distributional_adversary(PolicyKind.TP1, cfg)
    assert res.phases == 50 and len(res.phase_costs) == 50
    assert 0.75 <= res.per_phase_cost <= 3
    assert res.per_phase_stderr < 0.1


def test_distributional_deterministic_policy_pays_every_phase():
    cfg = AdversaryConfig(ProblemParams(2, 1), steps=20, clones=100)
    res = tp_distributional_adversary(PolicyKind.DET_MARKING, cfg)
    assert res.per_phase_cost >= 1
    assert min(res.phase_costs) >= 1


def test_distributional_needs_clones():
    with pytest.raises(AdversaryError):
        tp_distributional_adversary(PolicyKind.TP, AdversaryConfig(ProblemParams(1, 1), clones=99))


def test_distributional_reproducible():
    cfg = AdversaryConfig(ProblemParams(2, 2), steps=10, clones=100, seed=5)
    a = tp_distributional_adversary(PolicyKind.TP, cfg)
    b = tp_distributional_adversary(PolicyKind.TP, cfg)
    assert a.sigma == b.sigma and a.clone_costs == b.clone_costs


def test_gen_deterministic_and_bounded():
    cfg = AdversaryConfig(ProblemParams(2, 2), steps=500, seed=9, types=4, items_per_type=3)
    a, b = gen_uniform(cfg), gen_uniform(cfg)
    assert a == b and len(a) == 500
    assert set(a) <= set(universe(4, 3))
    assert gen_zipf(cfg) == gen_zipf(cfg)


def test_gen_defaults_follow_params():
    cfg = AdversaryConfig(ProblemParams(2, 3), steps=2000)
    assert set(gen_uniform(cfg)) == set(universe(3, 4))


def test_gen_single_item():
    cfg = AdversaryConfig(ProblemParams(1, 1), steps=50, types=1, items_per_type=1)
    assert len(set(gen_uniform(cfg))) == 1


def test_gen_empty_universe():
    with pytest.raises(AdversaryError):
        gen_uniform(AdversaryConfig(ProblemParams(1, 1), types=0))
    with pytest.raises(ValueError):
        AdversaryConfig(ProblemParams(1, 1), steps=-1)


def test_zipf_frequencies():
    cfg = AdversaryConfig(ProblemParams(1, 1), steps=10**6, seed=2, types=2, items_per_type=5, zipf_s=1.0)
    sigma = gen_zipf(cfg)
    uni = universe(2, 5)
    w = zipf_weights(10, 1.0)
    counts = Counter(sigma)
    for e, p in zip(uni, w):
        assert abs(counts[e] / len(sigma) - p) < 0.01
    chi2 = sum((counts[e] - p * len(sigma)) ** 2 / (p * len(sigma)) for e, p in zip(uni, w))
    assert chi2 < 27.88  # 9 degrees of freedom, p = 0.001
