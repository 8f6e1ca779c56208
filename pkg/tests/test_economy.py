"""Agents, utilities, encounter graphs, and the exchange process."""

import math

import numpy as np
import pytest
from scipy import stats

from econcal import (CobbDouglas, Economy, EncounterContext, Holdings,
                     build_encounter_graph, encounter, sample_cd_split,
                     sweep, utility)
from econcal.economy import (Complements, ExpComparison, Interdependent,
                             PriceBandAggregate, PriceBandSeparable,
                             SamplerPolicy, Satiable, SigmoidComparison,
                             Substitutes, sample_outcome_general)
from econcal.errors import DomainBoundaryError, GraphConnectivityError

from conftest import make_cd_economy


# ---------------------------------------------------------------------------
# utility weights


def test_cobb_douglas_utility_value():
    spec = CobbDouglas(eta=3.0, alphas=(2.0, 4.0))
    w = utility(spec, Holdings(money=2.0, goods=(3.0, 4.0)))
    assert w == pytest.approx(4.0 * 3.0 * 64.0, rel=1e-12)


def test_substitutes_utility_value():
    spec = Substitutes(eta=3.0, alpha=3.0)
    w = utility(spec, Holdings(money=2.0, goods=(1.0, 3.0)))
    assert w == pytest.approx(4.0 * 16.0, rel=1e-12)


def test_complements_utility_value():
    spec = Complements(eta=3.0, alpha=3.0)
    w = utility(spec, Holdings(money=2.0, goods=(1.0, 3.0)))
    assert w == pytest.approx(4.0 * 1.0, rel=1e-12)


def test_satiable_utility_value():
    # U1(g) = exp(-g^2 / (k (g - c))) above c, zero at or below; the
    # peak sits at g = 2c with value exp(-4c/k).
    spec = Satiable(eta=3.0, alpha=3.0, c=0.3, k=0.6)
    at_peak = utility(spec, Holdings(money=1.0, goods=(0.6, 1.0)))
    assert at_peak == pytest.approx(math.exp(-2.0), rel=1e-12)
    below = utility(spec, Holdings(money=1.0, goods=(0.2, 1.0)))
    assert below == 0.0
    at_cut = utility(spec, Holdings(money=1.0, goods=(0.3, 1.0)))
    assert at_cut == 0.0
    # power factors multiply in
    scaled = utility(spec, Holdings(money=2.0, goods=(0.6, 3.0)))
    assert scaled == pytest.approx(4.0 * 9.0 * math.exp(-2.0), rel=1e-12)


def test_band_separable_utility_two_sided():
    # The agent's own band applies in both roles: selling below mu1 and
    # buying above mu2 are both rejected, trades inside pass.
    spec = PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1)
    cur = EncounterContext(current=Holdings(money=1.0, goods=(1.0,)))
    # sell 0.5 good for 0.5 money: price 1.0, inside
    inside = utility(spec, Holdings(money=1.5, goods=(0.5,)), cur)
    assert inside == pytest.approx(0.25 * 2.25, rel=1e-12)
    # sell 0.5 good for 0.25 money: price 0.5 < mu1
    assert utility(spec, Holdings(money=1.25, goods=(0.5,)), cur) == 0.0
    # sell 0.5 good for 0.75 money: price 1.5 > mu2 (too dear even as
    # the seller -- the two-sided band rejects it)
    assert utility(spec, Holdings(money=1.75, goods=(0.5,)), cur) == 0.0
    # buy 0.5 good for 0.5 money: price 1.0, inside
    buy = utility(spec, Holdings(money=0.5, goods=(1.5,)), cur)
    assert buy == pytest.approx(2.25 * 0.25, rel=1e-12)
    # buy 0.5 good for 0.75 money: price 1.5 > mu2
    assert utility(spec, Holdings(money=0.25, goods=(1.5,)), cur) == 0.0
    # buy 0.5 good for 0.25 money: price 0.5 < mu1
    assert utility(spec, Holdings(money=0.75, goods=(1.5,)), cur) == 0.0
    # no good moved: implied price undefined, zero weight
    assert utility(spec, Holdings(money=1.2, goods=(1.0,)), cur) == 0.0
    with pytest.raises(ValueError):
        utility(spec, Holdings(money=1.5, goods=(0.5,)))


def test_band_aggregate_utility_weights_current_plus_outcome():
    spec = PriceBandAggregate(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1)
    cur = EncounterContext(current=Holdings(money=1.0, goods=(1.0,)))
    w = utility(spec, Holdings(money=1.5, goods=(0.5,)), cur)
    assert w == pytest.approx((1.0 + 0.5) ** 2 * (1.0 + 1.5) ** 2, rel=1e-12)
    assert utility(spec, Holdings(money=1.25, goods=(0.5,)), cur) == 0.0


def test_interdependent_utility_values():
    exp_spec = Interdependent(eta=3.0, alpha=3.0, comparison=ExpComparison())
    ctx = EncounterContext(neighbourhood_mean=1.5)
    w = utility(exp_spec, Holdings(money=2.0, goods=(2.0,)), ctx)
    assert w == pytest.approx(4.0 * 4.0 * math.exp(0.5), rel=1e-12)

    sig_spec = Interdependent(eta=3.0, alpha=3.0,
                              comparison=SigmoidComparison(a=1.5, b=0.5))
    w = utility(sig_spec, Holdings(money=2.0, goods=(2.0,)), ctx)
    assert w == pytest.approx(4.0 * 4.0 * (1.0 + 0.5 * math.tanh(0.5)),
                              rel=1e-12)
    with pytest.raises(ValueError):
        utility(exp_spec, Holdings(money=2.0, goods=(2.0,)))


def test_utility_domain_boundary():
    spec = CobbDouglas(eta=0.5, alphas=(2.0,))
    with pytest.raises(DomainBoundaryError):
        utility(spec, Holdings(money=0.0, goods=(1.0,)))


def test_spec_validation():
    with pytest.raises(ValueError):
        CobbDouglas(eta=0.0, alphas=(3.0,))
    with pytest.raises(ValueError):
        CobbDouglas(eta=3.0, alphas=(3.0, 3.0, 3.0))
    with pytest.raises(ValueError):
        Substitutes(eta=3.0, alpha=-1.0)
    with pytest.raises(ValueError):
        Satiable(eta=3.0, alpha=3.0, c=0.0, k=0.6)
    with pytest.raises(ValueError):
        PriceBandSeparable(eta=3.0, alpha=3.0, mu1=1.1, mu2=0.9)
    with pytest.raises(ValueError):
        SigmoidComparison(a=0.5, b=1.5)
    with pytest.raises(ValueError):
        Holdings(money=-1.0, goods=(1.0,))


# ---------------------------------------------------------------------------
# encounter graphs


def test_complete_graph():
    g = build_encounter_graph(10)
    assert g.topology == "complete"
    assert g.edge_count() == 45
    assert sorted(g.neighbours(3)) == [i for i in range(10) if i != 3]


def test_circle_excluding_comparison_graph():
    g = build_encounter_graph(10, "circle_excluding_comparison",
                              comparison_radius=2)
    # trade partners are everyone except self and the comparison ring
    assert sorted(g.neighbours(0)) == [3, 4, 5, 6, 7]
    assert sorted(g.neighbours(9)) == [2, 3, 4, 5, 6]


def test_circle_too_small_raises():
    with pytest.raises(GraphConnectivityError):
        build_encounter_graph(5, "circle_excluding_comparison",
                              comparison_radius=2)


def test_explicit_graph_and_connectivity():
    g = build_encounter_graph(4, "explicit",
                              edges=[(0, 1), (1, 2), (2, 3)])
    assert sorted(g.neighbours(1)) == [0, 2]
    with pytest.raises(GraphConnectivityError):
        build_encounter_graph(4, "explicit", edges=[(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        build_encounter_graph(4, "explicit", edges=[(0, 0), (1, 2)])
    with pytest.raises(ValueError):
        build_encounter_graph(4, "explicit", edges=[(0, 1, -2.0)])
    with pytest.raises(GraphConnectivityError):
        build_encounter_graph(1)


def test_unknown_topology():
    with pytest.raises(ValueError):
        build_encounter_graph(10, "smallworld")


# ---------------------------------------------------------------------------
# economy construction


def test_from_totals_exact(rng):
    econ = make_cd_economy(n=100, money=1234.5, goods=(777.0, 999.0))
    money_total, goods_totals = econ.totals()
    assert money_total == pytest.approx(1234.5, rel=1e-12)
    assert goods_totals == pytest.approx([777.0, 999.0], rel=1e-12)


def test_from_totals_product_exact_totals_and_spread(rng):
    specs = [CobbDouglas(eta=3.0, alphas=(3.0, 3.0))] * 400
    econ = Economy.from_totals_product(specs, 1000.0, (800.0, 1200.0),
                                       rng=rng)
    money_total, goods_totals = econ.totals()
    assert money_total == pytest.approx(1000.0, rel=1e-12)
    assert goods_totals == pytest.approx([800.0, 1200.0], rel=1e-12)
    # Gamma(3) rescaled: relative sd of individual money is 1/sqrt(3)
    rel_sd = econ.money.std() / econ.money.mean()
    assert rel_sd == pytest.approx(1.0 / math.sqrt(3.0), abs=0.08)


def test_mismatched_graph_rejected():
    specs = [CobbDouglas(eta=3.0, alphas=(3.0, 3.0))] * 10
    g = build_encounter_graph(11)
    with pytest.raises(ValueError):
        Economy.from_totals(specs, 10.0, (10.0, 10.0), graph=g)


# ---------------------------------------------------------------------------
# exchange process invariants


def test_conservation_and_nonnegativity_mixed_two_goods(rng):
    # 1e6 encounters across four two-good families on one graph.
    specs = ([CobbDouglas(eta=3.0, alphas=(3.0, 3.0))] * 50
             + [Substitutes(eta=3.0, alpha=3.0)] * 50
             + [Complements(eta=3.0, alpha=3.0)] * 50
             + [Satiable(eta=3.0, alpha=3.0, c=0.3, k=0.6)] * 50)
    econ = Economy.from_totals(specs, 200.0, (220.0, 180.0))
    before_money, before_goods = econ.totals()
    counters = sweep(econ, 1_000_000, rng)
    assert counters["encounters"] == 1_000_000
    assert counters["trades"] > 0
    after_money, after_goods = econ.totals()
    assert after_money == pytest.approx(before_money, rel=1e-9)
    assert np.asarray(after_goods) == pytest.approx(np.asarray(before_goods),
                                                    rel=1e-9)
    assert econ.money.min() >= 0.0
    assert econ.goods.min() >= 0.0


def test_conservation_band_families(rng):
    specs = ([PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1)] * 60
             + [PriceBandAggregate(eta=3.0, alpha=3.0, mu1=0.8, mu2=1.2)]
             * 60)
    econ = Economy.from_totals_product(specs, 120.0, (120.0,), rng=rng)
    before_money, before_goods = econ.totals()
    counters = sweep(econ, 200_000, rng)
    assert counters["trades"] > 0
    assert counters["notrade_band"] > 0
    after_money, after_goods = econ.totals()
    assert after_money == pytest.approx(before_money, rel=1e-9)
    assert after_goods[0] == pytest.approx(before_goods[0], rel=1e-9)
    assert econ.money.min() >= 0.0
    assert econ.goods.min() >= 0.0


def test_conservation_interdependent(rng):
    specs = [Interdependent(eta=3.0, alpha=3.0, comparison=ExpComparison())
             ] * 50 + [Interdependent(
                 eta=3.0, alpha=3.0,
                 comparison=SigmoidComparison(a=1.5, b=0.5))] * 50
    g = build_encounter_graph(100, "circle_excluding_comparison",
                              comparison_radius=1)
    econ = Economy.from_totals(specs, 100.0, (100.0,), graph=g)
    before_money, before_goods = econ.totals()
    sweep(econ, 200_000, rng)
    after_money, after_goods = econ.totals()
    assert after_money == pytest.approx(before_money, rel=1e-9)
    assert after_goods[0] == pytest.approx(before_goods[0], rel=1e-9)
    assert econ.money.min() >= 0.0
    assert econ.goods.min() >= 0.0


def test_disjoint_bands_never_trade(rng):
    specs = ([PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.5, mu2=0.6)] * 10
             + [PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.8, mu2=0.9)]
             * 10)
    econ = Economy.from_totals(specs, 20.0, (20.0,))
    counters = sweep(econ, 20_000, rng)
    # same-band pairs trade; cross-band pairs cannot satisfy both
    # indicators at once, so band rejections must show up
    assert counters["notrade_band"] > 0
    i, j = 0, 10  # one agent from each band
    for _ in range(200):
        assert encounter(econ, i, j, rng) is None


def test_two_agent_cd_split_is_beta(rng):
    # Two CD agents pool everything each encounter; agent 0's money
    # share is an exact Beta(eta_0, eta_1) draw, independent each time.
    specs = [CobbDouglas(eta=2.5, alphas=(2.0,)),
             CobbDouglas(eta=1.5, alphas=(3.0,))]
    econ = Economy.from_totals(specs, 2.0, (2.0,))
    shares = np.empty(20_000)
    for t in range(len(shares)):
        encounter(econ, 0, 1, rng)
        shares[t] = econ.money[0] / 2.0
    d, p = stats.kstest(shares, stats.beta(2.5, 1.5).cdf)
    assert d < 0.02
    assert p > 1e-4


def test_generic_sampler_matches_exact_cd(rng):
    # The generic envelope sampler must reproduce the exact conditional
    # Beta split of a CD pair: two-sample KS below 0.02.
    specs = [CobbDouglas(eta=3.0, alphas=(2.0,)),
             CobbDouglas(eta=2.0, alphas=(3.0,))]
    n = 20_000

    def run(policy):
        econ = Economy.from_totals(specs, 2.0, (2.0,))
        out = np.empty(n)
        for t in range(n):
            encounter(econ, 0, 1, rng, policy=policy)
            out[t] = econ.money[0] / 2.0
        return out

    exact = run(None)
    generic = run(SamplerPolicy(force_generic=True))
    d, p = stats.ks_2samp(exact, generic)
    assert d < 0.02
    assert p > 1e-4


def test_sample_outcome_general_runs_for_band_pair(rng):
    spec = PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1)
    cur_i = Holdings(money=1.2, goods=(0.8,))
    cur_j = Holdings(money=0.8, goods=(1.2,))
    pooled = Holdings(money=2.0, goods=(2.0,))
    got_trade = False
    for _ in range(200):
        out = sample_outcome_general(spec, spec, pooled,
                                     EncounterContext(current=cur_i),
                                     EncounterContext(current=cur_j), rng)
        if out is None:
            continue
        got_trade = True
        h_i, h_j = out
        assert h_i.money + h_j.money == pytest.approx(2.0, rel=1e-9)
        assert h_i.goods[0] + h_j.goods[0] == pytest.approx(2.0, rel=1e-9)
        dg = cur_i.goods[0] - h_i.goods[0]
        if abs(dg) > 1e-12:
            price = (h_i.money - cur_i.money) / dg
            assert 0.9 <= price <= 1.1
    assert got_trade


def test_determinism_same_seed():
    specs = ([CobbDouglas(eta=3.0, alphas=(3.0, 3.0))] * 30
             + [Substitutes(eta=3.0, alpha=3.0)] * 30)

    def run(seed):
        econ = Economy.from_totals(specs, 60.0, (60.0, 60.0))
        sweep(econ, 30_000, np.random.default_rng(seed))
        return econ.money.copy(), econ.goods.copy()

    m1, g1 = run(42)
    m2, g2 = run(42)
    m3, _ = run(43)
    assert np.array_equal(m1, m2)
    assert np.array_equal(g1, g2)
    assert not np.array_equal(m1, m3)


def test_encounter_self_trade_rejected(rng):
    econ = make_cd_economy(n=5)
    with pytest.raises(ValueError):
        encounter(econ, 2, 2, rng)


def test_sample_cd_split_moments(rng):
    x = np.array([sample_cd_split(2.0, 3.0, 10.0, rng)[0]
                  for _ in range(20_000)])
    assert x.mean() == pytest.approx(4.0, abs=0.05)
    assert x.var() == pytest.approx(10.0 ** 2 * 6.0 / (25.0 * 6.0), rel=0.1)
    a, b = sample_cd_split(2.0, 3.0, 0.0, rng)
    assert a == b == 0.0
    with pytest.raises(ValueError):
        sample_cd_split(-1.0, 3.0, 10.0, rng)
    with pytest.raises(ValueError):
        sample_cd_split(2.0, 3.0, -1.0, rng)


def test_copy_is_independent(rng):
    econ = make_cd_economy(n=20)
    clone = econ.copy()
    sweep(econ, 5_000, rng)
    assert not np.array_equal(econ.money, clone.money)
    money_total, _ = clone.totals()
    assert money_total == pytest.approx(1000.0, rel=1e-12)


def test_comparison_mean(rng):
    specs = [Interdependent(eta=3.0, alpha=3.0)] * 6
    g = build_encounter_graph(6, "circle_excluding_comparison",
                              comparison_radius=1)
    goods = np.arange(1.0, 7.0).reshape(6, 1)
    econ = Economy(specs, np.ones(6), goods, graph=g)
    # neighbours of agent 0 on the comparison ring are agents 1 and 5
    assert econ.comparison_mean(0) == pytest.approx((2.0 + 6.0) / 2.0)
    assert econ.comparison_mean(3) == pytest.approx((3.0 + 5.0) / 2.0)
