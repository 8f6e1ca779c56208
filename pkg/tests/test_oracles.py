"""Closed-form entropy surfaces, free energies, and the reversibility probe.

Frozen constants in this file were cross-checked against independent
constructions: hand-evaluated closed forms, scipy quadrature of the
defining integrals, and analytic stationary points of the Legendre
objective.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from econcal import (CobbDouglas, FreeEnergy, band_conditional_utility,
                     cd_entropy, hetero_cd_entropy,
                     interdependent_exp_entropy, legendre_entropy,
                     power_weight, price_band_cd_equivalence_oracle,
                     reversibility_check)
from econcal.economy import (Complements, ExpComparison, Interdependent,
                             PriceBandAggregate, PriceBandSeparable,
                             SigmoidComparison, Substitutes)
from econcal.errors import ConvergenceError
from econcal.oracles import free_energy, free_energy_gradient


# ---------------------------------------------------------------------------
# closed-form surfaces


def test_cd_entropy_hand_value():
    # n (eta log(M/n) + sum alpha_j log(G_j/n)) at per-capita money 1,
    # per-capita goods 2: 1000 * (0 + 3 log 2 + 3 log 2) = 6000 log 2.
    v = cd_entropy(1000, 3.0, (3.0, 3.0), 1000.0, (2000.0, 2000.0))
    assert v == pytest.approx(6000.0 * math.log(2.0), rel=1e-12)


def test_cd_entropy_one_good():
    v = cd_entropy(500, 2.0, (4.0,), 1000.0, (1500.0,))
    hand = 500 * (2.0 * math.log(2.0) + 4.0 * math.log(3.0))
    assert v == pytest.approx(hand, rel=1e-12)


def test_cd_entropy_length_mismatch():
    with pytest.raises(ValueError):
        cd_entropy(100, 3.0, (3.0, 3.0), 1000.0, (1000.0,))


def test_hetero_cd_entropy_hand_value():
    # Exponent sums: 500*3 + 500*2 = 2500 for money and each good.
    # At M/n = 1 the money term vanishes; S = 2 * 2500 * log 1.5.
    groups = [(500, 3.0, (3.0, 3.0)), (500, 2.0, (2.0, 2.0))]
    v = hetero_cd_entropy(groups, 1000.0, (1500.0, 1500.0))
    assert v == pytest.approx(5000.0 * math.log(1.5), rel=1e-12)


def test_hetero_cd_entropy_homogeneous_matches_cd():
    groups = [(400, 3.0, (3.0, 3.0)), (600, 3.0, (3.0, 3.0))]
    v = hetero_cd_entropy(groups, 900.0, (1100.0, 1300.0))
    assert v == pytest.approx(
        cd_entropy(1000, 3.0, (3.0, 3.0), 900.0, (1100.0, 1300.0)),
        rel=1e-12)


def test_hetero_cd_entropy_length_mismatch():
    with pytest.raises(ValueError):
        hetero_cd_entropy([(100, 3.0, (3.0,))], 1000.0, (1000.0, 1000.0))


def test_interdependent_exp_entropy_hand_value():
    # n (eta log mbar + gbar + alpha log gbar); the linear gbar term is
    # the imprint of the e^(g - g_n) comparison factor.
    v = interdependent_exp_entropy(1000, 3.0, 3.0, 1000.0, 1500.0)
    assert v == pytest.approx(1000.0 * (1.5 + 3.0 * math.log(1.5)),
                              rel=1e-12)


def test_band_oracle_is_band_independent_cd():
    # The band constrains which exchanges happen, not the stationary
    # weight, so the oracle is one-good CD with the same exponents and
    # takes no band parameters at all.
    for m_tot, g_tot in [(800.0, 700.0), (1000.0, 1500.0)]:
        assert price_band_cd_equivalence_oracle(
            200, 3.0, 3.0, m_tot, g_tot) == pytest.approx(
                cd_entropy(200, 3.0, (3.0,), m_tot, (g_tot,)), rel=1e-12)


# ---------------------------------------------------------------------------
# free energies


def test_free_energy_cd_analytic():
    model = FreeEnergy(components=[(700, CobbDouglas(eta=2.5,
                                                     alphas=(3.0, 1.5)))])
    beta, nu = 2.0, (1.5, 0.8)
    hand = 700 * (2.5 * math.log(beta) + 3.0 * math.log(nu[0])
                  + 1.5 * math.log(nu[1]))
    assert free_energy(model, beta, nu) == pytest.approx(hand, rel=1e-12)


def test_free_energy_substitutes_against_quadrature():
    # Independent check: F = -n log(z_money z_goods / Gamma factors),
    # with z evaluated by scipy quadrature of the defining integrals.
    model = FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0))])
    beta, nu = 2.0, np.array([1.5, 1.2])
    v = free_energy(model, beta, nu)
    assert v == pytest.approx(1069.9366404323766, rel=1e-10)  # frozen
    z_m = integrate.quad(lambda m: m ** 2 * np.exp(-beta * m), 0, np.inf)[0]
    z_g = integrate.dblquad(
        lambda g2, g1: (g1 + g2) ** 2 * np.exp(-nu[0] * g1 - nu[1] * g2),
        0, 80, 0, 80)[0]
    ind = -500 * (math.log(z_m) - math.lgamma(3.0)
                  + math.log(z_g) - math.lgamma(3.0))
    assert v == pytest.approx(ind, rel=1e-8)


def test_free_energy_complements_against_quadrature():
    model = FreeEnergy(components=[(500, Complements(eta=3.0, alpha=3.0))])
    beta, nu = 2.0, np.array([1.5, 1.2])
    v = free_energy(model, beta, nu)
    assert v == pytest.approx(2326.865876301261, rel=1e-10)  # frozen
    z_m = integrate.quad(lambda m: m ** 2 * np.exp(-beta * m), 0, np.inf)[0]
    z_g = integrate.dblquad(
        lambda g2, g1: min(g1, g2) ** 2 * np.exp(-nu[0] * g1 - nu[1] * g2),
        0, 80, 0, 80)[0]
    ind = -500 * (math.log(z_m) - math.lgamma(3.0)
                  + math.log(z_g) - math.lgamma(3.0))
    assert v == pytest.approx(ind, rel=1e-5)


def test_free_energy_substitutes_smooth_through_equal_nu():
    # The symmetric axis is served by a series branch; value and
    # derivative must join the exact branch smoothly, else root finding
    # near symmetric populations falls apart.
    model = FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0))])
    f = [free_energy(model, 2.0, (1.5 * (1.0 + u), 1.5))
         for u in (0.0, 1e-9, 1e-6, 5e-4, 9.9e-4, 1.01e-3, 2e-3)]
    assert np.all(np.diff(f) > 0)  # monotone through the branch switch
    # tight straddle of the switch point: the jump between branches must
    # be far below the local variation slope * step
    below = free_energy(model, 2.0, (1.5 * (1.0 + 1e-3 * (1 - 1e-6)), 1.5))
    above = free_energy(model, 2.0, (1.5 * (1.0 + 1e-3 * (1 + 1e-6)), 1.5))
    assert abs(above - below) < 1e-4


def test_free_energy_gradient_matches_finite_differences():
    cases = [
        FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0))]),
        FreeEnergy(components=[(500, Complements(eta=3.0, alpha=3.0))]),
        FreeEnergy(components=[(300, CobbDouglas(eta=2.0, alphas=(3.0, 2.0))),
                               (200, Substitutes(eta=3.0, alpha=2.5))]),
    ]
    h = 1e-6
    for model in cases:
        for beta, nu in [(3.0, (2.0, 2.0)), (2.0, (0.9, 2.7))]:
            nu = np.asarray(nu)
            gb, gn = free_energy_gradient(model, beta, nu)
            fd_b = (free_energy(model, beta + h, nu)
                    - free_energy(model, beta - h, nu)) / (2 * h)
            assert gb == pytest.approx(fd_b, rel=1e-6)
            for j, e in enumerate(np.eye(2)):
                fd = (free_energy(model, beta, nu + h * e)
                      - free_energy(model, beta, nu - h * e)) / (2 * h)
                assert gn[j] == pytest.approx(fd, rel=1e-5)


def test_free_energy_input_validation():
    model = FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0))])
    with pytest.raises(ValueError):
        free_energy(model, 2.0, (1.0,))  # wrong nu length
    with pytest.raises(ValueError):
        free_energy(model, -1.0, (1.0, 1.0))
    with pytest.raises(ValueError):
        free_energy(model, 2.0, (1.0, 0.0))


def test_free_energy_model_validation():
    with pytest.raises(ValueError):
        FreeEnergy(components=[])
    with pytest.raises(ValueError):
        FreeEnergy(components=[
            (100, PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1))])
    with pytest.raises(ValueError):
        FreeEnergy(components=[
            (100, PriceBandAggregate(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1))])
    with pytest.raises(ValueError):
        FreeEnergy(components=[
            (100, Interdependent(eta=3.0, alpha=3.0,
                                 comparison=SigmoidComparison(a=1.5, b=0.5)))])
    with pytest.raises(ValueError):
        FreeEnergy(components=[
            (100, CobbDouglas(eta=3.0, alphas=(3.0, 3.0))),
            (100, CobbDouglas(eta=3.0, alphas=(3.0,)))])
    with pytest.raises(ValueError):
        FreeEnergy(components=[(0, Substitutes(eta=3.0, alpha=3.0))])


def test_nu_shift():
    plain = FreeEnergy(components=[(10, Substitutes(eta=3.0, alpha=3.0))])
    assert np.all(plain.nu_shift == 0.0)
    exp = FreeEnergy(components=[
        (10, Interdependent(eta=3.0, alpha=3.0, comparison=ExpComparison()))])
    assert np.all(exp.nu_shift == 1.0)


# ---------------------------------------------------------------------------
# Legendre bridge


def test_legendre_cd_constancy():
    # The Legendre transform of the CD free energy must reproduce the
    # closed-form surface up to the macro-independent constant
    # n (eta + sum alpha - eta log eta - sum alpha log alpha).
    n, eta, alphas = 1000, 3.0, (3.0, 3.0)
    model = FreeEnergy(components=[(n, CobbDouglas(eta=eta, alphas=alphas))])
    const = n * (eta + sum(alphas) - eta * math.log(eta)
                 - sum(a * math.log(a) for a in alphas))
    diffs = []
    for money in np.linspace(500.0, 2000.0, 5):
        for g1 in np.linspace(500.0, 2000.0, 5):
            for g2 in np.linspace(500.0, 2000.0, 5):
                diffs.append(
                    legendre_entropy(model, money, (g1, g2))
                    - cd_entropy(n, eta, alphas, money, (g1, g2)))
    diffs = np.asarray(diffs)
    assert diffs.max() - diffs.min() <= 1e-6
    assert diffs.mean() == pytest.approx(const, abs=1e-6)


def test_legendre_mixed_population_stationary_point():
    # 500 substitutes + 500 complements, all eta = alpha = 3, symmetric
    # totals: the stationarity conditions solve by hand to beta = 3,
    # nu = 4/3 (sum of component dF/dnu = 2000/nu = 1500).
    model = FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0)),
                                   (500, Complements(eta=3.0, alpha=3.0))])
    s = legendre_entropy(model, 1000.0, (1500.0, 1500.0))
    beta, nu = 3.0, np.array([4.0 / 3.0, 4.0 / 3.0])
    hand = (beta * 1000.0 + float(nu @ (1500.0, 1500.0))
            - free_energy(model, beta, nu))
    assert s == pytest.approx(hand, rel=1e-10)
    assert s == pytest.approx(2409.5938079626567, rel=1e-10)  # frozen
    # seeding must not change the answer
    seeded = legendre_entropy(model, 1000.0, (1500.0, 1500.0),
                              x0=(2.5, (2.0, 2.0)))
    assert seeded == pytest.approx(s, rel=1e-9)


def test_legendre_interdependent_constancy():
    # Exponential-comparison model: stationary nu = 1 + alpha n / G and
    # the transform reproduces interdependent_exp_entropy up to the
    # constant n (eta + alpha - eta log eta - alpha log alpha).
    n, eta, alpha = 1000, 3.0, 3.0
    model = FreeEnergy(components=[
        (n, Interdependent(eta=eta, alpha=alpha,
                           comparison=ExpComparison()))])
    const = n * (eta + alpha - eta * math.log(eta) - alpha * math.log(alpha))
    diffs = []
    for money in np.linspace(600.0, 1800.0, 4):
        for g in np.linspace(600.0, 1800.0, 4):
            diffs.append(legendre_entropy(model, money, (g,))
                         - interdependent_exp_entropy(n, eta, alpha,
                                                      money, g))
    diffs = np.asarray(diffs)
    assert diffs.max() - diffs.min() <= 1e-6
    assert diffs.mean() == pytest.approx(const, abs=1e-6)


def test_legendre_input_validation():
    model = FreeEnergy(components=[(500, Substitutes(eta=3.0, alpha=3.0))])
    with pytest.raises(ValueError):
        legendre_entropy(model, 1000.0, (1000.0,))
    with pytest.raises(ValueError):
        legendre_entropy(model, -1.0, (1000.0, 1000.0))
    with pytest.raises(ValueError):
        legendre_entropy(model, 1000.0, (1000.0, 0.0))


# ---------------------------------------------------------------------------
# reversibility probe


def _power_stationary(eta, alphas):
    w = power_weight(eta, alphas)

    def sw(p):
        return float(w(np.asarray(p, dtype=float)[None, :])[0])

    return sw


def test_reversibility_symmetric_utilities_zero():
    # Unconditional (outcome-only) utilities give a symmetric kernel;
    # detailed balance wrt the product of power weights is exact.
    w = power_weight(3.0, (3.0,))

    def u(outcome, current):
        return w(np.asarray(outcome, dtype=float))

    sw = _power_stationary(3.0, (3.0,))
    rep = reversibility_check(u, u, k=(1.5, 1.5),
                              rng=np.random.default_rng(7),
                              stationary_weight_i=sw, stationary_weight_j=sw)
    assert rep.n_effective == 200
    assert rep.max_violation <= 1e-6


def test_reversibility_identical_bands_zero():
    # Equal thresholds: both roles see the same window in both
    # directions, so even the role-based construction balances.
    u = band_conditional_utility(
        PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1))
    sw = _power_stationary(3.0, (3.0,))
    rep = reversibility_check(u, u, k=(1.5, 1.5),
                              rng=np.random.default_rng(13), n_probes=300,
                              stationary_weight_i=sw, stationary_weight_j=sw)
    assert rep.n_effective == 300
    assert rep.max_violation <= 1e-6


def test_reversibility_disjoint_bands_violated():
    # Role-based windows with disjoint bands: a swap allowed one way is
    # banned the other way, so |A - B| / (A + B) sits at 1 on every
    # effective quadruple -- mean violation far above the 0.5 bar.
    u_low = band_conditional_utility(
        PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.5, mu2=0.6))
    u_high = band_conditional_utility(
        PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.8, mu2=0.9))
    sw = _power_stationary(3.0, (3.0,))
    rep = reversibility_check(u_low, u_high, k=(1.5, 1.5),
                              rng=np.random.default_rng(11), n_probes=300,
                              stationary_weight_i=sw, stationary_weight_j=sw)
    assert rep.n_effective == 300
    assert rep.mean_violation > 0.5
    assert rep.n_skipped > 0  # plenty of quadruples trade in no direction


def test_reversibility_quadrature_guard_raises():
    def spiky(outcome, current):
        c = np.asarray(current, dtype=float)
        return np.exp(30.0 * np.sin(9.0 * c.sum(axis=-1)))

    with pytest.raises(ConvergenceError):
        reversibility_check(spiky, spiky, k=(1.5, 1.5),
                            rng=np.random.default_rng(3),
                            lattice=8, check_lattice=64)


def test_reversibility_input_validation():
    def u(outcome, current):
        return np.ones(np.asarray(outcome).shape[:-1])

    with pytest.raises(ValueError):
        reversibility_check(u, u, k=(0.0, 1.0),
                            rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        reversibility_check(u, u, k=(1.0, 1.0),
                            rng=np.random.default_rng(0),
                            totals=(1.0,))


def test_band_conditional_utility_role_rule():
    # Hand check of the directional window: selling (good decreases)
    # floors the implied price at mu1; buying caps it at mu2.
    u = band_conditional_utility(
        PriceBandSeparable(eta=3.0, alpha=3.0, mu1=0.9, mu2=1.1))
    cur = np.array([1.0, 1.0])
    # sell one good unit at price 1.0 (inside): weight is power form
    out = np.array([2.0, 0.0 + 1e-9])  # price (2-1)/(1-1e-9) ~ 1.0
    assert float(u(out[None, :], cur[None, :])[0]) > 0.0
    # sell at price 0.5 < mu1: banned
    out = np.array([1.5, 0.0 + 1e-9])
    assert float(u(out[None, :], cur[None, :])[0]) == 0.0
    # buy at price 0.5 < mu1 is fine for the buyer (only capped above)
    out = np.array([0.5, 2.0])
    assert float(u(out[None, :], cur[None, :])[0]) > 0.0
    # buy at price 1.5 > mu2: banned
    out = np.array([0.25, 1.5])
    assert float(u(out[None, :], cur[None, :])[0]) == 0.0
    with pytest.raises(TypeError):
        band_conditional_utility(CobbDouglas(eta=3.0, alphas=(3.0,)))


def test_power_weight_values():
    w = power_weight(3.0, (2.0, 4.0))
    pts = np.array([[2.0, 3.0, 1.5], [1.0, 1.0, 1.0]])
    expect = (pts[:, 0] ** 2.0) * (pts[:, 1] ** 1.0) * (pts[:, 2] ** 3.0)
    assert np.allclose(w(pts), expect, rtol=1e-12)
