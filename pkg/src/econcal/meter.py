"""The measuring apparatus: a small Cobb-Douglas economy.

Attaching the meter couples it to the economy under study through a
complete bipartite set of meter<->economy encounters.  After every
cross trade the economy agent is restored to its pre-encounter
holdings, the difference flowing from an unbounded external reserve at
the point of exchange: the meter keeps its outcome and equilibrates
against the economy, while the economy's state -- every agent, hence
every total and the whole distribution -- is untouched by the
measurement.  The meter then reads the economy's marginal values: beta
from eta / (mean meter money), nu_k from alpha_k / (mean meter holding
of good k), both as time averages with batch-means standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .economy import (CobbDouglas, DEFAULT_POLICY, Economy, counters_dict,
                      init_exponent)
from .errors import MeasurementProtocolError, MeterEconomyMismatchError

__all__ = [
    "MeterSpec", "MeasurementProtocol", "MeterReading", "CoupledSystem",
    "attach_meter", "measure_values", "reserve_offset", "batch_means_se",
]


@dataclass(frozen=True)
class MeterSpec:
    """Meter population and exponents.

    The meter is a homogeneous Cobb-Douglas economy; quadratic utilities
    (all exponents 2) keep its readings simple and well-behaved.  When
    initial_money / initial_goods are None, meter agents start at the
    economy's per-agent means, which minimises the equilibration
    transient.  match_values starts them instead at eta / beta and
    alpha_k / nu_k for the values a pure-power economy of the attached
    population would have (beta = sum of money exponents / money total,
    and likewise per good): for economies that exchange wealth slowly --
    narrow price bands -- this puts the meter's slow wealth mode at its
    expected equilibrium from sweep zero instead of asking the
    measurement to relax it.
    """

    n_agents: int = 100
    eta: float = 2.0
    alphas: tuple = (2.0, 2.0)
    initial_money: float | None = None
    initial_goods: tuple | None = None
    match_values: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alphas",
                           tuple(float(a) for a in self.alphas))
        if self.n_agents < 2:
            raise ValueError("meter needs at least 2 agents")
        if not self.eta > 0 or any(a <= 0 for a in self.alphas):
            raise ValueError("meter exponents must be positive")


@dataclass(frozen=True)
class MeasurementProtocol:
    """How long to couple and how often to sample.

    One sweep is one encounter per agent of the coupled system.  A
    fraction cross_rate of encounters are meter<->economy; the rest are
    split between the two subsystems in proportion to their sizes.

    n_repeats > 1 measures the same macro-state on that many
    independently drawn economies and averages the readings.  For
    economies that redistribute wealth freely this buys nothing a longer
    run would not, but when trades barely move wealth (narrow price
    bands) a single population's sampling fluctuations are effectively
    frozen into the run, and averaging over fresh draws is the only way
    to reduce them.
    """

    burn_in_sweeps: int = 500
    n_samples: int = 200
    sample_stride_sweeps: int = 5
    cross_rate: float = 0.2
    n_repeats: int = 1

    def __post_init__(self):
        if self.burn_in_sweeps < 0:
            raise MeasurementProtocolError("burn_in_sweeps must be >= 0")
        if self.n_samples < 10:
            raise MeasurementProtocolError(
                "need at least 10 samples for batch means")
        if self.sample_stride_sweeps < 1:
            raise MeasurementProtocolError(
                "sample_stride_sweeps must be >= 1")
        if not 0.0 < self.cross_rate < 1.0:
            raise MeasurementProtocolError("cross_rate must be in (0, 1)")
        if self.n_repeats < 1:
            raise MeasurementProtocolError("n_repeats must be >= 1")


@dataclass
class MeterReading:
    """Time-averaged (beta, nu) with standard errors.

    flagged means the first- and second-half sample means of some
    quantity disagreed by more than 5 pooled standard errors: the
    coupled system probably had not equilibrated, so the reading is
    suspect.
    """

    beta: float
    se_beta: float
    nu: tuple
    se_nu: tuple
    flagged: bool
    n_samples: int
    diagnostics: dict = field(default_factory=dict)


class CoupledSystem:
    """Economy + meter sharing one holdings array.

    Rows [0, n_econ) are the economy, the rest the meter.  Built by
    attach_meter (which copies the economy, so detaching is just
    discarding the coupled system).
    """

    def __init__(self, economy, meter_spec):
        if len(meter_spec.alphas) != economy.n_goods:
            raise MeterEconomyMismatchError(
                f"meter has {len(meter_spec.alphas)} goods, economy has "
                f"{economy.n_goods}")
        self.n_econ = economy.n_agents
        self.n_meter = meter_spec.n_agents
        self.n_goods = economy.n_goods
        self.meter_spec = meter_spec
        self.economy_specs = economy.specs
        self.graph = economy.graph

        m0 = meter_spec.initial_money
        g0 = meter_spec.initial_goods
        if meter_spec.match_values and m0 is None:
            eta_sum = sum(init_exponent(economy.fam[i], economy.par[i], -1)
                          for i in range(self.n_econ))
            m0 = meter_spec.eta * float(economy.money.sum()) / eta_sum
        if meter_spec.match_values and g0 is None:
            g0 = []
            for k in range(self.n_goods):
                shapes = [init_exponent(economy.fam[i], economy.par[i], k)
                          for i in range(self.n_econ)]
                if any(sh is None for sh in shapes):
                    g0.append(float(economy.goods[:, k].mean()))
                else:
                    g0.append(meter_spec.alphas[k]
                              * float(economy.goods[:, k].sum())
                              / sum(shapes))
        if m0 is None:
            m0 = float(economy.money.mean())
        if g0 is None:
            g0 = economy.goods.mean(axis=0)
        g0 = np.atleast_1d(np.asarray(g0, dtype=float))
        if g0.shape != (self.n_goods,):
            raise MeterEconomyMismatchError(
                "meter initial goods dimension mismatch")

        n_tot = self.n_econ + self.n_meter
        self.money = np.empty(n_tot)
        self.goods = np.empty((n_tot, self.n_goods))
        self.money[:self.n_econ] = economy.money
        self.goods[:self.n_econ] = economy.goods
        self.money[self.n_econ:] = m0
        self.goods[self.n_econ:] = g0

        meter_cd = CobbDouglas(meter_spec.eta, meter_spec.alphas)
        self.fam = np.empty(n_tot, dtype=np.int64)
        self.par = np.empty((n_tot, 6))
        self.fam[:self.n_econ] = economy.fam
        self.par[:self.n_econ] = economy.par
        from .economy import spec_kernel_row
        code, row = spec_kernel_row(meter_cd, self.n_goods)
        self.fam[self.n_econ:] = code
        self.par[self.n_econ:] = row

        self.economy_totals0 = (float(economy.money.sum()),
                                economy.goods.sum(axis=0).copy())

    def economy_view(self):
        """The economy's current state as a standalone Economy."""
        return Economy(self.economy_specs,
                       self.money[:self.n_econ].copy(),
                       self.goods[:self.n_econ].copy(), self.graph)

    def economy_totals(self):
        return (float(self.money[:self.n_econ].sum()),
                self.goods[:self.n_econ].sum(axis=0))

    def meter_means(self):
        return (float(self.money[self.n_econ:].mean()),
                self.goods[self.n_econ:].mean(axis=0))


def attach_meter(economy, meter_spec=None):
    """Couple a fresh copy of the economy to a meter.

    The economy object itself is untouched; the coupled system owns its
    own arrays ("attach then detach without sweeps" is a no-op on the
    economy).
    """
    return CoupledSystem(economy, meter_spec or MeterSpec())


def reserve_offset(vec, agent, pre_value):
    """Undo the economy side of one cross trade for one commodity.

    Restores vec[agent] to its pre-encounter value in place; the
    difference is supplied by (or returned to) an unbounded external
    reserve at the point of exchange.  Because the restoration is exact
    and local, the economy's totals -- and its entire distribution --
    are unaffected by the measurement, whatever the economy's own
    mixing time.  Returns the reserve flow (positive: the reserve paid
    the economy agent back).
    """
    flow = float(pre_value) - float(vec[agent])
    vec[agent] = pre_value
    return flow


def batch_means_se(samples, n_batches=10):
    """Standard error of the mean of a correlated series via batch means."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < n_batches:
        raise ValueError("fewer samples than batches")
    per = n // n_batches
    means = samples[:per * n_batches].reshape(n_batches, per).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def _halves_flag(samples, factor=5.0):
    """True when first/second half means differ by > factor pooled SEs."""
    n = samples.size
    h1, h2 = samples[:n // 2], samples[n // 2:]
    se1 = batch_means_se(h1, 5)
    se2 = batch_means_se(h2, 5)
    pooled = np.hypot(se1, se2)
    diff = abs(h1.mean() - h2.mean())
    if pooled == 0.0:
        return diff > 0.0
    return diff > factor * pooled


def measure_values(coupled, protocol=None, rng=None, policy=None):
    """Run the measurement protocol on a coupled system.

    Burns in, samples the meter's mean money and mean good holdings over
    n_samples instants a stride apart, and reads beta = eta / (run-long
    mean money), nu_k = alpha_k / (run-long mean good k).  Inverting the
    run-long average rather than averaging per-instant inverses avoids
    the upward ratio bias of the latter (the relative variance of an
    instant's hundred-agent mean, amplified when a slow shared mode
    correlates the meter agents).  Standard errors are batch-means
    errors of the sampled means, mapped through the inversion.  The
    meter's state advances; the economy's evolves only through its own
    internal encounters, because every cross trade is undone on the
    economy side from the reserve.
    """
    protocol = protocol or MeasurementProtocol()
    if rng is None:
        rng = np.random.default_rng()
    policy = policy or DEFAULT_POLICY
    topo, r, ei, ej, cum = coupled.graph.kernel_args()
    comp_r = (coupled.graph.comparison_radius
              if coupled.graph.topology == "circle_excluding_comparison"
              else 0)
    counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
    money_s = np.empty(protocol.n_samples)
    goods_s = np.empty((protocol.n_samples, coupled.n_goods))
    alphas = np.asarray(coupled.meter_spec.alphas, dtype=float)
    sweep_enc = coupled.n_econ + coupled.n_meter
    K.measure(rng, coupled.money, coupled.goods, coupled.fam,
              coupled.par, coupled.n_econ, topo, r, ei, ej, cum,
              comp_r, protocol.cross_rate, sweep_enc,
              protocol.burn_in_sweeps, protocol.n_samples,
              protocol.sample_stride_sweeps,
              policy.max_tries, policy.metropolis_steps,
              policy.envelope_probes, policy.envelope_safety,
              counters, money_s, goods_s)
    flagged = _halves_flag(money_s)
    m_bar = float(money_s.mean())
    eta = coupled.meter_spec.eta
    nu = []
    se_nu = []
    for k in range(coupled.n_goods):
        col = goods_s[:, k]
        flagged = flagged or _halves_flag(col)
        g_bar = float(col.mean())
        nu.append(float(alphas[k]) / g_bar)
        se_nu.append(float(alphas[k]) * batch_means_se(col) / g_bar ** 2)
    return MeterReading(
        beta=eta / m_bar,
        se_beta=eta * batch_means_se(money_s) / m_bar ** 2,
        nu=tuple(nu),
        se_nu=tuple(se_nu),
        flagged=bool(flagged),
        n_samples=protocol.n_samples,
        diagnostics={"counters": counters_dict(counters),
                     "meter_money_samples": money_s,
                     "meter_goods_samples": goods_s},
    )
