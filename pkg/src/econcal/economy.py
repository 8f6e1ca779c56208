"""Exchange economies: agents, utility families, encounter graphs.

An economy is a set of agents, each holding money and one or two goods,
plus an encounter graph.  In an encounter two agents pool their
holdings and redistribute them with outcome density proportional to the
product of their utilities, so totals are conserved exactly and
holdings stay non-negative.

Six utility families are supported: Cobb-Douglas, perfect substitutes,
perfect complements, satiable (one good wanted only up to a point),
price-band conditional utilities in a separable and an aggregate form,
and interdependent utilities whose value depends on the mean holdings
of an agent's comparison neighbourhood on a circle.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import DomainBoundaryError, GraphConnectivityError

__all__ = [
    "Holdings", "EncounterContext", "SamplerPolicy",
    "CobbDouglas", "Substitutes", "Complements", "Satiable",
    "PriceBandSeparable", "PriceBandAggregate", "Interdependent",
    "ExpComparison", "SigmoidComparison",
    "EncounterGraph", "build_encounter_graph",
    "Economy", "utility", "sample_cd_split", "sample_outcome_general",
    "encounter", "sweep",
]


@dataclass(frozen=True)
class Holdings:
    """Money plus a tuple of good amounts, all non-negative."""

    money: float
    goods: tuple

    def __post_init__(self):
        object.__setattr__(self, "goods", tuple(float(g) for g in self.goods))
        if self.money < 0 or any(g < 0 for g in self.goods):
            raise ValueError("holdings must be non-negative")


@dataclass(frozen=True)
class EncounterContext:
    """Extra state a utility family may need to evaluate an outcome.

    Price-band families need the agent's current holdings (the implied
    price is relative to them); interdependent agents need the mean
    good holding of their comparison neighbourhood.
    """

    current: Holdings | None = None
    neighbourhood_mean: float | None = None


@dataclass(frozen=True)
class SamplerPolicy:
    """Knobs of the generic outcome sampler.

    Rejection proposals are uniform on the conservation box under an
    envelope taken as the maximum utility product over a probe lattice
    (envelope_probes per axis) times envelope_safety.  After max_tries
    rejections a metropolis_steps-long independence chain started at the
    current holdings takes over; if it never moves, the encounter is
    NoTrade.  force_generic disables the exact Beta shortcuts (used to
    cross-check the generic sampler against them).
    """

    max_tries: int = 200
    metropolis_steps: int = 50
    envelope_probes: int = 16
    envelope_safety: float = 2.0
    force_generic: bool = False


DEFAULT_POLICY = SamplerPolicy()


def _check_pos(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class CobbDouglas:
    """u(m, g) = m^(eta-1) * prod_j g_j^(alpha_j-1)."""

    eta: float
    alphas: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphas",
                           tuple(float(a) for a in self.alphas))
        _check_pos("eta", self.eta)
        if len(self.alphas) not in (1, 2):
            raise ValueError("alphas must have length 1 or 2")
        for a in self.alphas:
            _check_pos("alpha", a)

    @property
    def n_goods(self):
        return len(self.alphas)


@dataclass(frozen=True)
class Substitutes:
    """u(m, g1, g2) = m^(eta-1) * (g1 + g2)^(alpha-1)."""

    eta: float
    alpha: float

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)

    n_goods = 2


@dataclass(frozen=True)
class Complements:
    """u(m, g1, g2) = m^(eta-1) * min(g1, g2)^(alpha-1)."""

    eta: float
    alpha: float

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)

    n_goods = 2


@dataclass(frozen=True)
class Satiable:
    """Good 1 is wanted only around a set-point: the factor
    exp(-g^2 / (k(g-c))) vanishes below c, peaks at 2c and decays for
    large g.  Good 2 and money keep power-law form:
    u = m^(eta-1) * g2^(alpha-1) * U1(g1).
    """

    eta: float
    alpha: float
    c: float = 0.3
    k: float = 0.6

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)
        _check_pos("c", self.c)
        _check_pos("k", self.k)

    n_goods = 2


@dataclass(frozen=True)
class PriceBandSeparable:
    """u(g', m' | g, m) = g'^(alpha-1) * m'^(eta-1) when the implied
    price (m'-m)/(g-g') lies inside the agent's band [mu1, mu2], else 0.

    The band applies to the agent in either role, so a pair's joint
    acceptance is the product of the agents' own band indicators.
    """

    eta: float
    alpha: float
    mu1: float
    mu2: float

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)
        _check_pos("mu1", self.mu1)
        if not self.mu2 > self.mu1:
            raise ValueError("price band requires mu1 < mu2")

    n_goods = 1


@dataclass(frozen=True)
class PriceBandAggregate:
    """Like PriceBandSeparable but weighting current + outcome:
    u(g', m' | g, m) = (g + g')^(alpha-1) * (m + m')^(eta-1) on the band.
    """

    eta: float
    alpha: float
    mu1: float
    mu2: float

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)
        _check_pos("mu1", self.mu1)
        if not self.mu2 > self.mu1:
            raise ValueError("price band requires mu1 < mu2")

    n_goods = 1


@dataclass(frozen=True)
class ExpComparison:
    """U(x) = exp(x): unbounded appetite for out-doing the neighbours."""


@dataclass(frozen=True)
class SigmoidComparison:
    """U(x) = (a e^x + b e^-x) / (e^x + e^-x): saturates between b and a."""

    a: float = 1.5
    b: float = 0.5

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise ValueError("sigmoid comparison requires a > b > 0")


@dataclass(frozen=True)
class Interdependent:
    """u(m, g, g_n) = m^(eta-1) * g^(alpha-1) * U(g - g_n) with g_n the
    mean good holding of the agent's comparison neighbourhood."""

    eta: float
    alpha: float
    comparison: ExpComparison | SigmoidComparison = field(
        default_factory=ExpComparison)

    def __post_init__(self):
        _check_pos("eta", self.eta)
        _check_pos("alpha", self.alpha)

    n_goods = 1


_BAND_FAMILIES = (PriceBandSeparable, PriceBandAggregate)


def spec_kernel_row(spec, n_goods):
    """Encode a utility spec as (family_code, parameter_row) for the
    kernels, checking that it fits an n_goods economy."""
    row = np.zeros(6)
    if isinstance(spec, CobbDouglas):
        if spec.n_goods != n_goods:
            raise ValueError(
                f"CobbDouglas with {spec.n_goods} goods in an "
                f"{n_goods}-good economy")
        row[0] = spec.eta
        row[1] = spec.alphas[0]
        if n_goods == 2:
            row[2] = spec.alphas[1]
        return K.FAM_CD, row
    if isinstance(spec, Substitutes):
        code = K.FAM_SUBS
    elif isinstance(spec, Complements):
        code = K.FAM_COMPL
    elif isinstance(spec, Satiable):
        code = K.FAM_SAT
    elif isinstance(spec, PriceBandSeparable):
        code = K.FAM_BAND_SEP
    elif isinstance(spec, PriceBandAggregate):
        code = K.FAM_BAND_AGG
    elif isinstance(spec, Interdependent):
        code = (K.FAM_IDEP_EXP if isinstance(spec.comparison, ExpComparison)
                else K.FAM_IDEP_SIG)
    else:
        raise TypeError(f"unknown utility spec {spec!r}")
    if spec.n_goods != n_goods:
        raise ValueError(
            f"{type(spec).__name__} requires {spec.n_goods} goods, "
            f"economy has {n_goods}")
    row[0] = spec.eta
    row[1] = spec.alpha
    if code == K.FAM_SAT:
        row[2] = spec.c
        row[3] = spec.k
    elif code in (K.FAM_BAND_SEP, K.FAM_BAND_AGG):
        row[2] = spec.mu1
        row[3] = spec.mu2
    elif code == K.FAM_IDEP_SIG:
        row[2] = spec.comparison.a
        row[3] = spec.comparison.b
    return code, row


def init_exponent(fam_code, par_row, commodity):
    """Per-commodity power exponent used by warm starts.

    commodity -1 is money (every family weights it m**(eta-1)); goods
    are 0-based.  Where the single-holding weight is a pure power this
    is its exponent; the aggregate price-band form, whose stationary
    law is not known in closed form, borrows its separable
    counterpart's exponent as a starting guess.  Returns None where no
    sensible power exists (substitutes and complements aggregate the
    two goods, the satiable appetite good has the exponential cut,
    interdependent agents carry the comparison factor).
    """
    if commodity == -1:
        return float(par_row[0])
    if fam_code == K.FAM_CD:
        return float(par_row[1 + commodity])
    if fam_code in (K.FAM_BAND_SEP, K.FAM_BAND_AGG):
        return float(par_row[1])
    if fam_code == K.FAM_SAT and commodity == 1:
        return float(par_row[1])
    return None


# ---------------------------------------------------------------------------
# encounter graphs

_EMPTY_I = np.empty(0, dtype=np.int64)
_EMPTY_F = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class EncounterGraph:
    """Which agent pairs can meet.

    topology is one of "complete", "circle_excluding_comparison" (all
    pairs except an agent's comparison_radius nearest neighbours on
    each side of a circle) or "explicit" (edge list with positive
    rates; encounters are drawn with probability proportional to rate).
    Built via build_encounter_graph, which enforces connectivity.
    """

    n_agents: int
    topology: str
    comparison_radius: int = 0
    edges: np.ndarray | None = None
    rates: np.ndarray | None = None

    def kernel_args(self):
        if self.topology == "complete":
            return K.TOPO_COMPLETE, 0, _EMPTY_I, _EMPTY_I, _EMPTY_F
        if self.topology == "circle_excluding_comparison":
            return (K.TOPO_CIRCLE_EXCL, self.comparison_radius,
                    _EMPTY_I, _EMPTY_I, _EMPTY_F)
        cum = np.cumsum(self.rates)
        return (K.TOPO_EXPLICIT, 0,
                np.ascontiguousarray(self.edges[:, 0]),
                np.ascontiguousarray(self.edges[:, 1]), cum)

    def edge_count(self):
        n = self.n_agents
        if self.topology == "complete":
            return n * (n - 1) // 2
        if self.topology == "circle_excluding_comparison":
            return n * (n - 1 - 2 * self.comparison_radius) // 2
        return len(self.edges)

    def neighbours(self, i):
        """Trading partners of agent i (used for connectivity checks)."""
        n = self.n_agents
        if self.topology == "complete":
            return [j for j in range(n) if j != i]
        if self.topology == "circle_excluding_comparison":
            r = self.comparison_radius
            return [(i + off) % n for off in range(r + 1, n - r)]
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(int(b))
            elif b == i:
                out.append(int(a))
        return out


def build_encounter_graph(n_agents, topology="complete", *,
                          comparison_radius=1, edges=None):
    """Construct and validate an encounter graph.

    edges, for the explicit topology, is an iterable of (i, j) or
    (i, j, rate) with i != j and rate > 0 (default 1.0).  Raises
    GraphConnectivityError when the resulting graph is not connected,
    since a disconnected economy never equilibrates as a whole.
    """
    if n_agents < 2:
        raise GraphConnectivityError(
            "an economy needs at least 2 agents to trade")
    if topology == "complete":
        return EncounterGraph(n_agents, "complete")
    if topology == "circle_excluding_comparison":
        r = int(comparison_radius)
        if r < 1:
            raise ValueError("comparison_radius must be >= 1")
        if n_agents - 1 - 2 * r < 1:
            raise GraphConnectivityError(
                f"circle of {n_agents} agents excluding {r} neighbours a "
                "side leaves nobody to trade with")
        g = EncounterGraph(n_agents, "circle_excluding_comparison",
                           comparison_radius=r)
    elif topology == "explicit":
        if not edges:
            raise GraphConnectivityError("explicit topology with no edges")
        e = []
        rates = []
        for item in edges:
            if len(item) == 3:
                a, b, rate = item
            else:
                a, b = item
                rate = 1.0
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-edge ({a}, {b}) not allowed")
            if not (0 <= a < n_agents and 0 <= b < n_agents):
                raise ValueError(f"edge ({a}, {b}) out of range")
            if not rate > 0:
                raise ValueError(f"edge ({a}, {b}) rate must be positive")
            e.append((a, b))
            rates.append(float(rate))
        g = EncounterGraph(n_agents, "explicit",
                           edges=np.array(e, dtype=np.int64),
                           rates=np.array(rates))
    else:
        raise ValueError(f"unknown topology {topology!r}")
    # breadth-first search from agent 0
    seen = np.zeros(n_agents, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in g.neighbours(i):
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    if count != n_agents:
        raise GraphConnectivityError(
            f"encounter graph is not connected ({count} of {n_agents} "
            "agents reachable); the economy axioms require a connected "
            "trading graph")
    return g


# ---------------------------------------------------------------------------
# the economy proper


class Economy:
    """Agents (utility specs), their holdings, and an encounter graph.

    Holdings live in structure-of-arrays form (money[n], goods[n, k]) so
    the Monte Carlo kernels can work in place.  Totals are always
    recomputed from the arrays, never tracked incrementally.
    """

    def __init__(self, specs, money, goods, graph=None):
        self.specs = tuple(specs)
        n = len(self.specs)
        self.money = np.ascontiguousarray(money, dtype=np.float64)
        self.goods = np.ascontiguousarray(goods, dtype=np.float64)
        if self.goods.ndim == 1:
            self.goods = self.goods.reshape(n, 1)
        if self.money.shape != (n,) or self.goods.shape[0] != n:
            raise ValueError("holdings arrays do not match agent count")
        if np.any(self.money < 0) or np.any(self.goods < 0):
            raise ValueError("holdings must be non-negative")
        self.n_goods = self.goods.shape[1]
        if graph is None:
            graph = build_encounter_graph(n)
        if graph.n_agents != n:
            raise ValueError("graph sized for a different economy")
        self.graph = graph
        self.fam = np.empty(n, dtype=np.int64)
        self.par = np.empty((n, 6), dtype=np.float64)
        for i, s in enumerate(self.specs):
            code, row = spec_kernel_row(s, self.n_goods)
            self.fam[i] = code
            self.par[i] = row

    @classmethod
    def from_totals(cls, specs, money_total, goods_totals, graph=None):
        """Economy with totals spread proportionally (equal shares)."""
        n = len(specs)
        goods_totals = np.atleast_1d(np.asarray(goods_totals, dtype=float))
        money = np.full(n, money_total / n)
        goods = np.tile(goods_totals / n, (n, 1))
        return cls(specs, money, goods, graph)

    @classmethod
    def from_totals_product(cls, specs, money_total, goods_totals,
                            graph=None, rng=None):
        """Economy with holdings drawn from the product of power weights.

        Money is drawn per agent from Gamma(eta_i) and each good k from
        Gamma(alpha_ik), then every commodity is rescaled to its exact
        total -- a draw from the fixed-total stationary law of a
        pure-power exchange economy.  A commodity for which any agent
        lacks a power exponent (init_exponent returns None) keeps the
        proportional split instead.

        The exchange process reaches this distribution on its own from
        equal shares when trades move wealth freely, so the draw only
        changes how runs start.  It matters for narrow price bands,
        where trades barely move wealth between agents: started from
        equal shares, the wealth spread would need of order
        (band half-width)**-2 sweeps to develop, and a meter coupled
        meanwhile would read the transient, not the economy.
        """
        if rng is None:
            rng = np.random.default_rng()
        n = len(specs)
        goods_totals = np.atleast_1d(np.asarray(goods_totals, dtype=float))
        n_goods = goods_totals.shape[0]
        codes = np.empty(n, dtype=np.int64)
        rows = np.empty((n, 6))
        for i, s in enumerate(specs):
            codes[i], rows[i] = spec_kernel_row(s, n_goods)
        etas = np.array([init_exponent(codes[i], rows[i], -1)
                         for i in range(n)])
        money = rng.gamma(etas)
        money *= money_total / money.sum()
        goods = np.empty((n, n_goods))
        for k in range(n_goods):
            shapes = [init_exponent(codes[i], rows[i], k) for i in range(n)]
            if any(sh is None for sh in shapes):
                goods[:, k] = goods_totals[k] / n
            else:
                col = rng.gamma(np.asarray(shapes))
                goods[:, k] = col * (goods_totals[k] / col.sum())
        return cls(specs, money, goods, graph)

    @property
    def n_agents(self):
        return len(self.specs)

    def totals(self):
        """(money total, goods totals) recomputed from holdings."""
        return float(self.money.sum()), self.goods.sum(axis=0)

    def holdings(self, i):
        return Holdings(float(self.money[i]), tuple(self.goods[i]))

    def copy(self):
        return Economy(self.specs, self.money.copy(), self.goods.copy(),
                       self.graph)

    def comparison_mean(self, i):
        """Mean good-0 holding of agent i's comparison neighbourhood
        (0.0 for agents without one)."""
        if self.graph.topology != "circle_excluding_comparison":
            return 0.0
        if not isinstance(self.specs[i], Interdependent):
            return 0.0
        r = self.graph.comparison_radius
        n = self.n_agents
        s = 0.0
        for d in range(1, r + 1):
            s += self.goods[(i - d) % n, 0] + self.goods[(i + d) % n, 0]
        return s / (2 * r)


# ---------------------------------------------------------------------------
# utility evaluation


def _finite_or_boundary(w, what):
    if not math.isfinite(w):
        raise DomainBoundaryError(
            f"{what} evaluated to a non-finite weight; treat the point as "
            "zero probability")
    return w


def utility(spec, outcome, context=None):
    """Unnormalised utility weight of an outcome for one agent.

    outcome is a Holdings; context supplies whatever the family needs
    (current holdings for price-band families, neighbourhood mean for
    interdependent agents).  Raises DomainBoundaryError when the weight
    is non-finite (e.g. 0^negative at a boundary); samplers treat such
    points as zero probability.
    """
    m = outcome.money
    g = outcome.goods
    with np.errstate(divide="ignore", over="ignore"):
        if isinstance(spec, CobbDouglas):
            if len(g) != spec.n_goods:
                raise ValueError("outcome dimension mismatch")
            w = float(np.float64(m) ** (spec.eta - 1.0))
            for gj, aj in zip(g, spec.alphas):
                w *= float(np.float64(gj) ** (aj - 1.0))
            return _finite_or_boundary(w, "CobbDouglas utility")
        if isinstance(spec, Substitutes):
            w = float(np.float64(m) ** (spec.eta - 1.0)
                      * np.float64(g[0] + g[1]) ** (spec.alpha - 1.0))
            return _finite_or_boundary(w, "Substitutes utility")
        if isinstance(spec, Complements):
            w = float(np.float64(m) ** (spec.eta - 1.0)
                      * np.float64(min(g[0], g[1])) ** (spec.alpha - 1.0))
            return _finite_or_boundary(w, "Complements utility")
        if isinstance(spec, Satiable):
            w = float(np.float64(m) ** (spec.eta - 1.0)
                      * np.float64(g[1]) ** (spec.alpha - 1.0))
            w *= K._sat_u1(g[0], spec.c, spec.k)
            return _finite_or_boundary(w, "Satiable utility")
        if isinstance(spec, _BAND_FAMILIES):
            if context is None or context.current is None:
                raise ValueError(
                    "price-band utilities need current holdings in context")
            cur = context.current
            dg = cur.goods[0] - g[0]
            if abs(dg) < 1e-12:
                return 0.0  # implied price undefined: zero-measure set
            price = (m - cur.money) / dg
            if not spec.mu1 <= price <= spec.mu2:
                return 0.0
            if isinstance(spec, PriceBandSeparable):
                w = float(np.float64(g[0]) ** (spec.alpha - 1.0)
                          * np.float64(m) ** (spec.eta - 1.0))
            else:
                w = float(np.float64(cur.goods[0] + g[0]) ** (spec.alpha - 1.0)
                          * np.float64(cur.money + m) ** (spec.eta - 1.0))
            return _finite_or_boundary(w, "price-band utility")
        if isinstance(spec, Interdependent):
            if context is None or context.neighbourhood_mean is None:
                raise ValueError(
                    "interdependent utilities need neighbourhood_mean in "
                    "context")
            x = g[0] - context.neighbourhood_mean
            if isinstance(spec.comparison, ExpComparison):
                u = math.exp(x)
            else:
                cmp = spec.comparison
                u = 0.5 * (cmp.a + cmp.b) + 0.5 * (cmp.a - cmp.b) * math.tanh(x)
            w = float(np.float64(m) ** (spec.eta - 1.0)
                      * np.float64(g[0]) ** (spec.alpha - 1.0) * u)
            return _finite_or_boundary(w, "interdependent utility")
    raise TypeError(f"unknown utility spec {spec!r}")


# ---------------------------------------------------------------------------
# sampling operations


def sample_cd_split(eta_i, eta_j, total, rng):
    """Exact Cobb-Douglas split of one commodity: agent i's share of
    total is Beta(eta_i, eta_j).  Called independently per commodity."""
    _check_pos("eta_i", eta_i)
    _check_pos("eta_j", eta_j)
    if total < 0:
        raise ValueError("total must be non-negative")
    if total == 0:
        return 0.0, 0.0
    x = rng.beta(eta_i, eta_j) * total
    return x, total - x


def _micro_arrays(spec_i, spec_j, pooled, ctx_i, ctx_j):
    """Two-agent arrays for a single pair redistribution."""
    ng = len(pooled.goods)
    cur_i = ctx_i.current if ctx_i is not None else None
    cur_j = ctx_j.current if ctx_j is not None else None
    needs_current = isinstance(spec_i, _BAND_FAMILIES) or \
        isinstance(spec_j, _BAND_FAMILIES)
    if cur_i is not None and cur_j is not None:
        tot_m = cur_i.money + cur_j.money
        if abs(tot_m - pooled.money) > 1e-9 * max(1.0, pooled.money):
            raise ValueError("contexts' current holdings do not pool to "
                             "the pooled totals")
        money = np.array([cur_i.money, cur_j.money])
        goods = np.array([list(cur_i.goods), list(cur_j.goods)])
    elif needs_current:
        raise ValueError("price-band encounters need both agents' current "
                         "holdings in context")
    else:
        money = np.array([pooled.money / 2, pooled.money / 2])
        goods = np.tile(np.asarray(pooled.goods, dtype=float) / 2, (2, 1))
    if goods.shape != (2, ng):
        raise ValueError("context goods dimension mismatch")
    fam = np.empty(2, dtype=np.int64)
    par = np.empty((2, 6))
    fam[0], par[0] = spec_kernel_row(spec_i, ng)
    fam[1], par[1] = spec_kernel_row(spec_j, ng)
    return money, goods, fam, par


def sample_outcome_general(spec_i, spec_j, pooled, ctx_i, ctx_j, rng,
                           policy=None):
    """Draw one joint outcome with density u_i(x) * u_j(pooled - x) over
    the conservation box.

    Returns (Holdings_i, Holdings_j) or None for NoTrade (empty support,
    exhausted price band, or a stalled Metropolis fallback).
    """
    policy = policy or DEFAULT_POLICY
    money, goods, fam, par = _micro_arrays(spec_i, spec_j, pooled,
                                           ctx_i, ctx_j)
    gn_i = ctx_i.neighbourhood_mean if ctx_i is not None else None
    gn_j = ctx_j.neighbourhood_mean if ctx_j is not None else None
    counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
    traded = K._redistribute_pair(
        rng, money, goods, fam, par, 0, 1,
        float(gn_i or 0.0), float(gn_j or 0.0),
        policy.max_tries, policy.metropolis_steps, policy.envelope_probes,
        policy.envelope_safety, policy.force_generic, counters)
    if traded != 1:
        return None
    return (Holdings(float(money[0]), tuple(goods[0])),
            Holdings(float(money[1]), tuple(goods[1])))


def encounter(economy, i, j, rng, policy=None):
    """Run one encounter between agents i and j, mutating the economy.

    Returns the pair of new Holdings on trade, None on NoTrade.
    """
    policy = policy or DEFAULT_POLICY
    if i == j:
        raise ValueError("an agent cannot trade with itself")
    counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
    traded = K._redistribute_pair(
        rng, economy.money, economy.goods, economy.fam, economy.par,
        i, j, economy.comparison_mean(i), economy.comparison_mean(j),
        policy.max_tries, policy.metropolis_steps, policy.envelope_probes,
        policy.envelope_safety, policy.force_generic, counters)
    if traded != 1:
        return None
    return economy.holdings(i), economy.holdings(j)


def sweep(economy, n_encounters, rng, policy=None):
    """Run n_encounters encounters over the economy's graph in place.

    Edge selection is uniform (rate-weighted for explicit graphs).
    Returns a counter dict (encounters, trades, NoTrade reasons,
    Metropolis fallbacks, envelope overflows).
    """
    policy = policy or DEFAULT_POLICY
    topo, r, ei, ej, cum = economy.graph.kernel_args()
    comp_r = (economy.graph.comparison_radius
              if economy.graph.topology == "circle_excluding_comparison"
              else 0)
    counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
    K.advance(rng, economy.money, economy.goods, economy.fam, economy.par,
              economy.n_agents, topo, r, ei, ej, cum, comp_r, 0.0,
              int(n_encounters), policy.max_tries, policy.metropolis_steps,
              policy.envelope_probes, policy.envelope_safety,
              policy.force_generic, counters)
    return counters_dict(counters)


def counters_dict(counters):
    return {
        "encounters": int(counters[K.C_ENCOUNTERS]),
        "trades": int(counters[K.C_TRADES]),
        "notrade_band": int(counters[K.C_NOTRADE_BAND]),
        "notrade_empty_support": int(counters[K.C_NOTRADE_EMPTY]),
        "metropolis_fallbacks": int(counters[K.C_MH_FALLBACK]),
        "metropolis_failures": int(counters[K.C_MH_FAIL]),
        "envelope_overflows": int(counters[K.C_ENV_OVERFLOW]),
        "cross_trades": int(counters[K.C_CROSS_TRADES]),
    }
