"""Numba kernels for the exchange Monte Carlo.

Everything in here operates on plain arrays so the hot loop stays in
machine code.  Agents are rows: ``money[i]``, ``goods[i, k]``, a family
code ``fam[i]`` and a parameter row ``par[i, :]``.  In a coupled system
the economy occupies rows ``[0, n_econ)`` and the meter the rest.

Family parameter layout (width 6, unused slots zero):

    CD            [eta, alpha1, alpha2, -, -, -]
    SUBSTITUTES   [eta, alpha, -, -, -, -]
    COMPLEMENTS   [eta, alpha, -, -, -, -]
    SATIABLE      [eta, alpha_g2, c, k, -, -]      (good 1 satiable)
    BAND_SEP/AGG  [eta, alpha, mu1, mu2, -, -]
    IDEP_EXP      [eta, alpha, -, -, -, -]
    IDEP_SIG      [eta, alpha, a, b, -, -]

Outcome sampling uses exact Beta splits whenever both sides of a
commodity block are pure powers; price-band encounters propose once
from the smooth (Beta) part of the density and trade only if the
implied price clears the thresholds of everyone involved, and the
remaining coupled blocks fall back to rejection sampling under a
probe-lattice envelope with a short Metropolis chain as a last resort.
Nothing is updated incrementally: observables are recomputed from the
holdings arrays whenever they are needed.
"""

import numpy as np
from numba import njit

# family codes (must match economy.py encoding)
FAM_CD = 0
FAM_SUBS = 1
FAM_COMPL = 2
FAM_SAT = 3
FAM_BAND_SEP = 4
FAM_BAND_AGG = 5
FAM_IDEP_EXP = 6
FAM_IDEP_SIG = 7

# graph topology codes
TOPO_COMPLETE = 0
TOPO_CIRCLE_EXCL = 1
TOPO_EXPLICIT = 2

# 1-D block weight kinds
W_POWER = 0
W_SAT = 1
W_IDEP_EXP = 2
W_IDEP_SIG = 3

# counter slots
C_ENCOUNTERS = 0
C_TRADES = 1
C_NOTRADE_BAND = 2
C_NOTRADE_EMPTY = 3
C_MH_FALLBACK = 4
C_MH_FAIL = 5
C_ENV_OVERFLOW = 6
C_CROSS_TRADES = 7
N_COUNTERS = 8

_PRICE_EPS = 1e-12  # |g - g'| below this: implied price undefined, reject


@njit(cache=True, inline="always")
def _pow(x, e):
    """x**e with fast paths for the small integer exponents presets use."""
    if e == 0.0:
        return 1.0
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 3.0:
        return x * x * x
    return x ** e


@njit(cache=True, inline="always")
def _sat_u1(g, c, k):
    """Satiable single-good factor: exp(-g^2 / (k(g-c))) above c, else 0."""
    if g <= c:
        return 0.0
    return np.exp(-g * g / (k * (g - c)))


@njit(cache=True, inline="always")
def _idep_factor(x, kind, a, b):
    """Comparison factor U(g - g_n): exponential or sigmoid between b and a."""
    if kind == W_IDEP_EXP:
        return np.exp(x)
    return 0.5 * (a + b) + 0.5 * (a - b) * np.tanh(x)


@njit(cache=True, inline="always")
def _blockw(kind, q0, q1, q2, gn, x):
    """Weight of a 1-D commodity block outcome x for one agent."""
    if kind == W_POWER:
        return _pow(x, q0 - 1.0)
    if kind == W_SAT:
        return _sat_u1(x, q0, q1)
    # interdependent: x^{alpha-1} * U(x - g_n)
    return _pow(x, q0 - 1.0) * _idep_factor(x - gn, kind, q1, q2)


@njit(cache=True)
def _sample_block1(rng, ki, qi0, qi1, qi2, gni, kj, qj0, qj1, qj2, gnj,
                   total, x_cur, divergent, n_probes, safety, max_tries,
                   mh_steps, counters):
    """Sample agent-i share x of a 1-D block with density
    w_i(x) * w_j(total - x) on [0, total].

    Returns (x, status): status 0 = sampled, 1 = empty support,
    2 = Metropolis made no progress.  Both non-zero statuses mean the
    encounter as a whole becomes NoTrade.
    """
    if total <= 0.0:
        return 0.0, 0
    lo = 0.0
    hi = total
    if divergent:
        # utilities diverging at zero holdings: shave the box and reject
        # proposals inside the margin
        eps = 1e-6 * total
        lo = eps
        hi = total - eps
    span = hi - lo
    env = 0.0
    for a in range(n_probes):
        x = lo + (a + 0.5) / n_probes * span
        w = _blockw(ki, qi0, qi1, qi2, gni, x) * \
            _blockw(kj, qj0, qj1, qj2, gnj, total - x)
        if w > env:
            env = w
    if env <= 0.0 or not np.isfinite(env):
        return 0.0, 1
    env *= safety
    for _ in range(max_tries):
        x = lo + rng.random() * span
        w = _blockw(ki, qi0, qi1, qi2, gni, x) * \
            _blockw(kj, qj0, qj1, qj2, gnj, total - x)
        if w > env:
            counters[C_ENV_OVERFLOW] += 1
        if rng.random() * env <= w:
            return x, 0
    # Metropolis fallback: independence chain started at the current split
    counters[C_MH_FALLBACK] += 1
    x0 = x_cur
    if x0 < lo:
        x0 = lo
    elif x0 > hi:
        x0 = hi
    w0 = _blockw(ki, qi0, qi1, qi2, gni, x0) * \
        _blockw(kj, qj0, qj1, qj2, gnj, total - x0)
    moved = False
    for _ in range(mh_steps):
        xp = lo + rng.random() * span
        wp = _blockw(ki, qi0, qi1, qi2, gni, xp) * \
            _blockw(kj, qj0, qj1, qj2, gnj, total - xp)
        if wp <= 0.0:
            continue
        if w0 <= 0.0 or rng.random() * w0 <= wp:
            x0 = xp
            w0 = wp
            moved = True
    if not moved:
        counters[C_MH_FAIL] += 1
        return 0.0, 2
    return x0, 0


@njit(cache=True, inline="always")
def _w_goods2(f, par, x1, x2):
    """Joint weight of the two-good block outcome (x1, x2) for one agent."""
    if f == FAM_CD:
        return _pow(x1, par[1] - 1.0) * _pow(x2, par[2] - 1.0)
    if f == FAM_SUBS:
        return _pow(x1 + x2, par[1] - 1.0)
    if f == FAM_COMPL:
        return _pow(min(x1, x2), par[1] - 1.0)
    if f == FAM_SAT:
        return _sat_u1(x1, par[2], par[3]) * _pow(x2, par[1] - 1.0)
    return 1.0


@njit(cache=True)
def _sample_block2(rng, fi, pari, fj, parj, t1, t2, x1_cur, x2_cur,
                   divergent, n_probes, safety, max_tries, mh_steps,
                   counters):
    """Sample agent-i shares (x1, x2) of a coupled two-good block."""
    if t1 <= 0.0 and t2 <= 0.0:
        return 0.0, 0.0, 0
    lo1 = 0.0
    hi1 = t1
    lo2 = 0.0
    hi2 = t2
    if divergent:
        lo1 = 1e-6 * t1
        hi1 = t1 - lo1
        lo2 = 1e-6 * t2
        hi2 = t2 - lo2
    env = 0.0
    for a in range(n_probes):
        x1 = lo1 + (a + 0.5) / n_probes * (hi1 - lo1)
        for b in range(n_probes):
            x2 = lo2 + (b + 0.5) / n_probes * (hi2 - lo2)
            w = _w_goods2(fi, pari, x1, x2) * \
                _w_goods2(fj, parj, t1 - x1, t2 - x2)
            if w > env:
                env = w
    if env <= 0.0 or not np.isfinite(env):
        return 0.0, 0.0, 1
    env *= safety
    for _ in range(max_tries):
        x1 = lo1 + rng.random() * (hi1 - lo1)
        x2 = lo2 + rng.random() * (hi2 - lo2)
        w = _w_goods2(fi, pari, x1, x2) * \
            _w_goods2(fj, parj, t1 - x1, t2 - x2)
        if w > env:
            counters[C_ENV_OVERFLOW] += 1
        if rng.random() * env <= w:
            return x1, x2, 0
    counters[C_MH_FALLBACK] += 1
    x1 = min(max(x1_cur, lo1), hi1)
    x2 = min(max(x2_cur, lo2), hi2)
    w0 = _w_goods2(fi, pari, x1, x2) * _w_goods2(fj, parj, t1 - x1, t2 - x2)
    moved = False
    for _ in range(mh_steps):
        y1 = lo1 + rng.random() * (hi1 - lo1)
        y2 = lo2 + rng.random() * (hi2 - lo2)
        wp = _w_goods2(fi, pari, y1, y2) * \
            _w_goods2(fj, parj, t1 - y1, t2 - y2)
        if wp <= 0.0:
            continue
        if w0 <= 0.0 or rng.random() * w0 <= wp:
            x1 = y1
            x2 = y2
            w0 = wp
            moved = True
    if not moved:
        counters[C_MH_FAIL] += 1
        return 0.0, 0.0, 2
    return x1, x2, 0


@njit(cache=True, inline="always")
def _band_pair_ok(fi, pari, fj, parj, price):
    """Joint price acceptance for a pair with at least one band agent.

    Every thresholded agent applies its own two-sided band to the
    implied price, in either role: the pair indicator is the product of
    the agents' own band factors, so agents with disjoint bands never
    trade (empty support -> NoTrade).  Role-dependent windows -- the
    seller's lower threshold against the buyer's upper -- look natural
    but pump money systematically from wide-band agents to narrow-band
    ones (each round trip nets the narrow agent the window offset),
    which drains mixed populations without ever reaching a measurable
    steady state.  A symmetric indicator also keeps the encounter
    reversible for any mix of thresholds.
    """
    i_band = fi == FAM_BAND_SEP or fi == FAM_BAND_AGG
    j_band = fj == FAM_BAND_SEP or fj == FAM_BAND_AGG
    if i_band and not (pari[2] <= price <= pari[3]):
        return False
    if j_band and not (parj[2] <= price <= parj[3]):
        return False
    return True


@njit(cache=True)
def _cond_beta(rng, a, b, shift_i, shift_j, total):
    """Draw from x^(a-1) * (total-x)^(b-1) shifted by current holdings:
    density (shift_i + x)^(a-1) * (shift_j + total - x)^(b-1) on [0, total].

    This is a Beta(a, b) variate on [0, shift_i + shift_j + total]
    conditioned on landing inside the window; returns (x, ok).
    """
    span = shift_i + shift_j + total
    for _ in range(64):
        y = rng.beta(a, b) * span
        x = y - shift_i
        if 0.0 <= x <= total:
            return x, True
    return 0.0, False


@njit(cache=True)
def _band_encounter(rng, fi, pari, m_i, g_i, fj, parj, m_j, g_j,
                    counters):
    """Encounter with at least one price-band agent (single-good economy).

    One proposal from the smooth part of the joint density (Beta, or
    window-conditioned Beta for the aggregate form), then a single
    accept/reject on the implied price; an out-of-band proposal is an
    immediate NoTrade.  Retrying out-of-band proposals would sample the
    band-restricted conditional instead, whose normalisation depends on
    the current holdings; that tilts the stationary distribution away
    from the smooth part's product form.  With one shot the proposal
    intensity is state-independent, so the chain is reversible whenever
    the price indicator is symmetric under swapping current and outcome,
    and accepted outcomes still follow the product-of-utilities density.
    Returns (money_i, good_i, status).
    """
    tm = m_i + m_j
    tg = g_i + g_j
    # aggregate-form utilities weight (current + outcome); separable and
    # plain CD counterparts have zero shift
    sm_i = m_i if fi == FAM_BAND_AGG else 0.0
    sg_i = g_i if fi == FAM_BAND_AGG else 0.0
    sm_j = m_j if fj == FAM_BAND_AGG else 0.0
    sg_j = g_j if fj == FAM_BAND_AGG else 0.0
    xm, okm = _cond_beta(rng, pari[0], parj[0], sm_i, sm_j, tm)
    if not okm:
        counters[C_NOTRADE_EMPTY] += 1
        return 0.0, 0.0, 1
    xg, okg = _cond_beta(rng, pari[1], parj[1], sg_i, sg_j, tg)
    if not okg:
        counters[C_NOTRADE_EMPTY] += 1
        return 0.0, 0.0, 1
    dg = g_i - xg
    if dg < _PRICE_EPS and dg > -_PRICE_EPS:
        counters[C_NOTRADE_BAND] += 1  # implied price undefined
        return 0.0, 0.0, 1
    price = (xm - m_i) / dg
    if not _band_pair_ok(fi, pari, fj, parj, price):
        counters[C_NOTRADE_BAND] += 1
        return 0.0, 0.0, 1
    return xm, xg, 0


@njit(cache=True, inline="always")
def _good0_kind(f, par, gn):
    """1-D weight descriptor (kind, q0, q1, q2, gn) for good 0."""
    if f == FAM_SAT:
        return W_SAT, par[2], par[3], 0.0, 0.0
    if f == FAM_IDEP_EXP:
        return W_IDEP_EXP, par[1], 0.0, 0.0, gn
    if f == FAM_IDEP_SIG:
        return W_IDEP_SIG, par[1], par[2], par[3], gn
    # CD / degenerate substitutes / complements: pure power
    return W_POWER, par[1], 0.0, 0.0, 0.0


@njit(cache=True)
def _redistribute_pair(rng, money, goods, fam, par, i, j, gn_i, gn_j,
                       max_tries, mh_steps, n_probes, safety, force_generic,
                       counters):
    """Sample one joint outcome for agents i and j and commit it in place.

    The outcome density is u_i(outcome_i) * u_j(outcome_j) on the
    conservation box.  Commodity blocks that factorise are sampled
    independently; the encounter commits all blocks or none, so a failed
    block (empty support, band exhaustion, Metropolis stall) leaves both
    agents untouched.  Returns 1 on trade, 0 on NoTrade.
    """
    counters[C_ENCOUNTERS] += 1
    ng = goods.shape[1]
    fi = fam[i]
    fj = fam[j]
    pari = par[i]
    parj = par[j]

    if fi == FAM_BAND_SEP or fi == FAM_BAND_AGG or \
            fj == FAM_BAND_SEP or fj == FAM_BAND_AGG:
        xm, xg, st = _band_encounter(rng, fi, pari, money[i], goods[i, 0],
                                     fj, parj, money[j], goods[j, 0],
                                     counters)
        if st != 0:
            return 0
        tm = money[i] + money[j]
        tg = goods[i, 0] + goods[j, 0]
        money[i] = xm
        money[j] = tm - xm
        goods[i, 0] = xg
        goods[j, 0] = tg - xg
        counters[C_TRADES] += 1
        return 1

    # money block: every non-band family is a pure power in money
    tm = money[i] + money[j]
    if tm > 0.0:
        if force_generic:
            xm, st = _sample_block1(
                rng, W_POWER, pari[0], 0.0, 0.0, 0.0,
                W_POWER, parj[0], 0.0, 0.0, 0.0,
                tm, money[i], pari[0] < 1.0 or parj[0] < 1.0,
                n_probes, safety, max_tries, mh_steps, counters)
            if st != 0:
                if st == 1:
                    counters[C_NOTRADE_EMPTY] += 1
                return 0
        else:
            xm = rng.beta(pari[0], parj[0]) * tm
    else:
        xm = 0.0

    if ng == 0:
        money[i] = xm
        money[j] = tm - xm
        counters[C_TRADES] += 1
        return 1

    coupled2 = ng == 2 and (fi == FAM_SUBS or fi == FAM_COMPL or
                            fj == FAM_SUBS or fj == FAM_COMPL)
    if coupled2:
        t1 = goods[i, 0] + goods[j, 0]
        t2 = goods[i, 1] + goods[j, 1]
        div = pari[1] < 1.0 or parj[1] < 1.0 or \
            (fi == FAM_CD and pari[2] < 1.0) or \
            (fj == FAM_CD and parj[2] < 1.0)
        x1, x2, st = _sample_block2(rng, fi, pari, fj, parj, t1, t2,
                                    goods[i, 0], goods[i, 1], div,
                                    n_probes, safety, max_tries, mh_steps,
                                    counters)
        if st != 0:
            if st == 1:
                counters[C_NOTRADE_EMPTY] += 1
            return 0
        money[i] = xm
        money[j] = tm - xm
        goods[i, 0] = x1
        goods[j, 0] = t1 - x1
        goods[i, 1] = x2
        goods[j, 1] = t2 - x2
        counters[C_TRADES] += 1
        return 1

    # factorised goods: good 0 may need the generic sampler (satiable or
    # interdependent factors), further goods are pure powers
    ki, qi0, qi1, qi2, gni = _good0_kind(fi, pari, gn_i)
    kj, qj0, qj1, qj2, gnj = _good0_kind(fj, parj, gn_j)
    t0 = goods[i, 0] + goods[j, 0]
    if ki == W_POWER and kj == W_POWER and not force_generic:
        x0 = rng.beta(qi0, qj0) * t0 if t0 > 0.0 else 0.0
    else:
        div = (ki == W_POWER and qi0 < 1.0) or (kj == W_POWER and qj0 < 1.0) \
            or (ki >= W_IDEP_EXP and qi0 < 1.0) or (kj >= W_IDEP_EXP and qj0 < 1.0)
        x0, st = _sample_block1(rng, ki, qi0, qi1, qi2, gni,
                                kj, qj0, qj1, qj2, gnj,
                                t0, goods[i, 0], div,
                                n_probes, safety, max_tries, mh_steps,
                                counters)
        if st != 0:
            if st == 1:
                counters[C_NOTRADE_EMPTY] += 1
            return 0

    x1 = 0.0
    t1 = 0.0
    if ng == 2:
        # second good: CD exponent alpha2, satiable exponent alpha
        a_i = pari[1] if fi == FAM_SAT else pari[2]
        a_j = parj[1] if fj == FAM_SAT else parj[2]
        t1 = goods[i, 1] + goods[j, 1]
        if force_generic:
            x1, st = _sample_block1(
                rng, W_POWER, a_i, 0.0, 0.0, 0.0,
                W_POWER, a_j, 0.0, 0.0, 0.0,
                t1, goods[i, 1], a_i < 1.0 or a_j < 1.0,
                n_probes, safety, max_tries, mh_steps, counters)
            if st != 0:
                if st == 1:
                    counters[C_NOTRADE_EMPTY] += 1
                return 0
        else:
            x1 = rng.beta(a_i, a_j) * t1 if t1 > 0.0 else 0.0

    money[i] = xm
    money[j] = tm - xm
    goods[i, 0] = x0
    goods[j, 0] = t0 - x0
    if ng == 2:
        goods[i, 1] = x1
        goods[j, 1] = t1 - x1
    counters[C_TRADES] += 1
    return 1


@njit(cache=True, inline="always")
def _gn_of(goods, fam, n_econ, comp_radius, idx):
    """Mean good-0 holding of an agent's comparison neighbourhood.

    Only interdependent economy agents (rows < n_econ) sit on the
    comparison circle; everyone else gets 0, which their weight
    functions ignore.
    """
    if comp_radius <= 0 or idx >= n_econ:
        return 0.0
    f = fam[idx]
    if f != FAM_IDEP_EXP and f != FAM_IDEP_SIG:
        return 0.0
    s = 0.0
    for d in range(1, comp_radius + 1):
        s += goods[(idx - d) % n_econ, 0]
        s += goods[(idx + d) % n_econ, 0]
    return s / (2.0 * comp_radius)


@njit(cache=True)
def _pick_intra(rng, n_econ, topo, topo_r, edges_i, edges_j, edges_cum):
    """One economy-internal pair according to the encounter graph."""
    if topo == TOPO_CIRCLE_EXCL:
        i = rng.integers(0, n_econ)
        off = topo_r + 1 + rng.integers(0, n_econ - 1 - 2 * topo_r)
        return i, (i + off) % n_econ
    if topo == TOPO_EXPLICIT:
        u = rng.random() * edges_cum[-1]
        e = np.searchsorted(edges_cum, u, side="right")
        if e >= edges_i.shape[0]:
            e = edges_i.shape[0] - 1
        return edges_i[e], edges_j[e]
    i = rng.integers(0, n_econ)
    j = rng.integers(0, n_econ - 1)
    if j >= i:
        j += 1
    return i, j


@njit(cache=True)
def advance(rng, money, goods, fam, par, n_econ, topo, topo_r,
            edges_i, edges_j, edges_cum, comp_radius, cross_rate,
            n_encounters, max_tries, mh_steps, n_probes, safety,
            force_generic, counters):
    """Run n_encounters random encounters, mutating holdings in place.

    With a meter attached (rows >= n_econ), a fraction cross_rate of
    encounters are meter<->economy; after each such trade the economy
    agent is restored to its pre-encounter holdings, the difference
    flowing from an unbounded external reserve.  The meter keeps its
    outcome, so it equilibrates against the economy while the economy's
    state -- every agent, not just the totals -- is untouched by the
    measurement.  (Re-injecting the flow elsewhere in the economy would
    distort its distribution faster than slow-mixing economies, e.g.
    narrow price bands, can repair it, and that shows up as a biased
    reading.)  The remaining encounters are split between the two
    subsystems in proportion to their sizes.  Returns 0.
    """
    n_tot = money.shape[0]
    n_meter = n_tot - n_econ
    ng = goods.shape[1]
    p_econ = 0.0
    if n_meter > 0:
        p_econ = cross_rate + (1.0 - cross_rate) * n_econ / n_tot
    for _ in range(n_encounters):
        cross = False
        if n_meter > 0:
            u = rng.random()
            if u < cross_rate:
                cross = True
                i = rng.integers(0, n_econ)
                j = n_econ + rng.integers(0, n_meter)
            elif u < p_econ:
                i, j = _pick_intra(rng, n_econ, topo, topo_r,
                                   edges_i, edges_j, edges_cum)
            else:
                i = n_econ + rng.integers(0, n_meter)
                j = n_econ + rng.integers(0, n_meter - 1)
                if j >= i:
                    j += 1
        else:
            i, j = _pick_intra(rng, n_econ, topo, topo_r,
                               edges_i, edges_j, edges_cum)
        gn_i = _gn_of(goods, fam, n_econ, comp_radius, i)
        gn_j = _gn_of(goods, fam, n_econ, comp_radius, j)
        if cross:
            pm = money[i]
            pg0 = goods[i, 0] if ng > 0 else 0.0
            pg1 = goods[i, 1] if ng > 1 else 0.0
            traded = _redistribute_pair(rng, money, goods, fam, par, i, j,
                                        gn_i, gn_j, max_tries, mh_steps,
                                        n_probes, safety, force_generic,
                                        counters)
            if traded == 1:
                counters[C_CROSS_TRADES] += 1
                money[i] = pm
                if ng > 0:
                    goods[i, 0] = pg0
                if ng > 1:
                    goods[i, 1] = pg1
        else:
            _redistribute_pair(rng, money, goods, fam, par, i, j,
                               gn_i, gn_j, max_tries, mh_steps,
                               n_probes, safety, force_generic, counters)
    return 0


@njit(cache=True)
def measure(rng, money, goods, fam, par, n_econ, topo, topo_r,
            edges_i, edges_j, edges_cum, comp_radius, cross_rate,
            sweep_encounters, burn_sweeps, n_samples, stride_sweeps,
            max_tries, mh_steps, n_probes, safety,
            counters, money_out, goods_out):
    """Burn in the coupled system, then record n_samples meter states.

    A sample at instant s is the mean meter money (money_out[s]) and the
    mean meter holding of each good (goods_out[s, k]), with stride_sweeps
    full sweeps between consecutive samples (one sweep = one encounter
    per agent of the coupled system).  The (beta, nu) values are formed
    from the time average of these means, not per instant: the inverse
    of a per-instant mean is biased upward by the mean's relative
    variance (a fraction of a percent for a hundred-agent meter, worse
    when a slow shared mode correlates the meter agents), while the
    inverse of the run-long average is bias-free to the same order.
    Returns 0.
    """
    n_tot = money.shape[0]
    n_meter = n_tot - n_econ
    ng = goods.shape[1]
    advance(rng, money, goods, fam, par, n_econ, topo, topo_r,
            edges_i, edges_j, edges_cum, comp_radius, cross_rate,
            burn_sweeps * sweep_encounters, max_tries, mh_steps,
            n_probes, safety, False, counters)
    for s in range(n_samples):
        advance(rng, money, goods, fam, par, n_econ, topo, topo_r,
                edges_i, edges_j, edges_cum, comp_radius, cross_rate,
                stride_sweeps * sweep_encounters, max_tries, mh_steps,
                n_probes, safety, False, counters)
        mm = 0.0
        for a in range(n_econ, n_tot):
            mm += money[a]
        money_out[s] = mm / n_meter
        for k in range(ng):
            gg = 0.0
            for a in range(n_econ, n_tot):
                gg += goods[a, k]
            goods_out[s, k] = gg / n_meter
    return 0
