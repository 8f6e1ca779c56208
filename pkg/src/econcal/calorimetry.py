"""Entropy calorimetry over a grid of macro-states.

For every node (M, G_1[, G_2]) of a macro-state grid a fresh economy is
built, a meter attached, and (beta, nu) measured.  Entropy differences
along grid edges are the trapezoid rule applied to dS = beta dM +
sum_j nu_j dG_j; a least-squares fit of node entropies to all edge
increments (reference node pinned) recovers the surface S up to the
chosen reference value.  The residual of that fit is the path-
independence diagnostic: a conservative field fits with tiny residual,
noise and genuine curl do not cancel.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import multiprocessing
import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import EconCalError, NotAdjacentError, SingularSystemError
from .meter import MeterSpec, MeasurementProtocol, attach_meter, measure_values

__all__ = [
    "MacroGrid", "EntropyField", "ConcavityReport", "PureMoneyReport",
    "grid_sweep", "edge_increment", "fit_entropy", "goodness_of_agreement",
    "concavity_check", "pure_money_check",
]


@dataclass(frozen=True)
class MacroGrid:
    """Cartesian grid of macro-states.

    Axis 0 is total money (often a single fixed value), the remaining
    axes are totals of each good.  Axis values are strictly increasing
    and positive.  The reference node carries the gauge: the fitted
    surface is pinned to reference_entropy there.
    """

    money_values: np.ndarray
    goods_values: tuple
    reference_node: tuple | None = None
    reference_entropy: float = 0.0

    def __post_init__(self):
        mv = np.atleast_1d(np.asarray(self.money_values, dtype=float))
        gv = tuple(np.atleast_1d(np.asarray(g, dtype=float))
                   for g in self.goods_values)
        object.__setattr__(self, "money_values", mv)
        object.__setattr__(self, "goods_values", gv)
        if len(gv) not in (1, 2):
            raise ValueError("grid needs 1 or 2 goods axes")
        for ax in (mv,) + gv:
            if np.any(ax <= 0):
                raise ValueError("axis values must be positive")
            if np.any(np.diff(ax) <= 0):
                raise ValueError("axis values must be strictly increasing")
        ref = self.reference_node
        if ref is None:
            ref = (0,) * (1 + len(gv))
        ref = tuple(int(r) for r in ref)
        if len(ref) != 1 + len(gv) or any(
                not 0 <= r < s for r, s in zip(ref, self.shape)):
            raise ValueError(f"reference node {ref} outside grid")
        object.__setattr__(self, "reference_node", ref)

    @property
    def axes(self):
        return (self.money_values,) + self.goods_values

    @property
    def axis_names(self):
        return ("M",) + tuple(f"G{k + 1}" for k in range(len(self.goods_values)))

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def n_goods(self):
        return len(self.goods_values)

    @property
    def n_nodes(self):
        return int(np.prod(self.shape))

    def nodes(self):
        return np.ndindex(self.shape)

    def node_totals(self, idx):
        """(money_total, goods_totals array) at a node index."""
        return (float(self.money_values[idx[0]]),
                np.array([g[i] for g, i in
                          zip(self.goods_values, idx[1:])]))


@dataclass
class EntropyField:
    """Meter readings over a grid, plus (after fitting) the surface.

    beta/nu/se arrays are indexed by node; nu has a trailing goods axis.
    flags marks nodes whose measurement failed the equilibration
    heuristic.  S_fit, rss, tss, goodness_of_fit and the node covariance
    S_cov are filled in by fit_entropy; S_oracle may be attached by the
    experiment layer.
    """

    grid: MacroGrid
    beta: np.ndarray
    se_beta: np.ndarray
    nu: np.ndarray
    se_nu: np.ndarray
    flags: np.ndarray
    S_fit: np.ndarray | None = None
    rss: float | None = None
    tss: float | None = None
    goodness_of_fit: float | None = None
    S_cov: np.ndarray | None = None
    S_oracle: np.ndarray | None = None
    diagnostics: dict = dc_field(default_factory=dict)

    @classmethod
    def empty(cls, grid):
        shape = grid.shape
        return cls(grid=grid,
                   beta=np.full(shape, np.nan),
                   se_beta=np.full(shape, np.nan),
                   nu=np.full(shape + (grid.n_goods,), np.nan),
                   se_nu=np.full(shape + (grid.n_goods,), np.nan),
                   flags=np.zeros(shape, dtype=bool))


def _measure_node(factory, meter_spec, protocol, policy, seed, lin_idx,
                  totals):
    """Worker: build a fresh economy at one grid node and measure it.

    The RNG stream is derived from (seed, node index), so results do not
    depend on which worker, or how many workers, ran the node.  With
    protocol.n_repeats > 1 the node is measured on that many fresh
    economies drawn from the same stream, and the readings are averaged
    (standard error from the scatter across repeats, which includes
    both sampling noise and draw-to-draw variation).
    """
    money_total, goods_totals = totals
    rng = np.random.default_rng(np.random.SeedSequence((seed, lin_idx)))
    betas, nus, se_b0, se_nu0 = [], [], None, None
    n_flagged = 0
    counters = None
    try:
        for _ in range(protocol.n_repeats):
            if getattr(factory, "wants_rng", False):
                economy = factory(money_total, goods_totals, rng=rng)
            else:
                economy = factory(money_total, goods_totals)
            coupled = attach_meter(economy, meter_spec)
            reading = measure_values(coupled, protocol, rng, policy)
            betas.append(reading.beta)
            nus.append(reading.nu)
            n_flagged += int(reading.flagged)
            if se_b0 is None:
                se_b0, se_nu0 = reading.se_beta, reading.se_nu
            c = reading.diagnostics["counters"]
            if counters is None:
                counters = dict(c)
            else:
                for key, val in c.items():
                    counters[key] += val
    except EconCalError as exc:
        exc.args = (f"at grid node {lin_idx} (M={money_total}, "
                    f"G={goods_totals}): {exc}",)
        raise
    # A slow shared mode trips an occasional repeat's halves check even
    # in equilibrium; only a majority of flagged repeats marks the node.
    r = len(betas)
    flagged = 2 * n_flagged > r
    if r == 1:
        return (lin_idx, betas[0], se_b0, nus[0], se_nu0, flagged, counters)
    b = np.asarray(betas)
    nu_arr = np.asarray(nus)
    return (lin_idx, float(b.mean()), float(b.std(ddof=1) / math.sqrt(r)),
            tuple(nu_arr.mean(axis=0)),
            tuple(nu_arr.std(axis=0, ddof=1) / math.sqrt(r)),
            flagged, counters)


def grid_sweep(economy_factory, grid, meter=None, protocol=None, seed=0,
               parallelism=1, policy=None):
    """Measure (beta, nu) at every node of the grid.

    economy_factory(money_total, goods_totals) must build a fresh
    economy at the given totals (and must be picklable when parallelism
    > 1); a factory with a truthy wants_rng attribute is also passed the
    node's generator (rng=...), so stochastic initial allocations stay
    deterministic per node.  Node tasks are independent: each gets its
    own generator seeded by (seed, node index), so any worker count
    gives identical readings.
    """
    meter = meter or MeterSpec()
    protocol = protocol or MeasurementProtocol()
    field = EntropyField.empty(grid)
    tasks = [(int(np.ravel_multi_index(idx, grid.shape)), idx,
              grid.node_totals(idx)) for idx in grid.nodes()]
    counters_total = {}
    if parallelism > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=parallelism,
                                 mp_context=ctx) as pool:
            futures = [pool.submit(_measure_node, economy_factory, meter,
                                   protocol, policy, seed, lin, totals)
                       for lin, _, totals in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_measure_node(economy_factory, meter, protocol, policy,
                                 seed, lin, totals)
                   for lin, _, totals in tasks]
    by_lin = {r[0]: r for r in results}
    for lin, idx, _ in tasks:
        _, beta, se_beta, nu, se_nu, flagged, counters = by_lin[lin]
        field.beta[idx] = beta
        field.se_beta[idx] = se_beta
        field.nu[idx] = nu
        field.se_nu[idx] = se_nu
        field.flags[idx] = flagged
        for key, v in counters.items():
            counters_total[key] = counters_total.get(key, 0) + v
    field.diagnostics["counters"] = counters_total
    return field


def _grid_edges(grid):
    """All axis-aligned nearest-neighbour node pairs (a, b), b above a."""
    shape = grid.shape
    edges = []
    for axis in range(len(shape)):
        if shape[axis] < 2:
            continue
        for idx in np.ndindex(shape):
            if idx[axis] + 1 < shape[axis]:
                nxt = list(idx)
                nxt[axis] += 1
                edges.append((idx, tuple(nxt), axis))
    return edges


def edge_increment(field, node_a, node_b, rule="trapezoid"):
    """Entropy increment from node_a to node_b.

    The nodes must be adjacent along one axis; the trapezoid increment
    is (mean beta) dM + sum_j (mean nu_j) dG_j, which for an axis-
    aligned edge has a single non-zero term.  rule="one_sided" uses the
    starting node's reading alone (first-order rule, for comparison).
    """
    a = tuple(int(i) for i in node_a)
    b = tuple(int(i) for i in node_b)
    diffs = [(ax, ib - ia) for ax, (ia, ib) in enumerate(zip(a, b))
             if ia != ib]
    if len(diffs) != 1 or abs(diffs[0][1]) != 1:
        raise NotAdjacentError(
            f"nodes {a} and {b} are not axis-adjacent on the grid")
    axis, step = diffs[0]
    delta = field.grid.axes[axis][b[axis]] - field.grid.axes[axis][a[axis]]
    if axis == 0:
        ya, yb = field.beta[a], field.beta[b]
    else:
        ya, yb = field.nu[a + (axis - 1,)], field.nu[b + (axis - 1,)]
    if rule == "trapezoid":
        mean = 0.5 * (ya + yb)
    elif rule == "one_sided":
        mean = ya
    else:
        raise ValueError(f"unknown integration rule {rule!r}")
    return float(mean * delta)


def _edge_variance(field, a, b, axis):
    delta = field.grid.axes[axis][b[axis]] - field.grid.axes[axis][a[axis]]
    if axis == 0:
        sa, sb = field.se_beta[a], field.se_beta[b]
    else:
        sa, sb = field.se_nu[a + (axis - 1,)], field.se_nu[b + (axis - 1,)]
    return 0.25 * (sa * sa + sb * sb) * delta * delta


def fit_entropy(field, reference_entropy=None, rule="trapezoid"):
    """Least-squares entropy surface from the edge increments.

    Minimises sum over edges of (S_b - S_a - increment)^2 with the
    reference node pinned, by solving the graph-Laplacian normal
    equations (symmetric positive definite after pinning) to 1e-10
    relative residual.  Fills in S_fit, rss, tss, goodness_of_fit =
    rss/tss and the node covariance implied by the reading standard
    errors.  Returns (field, goodness_of_fit).
    """
    grid = field.grid
    shape = grid.shape
    n = grid.n_nodes
    if n < 2:
        raise ValueError("entropy fit needs at least 2 grid nodes")
    if reference_entropy is None:
        reference_entropy = grid.reference_entropy
    edges = _grid_edges(grid)
    if not edges:
        raise SingularSystemError("grid has no edges")
    lin = np.arange(n).reshape(shape)
    e_a = np.array([lin[a] for a, b, ax in edges])
    e_b = np.array([lin[b] for a, b, ax in edges])
    inc = np.array([edge_increment(field, a, b, rule) for a, b, ax in edges])
    var = np.array([_edge_variance(field, a, b, ax) for a, b, ax in edges])

    ref = int(lin[grid.reference_node])
    keep = np.flatnonzero(np.arange(n) != ref)
    col = np.full(n, -1, dtype=np.int64)
    col[keep] = np.arange(n - 1)

    rows, cols, vals = [], [], []
    rhs = np.zeros(n - 1)
    for a, b, w in zip(e_a, e_b, inc):
        for u, v, s in ((a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)):
            if col[u] >= 0 and col[v] >= 0:
                rows.append(col[u])
                cols.append(col[v])
                vals.append(s)
        if col[b] >= 0:
            rhs[col[b]] += w
        if col[a] >= 0:
            rhs[col[a]] -= w
        # pinned reference contributes to the right-hand side
        if a == ref and col[b] >= 0:
            rhs[col[b]] += reference_entropy
        if b == ref and col[a] >= 0:
            rhs[col[a]] += reference_entropy
    lap = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n - 1, n - 1))
    sol = scipy.sparse.linalg.spsolve(lap.tocsc(), rhs)
    res = lap @ sol - rhs
    rel = np.linalg.norm(res) / max(np.linalg.norm(rhs), 1e-300)
    if not np.all(np.isfinite(sol)) or rel > 1e-10:
        raise SingularSystemError(
            f"entropy fit normal equations not solved (relative residual "
            f"{rel:.2e}); is the grid graph connected?")

    S = np.empty(n)
    S[ref] = reference_entropy
    S[keep] = sol
    resid = S[e_b] - S[e_a] - inc
    rss = float(resid @ resid)
    tss = float(inc @ inc)

    # node covariance from reading noise, for concavity tolerances:
    # S_red = L^-1 B^T inc  =>  Cov = (L^-1 B^T) diag(var) (L^-1 B^T)^T
    lap_inv = np.linalg.inv(lap.toarray())
    bt = np.zeros((n - 1, len(edges)))
    for e, (a, b) in enumerate(zip(e_a, e_b)):
        if col[b] >= 0:
            bt[col[b], e] += 1.0
        if col[a] >= 0:
            bt[col[a], e] -= 1.0
    m = lap_inv @ bt
    cov_red = (m * var) @ m.T
    cov = np.zeros((n, n))
    cov[np.ix_(keep, keep)] = cov_red

    field.S_fit = S.reshape(shape)
    field.rss = rss
    field.tss = tss
    field.goodness_of_fit = rss / tss if tss > 0 else 0.0
    field.S_cov = cov
    return field, field.goodness_of_fit


def goodness_of_agreement(field, oracle_surface=None):
    """Mean-shifted relative disagreement between fit and oracle:
    sum((S_fit0 - S_oracle0)^2) / sum(S_oracle0^2), both surfaces
    centred on their own means (the gauge constant is arbitrary)."""
    if field.S_fit is None:
        raise ValueError("fit_entropy must run before agreement")
    oracle = oracle_surface if oracle_surface is not None else field.S_oracle
    if oracle is None:
        raise ValueError("no oracle surface available")
    oracle = np.asarray(oracle, dtype=float)
    if oracle.shape != field.S_fit.shape:
        raise ValueError("oracle surface shape mismatch")
    f0 = field.S_fit - field.S_fit.mean()
    o0 = oracle - oracle.mean()
    den = float(o0 @ o0.flat if o0.ndim == 1 else (o0 * o0).sum())
    if den == 0:
        raise ValueError("oracle surface is constant; agreement undefined")
    num = float(((f0 - o0) ** 2).sum())
    return num / den


@dataclass
class ConcavityReport:
    passed: bool
    worst_eigenvalue: float
    worst_node: tuple
    worst_margin: float
    tolerance_at_worst: float
    n_interior: int


def _second_difference_stencil(x, i):
    """(offsets, weights) of the non-uniform central second difference."""
    hm = x[i] - x[i - 1]
    hp = x[i + 1] - x[i]
    return ((-1, 0, 1),
            (2.0 / (hm * (hm + hp)),
             -2.0 / (hm * hp),
             2.0 / (hp * (hm + hp))))


def concavity_check(field, tolerance=None):
    """Discrete-Hessian concavity test of the fitted surface.

    At every interior node (along axes with >= 3 values) the Hessian is
    built from central second differences and four-point cross
    differences; the surface passes if the maximum eigenvalue at every
    node is <= the tolerance.  With tolerance None, a per-node tolerance
    of 3x the propagated reading noise (Frobenius norm of the Hessian's
    standard errors from the fitted-node covariance) is used, so noise
    on a flat direction does not spuriously fail the check.
    """
    if field.S_fit is None:
        raise ValueError("fit_entropy must run before concavity_check")
    grid = field.grid
    shape = grid.shape
    axes = [a for a, s in enumerate(shape) if s >= 3]
    if not axes:
        raise ValueError("no axis has 3+ values; concavity undefined")
    S = field.S_fit
    lin = np.arange(grid.n_nodes).reshape(shape)
    cov = field.S_cov if tolerance is None else None
    d = len(axes)

    worst_margin = -math.inf
    worst = None
    n_interior = 0
    for idx in np.ndindex(shape):
        if any(not 0 < idx[a] < shape[a] - 1 for a in axes):
            continue
        n_interior += 1
        stencil = {}  # node index tuple -> weight, per Hessian entry

        def add(entries, node, w):
            entries[node] = entries.get(node, 0.0) + w

        H = np.empty((d, d))
        entry_nodes = []
        for p in range(d):
            a = axes[p]
            offs, wts = _second_difference_stencil(grid.axes[a], idx[a])
            entries = {}
            for o, w in zip(offs, wts):
                node = list(idx)
                node[a] += o
                add(entries, tuple(node), w)
            val = sum(w * S[node] for node, w in entries.items())
            H[p, p] = val
            entry_nodes.append(((p, p), entries))
            for q in range(p + 1, d):
                b = axes[q]
                ha = grid.axes[a][idx[a] + 1] - grid.axes[a][idx[a] - 1]
                hb = grid.axes[b][idx[b] + 1] - grid.axes[b][idx[b] - 1]
                entries = {}
                for sa in (-1, 1):
                    for sb in (-1, 1):
                        node = list(idx)
                        node[a] += sa
                        node[b] += sb
                        add(entries, tuple(node), sa * sb / (ha * hb))
                val = sum(w * S[node] for node, w in entries.items())
                H[p, q] = H[q, p] = val
                entry_nodes.append(((p, q), entries))
        lam = float(np.linalg.eigvalsh(H)[-1])
        if tolerance is None:
            fro2 = 0.0
            for (p, q), entries in entry_nodes:
                nodes = list(entries)
                w = np.array([entries[nd] for nd in nodes])
                ii = np.array([lin[nd] for nd in nodes])
                v = float(w @ cov[np.ix_(ii, ii)] @ w)
                fro2 += max(v, 0.0) * (1.0 if p == q else 2.0)
            tol = 3.0 * math.sqrt(fro2)
        else:
            tol = float(tolerance)
        margin = lam - tol
        if margin > worst_margin:
            worst_margin = margin
            worst = (idx, lam, tol)
    idx, lam, tol = worst
    return ConcavityReport(passed=worst_margin <= 0.0,
                           worst_eigenvalue=lam,
                           worst_node=idx,
                           worst_margin=worst_margin,
                           tolerance_at_worst=tol,
                           n_interior=n_interior)


@dataclass
class PureMoneyReport:
    """Diagnostics of money-value purity.

    beta should not vary across the goods grid (z-scores of node betas
    against their weighted mean) and should scale as 1/M along a money
    line (fitted log-log exponent, expected -1)."""

    max_abs_z: float | None
    rms_z: float | None
    rel_spread: float | None
    money_exponent: float | None
    money_exponent_se: float | None
    beta_constant: bool | None
    exponent_ok: bool | None


def pure_money_check(field=None, money_line_field=None, z_tol=3.0,
                     slope_tol=0.05):
    """Check that money's marginal value ignores the goods axes.

    field: readings over a goods grid at fixed M, for the z-scores of
    beta against its weighted mean.  money_line_field: readings along an
    M axis at fixed goods, for the log beta / log M slope (expected -1).
    Either part may be omitted.
    """
    if field is None and money_line_field is None:
        raise ValueError("pure_money_check needs at least one field")
    max_abs_z = rms_z = rel_spread = None
    beta_constant = None
    if field is not None:
        beta = field.beta.ravel()
        se = field.se_beta.ravel()
        if np.all(se > 0):
            w = 1.0 / se ** 2
            se_mean = float(1.0 / math.sqrt(w.sum()))
        else:
            w = np.ones_like(beta)
            se_mean = 0.0
        mean = float((beta * w).sum() / w.sum())
        denom = np.sqrt(se ** 2 + se_mean ** 2)
        z = np.where(denom > 0, (beta - mean) / np.where(denom > 0, denom, 1),
                     0.0)
        rel_spread = float((beta.max() - beta.min()) / mean)
        max_abs_z = float(np.abs(z).max())
        rms_z = float(np.sqrt((z ** 2).mean()))
        beta_constant = bool(rms_z <= z_tol)
    slope = slope_se = None
    exponent_ok = None
    if money_line_field is not None:
        mgrid = money_line_field.grid
        if len(mgrid.money_values) < 3:
            raise ValueError("money line needs at least 3 M values")
        x = np.log(mgrid.money_values)
        y = np.log(money_line_field.beta.reshape(len(x)))
        coef, cov = np.polyfit(x, y, 1, cov=True)
        slope = float(coef[0])
        slope_se = float(math.sqrt(cov[0, 0]))
        exponent_ok = bool(abs(slope + 1.0) <= slope_tol)
    return PureMoneyReport(
        max_abs_z=max_abs_z,
        rms_z=rms_z,
        rel_spread=rel_spread,
        money_exponent=slope,
        money_exponent_se=slope_se,
        beta_constant=beta_constant,
        exponent_ok=exponent_ok,
    )
