"""Independent predictions the calorimeter is checked against.

Closed-form entropies where the stationary distribution factorises
(Cobb-Douglas populations, homogeneous or mixed), closed-form free
energies F(beta, nu) for the families that admit them, a
Legendre-transform bridge S(M, G) = min [beta M + sum nu_j G_j - F],
and a detailed-balance (reversibility) probe of conditional utilities.

All entropies here share the additive-constant gauge freedom of the
fitted surface; comparisons are made after mean-shifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .economy import (CobbDouglas, Complements, ExpComparison,
                      Interdependent, PriceBandAggregate,
                      PriceBandSeparable, Substitutes)
from .errors import ConvergenceError

__all__ = [
    "cd_entropy", "hetero_cd_entropy", "interdependent_exp_entropy",
    "price_band_cd_equivalence_oracle", "FreeEnergy", "free_energy",
    "free_energy_gradient", "legendre_entropy",
    "free_energy_comparison_surface", "oracle_surface_cd",
    "power_weight", "band_conditional_utility", "ReversibilityReport",
    "reversibility_check",
]


# ---------------------------------------------------------------------------
# closed-form entropies

def cd_entropy(n, eta, alphas, money_total, goods_totals):
    """Entropy of n identical Cobb-Douglas agents:
    S = n (eta log(M/n) + sum_j alpha_j log(G_j/n)), up to a constant."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    goods_totals = np.atleast_1d(np.asarray(goods_totals, dtype=float))
    if len(alphas) != len(goods_totals):
        raise ValueError("alphas and goods_totals length mismatch")
    return float(n * (eta * math.log(money_total / n)
                      + (alphas * np.log(goods_totals / n)).sum()))


def hetero_cd_entropy(groups, money_total, goods_totals):
    """Entropy of a mixed Cobb-Douglas population.

    groups: iterable of (count, eta, alphas).  The stationary
    distribution still factorises, and the extensive entropy depends on
    exponents only through their population sums:
    S = (sum_i eta_i) log mbar + sum_j (sum_i alpha_ij) log gbar_j.
    """
    goods_totals = np.atleast_1d(np.asarray(goods_totals, dtype=float))
    n = 0
    eta_sum = 0.0
    alpha_sum = np.zeros(len(goods_totals))
    for count, eta, alphas in groups:
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        if len(alphas) != len(goods_totals):
            raise ValueError("alphas and goods_totals length mismatch")
        n += count
        eta_sum += count * eta
        alpha_sum += count * alphas
    return float(eta_sum * math.log(money_total / n)
                 + (alpha_sum * np.log(goods_totals / n)).sum())


def interdependent_exp_entropy(n, eta, alpha, money_total, goods_total):
    """Entropy of n agents with exponential comparison response on a
    complete comparison graph: S = n (eta log mbar + gbar + alpha log gbar).
    The linear gbar term is the imprint of the e^(g - g_n) factor."""
    mbar = money_total / n
    gbar = goods_total / n
    return float(n * (eta * math.log(mbar) + gbar + alpha * math.log(gbar)))


def price_band_cd_equivalence_oracle(n, eta, alpha, money_total,
                                     goods_total):
    """Macroscopic entropy of a price-band population.

    The band constrains which exchanges happen, not the stationary
    weight of states, so the surface matches a one-good Cobb-Douglas
    population with the same exponents."""
    return cd_entropy(n, eta, (alpha,), money_total, (goods_total,))


# ---------------------------------------------------------------------------
# free energies and the Legendre bridge

@dataclass(frozen=True)
class FreeEnergy:
    """Additive free-energy model for a (possibly mixed) population.

    components: tuple of (count, spec) with spec one of CobbDouglas,
    Substitutes, Complements, or Interdependent with exponential
    comparison.  F(beta, nu) = sum over components of count * f(beta, nu)
    and entropy is its Legendre transform."""

    components: tuple

    def __post_init__(self):
        comps = tuple((int(c), s) for c, s in self.components)
        if not comps:
            raise ValueError("free energy needs at least one component")
        n_goods = {s.n_goods if isinstance(s.n_goods, int) else len(s.alphas)
                   for _, s in comps}
        for count, spec in comps:
            if count <= 0:
                raise ValueError("component counts must be positive")
            if isinstance(spec, (PriceBandSeparable, PriceBandAggregate)):
                raise ValueError("price-band families have no closed-form "
                                 "free energy; use the CD-equivalence oracle")
            if (isinstance(spec, Interdependent)
                    and not isinstance(spec.comparison, ExpComparison)):
                raise ValueError("only the exponential comparison response "
                                 "has a closed-form free energy")
            if not isinstance(spec, (CobbDouglas, Substitutes, Complements,
                                     Interdependent)):
                raise ValueError(f"no free energy for {type(spec).__name__}")
        if len(n_goods) != 1:
            raise ValueError("components disagree on the number of goods")
        object.__setattr__(self, "components", comps)

    @property
    def n_goods(self):
        spec = self.components[0][1]
        return len(spec.alphas) if isinstance(spec, CobbDouglas) \
            else spec.n_goods

    @property
    def nu_shift(self):
        """Lower bound of each nu's domain (1 for exponential-comparison
        components, else 0)."""
        shift = np.zeros(self.n_goods)
        if any(isinstance(s, Interdependent) for _, s in self.components):
            shift[:] = 1.0
        return shift


def _log_r_substitutes(nu1, nu2, alpha):
    """log R with R = (nu1 - nu2) / (nu2^-a - nu1^-a), the two-good
    integral factor of perfect substitutes; continuous through nu1 = nu2
    via the expansion R = (nu2^(a+1)/a) / q(u), u = nu1/nu2 - 1,
    q(u) = 1 - (a+1)/2 u + (a+1)(a+2)/6 u^2 - (a+1)(a+2)(a+3)/24 u^3
    + O(u^4).  The series window is wide (|u| < 1e-3) because the exact
    branch loses ~|u|^-1 digits to cancellation; a narrow window leaves
    a noisy ring that wrecks finite-difference Jacobians right where
    symmetric-population solves walk."""
    if abs(nu1 - nu2) < 1e-3 * nu2:
        u = (nu1 - nu2) / nu2
        c1 = (alpha + 1.0) / 2.0
        c2 = (alpha + 1.0) * (alpha + 2.0) / 6.0
        c3 = (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) / 24.0
        return ((alpha + 1.0) * math.log(nu2) - math.log(alpha)
                - math.log1p(-c1 * u + c2 * u * u - c3 * u ** 3))
    return (math.log(abs(nu1 - nu2))
            - math.log(abs(nu2 ** -alpha - nu1 ** -alpha)))


def _dlog_r_dnu1(nu1, nu2, alpha):
    if abs(nu1 - nu2) < 1e-3 * nu2:
        u = (nu1 - nu2) / nu2
        c1 = (alpha + 1.0) / 2.0
        c2 = (alpha + 1.0) * (alpha + 2.0) / 6.0
        c3 = (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) / 24.0
        q = 1.0 - c1 * u + c2 * u * u - c3 * u ** 3
        return (c1 - 2.0 * c2 * u + 3.0 * c3 * u * u) / q / nu2
    return (1.0 / (nu1 - nu2)
            - alpha * nu1 ** (-alpha - 1.0) / (nu2 ** -alpha - nu1 ** -alpha))


def _component_f(spec, beta, nu):
    if isinstance(spec, CobbDouglas):
        return (spec.eta * math.log(beta)
                + sum(a * math.log(v) for a, v in zip(spec.alphas, nu)))
    if isinstance(spec, Substitutes):
        return (spec.eta * math.log(beta)
                + _log_r_substitutes(nu[0], nu[1], spec.alpha))
    if isinstance(spec, Complements):
        return (spec.eta * math.log(beta)
                + (spec.alpha - 1.0) * math.log(nu[0] + nu[1])
                + math.log(nu[0]) + math.log(nu[1]))
    if isinstance(spec, Interdependent):
        if nu[0] <= 1.0:
            raise ValueError("exponential comparison requires nu > 1")
        return spec.eta * math.log(beta) + spec.alpha * math.log(nu[0] - 1.0)
    raise TypeError(type(spec).__name__)


def _component_grad(spec, beta, nu):
    """(df/dbeta, [df/dnu_j]) of one component's per-agent free energy."""
    gb = spec.eta / beta
    if isinstance(spec, CobbDouglas):
        gn = [a / v for a, v in zip(spec.alphas, nu)]
    elif isinstance(spec, Substitutes):
        gn = [_dlog_r_dnu1(nu[0], nu[1], spec.alpha),
              _dlog_r_dnu1(nu[1], nu[0], spec.alpha)]
    elif isinstance(spec, Complements):
        s = (spec.alpha - 1.0) / (nu[0] + nu[1])
        gn = [s + 1.0 / nu[0], s + 1.0 / nu[1]]
    elif isinstance(spec, Interdependent):
        gn = [spec.alpha / (nu[0] - 1.0)]
    else:
        raise TypeError(type(spec).__name__)
    return gb, gn


def free_energy(model, beta, nu):
    """F(beta, nu) of an additive population model; nu is a sequence of
    per-good marginal values."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if len(nu) != model.n_goods:
        raise ValueError("nu length does not match the model's goods")
    if beta <= 0 or np.any(nu <= 0):
        raise ValueError("beta and nu must be positive")
    return float(sum(count * _component_f(spec, beta, nu)
                     for count, spec in model.components))


def free_energy_gradient(model, beta, nu):
    """(dF/dbeta, array dF/dnu) of an additive population model."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    gb = 0.0
    gn = np.zeros(len(nu))
    for count, spec in model.components:
        b, n_ = _component_grad(spec, beta, nu)
        gb += count * b
        gn += count * np.asarray(n_)
    return gb, gn


def legendre_entropy(model, money_total, goods_totals, *, x0=None,
                     rtol=1e-10, max_iter=200):
    """S(M, G) = min over (beta, nu) of [beta M + sum nu_j G_j - F].

    Solved by damped Newton iteration on the stationarity conditions
    dF/dbeta = M, dF/dnu_j = G_j in log coordinates (log beta,
    log(nu_j - shift_j)), with a Nelder-Mead fallback.  Raises
    ConvergenceError if neither lands."""
    goods_totals = np.atleast_1d(np.asarray(goods_totals, dtype=float))
    if len(goods_totals) != model.n_goods:
        raise ValueError("goods_totals length does not match the model")
    if money_total <= 0 or np.any(goods_totals <= 0):
        raise ValueError("totals must be positive")
    shift = model.nu_shift
    targets = np.concatenate([[money_total], goods_totals])
    scale = float(np.max(np.abs(targets)))

    n_total = sum(c for c, _ in model.components)
    eta_sum = sum(c * s.eta for c, s in model.components)
    alpha_sum = np.zeros(model.n_goods)
    for count, spec in model.components:
        a = (np.asarray(spec.alphas, dtype=float)
             if isinstance(spec, CobbDouglas)
             else np.full(model.n_goods, spec.alpha))
        alpha_sum += count * a
    del n_total

    def theta_of(z):
        beta = math.exp(z[0])
        nu = shift + np.exp(z[1:])
        return beta, nu

    def resid(z):
        beta, nu = theta_of(z)
        gb, gn = free_energy_gradient(model, beta, nu)
        return np.concatenate([[gb], gn]) - targets

    if x0 is None:
        beta0 = eta_sum / money_total
        nu0 = shift + alpha_sum / goods_totals
        z = np.concatenate([[math.log(beta0)], np.log(nu0 - shift)])
    else:
        beta0, nu0 = x0
        z = np.concatenate([[math.log(beta0)],
                            np.log(np.asarray(nu0, dtype=float) - shift)])

    r = resid(z)
    converged = False
    for _ in range(max_iter):
        if np.linalg.norm(r) <= rtol * scale:
            converged = True
            break
        jac = np.empty((len(z), len(z)))
        h = 1e-6
        for l in range(len(z)):
            zp = z.copy()
            zp[l] += h
            zm = z.copy()
            zm[l] -= h
            jac[:, l] = (resid(zp) - resid(zm)) / (2.0 * h)
        try:
            d = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        improved = False
        base = np.linalg.norm(r)
        while lam >= 1e-6:
            zt = z + lam * d
            try:
                rt = resid(zt)
            except (ValueError, OverflowError):
                lam *= 0.5
                continue
            if np.linalg.norm(rt) < base:
                z, r = zt, rt
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    if not converged and np.linalg.norm(r) <= rtol * scale:
        converged = True

    if not converged:
        def objective(zz):
            try:
                beta, nu = theta_of(zz)
                return (beta * money_total + float(nu @ goods_totals)
                        - free_energy(model, beta, nu))
            except (ValueError, OverflowError):
                return np.inf
        opt = scipy.optimize.minimize(objective, z, method="Nelder-Mead",
                                      options={"xatol": 1e-12,
                                               "fatol": 1e-12,
                                               "maxiter": 20000})
        z = opt.x
        r = resid(z)
        if np.linalg.norm(r) > 1e-6 * scale:
            raise ConvergenceError(
                "Legendre transform did not converge: residual "
                f"{np.linalg.norm(r):.3e} against scale {scale:.3e}")
    beta, nu = theta_of(z)
    return float(beta * money_total + float(nu @ goods_totals)
                 - free_energy(model, beta, nu))


def free_energy_comparison_surface(field, model):
    """-F evaluated at the measured (beta, nu) of every grid node.

    At equilibrium S = beta M + sum nu G - F; the linear piece is shared
    with the trapezoid integral, so after mean-shifting, agreement with
    the fitted surface probes -F alone."""
    shape = field.grid.shape
    out = np.empty(shape)
    for idx in np.ndindex(shape):
        out[idx] = -free_energy(model, float(field.beta[idx]),
                                field.nu[idx])
    return out


def oracle_surface_cd(grid, fn):
    """Tabulate an entropy function fn(money_total, goods_totals) over
    all grid nodes."""
    out = np.empty(grid.shape)
    for idx in np.ndindex(grid.shape):
        money_total, goods_totals = grid.node_totals(idx)
        out[idx] = fn(money_total, goods_totals)
    return out


# ---------------------------------------------------------------------------
# reversibility of conditional-utility kernels

def power_weight(eta, alphas):
    """Vectorised stationary-form weight p -> m^(eta-1) prod g_j^(alpha_j-1)
    over points p[..., 0] = money, p[..., j] = good j."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))

    def weight(p):
        p = np.asarray(p, dtype=float)
        out = p[..., 0] ** (eta - 1.0)
        for j, a in enumerate(alphas):
            out = out * p[..., j + 1] ** (a - 1.0)
        return out

    return weight


def band_conditional_utility(spec):
    """Vectorised conditional utility u(outcome | current) of a
    price-band spec over points ordered (money, good), under the
    role-based price rule: an agent reducing its good holding (selling)
    floors the implied price at its mu1, an agent adding (buying) caps
    it at its mu2.

    This is the natural price-formation reading of thresholds, and it
    is exactly the construction that breaks detailed balance once two
    agents' bands differ: each direction of a swap sees a different
    window, so `reversibility_check` reports violations near 1 on
    quadruples where one direction is banned.  The simulated band
    families instead apply each agent's full band in both roles (a
    symmetric indicator), which is what keeps their exchange process
    reversible; this factory exists to quantify what the role-based
    alternative would do.
    """
    aggregate = isinstance(spec, PriceBandAggregate)
    if not isinstance(spec, (PriceBandSeparable, PriceBandAggregate)):
        raise TypeError("expected a price-band spec")

    def u(outcome, current):
        outcome = np.asarray(outcome, dtype=float)
        current = np.asarray(current, dtype=float)
        outcome, current = np.broadcast_arrays(outcome, current)
        m, g = outcome[..., 0], outcome[..., 1]
        cm, cg = current[..., 0], current[..., 1]
        dg = cg - g
        safe = np.where(np.abs(dg) > 1e-12, dg, 1.0)
        price = (m - cm) / safe
        selling = g < cg
        ok = np.where(selling, price >= spec.mu1, price <= spec.mu2)
        ok &= np.abs(dg) > 1e-12
        if aggregate:
            w = (cg + g) ** (spec.alpha - 1.0) * (cm + m) ** (spec.eta - 1.0)
        else:
            w = g ** (spec.alpha - 1.0) * m ** (spec.eta - 1.0)
        return np.where(ok, w, 0.0)

    return u


@dataclass
class ReversibilityReport:
    max_violation: float
    mean_violation: float
    n_effective: int
    n_skipped: int


def _rho_factory(u, k, lattice, check_lattice, quad_rtol):
    """rho(x) = integral of u(x | y) exp(-k . y) dy over the positive
    orthant, by a midpoint product lattice on [0, 20/k_a] per axis
    (truncating e^-20 ~ 2e-9 of the regularizer's mass, well under the
    convergence tolerance).  Every evaluation is repeated at the finer
    check lattice; disagreement beyond quad_rtol raises
    ConvergenceError."""
    k = np.atleast_1d(np.asarray(k, dtype=float))

    def build(n_cells):
        axes = []
        cell = 1.0
        for ka in k:
            width = 20.0 / ka / n_cells
            axes.append((np.arange(n_cells) + 0.5) * width)
            cell *= width
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"),
                        axis=-1).reshape(-1, len(k))
        w = cell * np.exp(-(mesh @ k))
        return mesh, w

    mesh_c, w_c = build(lattice)
    mesh_f, w_f = build(check_lattice)

    def rho(x):
        x = np.asarray(x, dtype=float)
        coarse = float(u(x, mesh_c) @ w_c)
        fine = float(u(x, mesh_f) @ w_f)
        denom = max(abs(coarse), abs(fine))
        if denom > 1e-300 and abs(coarse - fine) > quad_rtol * denom:
            raise ConvergenceError(
                f"stationary-factor quadrature not converged at {x}: "
                f"{coarse:.6e} (n={lattice}) vs {fine:.6e} "
                f"(n={check_lattice})")
        return fine

    return rho


def reversibility_check(cond_utility_i, cond_utility_j, k, rng, *,
                        n_probes=200, totals=None,
                        stationary_weight_i=None, stationary_weight_j=None,
                        lattice=64, check_lattice=128, quad_rtol=0.01):
    """Detailed-balance probe of a pair of conditional utilities.

    Conditional utilities map (outcome, current) point arrays (ordered
    money first) to weights.  Each agent's stationary factor is
    rho_i(x) = integral u_i(x | y) e^(-k.y) dy -- the kernel flattened
    over where the move starts, so an unconditional utility yields
    rho proportional to u and exact reversibility.  For kernels whose
    stationary factor is known in closed form, pass it as
    stationary_weight_i/j to bypass the quadrature.

    Random conserving quadruples (p_i, p_j) -> (p_i', p_j') with
    p_i + p_j = p_i' + p_j' = totals are drawn; for each, the forward
    and backward products
        A = u_i(p_i'|p_i) rho_i(p_i) u_j(p_j'|p_j) rho_j(p_j)
        B = u_i(p_i|p_i') rho_i(p_i') u_j(p_j|p_j') rho_j(p_j')
    are compared as |A - B| / (A + B).  Quadruples with A = B = 0 are
    skipped (nothing moves in either direction).
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    d = len(k)
    if totals is None:
        totals = 4.0 / k
    totals = np.atleast_1d(np.asarray(totals, dtype=float))
    if len(totals) != d or np.any(totals <= 0):
        raise ValueError("totals must be positive, one per commodity")

    rho_i = (stationary_weight_i if stationary_weight_i is not None
             else _rho_factory(cond_utility_i, k, lattice, check_lattice,
                               quad_rtol))
    rho_j = (stationary_weight_j if stationary_weight_j is not None
             else _rho_factory(cond_utility_j, k, lattice, check_lattice,
                               quad_rtol))

    def scalar(fn, out, cur):
        return float(np.asarray(fn(out[None, :], cur[None, :])).reshape(()))

    violations = []
    skipped = 0
    attempts = 0
    max_attempts = 100 * n_probes
    while len(violations) < n_probes and attempts < max_attempts:
        attempts += 1
        p_i = rng.random(d) * totals
        q_i = rng.random(d) * totals
        p_j = totals - p_i
        q_j = totals - q_i
        a = (scalar(cond_utility_i, q_i, p_i) * float(rho_i(p_i))
             * scalar(cond_utility_j, q_j, p_j) * float(rho_j(p_j)))
        b = (scalar(cond_utility_i, p_i, q_i) * float(rho_i(q_i))
             * scalar(cond_utility_j, p_j, q_j) * float(rho_j(q_j)))
        if a == 0.0 and b == 0.0:
            skipped += 1
            continue
        violations.append(abs(a - b) / (a + b + 1e-30))
    if not violations:
        raise ValueError("all probe quadruples had zero weight in both "
                         "directions; nothing to check")
    v = np.asarray(violations)
    return ReversibilityReport(max_violation=float(v.max()),
                               mean_violation=float(v.mean()),
                               n_effective=len(v),
                               n_skipped=skipped)
