"""End-to-end experiment runner: simulate (or synthesise) readings over
the grid, fit the entropy surface, evaluate diagnostics, persist
field.csv / stats.json / manifest.json.

field.csv and stats.json depend only on (config, seed) and node-wise
random streams, so reruns are byte-identical at any parallelism;
manifest.json additionally records wall-clock time and library versions.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .calorimetry import (EntropyField, concavity_check, fit_entropy,
                          goodness_of_agreement, grid_sweep,
                          pure_money_check)
from .config import ExperimentConfig, build_graph, validate_config
from .economy import CobbDouglas, Economy
from .oracles import (FreeEnergy, cd_entropy, free_energy_comparison_surface,
                      hetero_cd_entropy, interdependent_exp_entropy,
                      oracle_surface_cd, price_band_cd_equivalence_oracle)

__all__ = ["EconomyFactory", "RunManifest", "run_experiment",
           "write_field_csv", "resolve_output_dir"]

OUTPUT_ROOT_ENV = "ECONCAL_OUTPUT_ROOT"


class EconomyFactory:
    """Picklable fresh-economy builder used by grid-sweep workers.

    Holds the population as (count, spec) pairs plus the graph config;
    calling it with node totals yields an economy at those totals,
    either equal-shares ("proportional") or drawn from the product of
    power weights ("stationary_product", for slow-mixing populations
    whose wealth spread would otherwise not develop within a run).
    """

    wants_rng = True

    def __init__(self, population, graph_config=None,
                 allocation="proportional"):
        self.population = tuple(population)
        self.graph_config = dict(graph_config or {"topology": "complete"})
        self.allocation = allocation
        self.n_agents = sum(count for count, _ in self.population)

    def __call__(self, money_total, goods_totals, rng=None):
        specs = [spec for count, spec in self.population
                 for _ in range(count)]
        graph = build_graph(self.graph_config, self.n_agents)
        if self.allocation == "stationary_product":
            return Economy.from_totals_product(specs, money_total,
                                               goods_totals, graph=graph,
                                               rng=rng)
        return Economy.from_totals(specs, money_total, goods_totals,
                                   graph=graph)


@dataclass
class RunManifest:
    """Everything needed to reproduce and interpret a run."""

    config: dict
    version: str
    wall_clock_seconds: float
    n_nodes: int
    flagged_nodes: int
    stats: dict
    output_dir: str
    artifacts: tuple = ("field.csv", "stats.json", "manifest.json")

    def as_dict(self):
        import numba
        import scipy
        d = dataclasses.asdict(self)
        d["artifacts"] = list(self.artifacts)
        d["library_versions"] = {"numpy": np.__version__,
                                 "scipy": scipy.__version__,
                                 "numba": numba.__version__}
        return d


def _synthetic_field(config):
    """Readings drawn around the exact Cobb-Douglas gradient:
    beta = n eta / M, nu_j = n alpha_j / G_j, each perturbed by iid
    relative noise; the standard errors are the generative truth."""
    synth = config.synthetic
    n = synth.get("n_agents", 1000)
    eta = float(synth["eta"])
    alphas = np.asarray(synth["alphas"], dtype=float)
    noise = float(synth["noise"])
    grid = config.grid
    field = EntropyField.empty(grid)
    for idx in grid.nodes():
        lin = int(np.ravel_multi_index(idx, grid.shape))
        rng = np.random.default_rng(
            np.random.SeedSequence((config.seed, lin)))
        money_total, goods_totals = grid.node_totals(idx)
        beta_true = n * eta / money_total
        nu_true = n * alphas / goods_totals
        field.beta[idx] = beta_true * (1.0 + noise * rng.standard_normal())
        field.se_beta[idx] = noise * beta_true
        field.nu[idx] = nu_true * (1.0 + noise * rng.standard_normal(
            len(alphas)))
        field.se_nu[idx] = noise * nu_true
        field.flags[idx] = False
    return field


def _oracle_surface(config, field):
    grid = config.grid
    oracle = config.oracle
    if config.mode == "synthetic":
        synth = config.synthetic
        n = synth.get("n_agents", 1000)
        return oracle_surface_cd(grid, lambda m, g: cd_entropy(
            n, synth["eta"], synth["alphas"], m, g))
    population = config.population
    if oracle == "cd":
        count, spec = population[0]
        return oracle_surface_cd(grid, lambda m, g: cd_entropy(
            count, spec.eta, spec.alphas, m, g))
    if oracle == "hetero_cd":
        groups = [(count, spec.eta, spec.alphas)
                  for count, spec in population]
        return oracle_surface_cd(grid, lambda m, g: hetero_cd_entropy(
            groups, m, g))
    if oracle == "free_energy":
        model = FreeEnergy(components=population)
        return free_energy_comparison_surface(field, model)
    if oracle == "band_cd":
        count, spec = population[0]
        return oracle_surface_cd(
            grid, lambda m, g: price_band_cd_equivalence_oracle(
                count, spec.eta, spec.alpha, m, g[0]))
    if oracle == "interdependent_exp":
        count, spec = population[0]
        return oracle_surface_cd(
            grid, lambda m, g: interdependent_exp_entropy(
                count, spec.eta, spec.alpha, m, g[0]))
    raise ValueError(f"unknown oracle {oracle!r}")


def _pure_money_report(config, field):
    grid = config.grid
    money_varies = len(grid.money_values) > 1
    goods_vary = any(len(g) > 1 for g in grid.goods_values)
    if money_varies and not goods_vary and len(grid.money_values) >= 3:
        report = pure_money_check(money_line_field=field)
    elif goods_vary and not money_varies:
        report = pure_money_check(field)
    else:
        return None
    return dataclasses.asdict(report)


def resolve_output_dir(output_dir):
    """Absolute paths stand; relative ones are rooted at
    $ECONCAL_OUTPUT_ROOT (default: the working directory)."""
    if os.path.isabs(output_dir):
        return output_dir
    root = os.environ.get(OUTPUT_ROOT_ENV, ".")
    return os.path.join(root, output_dir)


def write_field_csv(path, field):
    """One row per node: axis values, beta, se_beta, nu1, se_nu1, nu2,
    se_nu2, S_fit, S_oracle.  Missing columns (single-good nu2, absent
    oracle) are empty strings.  Floats use repr (shortest round-trip),
    so identical readings give identical bytes."""
    grid = field.grid
    headers = list(grid.axis_names) + [
        "beta", "se_beta", "nu1", "se_nu1", "nu2", "se_nu2",
        "S_fit", "S_oracle"]

    def fmt(x):
        return repr(float(x))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(headers)
        for idx in grid.nodes():
            money_total, goods_totals = grid.node_totals(idx)
            row = [fmt(money_total)] + [fmt(g) for g in goods_totals]
            row += [fmt(field.beta[idx]), fmt(field.se_beta[idx])]
            for j in range(2):
                if j < grid.n_goods:
                    row += [fmt(field.nu[idx + (j,)]),
                            fmt(field.se_nu[idx + (j,)])]
                else:
                    row += ["", ""]
            row.append("" if field.S_fit is None else fmt(field.S_fit[idx]))
            row.append("" if field.S_oracle is None
                       else fmt(field.S_oracle[idx]))
            writer.writerow(row)


def run_experiment(config):
    """Execute one experiment and persist its artifacts.

    config: a validated ExperimentConfig, or a raw dict (validated
    here).  Returns the RunManifest; artifacts land in the resolved
    output directory.
    """
    if isinstance(config, dict):
        config = validate_config(config)
    t0 = time.monotonic()
    grid = config.grid

    if config.mode == "synthetic":
        field = _synthetic_field(config)
    else:
        factory = EconomyFactory(config.population, config.graph_config,
                                 allocation=config.allocation)
        field = grid_sweep(factory, grid, config.meter, config.protocol,
                           seed=config.seed,
                           parallelism=config.parallelism)

    if grid.n_nodes >= 2:
        fit_entropy(field, rule=config.integration_rule)

    agreement = None
    if config.oracle is not None:
        field.S_oracle = _oracle_surface(config, field)
        if field.S_fit is not None:
            agreement = goodness_of_agreement(field)

    concavity = None
    if sum(s >= 3 for s in grid.shape) >= 1:
        report = concavity_check(field)
        concavity = dataclasses.asdict(report)
        concavity["worst_node"] = list(report.worst_node)

    pure_money = _pure_money_report(config, field)
    flagged = int(field.flags.sum())

    stats = {
        "goodness_of_fit": field.goodness_of_fit,
        "rss": field.rss,
        "tss": field.tss,
        "goodness_of_agreement": agreement,
        "concavity": concavity,
        "pure_money": pure_money,
        "flagged_nodes": flagged,
        "counters": field.diagnostics.get("counters"),
    }

    out_dir = resolve_output_dir(config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    write_field_csv(os.path.join(out_dir, "field.csv"), field)
    with open(os.path.join(out_dir, "stats.json"), "w",
              encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")

    from . import __version__
    manifest = RunManifest(
        config=config.raw,
        version=__version__,
        wall_clock_seconds=round(time.monotonic() - t0, 3),
        n_nodes=grid.n_nodes,
        flagged_nodes=flagged,
        stats=stats,
        output_dir=out_dir,
    )
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
