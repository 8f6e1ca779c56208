"""Experiment configuration: JSON schema, semantic validation, overrides.

A config describes one calorimetry experiment: the economy population
(or a synthetic-reading generator), the meter and measurement protocol,
the macro-state grid, an optional entropy oracle, the seed, parallelism
and the output directory.  validate_config collects *all* violations
(structural, via jsonschema, and semantic) before raising, so a broken
config is fixed in one round trip.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field as dc_field

import jsonschema

from .calorimetry import MacroGrid
from .economy import (CobbDouglas, Complements, ExpComparison,
                      Interdependent, PriceBandAggregate,
                      PriceBandSeparable, Satiable, SigmoidComparison,
                      Substitutes, build_encounter_graph)
from .errors import (ConfigError, GraphConnectivityError,
                     MeasurementProtocolError)
from .meter import MeterSpec, MeasurementProtocol

__all__ = ["ExperimentConfig", "load_config", "validate_config",
           "apply_override", "CONFIG_SCHEMA"]

_POS_NUM = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["grid", "seed"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "economy": {
            "type": "object",
            "required": ["n_agents", "goods_count", "population"],
            "additionalProperties": False,
            "properties": {
                "n_agents": {"type": "integer", "minimum": 2},
                "goods_count": {"type": "integer", "enum": [1, 2]},
                "initial_allocation": {"enum": ["proportional",
                                                "stationary_product"]},
                "population": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["count", "family"],
                        "properties": {
                            "count": {"type": "integer", "minimum": 1},
                            "family": {"enum": [
                                "cobb_douglas", "substitutes", "complements",
                                "satiable", "price_band_separable",
                                "price_band_aggregate", "interdependent"]},
                        },
                    },
                },
                "graph": {
                    "type": "object",
                    "required": ["topology"],
                    "additionalProperties": False,
                    "properties": {
                        "topology": {"enum": [
                            "complete", "circle_excluding_comparison",
                            "explicit"]},
                        "comparison_radius": {"type": "integer",
                                              "minimum": 1},
                        "edges": {
                            "type": "array",
                            "items": {"type": "array",
                                      "items": {"type": "integer",
                                                "minimum": 0},
                                      "minItems": 2, "maxItems": 2},
                        },
                        "rates": {"type": "array", "items": _POS_NUM},
                    },
                },
            },
        },
        "synthetic": {
            "type": "object",
            "required": ["eta", "alphas", "noise"],
            "additionalProperties": False,
            "properties": {
                "eta": _POS_NUM,
                "alphas": {"type": "array", "minItems": 1, "maxItems": 2,
                           "items": _POS_NUM},
                "noise": {"type": "number", "minimum": 0},
                "n_agents": {"type": "integer", "minimum": 1},
            },
        },
        "meter": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_agents": {"type": "integer", "minimum": 2},
                "eta": _POS_NUM,
                "alphas": {"type": "array", "minItems": 1, "maxItems": 2,
                           "items": _POS_NUM},
                "match_values": {"type": "boolean"},
            },
        },
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "burn_in_sweeps": {"type": "integer", "minimum": 0},
                "n_samples": {"type": "integer", "minimum": 10},
                "sample_stride_sweeps": {"type": "integer", "minimum": 1},
                "cross_rate": {"type": "number", "exclusiveMinimum": 0,
                               "exclusiveMaximum": 1},
                "n_repeats": {"type": "integer", "minimum": 1},
            },
        },
        "grid": {
            "type": "object",
            "required": ["money_values", "goods_values"],
            "additionalProperties": False,
            "properties": {
                "money_values": {"type": "array", "minItems": 1,
                                 "items": _POS_NUM},
                "goods_values": {
                    "type": "array", "minItems": 1, "maxItems": 2,
                    "items": {"type": "array", "minItems": 1,
                              "items": _POS_NUM},
                },
                "reference_node": {"type": "array",
                                   "items": {"type": "integer",
                                             "minimum": 0}},
                "reference_entropy": {"type": "number"},
            },
        },
        "oracle": {"enum": ["cd", "hetero_cd", "free_energy", "band_cd",
                            "interdependent_exp", None]},
        "integration_rule": {"enum": ["trapezoid", "one_sided"]},
        "seed": {"type": "integer", "minimum": 0,
                 "maximum": 2 ** 64 - 1},
        "parallelism": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
    },
}

_FAMILY_FIELDS = {
    "cobb_douglas": {"eta", "alphas"},
    "substitutes": {"eta", "alpha"},
    "complements": {"eta", "alpha"},
    "satiable": {"eta", "alpha", "c", "k"},
    "price_band_separable": {"eta", "alpha", "mu1", "mu2"},
    "price_band_aggregate": {"eta", "alpha", "mu1", "mu2"},
    "interdependent": {"eta", "alpha", "comparison"},
}

_FAMILY_REQUIRED = {
    "cobb_douglas": {"eta", "alphas"},
    "substitutes": {"eta", "alpha"},
    "complements": {"eta", "alpha"},
    "satiable": {"eta", "alpha"},
    "price_band_separable": {"eta", "alpha", "mu1", "mu2"},
    "price_band_aggregate": {"eta", "alpha", "mu1", "mu2"},
    "interdependent": {"eta", "alpha"},
}


def _build_spec(entry):
    """Population entry dict -> utility spec dataclass."""
    family = entry["family"]
    if family == "cobb_douglas":
        return CobbDouglas(eta=entry["eta"], alphas=tuple(entry["alphas"]))
    if family == "substitutes":
        return Substitutes(eta=entry["eta"], alpha=entry["alpha"])
    if family == "complements":
        return Complements(eta=entry["eta"], alpha=entry["alpha"])
    if family == "satiable":
        return Satiable(eta=entry["eta"], alpha=entry["alpha"],
                        c=entry.get("c", 0.3), k=entry.get("k", 0.6))
    if family == "price_band_separable":
        return PriceBandSeparable(eta=entry["eta"], alpha=entry["alpha"],
                                  mu1=entry["mu1"], mu2=entry["mu2"])
    if family == "price_band_aggregate":
        return PriceBandAggregate(eta=entry["eta"], alpha=entry["alpha"],
                                  mu1=entry["mu1"], mu2=entry["mu2"])
    if family == "interdependent":
        comp = entry.get("comparison", "exp")
        if comp == "exp":
            response = ExpComparison()
        elif comp == "sigmoid":
            response = SigmoidComparison()
        elif isinstance(comp, dict) and comp.get("kind") == "sigmoid":
            response = SigmoidComparison(a=comp.get("a", 1.5),
                                         b=comp.get("b", 0.5))
        else:
            raise ValueError(
                "comparison must be 'exp', 'sigmoid', or "
                "{'kind': 'sigmoid', 'a': ..., 'b': ...}")
        return Interdependent(eta=entry["eta"], alpha=entry["alpha"],
                              comparison=response)
    raise ValueError(f"unknown family {family!r}")


def _spec_goods(spec):
    return len(spec.alphas) if isinstance(spec, CobbDouglas) else spec.n_goods


@dataclass
class ExperimentConfig:
    """A validated experiment: resolved domain objects plus the raw
    config echo (what the manifest reproduces the run from)."""

    raw: dict
    mode: str                      # "simulate" | "synthetic"
    grid: MacroGrid
    seed: int
    parallelism: int
    output_dir: str
    oracle: str | None
    integration_rule: str
    protocol: MeasurementProtocol
    meter: MeterSpec | None = None
    goods_count: int = 2
    n_agents: int = 0
    population: tuple = ()          # ((count, spec), ...)
    graph_config: dict = dc_field(default_factory=dict)
    allocation: str = "proportional"
    synthetic: dict | None = None
    name: str = ""


def load_config(path):
    """Read a JSON config file.  Malformed JSON is a config error;
    missing files propagate as I/O errors."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON: {exc}"]) from exc
    if not isinstance(cfg, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])
    return cfg


def apply_override(cfg, dotted_key, raw_value):
    """Set a config entry by dotted path ('protocol.n_samples',
    'economy.population.0.eta'), creating intermediate objects.  The
    value is parsed as JSON when possible, else taken as a string."""
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    parts = dotted_key.split(".")
    node = cfg
    for i, part in enumerate(parts[:-1]):
        nxt = parts[i + 1]
        if isinstance(node, list):
            node = node[int(part)]
        else:
            if part not in node or not isinstance(node[part], (dict, list)):
                node[part] = {}
            node = node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
    return cfg


def _structural_violations(cfg):
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg),
                    key=lambda e: list(map(str, e.absolute_path)))
    out = []
    for err in errors:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        out.append(f"{path}: {err.message}")
    return out


def validate_config(cfg):
    """Validate a raw config dict; return an ExperimentConfig.

    Raises ConfigError listing every violation found (structural schema
    errors first, then semantic ones reachable despite them)."""
    violations = _structural_violations(cfg)
    have_economy = isinstance(cfg.get("economy"), dict)
    have_synth = isinstance(cfg.get("synthetic"), dict)
    if have_economy == have_synth:
        violations.append(
            "<root>: exactly one of 'economy' or 'synthetic' is required")

    population = []
    goods_count = 2
    n_agents = 0
    graph_config = {"topology": "complete"}
    if have_economy:
        eco = cfg["economy"]
        goods_count = eco.get("goods_count", 2)
        n_agents = eco.get("n_agents", 0)
        entries = eco.get("population", [])
        total = 0
        if isinstance(entries, list):
            for i, entry in enumerate(entries):
                if not isinstance(entry, dict) or "family" not in entry:
                    continue
                family = entry["family"]
                if family not in _FAMILY_FIELDS:
                    continue
                missing = _FAMILY_REQUIRED[family] - set(entry)
                if missing:
                    violations.append(
                        f"economy/population/{i}: family {family!r} needs "
                        f"fields {sorted(missing)}")
                    continue
                unknown = set(entry) - _FAMILY_FIELDS[family] - {
                    "count", "family"}
                if unknown:
                    violations.append(
                        f"economy/population/{i}: unknown fields "
                        f"{sorted(unknown)} for family {family!r}")
                try:
                    spec = _build_spec(entry)
                except (ValueError, TypeError) as exc:
                    violations.append(f"economy/population/{i}: {exc}")
                    continue
                count = entry.get("count", 0)
                if isinstance(count, int) and count >= 1:
                    total += count
                    population.append((count, spec))
                if goods_count in (1, 2) and _spec_goods(spec) != goods_count:
                    violations.append(
                        f"economy/population/{i}: family {family!r} is a "
                        f"{_spec_goods(spec)}-good utility but goods_count "
                        f"is {goods_count}")
        if isinstance(n_agents, int) and population and total != n_agents:
            violations.append(
                f"economy: population counts sum to {total}, not "
                f"n_agents = {n_agents}")
        families = {type(spec).__name__ for _, spec in population}
        if families & {"PriceBandSeparable", "PriceBandAggregate"} and \
                families & {"Interdependent"}:
            # the band encounter samples its partner's goods weight as a
            # pure power, which a comparison factor is not
            violations.append(
                "economy/population: price-band and interdependent "
                "families cannot share an economy")
        graph_config = eco.get("graph", {"topology": "complete"})
        if isinstance(graph_config, dict) and isinstance(n_agents, int) \
                and n_agents >= 2:
            violations.extend(_graph_violations(graph_config, n_agents,
                                                population))

    if have_synth:
        synth = cfg["synthetic"]
        alphas = synth.get("alphas", [])
        if isinstance(alphas, list) and alphas:
            goods_count = len(alphas)
        n_agents = synth.get("n_agents", 1000)

    grid = None
    if isinstance(cfg.get("grid"), dict):
        g = cfg["grid"]
        try:
            grid = MacroGrid(
                money_values=g.get("money_values", []),
                goods_values=tuple(g.get("goods_values", [])),
                reference_node=(tuple(g["reference_node"])
                                if "reference_node" in g else None),
                reference_entropy=g.get("reference_entropy", 0.0))
        except (ValueError, TypeError) as exc:
            violations.append(f"grid: {exc}")
        if grid is not None and grid.n_goods != goods_count:
            violations.append(
                f"grid: {grid.n_goods} goods axes for a {goods_count}-good "
                f"economy")
    else:
        violations.append("grid: required")

    meter = None
    if have_economy:
        m = cfg.get("meter", {})
        if isinstance(m, dict):
            try:
                meter = MeterSpec(
                    n_agents=m.get("n_agents", 100),
                    eta=m.get("eta", 2.0),
                    alphas=tuple(m.get("alphas", (2.0,) * goods_count)),
                    match_values=m.get("match_values", False))
            except (ValueError, TypeError) as exc:
                violations.append(f"meter: {exc}")
            if meter is not None and len(meter.alphas) != goods_count:
                violations.append(
                    f"meter: {len(meter.alphas)} goods exponents for a "
                    f"{goods_count}-good economy")

    protocol = MeasurementProtocol()
    p = cfg.get("protocol", {})
    if isinstance(p, dict):
        try:
            protocol = MeasurementProtocol(
                burn_in_sweeps=p.get("burn_in_sweeps", 500),
                n_samples=p.get("n_samples", 200),
                sample_stride_sweeps=p.get("sample_stride_sweeps", 5),
                cross_rate=p.get("cross_rate", 0.2),
                n_repeats=p.get("n_repeats", 1))
        except (MeasurementProtocolError, ValueError, TypeError) as exc:
            violations.append(f"protocol: {exc}")

    oracle = cfg.get("oracle")
    if oracle is not None:
        violations.extend(_oracle_violations(oracle, have_synth,
                                             population))

    if "seed" not in cfg:
        violations.append("seed: required")

    if violations:
        raise ConfigError(violations)

    return ExperimentConfig(
        raw=copy.deepcopy(cfg),
        mode="synthetic" if have_synth else "simulate",
        grid=grid,
        seed=int(cfg["seed"]),
        parallelism=int(cfg.get("parallelism", 1)),
        output_dir=cfg.get("output_dir", cfg.get("name", "econcal-run")),
        oracle=oracle,
        integration_rule=cfg.get("integration_rule", "trapezoid"),
        protocol=protocol,
        meter=meter,
        goods_count=goods_count,
        n_agents=int(n_agents) if isinstance(n_agents, int) else 0,
        population=tuple(population),
        graph_config=(graph_config if isinstance(graph_config, dict)
                      else {"topology": "complete"}),
        allocation=(cfg["economy"].get("initial_allocation", "proportional")
                    if have_economy else "proportional"),
        synthetic=(copy.deepcopy(cfg["synthetic"]) if have_synth else None),
        name=cfg.get("name", ""),
    )


def _graph_violations(graph_config, n_agents, population):
    out = []
    topology = graph_config.get("topology", "complete")
    has_interdependent = any(isinstance(s, Interdependent)
                             for _, s in population)
    if has_interdependent and topology != "circle_excluding_comparison":
        out.append(
            "economy/graph: interdependent agents need the "
            "'circle_excluding_comparison' topology (their utility reads "
            "a comparison neighbourhood)")
    if topology != "explicit" and (graph_config.get("edges") is not None
                                   or graph_config.get("rates") is not None):
        out.append("economy/graph: edges/rates only apply to the "
                   "'explicit' topology")
    try:
        build_graph(graph_config, n_agents)
    except GraphConnectivityError as exc:
        out.append(f"economy/graph: {exc}")
    except (ValueError, TypeError) as exc:
        out.append(f"economy/graph: {exc}")
    return out


def build_graph(graph_config, n_agents):
    """Construct the encounter graph described by a config block."""
    topology = graph_config.get("topology", "complete")
    kwargs = {}
    if topology == "circle_excluding_comparison":
        kwargs["comparison_radius"] = graph_config.get("comparison_radius", 1)
    if topology == "explicit":
        edges = graph_config.get("edges")
        if edges is None:
            raise ValueError("explicit topology needs an edge list")
        rates = graph_config.get("rates")
        if rates is not None:
            if len(rates) != len(edges):
                raise ValueError(
                    f"{len(rates)} rates for {len(edges)} edges")
            kwargs["edges"] = [(int(i), int(j), float(r))
                               for (i, j), r in zip(edges, rates)]
        else:
            kwargs["edges"] = [(int(i), int(j)) for i, j in edges]
    return build_encounter_graph(n_agents, topology, **kwargs)


def _oracle_violations(oracle, have_synth, population):
    if have_synth:
        if oracle not in ("cd", None):
            return [f"oracle: synthetic readings support only the 'cd' "
                    f"oracle, not {oracle!r}"]
        return []
    specs = [s for _, s in population]
    if not specs:
        return []
    if oracle == "cd":
        if not (len(specs) == 1 and isinstance(specs[0], CobbDouglas)):
            return ["oracle: 'cd' needs a single homogeneous Cobb-Douglas "
                    "population entry"]
    elif oracle == "hetero_cd":
        if not all(isinstance(s, CobbDouglas) for s in specs):
            return ["oracle: 'hetero_cd' needs an all-Cobb-Douglas "
                    "population"]
    elif oracle == "free_energy":
        from .oracles import FreeEnergy
        try:
            FreeEnergy(components=tuple((c, s) for c, s in population))
        except ValueError as exc:
            return [f"oracle: 'free_energy' not applicable: {exc}"]
    elif oracle == "band_cd":
        if not (len(specs) == 1 and isinstance(
                specs[0], (PriceBandSeparable, PriceBandAggregate))):
            return ["oracle: 'band_cd' needs a single homogeneous "
                    "price-band population entry"]
    elif oracle == "interdependent_exp":
        if not (len(specs) == 1 and isinstance(specs[0], Interdependent)
                and isinstance(specs[0].comparison, ExpComparison)):
            return ["oracle: 'interdependent_exp' needs a homogeneous "
                    "interdependent population with the exponential "
                    "comparison response"]
    return []
