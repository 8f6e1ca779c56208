"""Bundled experiment configs.

Each preset is a complete, runnable JSON config at desk scale: a
laptop-class machine finishes any of them in minutes.  Grid ranges are
evenly spaced totals in [500, 2000] per varying axis -- 8 per axis, 6
for the price-band presets whose nodes are several-fold costlier (money
lines use geometric spacing so the log-log slope fit has evenly spaced
abscissae); these ranges are assumptions of this artifact, chosen to
put mean holdings of order 1 per agent.
"""

from __future__ import annotations

import copy
import json

import numpy as np

__all__ = ["PRESETS", "preset_names", "emit_preset", "resolve_preset"]

_GOODS_AXIS = np.linspace(500.0, 2000.0, 8).tolist()
_MONEY_AXIS = np.geomspace(500.0, 2000.0, 8).tolist()


def _goods_grid():
    return {"money_values": [1000.0],
            "goods_values": [list(_GOODS_AXIS), list(_GOODS_AXIS)]}


def _money_good_grid(n=8):
    axis = np.linspace(500.0, 2000.0, n).tolist()
    return {"money_values": list(axis), "goods_values": [list(axis)]}


def _money_line(goods_count):
    return {"money_values": list(_MONEY_AXIS),
            "goods_values": [[1000.0]] * goods_count}


def _cd_homogeneous():
    return {
        "name": "cd_homogeneous",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [{"count": 1000, "family": "cobb_douglas",
                            "eta": 3.0, "alphas": [3.0, 3.0]}],
        },
        "grid": _goods_grid(),
        "oracle": "cd",
        "seed": 11,
        "output_dir": "runs/cd_homogeneous",
    }


def _cd_heterogeneous():
    return {
        "name": "cd_heterogeneous",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [
                {"count": 500, "family": "cobb_douglas",
                 "eta": 3.0, "alphas": [3.0, 3.0]},
                {"count": 500, "family": "cobb_douglas",
                 "eta": 2.0, "alphas": [2.0, 2.0]},
            ],
        },
        "grid": _goods_grid(),
        "oracle": "hetero_cd",
        "seed": 12,
        "output_dir": "runs/cd_heterogeneous",
    }


def _substitutes_complements():
    return {
        "name": "substitutes_complements",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [
                {"count": 500, "family": "substitutes",
                 "eta": 3.0, "alpha": 3.0},
                {"count": 500, "family": "complements",
                 "eta": 3.0, "alpha": 3.0},
            ],
        },
        "grid": _goods_grid(),
        "oracle": "free_energy",
        "seed": 13,
        "output_dir": "runs/substitutes_complements",
    }


def _mixture():
    return {
        "name": "mixture",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [
                {"count": 300, "family": "substitutes",
                 "eta": 3.0, "alpha": 3.0},
                {"count": 300, "family": "complements",
                 "eta": 3.0, "alpha": 3.0},
                {"count": 400, "family": "cobb_douglas",
                 "eta": 3.0, "alphas": [3.0, 3.0]},
            ],
        },
        "grid": _goods_grid(),
        "oracle": "free_energy",
        "seed": 14,
        "output_dir": "runs/mixture",
    }


def _satiable():
    return {
        "name": "satiable",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [{"count": 1000, "family": "satiable",
                            "eta": 3.0, "alpha": 3.0, "c": 0.3, "k": 0.6}],
        },
        "grid": _goods_grid(),
        "oracle": None,
        "seed": 15,
        "output_dir": "runs/satiable",
    }


# Price bands barely move wealth between agents (each trade's money and
# goods legs cancel to within the band width), so a single population's
# draw fluctuations (~ 1/sqrt(N)) are frozen into the whole run and no
# amount of time-averaging removes them.  These presets therefore start
# the economy from the stationary product law, start the meter at the
# matched expected values, couple at a high cross rate, and average
# several short measurements on independently drawn economies; the
# restore-reserve keeps each economy untouched at any cross rate.
_BAND_PROTOCOL = {"burn_in_sweeps": 400, "n_samples": 300,
                  "sample_stride_sweeps": 4, "cross_rate": 0.5,
                  "n_repeats": 8}

# The aggregate-form band families weight current + outcome, so their
# stationary law is not the product form and the matched start is only
# a guess; the meter needs a few thousand sweeps to find the economy's
# actual values (at a few percent cross acceptance) before sampling.
_AGG_BAND_PROTOCOL = {"burn_in_sweeps": 2400, "n_samples": 300,
                      "sample_stride_sweeps": 4, "cross_rate": 0.5,
                      "n_repeats": 6}


def _band(name, family, mu1, mu2, oracle, seed, protocol=None):
    return {
        "name": name,
        "economy": {
            "n_agents": 1000,
            "goods_count": 1,
            "initial_allocation": "stationary_product",
            "population": [{"count": 1000, "family": family,
                            "eta": 3.0, "alpha": 3.0,
                            "mu1": mu1, "mu2": mu2}],
        },
        "meter": {"match_values": True, "alphas": [2.0]},
        "protocol": dict(protocol or _BAND_PROTOCOL),
        "grid": _money_good_grid(6),
        "oracle": oracle,
        "seed": seed,
        "output_dir": f"runs/{name}",
    }


def _band_five():
    bands = [(0.5, 1.5), (0.6, 1.4), (0.7, 1.3), (0.8, 1.2), (0.9, 1.1)]
    return {
        "name": "band_five",
        "economy": {
            "n_agents": 1000,
            "goods_count": 1,
            "initial_allocation": "stationary_product",
            "population": [{"count": 200, "family": "price_band_aggregate",
                            "eta": 3.0, "alpha": 3.0,
                            "mu1": lo, "mu2": hi}
                           for lo, hi in bands],
        },
        "meter": {"match_values": True, "alphas": [2.0]},
        "protocol": dict(_AGG_BAND_PROTOCOL),
        "grid": _money_good_grid(6),
        "oracle": None,
        "seed": 19,
        "output_dir": "runs/band_five",
    }


def _interdependent(name, comparison, oracle, seed):
    return {
        "name": name,
        "economy": {
            "n_agents": 1000,
            "goods_count": 1,
            "population": [{"count": 1000, "family": "interdependent",
                            "eta": 3.0, "alpha": 3.0,
                            "comparison": comparison}],
            "graph": {"topology": "circle_excluding_comparison",
                      "comparison_radius": 1},
        },
        "grid": _money_good_grid(),
        "oracle": oracle,
        "seed": seed,
        "output_dir": f"runs/{name}",
    }


def _cd_money_line():
    return {
        "name": "cd_money_line",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [{"count": 1000, "family": "cobb_douglas",
                            "eta": 3.0, "alphas": [3.0, 3.0]}],
        },
        "grid": _money_line(2),
        "oracle": "cd",
        "seed": 22,
        "output_dir": "runs/cd_money_line",
    }


def _satiable_money_line():
    return {
        "name": "satiable_money_line",
        "economy": {
            "n_agents": 1000,
            "goods_count": 2,
            "population": [{"count": 1000, "family": "satiable",
                            "eta": 3.0, "alpha": 3.0, "c": 0.3, "k": 0.6}],
        },
        "grid": _money_line(2),
        "oracle": None,
        "seed": 23,
        "output_dir": "runs/satiable_money_line",
    }


def _synthetic_noise():
    return {
        "name": "synthetic_noise",
        "synthetic": {"eta": 3.0, "alphas": [3.0, 3.0], "noise": 0.01,
                      "n_agents": 1000},
        "grid": _goods_grid(),
        "oracle": "cd",
        "seed": 99,
        "output_dir": "runs/synthetic_noise",
    }


PRESETS = {
    "cd_homogeneous": (_cd_homogeneous, ("fig1",),
                       "1000 Cobb-Douglas agents, eta = alphas = 3"),
    "cd_heterogeneous": (_cd_heterogeneous, ("fig2",),
                         "half (3,3,3), half (2,2,2) Cobb-Douglas"),
    "substitutes_complements": (_substitutes_complements, ("fig3",),
                                "500 substitutes + 500 complements"),
    "mixture": (_mixture, ("fig4",),
                "300 substitutes, 300 complements, 400 Cobb-Douglas"),
    "satiable": (_satiable, ("fig5", "fig6"),
                 "satiable good-1 appetite, c=0.3 k=0.6"),
    "band_separable": (lambda: _band("band_separable",
                                     "price_band_separable",
                                     0.9, 1.1, "band_cd", 16),
                       ("fig7",),
                       "price band (0.9, 1.1), outcome-weighted"),
    "band_separable_wide": (lambda: _band("band_separable_wide",
                                          "price_band_separable",
                                          0.5, 1.5, "band_cd", 17),
                            (),
                            "price band (0.5, 1.5), outcome-weighted"),
    "band_aggregate": (lambda: _band("band_aggregate",
                                     "price_band_aggregate",
                                     0.9, 1.1, None, 18,
                                     _AGG_BAND_PROTOCOL),
                       ("fig8",),
                       "price band (0.9, 1.1), current+outcome-weighted"),
    "band_five": (_band_five, ("fig9",),
                  "five 200-agent bands (0.5,1.5) ... (0.9,1.1)"),
    "interdependent_exp": (lambda: _interdependent("interdependent_exp",
                                                   "exp",
                                                   "interdependent_exp", 20),
                           ("fig10",),
                           "neighbour comparison, exponential response"),
    "interdependent_sigmoid": (
        lambda: _interdependent("interdependent_sigmoid",
                                {"kind": "sigmoid", "a": 1.5, "b": 0.5},
                                None, 21),
        ("fig11",),
        "neighbour comparison, sigmoid response a=3/2 b=1/2"),
    "cd_money_line": (_cd_money_line, (),
                      "Cobb-Douglas along a money axis, goods fixed"),
    "satiable_money_line": (_satiable_money_line, (),
                            "satiable along a money axis, goods fixed"),
    "synthetic_noise": (_synthetic_noise, (),
                        "synthetic gradient readings + 1% noise"),
}

_ALIASES = {alias: name
            for name, (_, aliases, _) in PRESETS.items()
            for alias in aliases}


def preset_names():
    """(name, aliases, description) rows in listing order."""
    return [(name, aliases, desc)
            for name, (_, aliases, desc) in PRESETS.items()]


def resolve_preset(name):
    """Preset config dict by name or alias.  KeyError if unknown."""
    key = _ALIASES.get(name, name)
    if key not in PRESETS:
        raise KeyError(name)
    builder, _, _ = PRESETS[key]
    return copy.deepcopy(builder())


def emit_preset(name):
    """Preset config as formatted JSON text."""
    return json.dumps(resolve_preset(name), indent=2) + "\n"
