"""Scratch: single-node benchmark per preset via the real config path."""
import time

import numpy as np

from econcal.calorimetry import _measure_node
from econcal.config import validate_config
from econcal.experiment import EconomyFactory
from econcal.presets import resolve_preset

NAMES = ["cd_homogeneous", "cd_heterogeneous", "substitutes_complements",
         "mixture", "satiable", "band_separable", "band_separable_wide",
         "band_aggregate", "band_five", "interdependent_exp",
         "interdependent_sigmoid"]

for name in NAMES:
    cfg = validate_config(resolve_preset(name))
    factory = EconomyFactory(cfg.population, cfg.graph_config,
                             allocation=cfg.allocation)
    totals = (1000.0, np.full(cfg.goods_count, 1000.0))
    t0 = time.time()
    lin, beta, se_b, nu, se_nu, flagged, counters = _measure_node(
        factory, cfg.meter, cfg.protocol, None, cfg.seed, 0, totals)
    dt = time.time() - t0
    enc = counters["encounters"]
    cross = counters["cross_trades"]
    print(f"{name:24s} {dt:5.1f}s  beta={beta:.4f}+-{se_b:.4f} "
          f"nu={[f'{v:.4f}' for v in nu]} flag={flagged} "
          f"trade_rate={counters['trades']/enc:.3f} cross_acc={cross/enc:.4f}")
