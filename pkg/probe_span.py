"""Scratch: node-reading scatter vs sampling span for band presets."""
import sys
import time

import numpy as np

from econcal.calorimetry import _measure_node
from econcal.config import validate_config
from econcal.experiment import EconomyFactory
from econcal.meter import MeasurementProtocol
from econcal.presets import resolve_preset

name = sys.argv[1] if len(sys.argv) > 1 else "band_separable"
n_samples = int(sys.argv[2]) if len(sys.argv) > 2 else 1200
stride = int(sys.argv[3]) if len(sys.argv) > 3 else 24
n_seeds = int(sys.argv[4]) if len(sys.argv) > 4 else 8

cfg = validate_config(resolve_preset(name))
proto = MeasurementProtocol(burn_in_sweeps=400, n_samples=n_samples,
                            sample_stride_sweeps=stride,
                            cross_rate=cfg.protocol.cross_rate)
factory = EconomyFactory(cfg.population, cfg.graph_config,
                         allocation=cfg.allocation)
totals = (1000.0, np.full(cfg.goods_count, 1000.0))
betas = []
t0 = time.time()
for seed in range(n_seeds):
    lin, beta, se_b, nu, se_nu, flagged, counters = _measure_node(
        factory, cfg.meter, proto, None, 1000 + seed, 0, totals)
    betas.append(beta)
    print(f"  seed {seed}: beta={beta:.4f} se={se_b:.4f} flag={flagged}")
b = np.asarray(betas)
span = 400 + n_samples * stride
print(f"{name} span={span} sweeps  n={n_seeds}  mean={b.mean():.4f} "
      f"sd={b.std(ddof=1):.4f} rel={b.std(ddof=1)/b.mean()*100:.2f}% "
      f"({(time.time()-t0)/n_seeds:.1f}s/node)")
