"""Scratch: (a) band_separable multi-seed node - bias vs draw scatter;
(b) band_five long-horizon behaviour of beta(t)."""
import numpy as np

from econcal.calorimetry import _measure_node
from econcal.config import validate_config
from econcal.experiment import EconomyFactory
from econcal.presets import resolve_preset
from econcal.meter import attach_meter
from econcal import _kernels as K

# (a) ten independent measurements of the same node
cfg = validate_config(resolve_preset("band_separable"))
factory = EconomyFactory(cfg.population, cfg.graph_config,
                         allocation=cfg.allocation)
vals = []
for seed in range(10):
    _, beta, se_b, nu, _, flag, _ = _measure_node(
        factory, cfg.meter, cfg.protocol, None, seed, 0,
        (1000.0, np.array([1000.0])))
    vals.append(beta)
    print(f"seed {seed}: beta={beta:.4f} nu={nu[0]:.4f} flag={flag}")
vals = np.array(vals)
print(f"band_separable node: mean {vals.mean():.4f} sd {vals.std(ddof=1):.4f}"
      f" sem {vals.std(ddof=1)/np.sqrt(len(vals)):.4f}\n")

# (b) band_five long horizon
cfg5 = validate_config(resolve_preset("band_five"))
fact5 = EconomyFactory(cfg5.population, cfg5.graph_config,
                       allocation=cfg5.allocation)
rng = np.random.default_rng(3)
econ = fact5(1000.0, np.array([1000.0]), rng=rng)
coupled = attach_meter(econ, cfg5.meter)
counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
topo, r, ei, ej, cum = coupled.graph.kernel_args()
sweep = coupled.n_econ + coupled.n_meter
N = coupled.n_econ
chunk = 1000
for step in range(30):
    K.advance(rng, coupled.money, coupled.goods, coupled.fam, coupled.par,
              N, topo, r, ei, ej, cum, 0, 0.5, chunk * sweep,
              200, 40, 24, 1.2, False, counters)
    mm = coupled.money[N:].mean()
    gg = coupled.goods[N:, 0].mean()
    # wealth per band group (200 agents each, ordered by construction)
    wm = [coupled.money[i*200:(i+1)*200].mean() for i in range(5)]
    print(f"t={(step+1)*chunk:6d} beta={2.0/mm:.3f} nu={2.0/gg:.3f} "
          f"meter_w={mm+gg:.3f} band_money=" +
          " ".join(f"{w:.2f}" for w in wm))
