"""Track meter money relaxation under cross trades only."""
import numpy as np

from econcal import _kernels as K
from econcal.config import validate_config
from econcal.experiment import EconomyFactory
from econcal.meter import MeterSpec, attach_meter
from econcal.presets import resolve_preset

for name in ("cd_homogeneous", "band_separable"):
    cfg = validate_config(resolve_preset(name))
    factory = EconomyFactory(cfg.population, cfg.graph_config)
    ng = cfg.goods_count
    econ = factory(1000.0, (1000.0,) * ng)
    coupled = attach_meter(econ, MeterSpec(n_agents=100, eta=2.0,
                                           alphas=(2.0,) * ng))
    rng = np.random.default_rng(7)
    money = coupled.money
    goods = coupled.goods
    fam = coupled.fam
    par = coupled.par
    n_econ = coupled.n_econ
    n_tot = money.shape[0]
    topo, r, ei, ej, cum = coupled.graph.kernel_args()
    counters = np.zeros(K.N_COUNTERS, dtype=np.int64)
    print(name)
    for chunk in range(8):
        before = counters.copy()
        K.advance(rng, money, goods, fam, par, n_econ,
                  topo, r, ei, ej, cum,
                  0, 1.0,  # cross_rate = 1: all cross
                  25 * n_tot, 200, 50, 16, 2.0, False, counters)
        acc = (counters[K.C_TRADES] - before[K.C_TRADES]) / (25 * n_tot)
        mm = money[n_econ:].mean()
        gg = goods[n_econ:, 0].mean()
        print(f"  sweep {25 * (chunk + 1):4d}: m_meter={mm:.4f} "
              f"g_meter={gg:.4f} cross_accept={acc:.4f}")
