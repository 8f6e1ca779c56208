import os

import numpy as np
import pytest

from econcal import (CobbDouglas, Economy, MeterSpec, MeasurementProtocol,
                     resolve_preset, run_experiment, validate_config)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_cd_economy(n=200, eta=3.0, alphas=(3.0, 3.0), money=1000.0,
                    goods=(1000.0, 1000.0)):
    specs = [CobbDouglas(eta=eta, alphas=alphas)] * n
    return Economy.from_totals(specs, money, goods)


@pytest.fixture(scope="session")
def preset_runs(tmp_path_factory):
    """Run presets once per session, on demand, and cache the manifests.

    The acceptance criteria share several preset runs; running each a
    single time keeps the suite's wall clock within reason while every
    number asserted still comes from a fresh end-to-end run.
    """
    root = tmp_path_factory.mktemp("preset_runs")
    cache = {}

    def run(name):
        if name not in cache:
            old = os.environ.get("ECONCAL_OUTPUT_ROOT")
            os.environ["ECONCAL_OUTPUT_ROOT"] = str(root)
            try:
                cache[name] = run_experiment(
                    validate_config(resolve_preset(name)))
            finally:
                if old is None:
                    del os.environ["ECONCAL_OUTPUT_ROOT"]
                else:
                    os.environ["ECONCAL_OUTPUT_ROOT"] = old
        return cache[name]

    return run


def tiny_protocol(**kw):
    base = dict(burn_in_sweeps=30, n_samples=40, sample_stride_sweeps=2,
                cross_rate=0.5)
    base.update(kw)
    return MeasurementProtocol(**base)


def default_meter(**kw):
    base = dict(n_agents=40, eta=2.0, alphas=(2.0, 2.0))
    base.update(kw)
    return MeterSpec(**base)
