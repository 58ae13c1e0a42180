import numpy as np
import pytest

from spikelsm import NeuronParams, ReservoirConfig, ReservoirState, generate_reservoir
from spikelsm import _backend

_ACCEPTANCE_LINES = []


def random_config(rng, n=None, **overrides):
    """A random but valid reservoir configuration."""
    n = n or int(rng.integers(2, 65))
    m = int(rng.integers(1, 6))
    cfg = dict(
        n_neurons=n,
        n_inputs=m,
        n_outputs=int(rng.integers(1, 4)),
        fan_in=int(rng.integers(1, n)),
        input_fan_in=int(rng.integers(0, m + 1)),
        inhibitory_fraction=float(rng.uniform(0, 1)),
        synaptic_scale=float(rng.uniform(0.05, 1.0)),
        input_scale=float(rng.uniform(0.1, 3.0)),
        neuron=NeuronParams(
            threshold=float(rng.uniform(0.5, 2.0)),
            leak=float(rng.uniform(0.05, 1.0)),
            refractory_steps=int(rng.integers(0, 4)),
        ),
        seed=int(rng.integers(0, 2**63)),
    )
    cfg.update(overrides)
    return ReservoirConfig(**cfg)


def random_state(rng, res):
    n = res.n_neurons
    theta = res.config.neuron.threshold
    return ReservoirState(
        rng.uniform(-theta, theta, n),
        rng.integers(0, 2, n),
        rng.integers(0, res.config.neuron.refractory_steps + 1, n),
        int(rng.integers(0, 1000)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_reservoir():
    cfg = ReservoirConfig(
        n_neurons=30, n_inputs=2, n_outputs=1, fan_in=4, input_fan_in=2,
        inhibitory_fraction=0.3, synaptic_scale=0.4, input_scale=1.5,
        neuron=NeuronParams(threshold=1.0, leak=0.8), seed=99,
    )
    return generate_reservoir(cfg)


@pytest.fixture(params=_backend.available())
def kernels(request):
    return _backend.get(request.param)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    record = {"label": request.node.get_closest_marker("acceptance").args[0], "detail": ""}
    yield record
    failed = getattr(request.node, "rep_call", None)
    status = "FAIL" if failed is None or failed.failed else "PASS"
    _ACCEPTANCE_LINES.append(f"{status}  {record['label']}  {record['detail']}".rstrip())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
