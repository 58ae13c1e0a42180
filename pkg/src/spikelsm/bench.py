"""Synthetic temporal tasks, metrics and the benchmark report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import ReservoirConfig, default_config
from .errors import NumericError, ShapeError
from .readout import FeatureMode, StateCache, fit_readout, predict, retrain_from_cache
from .reservoir import (
    Reservoir,
    ReservoirState,
    dense_reference_step,
    densify,
    generate_reservoir,
    reservoir_step,
    run_sequence,
)

DEFAULT_MODE = FeatureMode("both", 0.5)
DEFAULT_LAMBDA = 1e-4


def gen_delay_task(T: int, d: int, seed):
    """Inputs i.i.d. uniform on [0, 1); targets are the inputs delayed by ``d`` (zeros before)."""
    if not (0 <= d < T):
        raise ValueError(f"delay must satisfy 0 <= d < T, got d={d}, T={T}")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 1.0, size=(T, 1))
    return xs, delay_targets(xs, d)


def delay_targets(xs, d: int) -> np.ndarray:
    ys = np.zeros_like(xs)
    ys[d:] = xs[: xs.shape[0] - d]
    return ys


def nmse(pred, target) -> float:
    """Mean squared error over all entries divided by the pooled target variance."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError("prediction", target.shape, pred.shape)
    var = float(np.var(target))
    if not var > 0:
        raise NumericError("target has zero variance; NMSE undefined")
    return float(np.mean((pred - target) ** 2)) / var


def _resolve(model_builder, seed) -> Reservoir:
    built = model_builder(seed) if callable(model_builder) else model_builder
    if isinstance(built, ReservoirConfig):
        return generate_reservoir(built)
    if isinstance(built, Reservoir):
        return built
    raise TypeError(f"model_builder must yield ReservoirConfig or Reservoir, got {type(built).__name__}")


def memory_capacity_profile(model_builder, d_max: int, T: int, seed, lam=DEFAULT_LAMBDA,
                            mode: FeatureMode = DEFAULT_MODE):
    """Recall score ``1 - NMSE`` (clamped to [0, 1]) for each delay ``0..d_max``.

    The reservoir runs once over a random input stream. The first half of
    the trace (minus ``d_max`` warm-up rows) trains, the second half tests.
    Each delay only changes the targets, so every readout comes from
    :func:`retrain_from_cache` on the same cached features.

    Args:
        model_builder: ``ReservoirConfig``, ``Reservoir``, or a callable
            mapping ``seed`` to either.
    """
    if not (0 <= d_max < T / 2):
        raise ValueError(f"need 0 <= d_max < T/2, got d_max={d_max}, T={T}")
    reservoir = _resolve(model_builder, seed)
    xs, _ = gen_delay_task(T, 0, seed)
    _, trace = run_sequence(reservoir, ReservoirState.zeros(reservoir.n_neurons), xs, mode)
    split = T // 2
    cache = StateCache(trace.rows[d_max:split], np.zeros((split - d_max, 1)), [0, split - d_max], mode)
    test_rows = trace.rows[split:]
    profile = []
    for d in range(d_max + 1):
        ys = delay_targets(xs, d)
        readout = retrain_from_cache(cache, ys[d_max:split], lam)
        score = 1.0 - nmse(predict(readout, test_rows), ys[split:])
        profile.append((d, min(1.0, max(0.0, score))))
    return profile


@dataclass(frozen=True)
class DelayTask:
    delay: int = 3
    t_train: int = 2000
    t_test: int = 500
    lam: float = DEFAULT_LAMBDA
    mode: FeatureMode = DEFAULT_MODE

    @classmethod
    def parse(cls, text: str, **kwargs) -> DelayTask:
        kind, _, arg = text.partition(":")
        if kind != "delay" or not arg.strip().isdigit():
            raise ValueError(f"task must look like 'delay:<d>', got {text!r}")
        return cls(delay=int(arg), **kwargs)


@dataclass
class BenchReport:
    task: str
    seeds: int
    nmse: float
    baseline_nmse: float
    steps_per_second: float
    spikes_per_step: float
    per_seed: list = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.nmse / self.baseline_nmse

    def lines(self):
        return [
            f"task={self.task}",
            f"seeds={self.seeds}",
            f"nmse={self.nmse!r}",
            f"baseline_nmse={self.baseline_nmse!r}",
            f"nmse_ratio={self.ratio!r}",
            f"steps_per_second={self.steps_per_second:.1f}",
            f"spikes_per_step={self.spikes_per_step!r}",
        ]

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def to_csv(self) -> str:
        rows = ["seed,nmse,baseline_nmse,spikes_per_step"]
        rows += [f"{s},{a!r},{b!r},{c!r}" for s, a, b, c in self.per_seed]
        return "\n".join(rows) + "\n"


def data_seeds(seed: int):
    """Independent train/test data streams derived from a reservoir seed."""
    return [seed, 0], [seed, 1]


def run_delay_seed(config: ReservoirConfig, task: DelayTask):
    """One seed of the delay benchmark: ``(lsm_nmse, baseline_nmse, steps, spikes, seconds)``."""
    reservoir = generate_reservoir(config)
    train_seed, test_seed = data_seeds(config.seed)
    x_tr, y_tr = gen_delay_task(task.t_train, task.delay, train_seed)
    x_te, y_te = gen_delay_task(task.t_test, task.delay, test_seed)
    zero = ReservoirState.zeros(reservoir.n_neurons)

    start = time.perf_counter()
    _, tr = run_sequence(reservoir, zero, x_tr, task.mode)
    _, te = run_sequence(reservoir, zero, x_te, task.mode)
    elapsed = time.perf_counter() - start

    readout = fit_readout(tr.rows, y_tr, task.lam, task.mode)
    lsm = nmse(predict(readout, te.rows), y_te)
    base_model = fit_readout(x_tr, y_tr, task.lam)
    base = nmse(predict(base_model, x_te), y_te)
    steps = task.t_train + task.t_test
    return lsm, base, steps, tr.n_spikes + te.n_spikes, elapsed


def run_benchmark(config: ReservoirConfig = None, task: DelayTask = None, seeds: int = 1) -> BenchReport:
    """Delay-recall NMSE against the memoryless baseline, plus throughput and activity.

    Seed ``k`` uses ``config.seed + k`` for the reservoir and derives its
    data streams from the same value. Timing is the only non-deterministic
    field.
    """
    config = config or default_config()
    task = task or DelayTask()
    if config.n_inputs != 1 or config.n_outputs != 1:
        raise ShapeError("delay task config", "n_inputs = n_outputs = 1", (config.n_inputs, config.n_outputs))
    if seeds < 1:
        raise ValueError("seeds must be >= 1")
    per_seed = []
    lsm_sum = base_sum = 0.0
    total_steps = total_spikes = 0
    total_time = 0.0
    for k in range(seeds):
        cfg = config.replace(seed=config.seed + k)
        lsm, base, steps, spikes, elapsed = run_delay_seed(cfg, task)
        per_seed.append((cfg.seed, lsm, base, spikes / steps))
        lsm_sum += lsm
        base_sum += base
        total_steps += steps
        total_spikes += spikes
        total_time += elapsed
    return BenchReport(
        task=f"delay:{task.delay}",
        seeds=seeds,
        nmse=lsm_sum / seeds,
        baseline_nmse=base_sum / seeds,
        steps_per_second=total_steps / total_time if total_time > 0 else float("inf"),
        spikes_per_step=total_spikes / total_steps,
        per_seed=per_seed,
    )


def measure_activity(reservoir: Reservoir, xs, mode: FeatureMode = DEFAULT_MODE):
    """``(steps_per_second, spikes_per_step)`` for one run over ``xs`` from rest."""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    start = time.perf_counter()
    _, trace = run_sequence(reservoir, ReservoirState.zeros(reservoir.n_neurons), xs, mode)
    elapsed = time.perf_counter() - start
    steps = xs.shape[0]
    return (steps / elapsed if elapsed > 0 else float("inf")), trace.n_spikes / steps


def _time_steps(step, reservoir, xs, repeats):
    best = float("inf")
    for _ in range(repeats):
        state = ReservoirState.zeros(reservoir.n_neurons)
        start = time.perf_counter()
        for x in xs:
            state = step(state, x)
        best = min(best, time.perf_counter() - start)
    return xs.shape[0] / best


def compare_step_throughput(reservoir: Reservoir, steps: int = 300, seed: int = 0, repeats: int = 3):
    """Steps per second of the sparse step against the dense oracle step.

    Both are called one step at a time through their public functions on
    the same random input stream; the dense matrices are built once,
    outside the timed loop. Best of ``repeats`` runs for each.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 1.0, size=(steps, reservoir.n_inputs))
    dense = densify(reservoir)
    sparse_sps = _time_steps(lambda st, x: reservoir_step(reservoir, st, x), reservoir, xs, repeats)
    dense_sps = _time_steps(lambda st, x: dense_reference_step(reservoir, st, x, dense), reservoir, xs, repeats)
    return sparse_sps, dense_sps
