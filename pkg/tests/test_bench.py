import numpy as np
import pytest

from spikelsm import (
    NumericError,
    ReservoirState,
    ShapeError,
    default_config,
    fit_readout,
    generate_reservoir,
    predict,
    run_sequence,
)
from spikelsm.bench import (
    DEFAULT_LAMBDA,
    DEFAULT_MODE,
    BenchReport,
    DelayTask,
    compare_step_throughput,
    gen_delay_task,
    measure_activity,
    memory_capacity_profile,
    nmse,
    run_benchmark,
)


def _two_pass_nmse(pred, target):
    """Plain-Python reference: mean first, then squared deviations."""
    p, t = np.ravel(pred).tolist(), np.ravel(target).tolist()
    n = len(t)
    mean = sum(t) / n
    var = sum((v - mean) ** 2 for v in t) / n
    mse = sum((a - b) ** 2 for a, b in zip(p, t)) / n
    return mse / var


class TestDelayTask:
    def test_zero_delay_identity(self):
        xs, ys = gen_delay_task(50, 0, 1)
        assert np.array_equal(xs, ys)

    def test_shift(self):
        xs, ys = gen_delay_task(4, 2, 7)
        a, b = xs[0, 0], xs[1, 0]
        assert ys.ravel().tolist() == [0.0, 0.0, a, b]

    def test_deterministic(self):
        a, b = gen_delay_task(100, 3, 42), gen_delay_task(100, 3, 42)
        assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()
        assert not np.array_equal(a[0], gen_delay_task(100, 3, 43)[0])

    def test_range(self):
        xs, _ = gen_delay_task(1000, 0, 0)
        assert xs.shape == (1000, 1) and xs.min() >= 0 and xs.max() < 1

    @pytest.mark.parametrize("T,d", [(5, 5), (5, 9), (5, -1)])
    def test_bad_delay(self, T, d):
        with pytest.raises(ValueError):
            gen_delay_task(T, d, 0)

    def test_parse(self):
        assert DelayTask.parse("delay:7", t_train=10).delay == 7
        for bad in ("delay", "delay:x", "narma:3", "delay:-1"):
            with pytest.raises(ValueError):
                DelayTask.parse(bad)


class TestNmse:
    def test_perfect(self, rng):
        y = rng.normal(size=(20, 2))
        assert nmse(y, y) == 0.0

    def test_mean_predictor(self, rng):
        y = rng.normal(size=(30, 3))
        assert nmse(np.full_like(y, y.mean()), y) == pytest.approx(1.0, rel=1e-12)

    def test_against_two_pass(self, rng):
        for _ in range(20):
            shape = (int(rng.integers(2, 50)), int(rng.integers(1, 4)))
            y, p = rng.normal(size=shape), rng.normal(size=shape)
            assert nmse(p, y) == pytest.approx(_two_pass_nmse(p, y), rel=1e-10)

    def test_constant_target(self):
        with pytest.raises(NumericError):
            nmse(np.zeros((5, 1)), np.full((5, 1), 3.0))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            nmse(np.zeros((5, 1)), np.zeros((4, 1)))


class TestMemoryProfile:
    def test_complete_and_bounded(self):
        prof = memory_capacity_profile(default_config, 6, 300, 3)
        assert [d for d, _ in prof] == list(range(7))
        assert all(0.0 <= s <= 1.0 for _, s in prof)

    @pytest.mark.parametrize("seed", range(10))
    def test_zero_delay_floor(self, seed):
        # Needs more training rows than features (400 for the default config).
        prof = memory_capacity_profile(default_config, 8, 1000, seed)
        assert prof[0][1] >= 0.99

    def test_equals_independent_fits(self):
        cfg = default_config(5)
        d_max, T = 4, 400
        prof = memory_capacity_profile(cfg, d_max, T, 5)
        xs, _ = gen_delay_task(T, 0, 5)
        rows = run_sequence(generate_reservoir(cfg), ReservoirState.zeros(cfg.n_neurons), xs, DEFAULT_MODE)[1].rows
        half = T // 2
        for d, score in prof:
            ys = np.zeros_like(xs)
            ys[d:] = xs[: T - d]
            model = fit_readout(rows[d_max:half], ys[d_max:half], DEFAULT_LAMBDA, DEFAULT_MODE)
            expect = min(1.0, max(0.0, 1.0 - nmse(predict(model, rows[half:]), ys[half:])))
            assert score == expect

    def test_accepts_reservoir(self):
        res = generate_reservoir(default_config(8))
        assert memory_capacity_profile(res, 2, 200, 8) == memory_capacity_profile(default_config(8), 2, 200, 8)

    def test_d_max_limit(self):
        with pytest.raises(ValueError):
            memory_capacity_profile(default_config, 50, 100, 0)

    def test_fading_over_seeds(self):
        scores = np.array([[s for _, s in memory_capacity_profile(default_config, 8, 1000, seed)]
                           for seed in range(10)])
        mean = scores.mean(axis=0)
        assert all(mean[d + 2] <= mean[d] for d in range(len(mean) - 2))
        assert mean[0] > mean[8]


class TestReport:
    def test_metrics_present(self):
        task = DelayTask(delay=2, t_train=300, t_test=100)
        report = run_benchmark(default_config(1), task, seeds=2)
        text = report.to_text()
        for key in ("nmse=", "baseline_nmse=", "nmse_ratio=", "steps_per_second=", "spikes_per_step="):
            assert key in text
        assert report.to_csv().count("\n") == 3
        assert report.steps_per_second > 0 and report.spikes_per_step > 0

    def test_deterministic_metrics(self):
        task = DelayTask(delay=1, t_train=200, t_test=100)
        a, b = run_benchmark(default_config(2), task), run_benchmark(default_config(2), task)
        assert (a.nmse, a.baseline_nmse, a.spikes_per_step) == (b.nmse, b.baseline_nmse, b.spikes_per_step)

    def test_ratio(self):
        assert BenchReport("delay:1", 1, 0.2, 0.8, 1.0, 0.0).ratio == 0.25

    def test_rejects_multi_io(self):
        with pytest.raises(ShapeError):
            run_benchmark(default_config().replace(n_inputs=2), DelayTask(t_train=50, t_test=20))

    def test_zero_input_silent(self):
        res = generate_reservoir(default_config(0))
        sps, spikes = measure_activity(res, np.zeros((100, 1)))
        assert spikes == 0.0 and sps > 0

    def test_throughput_pair(self):
        res = generate_reservoir(default_config(0).replace(n_neurons=50))
        sparse, dense = compare_step_throughput(res, steps=20, repeats=1)
        assert sparse > 0 and dense > 0
