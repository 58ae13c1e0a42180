import threading

import numpy as np
import pytest

from spikelsm import (
    FeatureMode,
    LsmError,
    LsmModel,
    MissingCacheError,
    NotTrainedError,
    ReservoirState,
    ShapeError,
    default_config,
    fit_readout,
    gen_delay_task,
    generate_reservoir,
    open_session,
    predict_sequence,
    reset_session,
    retrain,
    run_sequence,
    step_counter,
    stream_step,
    train,
)
from spikelsm.persistence import dumps_model

from conftest import random_config


@pytest.fixture
def model():
    cfg = default_config(5).replace(n_neurons=60)
    xs, ys = gen_delay_task(300, 2, 5)
    return train(cfg, [(xs, ys)], 1e-3, FeatureMode("both", 0.5), keep_cache=True)


def _stream(model, xs):
    session = open_session(model)
    return np.array([stream_step(session, x) for x in xs])


def test_degenerate_single_zero_step():
    cfg = default_config(1).replace(n_neurons=20)
    model = train(cfg, [(np.zeros((1, 1)), np.ones((1, 1)))], 1e-3)
    assert model.readout.w_out.shape == (21, 1)
    assert np.all(np.isfinite(model.readout.w_out))


def test_train_deterministic():
    cfg = default_config(2).replace(n_neurons=40)
    xs, ys = gen_delay_task(200, 1, 9)
    a = train(cfg, [(xs, ys)], 1e-4, keep_cache=True)
    b = train(cfg, [(xs, ys)], 1e-4, keep_cache=True)
    assert dumps_model(a) == dumps_model(b)


def test_train_matches_manual_pipeline():
    cfg = default_config(4).replace(n_neurons=30)
    mode = FeatureMode("spike_trace", 0.8)
    seqs = [gen_delay_task(80, 1, s) for s in (1, 2, 3)]
    model = train(cfg, seqs, 1e-3, mode, keep_cache=True)
    res = generate_reservoir(cfg)
    rows = [run_sequence(res, ReservoirState.zeros(30), xs, mode)[1].rows for xs, _ in seqs]
    manual = fit_readout(np.vstack(rows), np.vstack([ys for _, ys in seqs]), 1e-3, mode)
    assert model.readout.w_out.tobytes() == manual.w_out.tobytes()
    assert model.cache.boundaries == [0, 80, 160, 240]


def test_train_accepts_existing_reservoir():
    cfg = default_config(4).replace(n_neurons=30)
    xs, ys = gen_delay_task(100, 1, 0)
    a = train(cfg, [(xs, ys)], 1e-3)
    b = train(generate_reservoir(cfg), [(xs, ys)], 1e-3)
    assert a.readout.w_out.tobytes() == b.readout.w_out.tobytes()


def test_cache_only_when_requested():
    cfg = default_config(4).replace(n_neurons=30)
    xs, ys = gen_delay_task(100, 1, 0)
    assert train(cfg, [(xs, ys)], 1e-3).cache is None


def test_washout_drops_rows():
    cfg = default_config(4).replace(n_neurons=30)
    xs, ys = gen_delay_task(100, 1, 0)
    model = train(cfg, [(xs, ys), (xs[:50], ys[:50])], 1e-3, keep_cache=True, washout=10)
    assert model.cache.n_rows == 90 + 40
    full = train(cfg, [(xs, ys)], 1e-3, keep_cache=True)
    assert np.array_equal(model.cache.features[:90], full.cache.features[10:])
    with pytest.raises(ShapeError):
        train(cfg, [(xs[:5], ys[:5])], 1e-3, washout=5)


def test_train_errors():
    cfg = default_config(4).replace(n_neurons=30)
    with pytest.raises(LsmError):
        train(cfg, [], 1e-3)
    with pytest.raises(ShapeError):
        train(cfg, [(np.zeros((10, 2)), np.zeros((10, 1)))], 1e-3)
    with pytest.raises(ShapeError):
        train(cfg, [(np.zeros((10, 1)), np.zeros((9, 1)))], 1e-3)


def test_zero_input_predicts_bias(model):
    out = predict_sequence(model, np.zeros((15, 1)))
    assert np.all(out == model.readout.w_out[-1])


def test_predict_rejects_empty(model):
    with pytest.raises(ShapeError):
        predict_sequence(model, np.zeros((0, 1)))
    with pytest.raises(ShapeError):
        predict_sequence(model, np.zeros((4, 3)))


def test_untrained_model():
    model = LsmModel(generate_reservoir(default_config(0).replace(n_neurons=12)))
    with pytest.raises(NotTrainedError):
        predict_sequence(model, np.zeros((3, 1)))
    with pytest.raises(NotTrainedError):
        open_session(model)


def test_stream_equals_batch(model, rng):
    xs = rng.uniform(0, 1, size=(120, 1))
    assert _stream(model, xs).tobytes() == predict_sequence(model, xs).tobytes()


def test_stream_equals_batch_random_models(rng):
    for _ in range(10):
        cfg = random_config(rng)
        xs = rng.normal(size=(60, cfg.n_inputs))
        ys = rng.normal(size=(60, cfg.n_outputs))
        m = train(cfg, [(xs, ys)], 0.1, FeatureMode(str(rng.choice(["membrane", "spike_trace", "both"])), 0.7))
        test = rng.normal(size=(40, cfg.n_inputs))
        assert _stream(m, test).tobytes() == predict_sequence(m, test).tobytes()


def test_reset_session(model, rng):
    xs = rng.uniform(0, 1, size=(50, 1))
    session = open_session(model)
    for x in rng.uniform(0, 1, size=(30, 1)):
        stream_step(session, x)
    assert session.step_index == 30
    reset_session(session)
    assert session.step_index == 0
    out = np.array([stream_step(session, x) for x in xs])
    assert out.tobytes() == _stream(model, xs).tobytes()


def test_session_isolation_interleaved(model, rng):
    a_in, b_in = rng.uniform(0, 1, size=(60, 1)), rng.uniform(0, 1, size=(60, 1))
    sa, sb = open_session(model), open_session(model)
    a_out, b_out = [], []
    for xa, xb in zip(a_in, b_in):
        a_out.append(stream_step(sa, xa))
        b_out.append(stream_step(sb, xb))
    assert np.array(a_out).tobytes() == _stream(model, a_in).tobytes()
    assert np.array(b_out).tobytes() == _stream(model, b_in).tobytes()


def test_sessions_in_threads(model, rng):
    inputs = [rng.uniform(0, 1, size=(200, 1)) for _ in range(4)]
    results = [None] * 4

    def work(k):
        results[k] = _stream(model, inputs[k])

    threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for k in range(4):
        assert results[k].tobytes() == predict_sequence(model, inputs[k]).tobytes()


def test_retrain_no_inference(model):
    new_y = gen_delay_task(300, 4, 5)[1]
    before = step_counter.count
    retrained = retrain(model, new_y)
    assert step_counter.count == before
    assert retrained.readout.lam == model.readout.lam
    scratch = train(model.reservoir, [(gen_delay_task(300, 2, 5)[0], new_y)], model.readout.lam,
                    model.readout.feature_mode)
    assert retrained.readout.w_out.tobytes() == scratch.readout.w_out.tobytes()


def test_retrain_without_cache(model):
    bare = LsmModel(model.reservoir, model.readout)
    with pytest.raises(MissingCacheError):
        retrain(bare, np.zeros((300, 1)))
