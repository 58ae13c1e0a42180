"""The compiled and numpy backends must agree bit for bit."""

import os

import numpy as np
import pytest

from spikelsm import FeatureMode, ReservoirConfig, ReservoirState, generate_reservoir, run_sequence
from spikelsm import _backend, _pykernels
from spikelsm.reservoir import Reservoir, reservoir_step
from spikelsm.sparse import SparseBinaryMatrix, SparseRealMatrix

from conftest import random_config, random_state

pytestmark = pytest.mark.skipif("cython" not in _backend.available(), reason="compiled kernels not built")


@pytest.fixture
def ck():
    return _backend.get("cython")


@pytest.mark.skipif(bool(os.environ.get("SPIKELSM_BACKEND")), reason="backend forced by environment")
def test_default_backend_prefers_compiled():
    assert _backend.kernels.NAME == "cython"


@pytest.mark.parametrize("variant", ["membrane", "spike_trace", "both"])
def test_run_bit_identical(rng, ck, variant):
    for _ in range(15):
        res = generate_reservoir(random_config(rng))
        init = random_state(rng, res)
        xs = rng.normal(scale=2.0, size=(30, res.n_inputs))
        mode = FeatureMode(variant, float(rng.uniform(0.05, 0.95)))
        a_state, a = run_sequence(res, init, xs, mode, kernels=ck)
        b_state, b = run_sequence(res, init, xs, mode, kernels=_pykernels)
        assert a_state == b_state
        assert a.rows.tobytes() == b.rows.tobytes()
        assert a.n_spikes == b.n_spikes


def test_irregular_rows(rng, ck):
    # Rows of differing length exercise the masked path of the numpy kernel.
    rec = SparseBinaryMatrix.from_rows(5, [[1, 2], [], [0, 1, 3, 4], [2], [0, 3]])
    w_in = SparseRealMatrix(5, 3, [0, 1, 1, 3, 4, 6], [2, 0, 1, 1, 0, 2], [0.5, -1.2, 0.3, 2.0, 0.7, -0.4])
    cfg = ReservoirConfig(5, 3, 1, 2, 1, inhibitory_fraction=0.4, synaptic_scale=0.6)
    res = Reservoir(cfg, rec, w_in, [1, -1, 1, -1, 1])
    state = ReservoirState(rng.uniform(0, 0.9, 5), [1, 1, 0, 1, 1], [0] * 5)
    for _ in range(20):
        x = rng.normal(size=3)
        a = reservoir_step(res, state, x, kernels=ck)
        b = reservoir_step(res, state, x, kernels=_pykernels)
        assert a == b
        state = a


def test_readout_bit_identical(rng, ck):
    S = np.ascontiguousarray(rng.normal(size=(50, 37)))
    W = np.ascontiguousarray(rng.normal(size=(38, 3)))
    a, b = np.empty((50, 3)), np.empty((50, 3))
    ck.readout(S, W, a)
    _pykernels.readout(S, W, b)
    assert a.tobytes() == b.tobytes()
    np.testing.assert_allclose(a, np.hstack([S, np.ones((50, 1))]) @ W, rtol=1e-12, atol=1e-12)


def test_readout_rowwise_equals_batch(rng, ck):
    S = np.ascontiguousarray(rng.normal(size=(20, 11)))
    W = np.ascontiguousarray(rng.normal(size=(12, 2)))
    batch = np.empty((20, 2))
    ck.readout(S, W, batch)
    for t in range(20):
        row = np.empty((1, 2))
        ck.readout(S[t:t + 1], W, row)
        assert row.tobytes() == batch[t:t + 1].tobytes()
