"""Fixed random spiking reservoir: generation, neuron dynamics, inference loop.

The recurrent weights are a binary mask plus one sign per presynaptic
neuron, so propagating spikes is an index gather followed by integer
additions. Spikes emitted at step ``t`` reach their targets at step
``t + 1``; all neurons update synchronously from the previous spike vector.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend
from .config import NeuronParams, ReservoirConfig
from .errors import NumericError, ShapeError
from .readout import FeatureMode, StateTrace
from .sparse import SparseBinaryMatrix, SparseRealMatrix


class StepCounter:
    """Counts reservoir steps executed in this process (all backends, all entry points)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    @property
    def count(self) -> int:
        return self._count

    def add(self, n: int):
        with self._lock:
            self._count += n

    def reset(self):
        with self._lock:
            self._count = 0


step_counter = StepCounter()


@dataclass(frozen=True, eq=False)
class Reservoir:
    config: ReservoirConfig
    w_rec: SparseBinaryMatrix
    w_in: SparseRealMatrix
    sign: np.ndarray

    def __post_init__(self):
        sign = np.array(self.sign, dtype=np.int8, copy=True)
        sign.setflags(write=False)
        object.__setattr__(self, "sign", sign)
        cfg = self.config
        n, m = cfg.n_neurons, cfg.n_inputs
        if sign.shape != (n,) or not np.all(np.abs(sign) == 1):
            raise ShapeError("sign", f"({n},) entries in {{-1, +1}}", sign.shape)
        if (self.w_rec.n_rows, self.w_rec.n_cols) != (n, n):
            raise ShapeError("w_rec", (n, n), (self.w_rec.n_rows, self.w_rec.n_cols))
        if (self.w_in.n_rows, self.w_in.n_cols) != (n, m):
            raise ShapeError("w_in", (n, m), (self.w_in.n_rows, self.w_in.n_cols))

    @property
    def n_neurons(self) -> int:
        return self.config.n_neurons

    @property
    def n_inputs(self) -> int:
        return self.config.n_inputs

    def plan(self, kernels=None):
        """Kernel plan for ``kernels`` (default: the active backend), built once and cached."""
        kern = kernels or _backend.kernels
        cached = self._plans.get(kern.NAME)
        if cached is None:
            cached = self._plans[kern.NAME] = kern.make_plan(*self._kernel_args)
        return cached

    @cached_property
    def _plans(self):
        return {}

    @property
    def _kernel_args(self):
        return (
            self.w_rec.row_offsets,
            self.w_rec.col_indices,
            self.sign,
            self.w_in.row_offsets,
            self.w_in.col_indices,
            self.w_in.values,
            self.config.synaptic_scale,
            self.config.neuron.threshold,
            self.config.neuron.leak,
            self.config.neuron.refractory_steps,
        )

    def __eq__(self, other):
        if not isinstance(other, Reservoir):
            return NotImplemented
        return (
            self.config == other.config
            and self.w_rec == other.w_rec
            and self.w_in == other.w_in
            and np.array_equal(self.sign, other.sign)
        )


@dataclass(eq=False)
class ReservoirState:
    """Per-session mutable state: potentials, last spikes, refractory counters."""

    v: np.ndarray
    s: np.ndarray
    refractory: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        self.v = np.array(self.v, dtype=np.float64)
        self.s = np.array(self.s, dtype=np.uint8)
        self.refractory = np.array(self.refractory, dtype=np.int64)
        n = self.v.shape[0]
        if self.v.ndim != 1 or self.s.shape != (n,) or self.refractory.shape != (n,):
            raise ShapeError("state arrays", f"three length-{n} vectors", (self.v.shape, self.s.shape,
                                                                         self.refractory.shape))
        if np.any(self.s > 1):
            raise ValueError("spikes must be 0 or 1")
        if np.any(self.refractory < 0):
            raise ValueError("refractory counters must be non-negative")

    @classmethod
    def _trusted(cls, v, s, refractory, step_index) -> ReservoirState:
        # Arrays fresh from a kernel: skip copying and validation.
        obj = cls.__new__(cls)
        obj.v, obj.s, obj.refractory, obj.step_index = v, s, refractory, step_index
        return obj

    @classmethod
    def zeros(cls, n: int) -> ReservoirState:
        return cls(np.zeros(n), np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.int64), 0)

    @property
    def n_neurons(self) -> int:
        return self.v.shape[0]

    def copy(self) -> ReservoirState:
        return ReservoirState(self.v.copy(), self.s.copy(), self.refractory.copy(), self.step_index)

    def __eq__(self, other):
        if not isinstance(other, ReservoirState):
            return NotImplemented
        return (
            self.step_index == other.step_index
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.refractory, other.refractory)
        )


def generate_reservoir(config: ReservoirConfig) -> Reservoir:
    """Draw a reservoir from ``config``; a pure function of the config and its seed.

    Draw order from one PCG64 stream: inhibitory neurons, then recurrent
    rows (``fan_in`` distinct non-self presynaptic neurons each), then input
    rows (``input_fan_in`` distinct input channels each), then all input
    weights uniform on ``[-input_scale, input_scale)``.
    """
    rng = np.random.default_rng(config.seed)
    n, m = config.n_neurons, config.n_inputs
    k, k_in = config.fan_in, config.input_fan_in

    sign = np.ones(n, dtype=np.int8)
    inhibitory = rng.choice(n, size=config.n_inhibitory, replace=False)
    sign[inhibitory] = -1

    rec_cols = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        cols = rng.choice(n - 1, size=k, replace=False)
        cols[cols >= i] += 1  # skip the diagonal
        rec_cols[i] = np.sort(cols)

    in_cols = np.empty((n, k_in), dtype=np.int64)
    for i in range(n):
        in_cols[i] = np.sort(rng.choice(m, size=k_in, replace=False))

    values = rng.uniform(-config.input_scale, config.input_scale, size=n * k_in)
    while np.any(values == 0.0):
        zero = values == 0.0
        values[zero] = rng.uniform(-config.input_scale, config.input_scale, size=int(zero.sum()))

    w_rec = SparseBinaryMatrix(n, n, np.arange(n + 1, dtype=np.int64) * k, rec_cols.ravel())
    w_in = SparseRealMatrix(n, m, np.arange(n + 1, dtype=np.int64) * k_in, in_cols.ravel(), values)
    return Reservoir(config, w_rec, w_in, sign)


def neuron_update(params: NeuronParams, v: float, drive: float, refractory: int):
    """One neuron, one step. Returns ``(v_next, spike, refractory_next)``."""
    if refractory < 0:
        raise ValueError(f"refractory must be >= 0, got {refractory}")
    if not math.isfinite(drive):
        raise NumericError(f"non-finite drive {drive}")
    if refractory > 0:
        return 0.0, 0, refractory - 1
    cand = params.leak * v + drive
    if cand >= params.threshold:
        return 0.0, 1, params.refractory_steps
    return cand, 0, 0


def _check_state(res: Reservoir, state: ReservoirState):
    if state.n_neurons != res.n_neurons:
        raise ShapeError("state", f"{res.n_neurons} neurons", state.n_neurons)


def _check_input(res: Reservoir, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (res.n_inputs,):
        raise ShapeError("input vector", (res.n_inputs,), x.shape)
    if not np.isfinite(x).all():
        raise NumericError("input vector contains non-finite values")
    return x


def reservoir_step(res: Reservoir, state: ReservoirState, x, *, kernels=None) -> ReservoirState:
    """Advance ``state`` by one step driven by input ``x``; returns a new state."""
    _check_state(res, state)
    x = _check_input(res, x)
    kern = kernels or _backend.kernels
    n = res.n_neurons
    v_out = np.empty(n)
    s_out = np.empty(n, dtype=np.uint8)
    r_out = np.empty(n, dtype=np.int64)
    kern.step(res.plan(kern), state.v, state.s, state.refractory, x, v_out, s_out, r_out)
    step_counter.add(1)
    return ReservoirState._trusted(v_out, s_out, r_out, state.step_index + 1)


def densify(res: Reservoir):
    """Dense ``(W, W_in)`` with the presynaptic sign folded into W's columns."""
    w = res.w_rec.to_dense() * res.sign.astype(np.float64)[np.newaxis, :]
    return w, res.w_in.to_dense()


def dense_reference_step(res: Reservoir, state: ReservoirState, x, dense=None) -> ReservoirState:
    """Oracle step: explicit dense matrices and float multiply-accumulate.

    ``dense`` may carry a precomputed :func:`densify` result.
    """
    _check_state(res, state)
    x = _check_input(res, x)
    w, w_in = dense if dense is not None else densify(res)
    p = res.config.neuron
    drive = res.config.synaptic_scale * (w @ state.s.astype(np.float64)) + w_in @ x
    blocked = state.refractory > 0
    cand = p.leak * state.v + drive
    fired = (cand >= p.threshold) & ~blocked
    v = np.where(fired | blocked, 0.0, cand)
    r = np.where(blocked, state.refractory - 1, np.where(fired, p.refractory_steps, 0))
    return ReservoirState(v, fired.astype(np.uint8), r, state.step_index + 1)


def run_sequence(res: Reservoir, init: ReservoirState, xs, mode: FeatureMode = None,
                 trace_state=None, *, kernels=None):
    """Run the reservoir over the rows of ``xs`` and record one feature row per step.

    Args:
        res: the reservoir.
        init: starting state; not modified.
        xs: ``(T, M)`` inputs, T >= 1.
        mode: feature definition, default :class:`FeatureMode`.
        trace_state: starting spike-trace vector, default zeros.

    Returns:
        ``(final_state, trace)``; ``trace.final_trace_state`` carries the
        spike-trace vector after the last step so runs can be chained.
    """
    mode = mode or FeatureMode()
    _check_state(res, init)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != res.n_inputs:
        raise ShapeError("input sequence", f"(T, {res.n_inputs})", xs.shape)
    if xs.shape[0] < 1:
        raise ShapeError("input sequence", "T >= 1 rows", xs.shape)
    if not np.all(np.isfinite(xs)):
        raise NumericError("input sequence contains non-finite values")
    n = res.n_neurons
    trace_vec = np.zeros(n) if trace_state is None else np.array(trace_state, dtype=np.float64)
    if trace_vec.shape != (n,):
        raise ShapeError("trace_state", (n,), trace_vec.shape)
    if not np.all(np.isfinite(trace_vec)):
        raise NumericError("trace_state contains non-finite values")

    kern = kernels or _backend.kernels
    state = init.copy()
    feats = np.empty((xs.shape[0], mode.width(n)))
    spikes = kern.run(res.plan(kern), state.v, state.s, state.refractory, trace_vec,
                      xs, mode.trace_decay, mode.code, feats)
    step_counter.add(xs.shape[0])
    if not np.all(np.isfinite(state.v)):
        raise NumericError("membrane potential overflowed")
    state.step_index += xs.shape[0]
    return state, StateTrace(feats, final_trace_state=trace_vec, n_spikes=int(spikes))
