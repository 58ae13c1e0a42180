"""Model lifecycle: train, batch predict, streaming sessions, retrain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ReservoirConfig
from .errors import LsmError, MissingCacheError, NotTrainedError, ShapeError
from .readout import (
    FeatureMode,
    ReadoutModel,
    StateCache,
    extract_features,
    fit_readout,
    predict,
    retrain_from_cache,
)
from .reservoir import Reservoir, ReservoirState, generate_reservoir, reservoir_step, run_sequence


@dataclass(eq=False)
class LsmModel:
    reservoir: Reservoir
    readout: ReadoutModel | None = None
    cache: StateCache | None = None

    def __post_init__(self):
        if self.readout is not None:
            n = self.reservoir.n_neurons
            expected = self.readout.feature_mode.width(n)
            if self.readout.n_features != expected:
                raise ShapeError("readout features", expected, self.readout.n_features)
            if self.readout.n_outputs != self.reservoir.config.n_outputs:
                raise ShapeError("readout outputs", self.reservoir.config.n_outputs, self.readout.n_outputs)
        if self.cache is not None and self.cache.features.shape[1] != self.cache.feature_mode.width(
                self.reservoir.n_neurons):
            raise ShapeError("cache features", self.cache.feature_mode.width(self.reservoir.n_neurons),
                             self.cache.features.shape[1])

    @property
    def trained(self) -> bool:
        return self.readout is not None

    def _require_readout(self) -> ReadoutModel:
        if self.readout is None:
            raise NotTrainedError("model has no trained readout")
        return self.readout


def _as_2d(name, a, width):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, np.newaxis]
    if a.ndim != 2 or a.shape[1] != width:
        raise ShapeError(name, f"(T, {width})", a.shape)
    return a


def collect_features(reservoir: Reservoir, sequences, mode: FeatureMode, washout: int = 0):
    """Run each input sequence from a fresh zero state; returns per-sequence feature blocks."""
    blocks = []
    for xs in sequences:
        _, trace = run_sequence(reservoir, ReservoirState.zeros(reservoir.n_neurons), xs, mode)
        blocks.append(trace.rows[washout:])
    return blocks


def train(config, sequences, lam=None, mode: FeatureMode = None, keep_cache: bool = False,
          washout: int = 0) -> LsmModel:
    """Generate (or reuse) a reservoir and fit its readout.

    Args:
        config: a :class:`ReservoirConfig`, or an existing :class:`Reservoir`.
        sequences: list of ``(xs, ys)`` pairs, shapes ``(T, M)`` and ``(T, P)``.
        lam: ridge strength; ``None`` picks the scale-aware default.
        mode: feature definition.
        keep_cache: retain features and targets for later retraining.
        washout: leading feature rows dropped from every sequence.
    """
    if isinstance(config, Reservoir):
        reservoir = config
    elif isinstance(config, ReservoirConfig):
        reservoir = generate_reservoir(config)
    else:
        raise TypeError(f"expected ReservoirConfig or Reservoir, got {type(config).__name__}")
    if not sequences:
        raise LsmError("no training sequences given")
    if washout < 0:
        raise ValueError(f"washout must be >= 0, got {washout}")
    mode = mode or FeatureMode()
    cfg = reservoir.config

    inputs, targets = [], []
    for k, (xs, ys) in enumerate(sequences):
        xs = _as_2d(f"sequence {k} inputs", xs, cfg.n_inputs)
        ys = _as_2d(f"sequence {k} targets", ys, cfg.n_outputs)
        if xs.shape[0] != ys.shape[0]:
            raise ShapeError(f"sequence {k} target rows", xs.shape[0], ys.shape[0])
        if xs.shape[0] <= washout:
            raise ShapeError(f"sequence {k} length", f"> washout ({washout})", xs.shape[0])
        inputs.append(xs)
        targets.append(ys[washout:])

    features = collect_features(reservoir, inputs, mode, washout)
    cache = StateCache.from_sequences(features, targets, mode)
    readout = fit_readout(cache.features, cache.targets, lam, mode)
    return LsmModel(reservoir, readout, cache if keep_cache else None)


def predict_sequence(model: LsmModel, xs) -> np.ndarray:
    """Run ``xs`` from a zero state and return the ``(T, P)`` readout outputs."""
    readout = model._require_readout()
    xs = _as_2d("inputs", xs, model.reservoir.n_inputs)
    _, trace = run_sequence(model.reservoir, ReservoirState.zeros(model.reservoir.n_neurons), xs,
                            readout.feature_mode)
    return predict(readout, trace.rows)


def retrain(model: LsmModel, new_targets, lam=None) -> LsmModel:
    """New readout from the model's cached features; the reservoir is not run.

    ``lam=None`` reuses the regularisation of the current readout.
    """
    if model.cache is None:
        raise MissingCacheError("model carries no state cache; train with keep_cache to enable retraining")
    new_targets = np.asarray(new_targets, dtype=np.float64)
    if new_targets.ndim == 1:
        new_targets = new_targets[:, np.newaxis]
    if lam is None and model.readout is not None:
        lam = model.readout.lam
    readout = retrain_from_cache(model.cache, new_targets, lam)
    cache = StateCache(model.cache.features, new_targets, model.cache.boundaries, model.cache.feature_mode)
    return LsmModel(model.reservoir, readout, cache)


class StreamSession:
    """Step-at-a-time inference over one model. Not shared between threads."""

    def __init__(self, model: LsmModel):
        self.model = model
        self._readout = model._require_readout()
        n = model.reservoir.n_neurons
        self.state = ReservoirState.zeros(n)
        self.trace_state = np.zeros(n)

    @property
    def step_index(self) -> int:
        return self.state.step_index

    def step(self, x) -> np.ndarray:
        self.state = reservoir_step(self.model.reservoir, self.state, x)
        row, self.trace_state = extract_features(self.state, self.trace_state, self._readout.feature_mode)
        return predict(self._readout, row[np.newaxis, :])[0]

    def reset(self):
        n = self.model.reservoir.n_neurons
        self.state = ReservoirState.zeros(n)
        self.trace_state = np.zeros(n)


def open_session(model: LsmModel) -> StreamSession:
    return StreamSession(model)


def stream_step(session: StreamSession, x) -> np.ndarray:
    return session.step(x)


def reset_session(session: StreamSession):
    session.reset()
