"""Recorded reservoir features and the trained linear readout.

The readout is ridge regression on features with a constant 1 column
appended (the bias). The regulariser is applied uniformly, bias included,
and the normal equations are solved with a Cholesky factorisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _backend
from .errors import NumericError, RankDeficiencyError, ShapeError

VARIANTS = ("membrane", "spike_trace", "both")
_CODES = {"membrane": 0, "spike_trace": 1, "both": 2}


@dataclass(frozen=True)
class FeatureMode:
    """Which neuron quantity the readout sees.

    ``membrane`` is the post-step potential, ``spike_trace`` an
    exponentially filtered spike train (``trace <- decay * trace + spike``),
    ``both`` their concatenation.
    """

    variant: str = "spike_trace"
    trace_decay: float = 0.9

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"feature variant must be one of {VARIANTS}, got {self.variant!r}")
        if not (0.0 < self.trace_decay < 1.0):
            raise ValueError(f"trace_decay must lie in (0, 1), got {self.trace_decay}")
        object.__setattr__(self, "trace_decay", float(self.trace_decay))

    @property
    def code(self) -> int:
        return _CODES[self.variant]

    def width(self, n_neurons: int) -> int:
        return 2 * n_neurons if self.variant == "both" else n_neurons

    def to_dict(self) -> dict:
        return {"variant": self.variant, "trace_decay": self.trace_decay}


@dataclass(eq=False)
class StateTrace:
    """Feature rows recorded over ``T`` steps; row ``t`` follows step ``t``."""

    rows: np.ndarray
    final_trace_state: np.ndarray | None = None
    n_spikes: int = 0

    @property
    def T(self) -> int:
        return self.rows.shape[0]

    @property
    def F(self) -> int:
        return self.rows.shape[1]


@dataclass(eq=False)
class ReadoutModel:
    w_out: np.ndarray
    lam: float
    feature_mode: FeatureMode = field(default_factory=FeatureMode)

    def __post_init__(self):
        self.w_out = np.ascontiguousarray(self.w_out, dtype=np.float64)
        if self.w_out.ndim != 2 or self.w_out.shape[0] < 1:
            raise ShapeError("w_out", "(F+1, P)", self.w_out.shape)
        if not np.all(np.isfinite(self.w_out)):
            raise NumericError("w_out contains non-finite values")

    @property
    def n_features(self) -> int:
        return self.w_out.shape[0] - 1

    @property
    def n_outputs(self) -> int:
        return self.w_out.shape[1]


@dataclass(eq=False)
class StateCache:
    """Features and targets retained so the readout can be refit without inference.

    ``boundaries`` holds sequence start offsets followed by the total row
    count, so sequence ``k`` occupies rows ``boundaries[k]:boundaries[k+1]``.
    """

    features: np.ndarray
    targets: np.ndarray
    boundaries: list
    feature_mode: FeatureMode = field(default_factory=FeatureMode)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        self.boundaries = [int(b) for b in self.boundaries]
        if self.features.ndim != 2 or self.targets.ndim != 2:
            raise ShapeError("cache", "2-D features and targets", (self.features.shape, self.targets.shape))
        if self.features.shape[0] != self.targets.shape[0]:
            raise ShapeError("cache targets rows", self.features.shape[0], self.targets.shape[0])
        b = self.boundaries
        if not b or b[0] != 0 or b[-1] != self.features.shape[0] or any(x >= y for x, y in zip(b, b[1:])):
            raise ShapeError("cache boundaries", f"increasing offsets 0..{self.features.shape[0]}", b)

    @classmethod
    def from_sequences(cls, features_list, targets_list, feature_mode) -> StateCache:
        lengths = [f.shape[0] for f in features_list]
        bounds = [0, *np.cumsum(lengths).tolist()]
        return cls(np.concatenate(features_list), np.concatenate(targets_list), bounds, feature_mode)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def append(self, features, targets):
        """Add one more sequence. Single writer only."""
        features = np.asarray(features, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if features.shape[1:] != self.features.shape[1:]:
            raise ShapeError("appended features", self.features.shape[1:], features.shape[1:])
        if targets.shape != (features.shape[0], self.targets.shape[1]):
            raise ShapeError("appended targets", (features.shape[0], self.targets.shape[1]), targets.shape)
        if features.shape[0] == 0:
            return
        self.features = np.concatenate([self.features, features])
        self.targets = np.concatenate([self.targets, targets])
        self.boundaries.append(self.features.shape[0])


def extract_features(state, trace_state, mode: FeatureMode):
    """Feature row for the state just reached, plus the updated spike trace."""
    trace = np.array(trace_state, dtype=np.float64)
    n = state.v.shape[0]
    if trace.shape != (n,):
        raise ShapeError("trace_state", (n,), trace.shape)
    if not np.all(np.isfinite(trace)):
        raise NumericError("trace_state contains non-finite values")
    row = np.empty(mode.width(n))
    _backend.kernels.features(state.v, state.s, trace, mode.trace_decay, mode.code, row)
    return row, trace


def augment(S) -> np.ndarray:
    """``[S | 1]``: features with the constant bias column appended."""
    S = np.asarray(S, dtype=np.float64)
    return np.hstack([S, np.ones((S.shape[0], 1))])


def default_lambda(S) -> float:
    """Scale-aware default: ``1e-6 * trace(S~^T S~) / (F + 1)``."""
    S = np.asarray(S, dtype=np.float64)
    gram_trace = float(np.sum(S * S)) + S.shape[0]
    return 1e-6 * gram_trace / (S.shape[1] + 1)


def _solve_ridge(X, Y, lam):
    """Solve ``(X^T X + lam I) w = X^T Y`` with Cholesky and one refinement step."""
    gram = X.T @ X
    rhs = X.T @ Y
    if lam == 0 and np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficiencyError(
            f"feature matrix has rank {np.linalg.matrix_rank(X)} < {X.shape[1]} columns; use lambda > 0"
        )
    system = gram + lam * np.eye(gram.shape[0])
    try:
        factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError:
        raise RankDeficiencyError("normal equations are not positive definite; increase lambda") from None
    w = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    w = w + scipy.linalg.cho_solve(factor, rhs - system @ w, check_finite=False)
    if not np.all(np.isfinite(w)):
        raise RankDeficiencyError("readout solution is not finite; increase lambda")
    return w


def _check_fit_inputs(S, Y):
    S = np.asarray(S, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if S.ndim != 2:
        raise ShapeError("features", "(T, F)", S.shape)
    if Y.ndim != 2:
        raise ShapeError("targets", "(T, P)", Y.shape)
    if S.shape[0] < 1:
        raise ShapeError("features", "T >= 1 rows", S.shape)
    if Y.shape[0] != S.shape[0]:
        raise ShapeError("targets rows", S.shape[0], Y.shape[0])
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Y))):
        raise NumericError("features or targets contain non-finite values")
    return S, Y


def fit_readout(S, Y, lam=None, feature_mode: FeatureMode = None) -> ReadoutModel:
    """Ridge fit of ``Y`` on ``[S | 1]``.

    ``lam=None`` selects :func:`default_lambda`. ``lam=0`` is allowed only
    when ``[S | 1]`` has full column rank.
    """
    S, Y = _check_fit_inputs(S, Y)
    if lam is None:
        lam = default_lambda(S)
    lam = float(lam)
    if not (lam >= 0 and np.isfinite(lam)):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    w = _solve_ridge(augment(S), Y, lam)
    return ReadoutModel(w, lam, feature_mode or FeatureMode())


def predict(model: ReadoutModel, S) -> np.ndarray:
    """Rows of ``[S | 1] @ w_out``."""
    S = np.ascontiguousarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] != model.n_features:
        raise ShapeError("features", f"(T, {model.n_features})", S.shape)
    out = np.empty((S.shape[0], model.n_outputs))
    _backend.kernels.readout(S, model.w_out, out)
    return out


def retrain_from_cache(cache: StateCache, new_Y, lam=None) -> ReadoutModel:
    """Refit the readout on cached features with new targets. Never touches a reservoir."""
    new_Y = np.asarray(new_Y, dtype=np.float64)
    if new_Y.ndim != 2 or new_Y.shape[0] != cache.n_rows:
        raise ShapeError("new targets", f"({cache.n_rows}, P)", new_Y.shape)
    return fit_readout(cache.features, new_Y, lam, cache.feature_mode)
