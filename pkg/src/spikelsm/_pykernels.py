"""Pure numpy kernels, used when the compiled extension is unavailable.

Floating-point sums loop over positions within a row (vectorised across
neurons), so they accumulate in the same order as the compiled kernels and
the two backends agree bit for bit. The recurrent term is a small integer
count, exact in any summation order, so it goes through scipy's compiled
CSR product against the 0/1 connectivity pattern.
"""

from typing import NamedTuple

import numpy as np
from scipy import sparse

MEMBRANE = 0
SPIKE_TRACE = 1
BOTH = 2

NAME = "python"


def _row_layout(offsets):
    """Yield ``(rows, flat_positions)`` for the k-th entry of each row, k = 0, 1, ..."""
    lengths = np.diff(offsets)
    width = int(lengths.max()) if lengths.size else 0
    starts = offsets[:-1]
    regular = bool(lengths.size) and bool(np.all(lengths == width))
    for k in range(width):
        if regular:
            yield slice(None), starts + k
        else:
            rows = np.flatnonzero(lengths > k)
            yield rows, starts[rows] + k


class Plan(NamedTuple):
    """Fixed reservoir arrays with the per-position gather indices precomputed."""

    rec_pattern: sparse.csr_matrix
    sign: np.ndarray
    in_layout: list
    in_vals: np.ndarray
    g: float
    theta: float
    alpha: float
    refractory_steps: int


def make_plan(rec_offsets, rec_cols, sign, in_offsets, in_cols, in_vals, g, theta, alpha, refractory_steps):
    n = len(rec_offsets) - 1
    pattern = sparse.csr_matrix((np.ones(len(rec_cols)), np.asarray(rec_cols), np.asarray(rec_offsets)), shape=(n, n))
    in_layout = [(rows, in_cols[pos], pos) for rows, pos in _row_layout(in_offsets)]
    return Plan(pattern, sign, in_layout, in_vals, float(g), float(theta), float(alpha), int(refractory_steps))


def _drive(plan, s, x):
    n = s.shape[0]
    # Signed presynaptic activity; the 0/1 pattern product is an exact integer count.
    active = np.where(s != 0, plan.sign, 0).astype(np.float64)
    drive = plan.g * (plan.rec_pattern @ active)
    acc = np.zeros(n)
    for rows, cols, pos in plan.in_layout:
        acc[rows] = acc[rows] + plan.in_vals[pos] * x[cols]
    return drive + acc


def step(plan, v, s, refr, x, v_out, s_out, refr_out):
    """Advance every neuron one step; returns the number of spikes emitted."""
    drive = _drive(plan, s, x)
    blocked = refr > 0
    cand = plan.alpha * v + drive
    fired = (cand >= plan.theta) & ~blocked
    v_out[:] = np.where(fired | blocked, 0.0, cand)
    s_out[:] = fired
    refr_out[:] = np.where(blocked, refr - 1, np.where(fired, plan.refractory_steps, 0))
    return int(np.count_nonzero(fired))


def features(v, s, trace, beta, mode, row):
    """Update ``trace`` in place and write the feature row."""
    n = v.shape[0]
    trace[:] = beta * trace + s.astype(np.float64)
    if mode == MEMBRANE:
        row[:] = v
    elif mode == SPIKE_TRACE:
        row[:] = trace
    else:
        row[:n] = v
        row[n:] = trace


def run(plan, v, s, refr, trace, xs, beta, mode, feats):
    total = 0
    v_next = np.empty_like(v)
    s_next = np.empty_like(s)
    refr_next = np.empty_like(refr)
    for t in range(xs.shape[0]):
        total += step(plan, v, s, refr, xs[t], v_next, s_next, refr_next)
        v[:] = v_next
        s[:] = s_next
        refr[:] = refr_next
        features(v, s, trace, beta, mode, feats[t])
    return total


def readout(S, W, out):
    """``out = [S | 1] @ W`` summed feature by feature, bias last."""
    n_features = S.shape[1]
    acc = np.zeros(out.shape)
    for f in range(n_features):
        acc = acc + S[:, f:f + 1] * W[f]
    out[:] = acc + W[n_features]
