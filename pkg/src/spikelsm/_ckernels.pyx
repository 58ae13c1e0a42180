# cython: language_level=3
"""Compiled reservoir kernels.

Same signatures and the same floating-point operation order as
``_pykernels``; results are bit-identical. Built with FMA contraction
disabled so ``a * b + c`` rounds twice, exactly like numpy.
"""

from libc.stdint cimport int8_t, int64_t, uint8_t
from libc.stdlib cimport free, malloc

cdef enum:
    _MEMBRANE = 0
    _SPIKE_TRACE = 1

MEMBRANE = 0
SPIKE_TRACE = 1
BOTH = 2

NAME = "cython"


cdef class Plan:
    """Fixed reservoir arrays and parameters, bound once per reservoir."""

    cdef const int64_t[::1] rec_offsets
    cdef const int64_t[::1] rec_cols
    cdef const int8_t[::1] sign
    cdef const int64_t[::1] in_offsets
    cdef const int64_t[::1] in_cols
    cdef const double[::1] in_vals
    cdef double g, theta, alpha
    cdef int64_t refractory_steps

    def __init__(self, rec_offsets, rec_cols, sign, in_offsets, in_cols, in_vals,
                 double g, double theta, double alpha, int64_t refractory_steps):
        self.rec_offsets = rec_offsets
        self.rec_cols = rec_cols
        self.sign = sign
        self.in_offsets = in_offsets
        self.in_cols = in_cols
        self.in_vals = in_vals
        self.g = g
        self.theta = theta
        self.alpha = alpha
        self.refractory_steps = refractory_steps


def make_plan(*args):
    return Plan(*args)


cdef inline int64_t _recurrent_count(
    const int64_t[::1] rec_offsets,
    const int64_t[::1] rec_cols,
    const int8_t* active,
    Py_ssize_t i,
) noexcept nogil:
    # Binary weights: gather signed presynaptic activity and add it up.
    cdef int64_t acc = 0
    cdef int64_t p
    for p in range(rec_offsets[i], rec_offsets[i + 1]):
        acc += active[rec_cols[p]]
    return acc


cdef inline double _input_drive(
    const int64_t[::1] in_offsets,
    const int64_t[::1] in_cols,
    const double[::1] in_vals,
    const double[::1] x,
    Py_ssize_t i,
) noexcept nogil:
    cdef double acc = 0.0
    cdef int64_t p
    for p in range(in_offsets[i], in_offsets[i + 1]):
        acc = acc + in_vals[p] * x[in_cols[p]]
    return acc


cdef inline int64_t _step_into(
    const int64_t[::1] rec_offsets,
    const int64_t[::1] rec_cols,
    const int8_t[::1] sign,
    const int64_t[::1] in_offsets,
    const int64_t[::1] in_cols,
    const double[::1] in_vals,
    double g,
    double theta,
    double alpha,
    int64_t refractory_steps,
    const double[::1] v,
    const uint8_t[::1] s,
    const int64_t[::1] refr,
    const double[::1] x,
    double[::1] v_out,
    uint8_t[::1] s_out,
    int64_t[::1] refr_out,
) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double drive, cand
    cdef int64_t spikes = 0
    cdef int8_t* active = <int8_t*>malloc(n if n > 0 else 1)
    if active == NULL:
        return -1
    for i in range(n):
        # select, not multiply: sign where the neuron spiked, else 0
        active[i] = sign[i] if s[i] else 0
    for i in range(n):
        if refr[i] > 0:
            v_out[i] = 0.0
            s_out[i] = 0
            refr_out[i] = refr[i] - 1
            continue
        drive = g * <double>_recurrent_count(rec_offsets, rec_cols, active, i)
        drive = drive + _input_drive(in_offsets, in_cols, in_vals, x, i)
        cand = alpha * v[i] + drive
        if cand >= theta:
            v_out[i] = 0.0
            s_out[i] = 1
            refr_out[i] = refractory_steps
            spikes += 1
        else:
            v_out[i] = cand
            s_out[i] = 0
            refr_out[i] = 0
    free(active)
    return spikes


def step(
    Plan plan,
    const double[::1] v,
    const uint8_t[::1] s,
    const int64_t[::1] refr,
    const double[::1] x,
    double[::1] v_out,
    uint8_t[::1] s_out,
    int64_t[::1] refr_out,
):
    """Advance every neuron one step; returns the number of spikes emitted."""
    cdef int64_t spikes = 0
    with nogil:
        spikes = _step_into(plan.rec_offsets, plan.rec_cols, plan.sign, plan.in_offsets,
                            plan.in_cols, plan.in_vals, plan.g, plan.theta, plan.alpha,
                            plan.refractory_steps, v, s, refr, x, v_out, s_out, refr_out)
    if spikes < 0:
        raise MemoryError()
    return spikes


cdef inline void _features_into(
    const double[::1] v,
    const uint8_t[::1] s,
    double[::1] trace,
    double beta,
    int mode,
    double[::1] row,
) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        trace[i] = beta * trace[i] + <double>s[i]
    if mode == _MEMBRANE:
        for i in range(n):
            row[i] = v[i]
    elif mode == _SPIKE_TRACE:
        for i in range(n):
            row[i] = trace[i]
    else:
        for i in range(n):
            row[i] = v[i]
            row[n + i] = trace[i]


def features(
    const double[::1] v,
    const uint8_t[::1] s,
    double[::1] trace,
    double beta,
    int mode,
    double[::1] row,
):
    """Update ``trace`` in place and write the feature row."""
    with nogil:
        _features_into(v, s, trace, beta, mode, row)


def run(
    Plan plan,
    double[::1] v,
    uint8_t[::1] s,
    int64_t[::1] refr,
    double[::1] trace,
    const double[:, ::1] xs,
    double beta,
    int mode,
    double[:, ::1] feats,
):
    """Run ``xs.shape[0]`` steps, updating the state arrays in place.

    Writes one feature row per step into ``feats`` and returns the total
    number of spikes emitted.
    """
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t steps = xs.shape[0]
    cdef Py_ssize_t t, i
    cdef int64_t total = 0
    cdef int64_t spikes = 0
    cdef double[::1] v_next = v.copy()
    cdef uint8_t[::1] s_next = s.copy()
    cdef int64_t[::1] refr_next = refr.copy()
    with nogil:
        for t in range(steps):
            spikes = _step_into(plan.rec_offsets, plan.rec_cols, plan.sign, plan.in_offsets,
                                plan.in_cols, plan.in_vals, plan.g, plan.theta, plan.alpha,
                                plan.refractory_steps, v, s, refr, xs[t], v_next, s_next, refr_next)
            if spikes < 0:
                break
            total += spikes
            for i in range(n):
                v[i] = v_next[i]
                s[i] = s_next[i]
                refr[i] = refr_next[i]
            _features_into(v, s, trace, beta, mode, feats[t])
    if spikes < 0:
        raise MemoryError()
    return total


def readout(const double[:, ::1] S, const double[:, ::1] W, double[:, ::1] out):
    """``out = [S | 1] @ W`` summed feature by feature, bias last."""
    cdef Py_ssize_t T = S.shape[0]
    cdef Py_ssize_t F = S.shape[1]
    cdef Py_ssize_t P = W.shape[1]
    cdef Py_ssize_t t, f, p
    cdef double acc
    with nogil:
        for t in range(T):
            for p in range(P):
                acc = 0.0
                for f in range(F):
                    acc = acc + S[t, f] * W[f, p]
                out[t, p] = acc + W[F, p]
