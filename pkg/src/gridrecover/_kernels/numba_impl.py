"""numba-compiled kernels; same contracts as :mod:`numpy_impl`."""
import numpy as np
from numba import njit


@njit(cache=True)
def divergence_weights(s):
    m = s.shape[0]
    out = np.zeros(m)
    for i in range(m):
        si2 = s[i] * s[i]
        acc = 0.0
        for j in range(m):
            if j != i:
                acc += 1.0 / (si2 - s[j] * s[j])
        out[i] = acc
    return out


@njit(cache=True)
def _sure_curve(s, taus, sigma2, n_rows, n_cols, with_divergence):
    m = s.shape[0]
    k = taus.shape[0]
    out = np.empty(k)
    if with_divergence:
        w = s * divergence_weights(s)
    else:
        w = np.zeros(m)
    gap = abs(n_rows - n_cols)
    base = -float(n_rows) * float(n_cols) * sigma2
    for c in range(k):
        t = taus[c]
        fit = 0.0
        div = 0.0
        for i in range(m):
            si = s[i]
            fit += min(t * t, si * si)
            if with_divergence and si > t:
                shrunk = si - t
                div += 1.0 + 2.0 * shrunk * w[i]
                if si > 0.0:
                    div += gap * shrunk / si
        out[c] = base + fit + 2.0 * sigma2 * div
    return out


def sure_curve(s, taus, sigma2, n_rows, n_cols, with_divergence):
    return _sure_curve(
        np.ascontiguousarray(s, dtype=np.float64),
        np.ascontiguousarray(taus, dtype=np.float64),
        float(sigma2), int(n_rows), int(n_cols), bool(with_divergence),
    )


@njit(cache=True)
def _markov_chain(u, p1, p2):
    n = u.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return out
    total = p1 + p2
    stationary = p1 / total if total > 0 else 0.0
    state = u[0] < stationary
    out[0] = state
    for t in range(1, n):
        if state:
            state = u[t] < 1.0 - p2
        else:
            state = u[t] < p1
        out[t] = state
    return out


def markov_chain(u, p1, p2):
    return _markov_chain(np.ascontiguousarray(u, dtype=np.float64), float(p1), float(p2))


@njit(cache=True)
def _count_runs(flags):
    runs = 0
    prev = False
    for i in range(flags.shape[0]):
        f = flags[i]
        if f and not prev:
            runs += 1
        prev = f
    return runs


def count_runs(flags):
    return int(_count_runs(np.ascontiguousarray(flags, dtype=np.bool_)))
