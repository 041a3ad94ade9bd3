"""Pure-numpy kernels. Reference path, also used when numba is unavailable."""
import numpy as np


def divergence_weights(s):
    # c_i = sum_{j != i} 1 / (s_i^2 - s_j^2); caller guarantees distinct values
    s2 = s * s
    diff = s2[:, None] - s2[None, :]
    np.fill_diagonal(diff, np.inf)
    return np.sum(1.0 / diff, axis=1)


def sure_curve(s, taus, sigma2, n_rows, n_cols, with_divergence):
    s = np.ascontiguousarray(s, dtype=np.float64)
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    t = taus[:, None]
    shrunk = np.maximum(s[None, :] - t, 0.0)
    fit = np.sum(np.minimum(t * t, (s * s)[None, :]), axis=1)
    risk = -n_rows * n_cols * sigma2 + fit
    if not with_divergence:
        return risk
    safe = np.where(s > 0.0, s, 1.0)
    ratio = np.where(s[None, :] > 0.0, shrunk / safe[None, :], 0.0)
    div = (
        np.sum(s[None, :] > t, axis=1)
        + abs(n_rows - n_cols) * np.sum(ratio, axis=1)
        + 2.0 * (shrunk @ (s * divergence_weights(s)))
    )
    return risk + 2.0 * sigma2 * div


def markov_chain(u, p1, p2):
    """Missing-state indicator of a two-state chain driven by uniforms ``u``.

    ``u[0]`` picks the initial state from the stationary law; ``u[t]`` for
    ``t >= 1`` drives the transition into step ``t``. The sequential scan is
    resolved in closed form: every step either resets the state (both
    branches agree), holds it, or flips it.
    """
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.bool_)
    total = p1 + p2
    start = u[0] < (p1 / total if total > 0 else 0.0)
    to_missing = u < p1          # next state if currently observed
    stay_missing = u < 1.0 - p2  # next state if currently missing
    reset = to_missing == stay_missing
    flip = to_missing & ~stay_missing
    reset[0] = True
    flip[0] = False
    value = to_missing.copy()
    value[0] = start
    idx = np.where(reset, np.arange(n), 0)
    last = np.maximum.accumulate(idx)
    flips = np.cumsum(flip)
    parity = (flips - flips[last]) & 1
    return value[last] ^ parity.astype(np.bool_)


def count_runs(flags):
    flags = np.asarray(flags, dtype=np.bool_)
    if flags.size == 0:
        return 0
    return int(flags[0]) + int(np.count_nonzero(flags[1:] & ~flags[:-1]))
