"""Observed-index sets: uniform erasures and bursty two-state Markov erasures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


class ObservationMask:
    """Set of observed entries of an ``n_rows x n_cols`` matrix.

    Stored as a dense boolean array (``True`` = observed); index pairs are
    0-based and listed in column-major order.
    """

    __slots__ = ("observed",)

    def __init__(self, observed):
        observed = np.array(observed, dtype=bool)
        if observed.ndim != 2 or min(observed.shape) < 1:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {observed.shape}")
        observed.setflags(write=False)
        self.observed = observed

    @classmethod
    def from_pairs(cls, n_rows: int, n_cols: int, pairs) -> "ObservationMask":
        grid = np.zeros((n_rows, n_cols), dtype=bool)
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            r, c = pairs[:, 0], pairs[:, 1]
            if r.min() < 0 or c.min() < 0 or r.max() >= n_rows or c.max() >= n_cols:
                raise ValueError("index pair outside the matrix")
            flat = c * n_rows + r
            if np.unique(flat).size != flat.size:
                raise ValueError("duplicate index pairs")
            grid[r, c] = True
        return cls(grid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.observed.shape

    @property
    def n_rows(self) -> int:
        return self.observed.shape[0]

    @property
    def n_cols(self) -> int:
        return self.observed.shape[1]

    @property
    def missing(self) -> np.ndarray:
        return ~self.observed

    @property
    def n_observed(self) -> int:
        return int(np.count_nonzero(self.observed))

    @property
    def n_missing(self) -> int:
        return self.observed.size - self.n_observed

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of observed entries, column-major order."""
        c, r = np.nonzero(self.observed.T)
        return r, c

    def pairs(self) -> np.ndarray:
        r, c = self.indices()
        return np.column_stack([r, c])

    def complement(self) -> "ObservationMask":
        return ObservationMask(~self.observed)

    def __eq__(self, other):
        if not isinstance(other, ObservationMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.observed, other.observed))

    def __repr__(self):
        return f"ObservationMask({self.n_rows}x{self.n_cols}, observed={self.n_observed})"


@dataclass(frozen=True)
class MarkovSamplerParams:
    """Transition probabilities: ``p1`` observed->missing, ``p2`` missing->observed."""

    p1: float
    p2: float

    def __post_init__(self):
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 must lie in [0, 1], got {self.p1}")
        if not 0.0 < self.p2 <= 1.0:
            raise ValueError(f"p2 must lie in (0, 1], got {self.p2}")

    @property
    def missing_ratio(self) -> float:
        return self.p1 / (self.p1 + self.p2)

    @property
    def mean_run_length(self) -> float:
        return 1.0 / self.p2


def uniform_mask(n_rows: int, n_cols: int, gamma: float, rng: np.random.Generator) -> ObservationMask:
    """Each entry observed independently with probability ``1 - gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return ObservationMask(rng.random((n_rows, n_cols)) >= gamma)


def markov_mask(
    n_rows: int, n_cols: int, params: MarkovSamplerParams, rng: np.random.Generator
) -> ObservationMask:
    """One chain walks all entries column-major; missing runs may cross columns.

    The initial state is drawn from the stationary distribution.
    """
    u = rng.random(n_rows * n_cols)
    missing = _kernels.markov_chain(u, params.p1, params.p2)
    return ObservationMask(~missing.reshape(n_cols, n_rows).T)


def markov_params_from_targets(gamma: float, l0: float, mode: str = "quadratic") -> MarkovSamplerParams:
    """Transition probabilities for a target missing ratio and burst length.

    ``mode="quadratic"`` solves ``l0 = (1 - gamma)(1 - p2) / p2**2`` together with
    ``gamma = p1 / (p1 + p2)``. ``mode="geometric"`` uses the sojourn-time
    identity ``l0 = 1 / p2`` instead, so the simulated chain actually has mean
    missing-run length ``l0``.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not l0 >= 1.0:
        raise ValueError("l0 must be >= 1")
    if mode == "quadratic":
        a = 1.0 - gamma
        # l0 p2^2 + a p2 - a = 0, positive root
        p2 = (-a + math.sqrt(a * a + 4.0 * l0 * a)) / (2.0 * l0)
    elif mode == "geometric":
        p2 = 1.0 / l0
    else:
        raise ValueError(f"unknown calibration mode {mode!r}")
    if not 0.0 < p2 <= 1.0:
        raise ValueError(f"no valid p2 for gamma={gamma}, l0={l0} (got {p2})")
    p1 = gamma * p2 / (1.0 - gamma)
    if p1 > 1.0:
        raise ValueError(f"no valid p1 for gamma={gamma}, l0={l0} (got {p1})")
    return MarkovSamplerParams(p1, p2)


def mask_stats(mask: ObservationMask) -> tuple[float, float]:
    """Missing ratio and mean length of maximal missing runs (column-major)."""
    missing = mask.missing.T.ravel()
    n_missing = int(np.count_nonzero(missing))
    ratio = n_missing / missing.size
    if n_missing == 0:
        return ratio, 0.0
    return ratio, n_missing / _kernels.count_runs(missing)


def write_mask_csv(path, mask: ObservationMask) -> None:
    with open(path, "w") as fh:
        fh.write("n_rows,n_cols\n")
        fh.write(f"{mask.n_rows},{mask.n_cols}\n")
        for r, c in mask.pairs():
            fh.write(f"{r},{c}\n")


def read_mask_csv(path) -> ObservationMask:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["n_rows", "n_cols"]:
            raise ValueError(f"{path}: expected 'n_rows,n_cols' header, got {header}")
        n_rows, n_cols = (int(x) for x in fh.readline().split(","))
        pairs = [tuple(int(x) for x in line.split(",")) for line in fh if line.strip()]
    return ObservationMask.from_pairs(n_rows, n_cols, pairs)
