"""Sensor noise and restriction to the observed entries."""
from __future__ import annotations

import hashlib

import numpy as np

from .sampling import ObservationMask


class NoisyObservations:
    """Values of ``M + noise`` on the observed entries only.

    ``values[k]`` belongs to ``(rows[k], cols[k])``; entries are kept in the
    column-major order of :meth:`ObservationMask.indices`.
    """

    __slots__ = ("mask", "values", "noise_variance", "rows", "cols")

    def __init__(self, mask: ObservationMask, values, noise_variance: float):
        values = np.array(values, dtype=float).reshape(-1)
        if values.shape[0] != mask.n_observed:
            raise ValueError(
                f"{values.shape[0]} values for {mask.n_observed} observed entries"
            )
        if not noise_variance >= 0:
            raise ValueError("noise_variance must be >= 0")
        self.mask = mask
        self.rows, self.cols = mask.indices()
        values.setflags(write=False)
        self.values = values
        self.noise_variance = float(noise_variance)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    def to_dense(self, fill: float = 0.0) -> np.ndarray:
        out = np.full(self.shape, fill, dtype=float)
        out[self.rows, self.cols] = self.values
        return out

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Observed row indices and values of column ``j``."""
        sel = self.cols == j
        return self.rows[sel], self.values[sel]

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.packbits(self.mask.observed).tobytes())
        h.update(self.values.tobytes())
        h.update(repr(self.noise_variance).encode())
        return h.hexdigest()


def sigma_from_snr(sigma_cov, snr_db: float) -> float:
    """Noise variance giving ``10*log10((Tr(cov)/N) / sigma2) == snr_db``."""
    cov = np.asarray(sigma_cov, dtype=float)
    power = np.trace(cov) / cov.shape[0]
    return float(power / 10.0 ** (snr_db / 10.0))


def acquire(m, mask: ObservationMask, sigma2: float, rng: np.random.Generator) -> NoisyObservations:
    """Add i.i.d. N(0, sigma2) noise to the observed entries of ``m``.

    Noise is drawn for observed entries only, in column-major order.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != mask.shape:
        raise ValueError(f"matrix shape {m.shape} does not match mask {mask.shape}")
    if not sigma2 >= 0:
        raise ValueError("sigma2 must be >= 0")
    rows, cols = mask.indices()
    clean = m[rows, cols]
    if sigma2 > 0:
        noisy = clean + np.sqrt(sigma2) * rng.standard_normal(clean.shape[0])
    else:
        noisy = clean
    return NoisyObservations(mask, noisy, sigma2)


def write_observations_csv(path, obs: NoisyObservations) -> None:
    with open(path, "w") as fh:
        fh.write("n_rows,n_cols,noise_variance\n")
        fh.write(f"{obs.shape[0]},{obs.shape[1]},{obs.noise_variance!r}\n")
        for r, c, v in zip(obs.rows, obs.cols, obs.values):
            fh.write(f"{r},{c},{float(v)!r}\n")


def read_observations_csv(path) -> NoisyObservations:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["n_rows", "n_cols", "noise_variance"]:
            raise ValueError(f"{path}: unexpected header {header}")
        first = fh.readline().split(",")
        n_rows, n_cols, sigma2 = int(first[0]), int(first[1]), float(first[2])
        rows, cols, vals = [], [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r, c, v = line.split(",")
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    mask = ObservationMask.from_pairs(n_rows, n_cols, np.column_stack([rows, cols]) if rows else [])
    # values may arrive in any order; realign to the mask's column-major order
    order = np.argsort(np.asarray(cols, dtype=np.int64) * n_rows + np.asarray(rows, dtype=np.int64))
    return NoisyObservations(mask, np.asarray(vals, dtype=float)[order], sigma2)
