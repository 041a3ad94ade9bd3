"""Monte-Carlo sweeps over missing ratio, method and covariance mismatch."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import sys
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .acquisition import NoisyObservations, acquire, sigma_from_snr
from .bsvt import BsvtConfig, bsvt_recover
from .lmmse import LmmseModel, lmmse_recover
from .opta import opta_nmse
from .sampling import markov_mask, markov_params_from_targets, uniform_mask, ObservationMask
from .source import GaussianSourceSpec, load_source, mismatch_covariance, sample_source, synthetic_covariance
from .svt import SvtConfig, svt_recover

log = logging.getLogger(__name__)

METHODS = ("lmmse", "svt", "bsvt")
RESULTS_HEADER = ["gamma", "method", "smr", "sampling", "repeat", "nmse", "iterations", "converged", "seconds"]
AGGREGATE_HEADER = ["gamma", "method", "smr", "sampling", "count", "mean_nmse", "std_nmse"]
NO_STATS = "none"  # smr label for methods that ignore second-order statistics

# spawn-key slots inside one (gamma, repeat) cell
_SLOT_SOURCE, _SLOT_MASK, _SLOT_NOISE, _SLOT_MISMATCH = range(4)


@dataclass
class ExperimentConfig:
    n_rows: int = 200
    n_cols: int = 200
    mean: float = 240.0
    variance: float = 4.0
    rho: float = 0.9
    covariance_file: str | None = None
    mean_file: str | None = None
    snr_db: float = 20.0
    gammas: list = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    methods: list = field(default_factory=lambda: ["lmmse", "svt", "bsvt"])
    smr: list = field(default_factory=lambda: ["exact"])
    mismatch_mode: str = "normalized"
    sampling: str = "uniform"
    markov_l0: float | None = None  # None -> n_rows
    markov_mode: str = "quadratic"
    repeats: int = 20
    base_seed: int = 0
    svt_tau: float | None = None
    svt_step: float = 1.2
    svt_tol: float = 1e-4
    svt_max_iter: int = 500
    bsvt_step: float = 1.2
    bsvt_tol: float = 1e-4
    bsvt_max_iter: int = 500
    bsvt_grid: int = 512
    bsvt_conditioning: str = "iterate"
    bsvt_regularized: bool = False
    opta: bool = False
    opta_log: str = "e"
    timing: bool = False
    output: str = "results"

    def __post_init__(self):
        self.gammas = [float(g) for g in self.gammas]
        self.smr = [s if isinstance(s, str) else float(s) for s in self.smr]
        self.methods = [str(m) for m in self.methods]
        self.validate()

    def validate(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("n_rows and n_cols must be >= 1")
        g = self.gammas
        if not g or any(not 0.0 <= x < 1.0 for x in g):
            raise ValueError("gammas must be a non-empty list of values in [0, 1)")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("gammas must be distinct and sorted ascending")
        if not self.methods:
            raise ValueError("methods must not be empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; expected a subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must be distinct")
        if not self.smr:
            raise ValueError("smr must not be empty")
        for s in self.smr:
            if isinstance(s, str):
                if s != "exact":
                    raise ValueError(f"smr entries must be 'exact' or positive numbers, got {s!r}")
            elif not s > 0:
                raise ValueError("numeric smr levels must be positive")
        if len({smr_label(s) for s in self.smr}) != len(self.smr):
            raise ValueError("smr levels must be distinct")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.sampling not in ("uniform", "markov"):
            raise ValueError("sampling must be 'uniform' or 'markov'")
        if self.markov_mode not in ("quadratic", "geometric"):
            raise ValueError("markov_mode must be 'quadratic' or 'geometric'")
        if self.mismatch_mode not in ("normalized", "squared"):
            raise ValueError("mismatch_mode must be 'normalized' or 'squared'")
        if self.opta_log not in ("e", "10"):
            raise ValueError("opta_log must be 'e' or '10'")
        # sub-configs validate their own ranges
        self.svt_config()
        if not 0.0 < self.bsvt_step < 2.0 or self.bsvt_tol <= 0 or self.bsvt_max_iter < 1 or self.bsvt_grid < 2:
            raise ValueError("invalid BSVT settings")
        if self.bsvt_conditioning not in ("iterate", "observations"):
            raise ValueError("bsvt_conditioning must be 'iterate' or 'observations'")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        for key, value in data.items():
            if isinstance(value, dict):
                raise ValueError(f"config must be flat; key {key!r} holds a table")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Stable short hash of every setting except the output location."""
        d = self.to_dict()
        d.pop("output")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @property
    def l0(self) -> float:
        return float(self.n_rows if self.markov_l0 is None else self.markov_l0)

    def source(self) -> GaussianSourceSpec:
        if self.covariance_file:
            spec = load_source(self.covariance_file, self.mean_file, self.mean)
            if spec.n != self.n_rows:
                raise ValueError(f"covariance file is {spec.n}x{spec.n} but n_rows={self.n_rows}")
            return spec
        cov = synthetic_covariance(self.n_rows, self.variance, self.rho)
        return GaussianSourceSpec(np.full(self.n_rows, float(self.mean)), cov)

    def svt_config(self) -> SvtConfig:
        return SvtConfig(self.svt_tau, self.svt_step, self.svt_tol, self.svt_max_iter)

    def bsvt_config(self, model: LmmseModel) -> BsvtConfig:
        return BsvtConfig(
            model,
            step_size=self.bsvt_step,
            tolerance=self.bsvt_tol,
            max_iterations=self.bsvt_max_iter,
            grid_size=self.bsvt_grid,
            conditioning=self.bsvt_conditioning,
            regularized=self.bsvt_regularized,
        )

    def sampling_label(self) -> str:
        if self.sampling == "uniform":
            return "uniform"
        return f"markov(l0={self.l0:g};{self.markov_mode})"


@dataclass
class RunResult:
    gamma: float
    method: str
    smr: str
    sampling: str
    repeat: int
    nmse: float
    iterations: int
    converged: bool
    seconds: float
    checksum: str = field(default="", compare=False, repr=False)

    def row(self) -> list:
        return [
            repr(float(self.gamma)), self.method, self.smr, self.sampling, str(self.repeat),
            repr(float(self.nmse)), str(self.iterations), str(self.converged).lower(), repr(float(self.seconds)),
        ]


def smr_label(smr) -> str:
    if isinstance(smr, str):
        return smr
    return f"{float(smr):g}"


def _smr_key(label: str):
    if label == NO_STATS:
        return (0, 0.0)
    if label == "exact":
        return (1, 0.0)
    return (2, -float(label))


def sort_key(r: RunResult):
    return (r.gamma, r.method, _smr_key(r.smr), r.repeat)


def nmse(truth, estimate) -> float:
    """``||truth - estimate||_F^2 / ||truth||_F^2``."""
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {estimate.shape}")
    energy = float(np.sum(truth**2))
    if energy == 0.0:
        raise ValueError("ground truth has zero energy")
    return float(np.sum((truth - estimate) ** 2)) / energy


def cell_seed(base_seed: int, gamma_index: int, repeat: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(gamma_index), int(repeat)))


def _stream(seed: np.random.SeedSequence, *slot) -> np.random.Generator:
    child = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(slot))
    return np.random.default_rng(child)


def _smr_slot(smr) -> int:
    return zlib.crc32(smr_label(smr).encode())


@dataclass
class Cell:
    """Everything drawn for one (gamma, repeat) pair; shared by all methods."""

    gamma_index: int
    gamma: float
    repeat: int
    truth: np.ndarray
    obs: NoisyObservations
    spec: GaussianSourceSpec
    seed: np.random.SeedSequence


def draw_mask(config: ExperimentConfig, gamma: float, rng) -> ObservationMask:
    if config.sampling == "uniform" or gamma == 0.0:
        return uniform_mask(config.n_rows, config.n_cols, gamma, rng)
    params = markov_params_from_targets(gamma, config.l0, config.markov_mode)
    return markov_mask(config.n_rows, config.n_cols, params, rng)


def draw_cell(config: ExperimentConfig, spec: GaussianSourceSpec, gamma_index: int, repeat: int) -> Cell:
    seed = cell_seed(config.base_seed, gamma_index, repeat)
    gamma = config.gammas[gamma_index]
    truth = sample_source(spec, config.n_cols, _stream(seed, _SLOT_SOURCE))
    mask = draw_mask(config, gamma, _stream(seed, _SLOT_MASK))
    sigma2 = sigma_from_snr(spec.covariance, config.snr_db)
    obs = acquire(truth, mask, sigma2, _stream(seed, _SLOT_NOISE))
    return Cell(gamma_index, gamma, repeat, truth, obs, spec, seed)


def postulated_model(config: ExperimentConfig, cell: Cell, smr) -> LmmseModel:
    cov = cell.spec.covariance
    if smr != "exact":
        rng = _stream(cell.seed, _SLOT_MISMATCH, _smr_slot(smr))
        cov = mismatch_covariance(cov, smr, rng, config.mismatch_mode)
    return LmmseModel(cell.spec.mean, cov, cell.obs.noise_variance)


def _jobs(config: ExperimentConfig):
    for method in config.methods:
        if method == "svt":
            yield method, NO_STATS
        else:
            for smr in config.smr:
                yield method, smr


def run_cell(config: ExperimentConfig, cell: Cell) -> list[RunResult]:
    sampling = config.sampling_label()
    checksum = cell.obs.checksum()
    log.debug("cell gamma=%g repeat=%d observations sha256=%s", cell.gamma, cell.repeat, checksum)
    out = []
    for method, smr in _jobs(config):
        label = smr_label(smr)
        t0 = time.perf_counter()
        try:
            if method == "svt":
                res = svt_recover(cell.obs, config.svt_config())
                estimate, iters, conv = res.estimate, res.iterations, res.converged
            else:
                model = postulated_model(config, cell, smr)
                if method == "lmmse":
                    estimate, iters, conv = lmmse_recover(cell.obs, model), 1, True
                else:
                    res = bsvt_recover(cell.obs, config.bsvt_config(model))
                    estimate, iters, conv = res.estimate, res.iterations, res.converged
            value = nmse(cell.truth, estimate)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.warning("%s (smr=%s) failed at gamma=%g repeat=%d: %s", method, label, cell.gamma, cell.repeat, exc)
            value, iters, conv = math.nan, 0, False
        seconds = time.perf_counter() - t0 if config.timing else math.nan
        out.append(RunResult(cell.gamma, method, label, sampling, cell.repeat, value, iters, conv, seconds, checksum))
    return out


def _cells(config: ExperimentConfig):
    return [(gi, r) for gi in range(len(config.gammas)) for r in range(config.repeats)]


def run_sweep(config: ExperimentConfig, threads: int = 1, with_opta: bool | None = None):
    """Run every (gamma, repeat) cell; returns ``(results, bound)``.

    ``bound`` is a list of ``(gamma, mean OPTA NMSE)`` or ``None``. Results
    come back in canonical order regardless of ``threads``.
    """
    spec = config.source()
    want_opta = config.opta if with_opta is None else with_opta

    def work(job):
        cell = draw_cell(config, spec, *job)
        rows = run_cell(config, cell)
        bound = cell_opta(config, cell) if want_opta else None
        return rows, (cell.gamma_index, bound)

    jobs = _cells(config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(work, jobs))
    else:
        outputs = [work(j) for j in jobs]
    results = sorted((r for rows, _ in outputs for r in rows), key=sort_key)
    bound = None
    if want_opta:
        per_gamma: dict[int, list] = {}
        for _, (gi, b) in outputs:
            per_gamma.setdefault(gi, []).append(b)
        bound = [(config.gammas[gi], float(np.mean(per_gamma[gi]))) for gi in sorted(per_gamma)]
    return results, bound


def cell_opta(config: ExperimentConfig, cell: Cell) -> float:
    return opta_nmse(
        cell.spec.covariance,
        cell.obs.mask.n_observed,
        config.n_rows,
        config.n_cols,
        config.snr_db,
        float(np.sum(cell.truth**2)),
        config.opta_log,
    )


def opta_curve(config: ExperimentConfig) -> list[tuple[float, float]]:
    """Mean OPTA NMSE per gamma over the same cells a sweep would draw."""
    spec = config.source()
    per_gamma = {}
    for gi, r in _cells(config):
        per_gamma.setdefault(gi, []).append(cell_opta(config, draw_cell(config, spec, gi, r)))
    return [(config.gammas[gi], float(np.mean(v))) for gi, v in sorted(per_gamma.items())]


def aggregate(results) -> list[dict]:
    groups: dict[tuple, list] = {}
    for r in results:
        groups.setdefault((r.gamma, r.method, r.smr, r.sampling), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], _smr_key(k[2]), k[3])):
        vals = np.array([r.nmse for r in groups[key] if math.isfinite(r.nmse)])
        out.append(
            {
                "gamma": key[0],
                "method": key[1],
                "smr": key[2],
                "sampling": key[3],
                "count": int(vals.size),
                "mean_nmse": float(np.mean(vals)) if vals.size else math.nan,
                "std_nmse": float(np.std(vals)) if vals.size else math.nan,
            }
        )
    return out


def write_results_csv(path, results) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in results:
            w.writerow(r.row())


def read_results_csv(path) -> list[RunResult]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for g, m, smr, samp, rep, val, it, conv, sec in reader:
            out.append(RunResult(float(g), m, smr, samp, int(rep), float(val), int(it), conv == "true", float(sec)))
    return out


def write_aggregate_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        for a in rows:
            w.writerow([
                repr(a["gamma"]), a["method"], a["smr"], a["sampling"], a["count"],
                repr(a["mean_nmse"]), repr(a["std_nmse"]),
            ])


def series_label(method: str, smr: str) -> str:
    return method if smr == NO_STATS else f"{method}/{smr}"


def emit_plot_data(results, bound=None, out_dir=".", tag: str = "sweep") -> Path:
    """Write ``plot_<tag>.csv`` with columns gamma, series, mean_nmse, std_nmse."""
    results = list(results)
    if not results:
        raise ValueError("no results to plot")
    path = Path(out_dir) / f"plot_{tag}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "series", "mean_nmse", "std_nmse"])
        for a in aggregate(results):
            w.writerow([repr(a["gamma"]), series_label(a["method"], a["smr"]), repr(a["mean_nmse"]), repr(a["std_nmse"])])
        for g, b in bound or ():
            w.writerow([repr(float(g)), "opta", repr(float(b)), repr(0.0)])
    return path


def save_sweep(config: ExperimentConfig, results, bound, out_dir=None) -> dict:
    """Persist results, aggregates, plot data and (optionally) the bound; returns the paths."""
    from .opta import write_bound_csv

    out = Path(out_dir or config.output)
    out.mkdir(parents=True, exist_ok=True)
    tag = config.digest()
    paths = {
        "results": out / "results.csv",
        "aggregate": out / "aggregate.csv",
    }
    write_results_csv(paths["results"], results)
    write_aggregate_csv(paths["aggregate"], aggregate(results))
    paths["plot"] = emit_plot_data(results, bound, out, tag)
    if bound is not None:
        paths["opta"] = out / "opta.csv"
        write_bound_csv(paths["opta"], bound)
    return paths
