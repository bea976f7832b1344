"""Seeded Monte Carlo runs of the recursive construction and exponent fits."""

from __future__ import annotations

import csv
import io
import json
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .gamma import check_witness, gamma, gamma_nonrooted
from .mast import DEFAULT_LIMIT, mast_exact
from .trees import RootKind, generate_uniform

KIND_NAMES = {RootKind.NONROOTED: "nonrooted", RootKind.ROOTED: "rooted", RootKind.DOUBLY: "doubly"}
KIND_BY_NAME = {v: k for k, v in KIND_NAMES.items()}
COLUMNS = ("n", "kind", "replicate", "seed", "gamma", "kappa", "wall_time_ms")


class ExperimentIOError(OSError):
    def __init__(self, path, written: int, cause: BaseException):
        super().__init__(f"writing {path} failed after {written} records: {cause}")
        self.written = written


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple
    kind: RootKind = RootKind.ROOTED
    replicates: int = 1
    master_seed: int = 0
    workers: int = 1
    compute_kappa: bool = False
    output_path: Optional[str] = None
    format: str = "csv"
    validate: bool = False
    timing: bool = False

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns:
            raise ValueError("n_values must not be empty")
        if list(ns) != sorted(ns):
            raise ValueError("n_values must be sorted")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.format not in ("csv", "json"):
            raise ValueError("format is csv or json")
        if RootKind(self.kind) == RootKind.NONROOTED and ns[0] == 0:
            raise ValueError("non-rooted trees need n >= 1")
        object.__setattr__(self, "n_values", ns)
        object.__setattr__(self, "kind", RootKind(self.kind))


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    kind: str
    replicate: int
    seed: int
    gamma: int
    kappa: Optional[int] = None
    wall_time_ms: Optional[float] = None


@dataclass(frozen=True)
class ExponentEstimate:
    slope: float
    intercept: float
    stderr: float
    n_range: tuple
    dof: int

    def interval(self, level: float = 0.95) -> tuple[float, float]:
        q = stats.t.ppf(0.5 + level / 2, self.dof)
        return self.slope - q * self.stderr, self.slope + q * self.stderr


def replicate_seed(master_seed: int, n: int, replicate: int) -> int:
    """64-bit seed hashed from ``(master_seed, n, replicate)``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(n, replicate))
    return int(ss.generate_state(1, np.uint64)[0])


def run_replicate(n: int, kind: RootKind, replicate: int, seed: int, compute_kappa: bool = False,
                  validate: bool = False, timing: bool = False) -> ExperimentRecord:
    rng = np.random.default_rng(seed)
    t = generate_uniform(n, kind, rng)
    u = generate_uniform(n, kind, rng)
    start = time.perf_counter()
    if kind == RootKind.NONROOTED:
        res = gamma_nonrooted(t, u, rng)
    else:
        res = gamma(t, u, rng)
    elapsed = (time.perf_counter() - start) * 1e3
    if validate and not check_witness(t, u, res):
        raise AssertionError(f"invalid witness at n={n}, replicate={replicate}, seed={seed}")
    kappa = None
    if compute_kappa and n <= DEFAULT_LIMIT:
        kappa = mast_exact(t, u).kappa
        if validate and res.size > kappa:
            raise AssertionError(f"gamma={res.size} exceeds kappa={kappa} at seed {seed}")
    return ExperimentRecord(
        n=n,
        kind=KIND_NAMES[kind],
        replicate=replicate,
        seed=seed,
        gamma=res.size,
        kappa=kappa,
        wall_time_ms=round(elapsed, 3) if timing else None,
    )


def _run_task(args) -> ExperimentRecord:
    return run_replicate(*args)


def _tasks(config: ExperimentConfig):
    for n in config.n_values:
        for rep in range(config.replicates):
            yield (n, config.kind, rep, replicate_seed(config.master_seed, n, rep),
                   config.compute_kappa, config.validate, config.timing)


class RecordWriter:
    """Streams records as CSV or as a JSON array, in the order given."""

    def __init__(self, fh, fmt: str):
        self.fh = fh
        self.fmt = fmt
        self.count = 0
        if fmt == "csv":
            self._csv = csv.writer(fh, lineterminator="\n")
            self._csv.writerow(COLUMNS)
        else:
            fh.write("[")

    def write(self, rec: ExperimentRecord) -> None:
        if self.fmt == "csv":
            row = asdict(rec)
            self._csv.writerow(["" if row[c] is None else row[c] for c in COLUMNS])
        else:
            self.fh.write(("\n" if self.count == 0 else ",\n") + json.dumps(asdict(rec)))
        self.count += 1

    def close(self) -> None:
        if self.fmt == "json":
            self.fh.write("\n]\n" if self.count else "]\n")
        self.fh.flush()


def format_records(records: Iterable[ExperimentRecord], fmt: str = "csv") -> str:
    buf = io.StringIO()
    w = RecordWriter(buf, fmt)
    for rec in records:
        w.write(rec)
    w.close()
    return buf.getvalue()


def read_records(path: str) -> list[ExperimentRecord]:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return [ExperimentRecord(**row) for row in json.loads(text)]
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(ExperimentRecord(
            n=int(row["n"]),
            kind=row["kind"],
            replicate=int(row["replicate"]),
            seed=int(row["seed"]),
            gamma=int(row["gamma"]),
            kappa=int(row["kappa"]) if row["kappa"] else None,
            wall_time_ms=float(row["wall_time_ms"]) if row["wall_time_ms"] else None,
        ))
    return out


def run_experiment(config: ExperimentConfig, progress=None) -> list[ExperimentRecord]:
    """Run every (n, replicate) task; records come back in task order.

    With ``output_path`` set, records are written as they complete.  The
    file contents do not depend on ``workers``; wall times are only written
    when ``timing`` is on, since they never repeat.
    """
    tasks = list(_tasks(config))
    records: list[ExperimentRecord] = []
    fh = writer = None
    try:
        if config.output_path:
            fh = open(config.output_path, "w", newline="")
            writer = RecordWriter(fh, config.format)
        if config.workers > 1:
            pool = ProcessPoolExecutor(config.workers)
            results = pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * config.workers)))
        else:
            pool = None
            results = map(_run_task, tasks)
        try:
            for rec in results:
                records.append(rec)
                if writer is not None:
                    writer.write(rec)
                if progress is not None:
                    progress(rec)
        finally:
            if pool is not None:
                pool.shutdown()
        if writer is not None:
            writer.close()
    except OSError as exc:
        raise ExperimentIOError(config.output_path, writer.count if writer else 0, exc) from exc
    finally:
        if fh is not None:
            fh.close()
    return records


def mean_gamma_by_n(records: Sequence[ExperimentRecord]) -> dict[int, float]:
    by_n = defaultdict(list)
    for r in records:
        by_n[r.n].append(r.gamma)
    return {n: float(np.mean(v)) for n, v in sorted(by_n.items())}


def estimate_exponent(records: Sequence[ExperimentRecord]) -> ExponentEstimate:
    """Least-squares slope of log(mean gamma) against log n."""
    means = mean_gamma_by_n(records)
    if len(means) < 3:
        raise ValueError("need at least three distinct n values")
    if any(m <= 0 for m in means.values()):
        raise ValueError("mean gamma must be positive at every n")
    x = np.log(np.array(list(means), dtype=float))
    y = np.log(np.array(list(means.values())))
    fit = stats.linregress(x, y)
    ns = list(means)
    return ExponentEstimate(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        n_range=(ns[0], ns[-1]),
        dof=len(ns) - 2,
    )


def alpha_ratio(records: Sequence[ExperimentRecord]) -> dict[int, float]:
    """Mean doubly-rooted gamma over mean rooted gamma, per shared n."""
    rooted = mean_gamma_by_n([r for r in records if r.kind == "rooted"])
    doubly = mean_gamma_by_n([r for r in records if r.kind == "doubly"])
    return {n: doubly[n] / rooted[n] for n in rooted if n in doubly and rooted[n] > 0}


def log_spaced(lo_exp: int, hi_exp: int) -> list[int]:
    return [2**k for k in range(lo_exp, hi_exp + 1)]


__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "ExponentEstimate",
    "estimate_exponent",
    "run_experiment",
    "replicate_seed",
]
