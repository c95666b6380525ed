"""Monte Carlo benchmark harness for the clustering methods.

Every replicate draws one data set that all methods share (paired design).
Data and fitting seeds derive from ``(base_seed, N, J, K, replicate)`` only,
so results do not depend on which methods run or in what order.
"""

import csv
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import generate_instance, hamming_loss
from .exceptions import BenchConfigError
from .refine import DEFAULT_STEPS, cem, em_baseline, oracle_classify, sola, sola_plus, sola_split
from .spectral import spectral_clustering

METHODS = ("spec", "sola", "sola_plus", "cem", "sola_split", "em", "oracle")
FAILURE_POLICIES = ("exclude", "raise")


@dataclass(frozen=True)
class BenchConfig:
    methods: tuple = ("spec", "sola", "sola_plus")
    grid: tuple = ((50, 25, 3),)
    beta: tuple = (5.0, 5.0)
    replicates: int = 50
    base_seed: int = 0
    sola_plus_steps: int = DEFAULT_STEPS
    failure_policy: str = "exclude"
    timing_repeats: int = 1

    def __post_init__(self):
        if not self.methods:
            raise BenchConfigError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise BenchConfigError(f"unknown methods {unknown}; choose from {METHODS}")
        if not self.grid:
            raise BenchConfigError("grid must be non-empty")
        for n, j, k in self.grid:
            if not (n >= k >= 2 and j >= 1):
                raise BenchConfigError(f"invalid grid point N={n}, J={j}, K={k}")
        if self.replicates < 1:
            raise BenchConfigError("replicates must be >= 1")
        if self.failure_policy not in FAILURE_POLICIES:
            raise BenchConfigError(f"failure_policy must be one of {FAILURE_POLICIES}")
        if self.sola_plus_steps < 1 or self.timing_repeats < 1:
            raise BenchConfigError("sola_plus_steps and timing_repeats must be >= 1")


@dataclass(frozen=True)
class BenchRow:
    method: str
    N: int
    J: int
    K: int
    replicate: int
    loss: float
    failed: bool
    seconds: float
    instance_hash: str = ""


def _sim_grid(js, k=3):
    return tuple((2 * j, j, k) for j in js)


_SMALL_JS = (25, 55, 95)
PRESETS = {
    "sim1-small": BenchConfig(
        methods=METHODS, grid=_sim_grid(_SMALL_JS), beta=(5.0, 5.0), replicates=50, base_seed=1
    ),
    "sim2-small": BenchConfig(
        methods=METHODS, grid=_sim_grid(_SMALL_JS), beta=(1.0, 8.0), replicates=50, base_seed=2
    ),
    "sim3-small": BenchConfig(
        methods=("spec", "sola", "sola_plus", "cem", "em"),
        grid=_sim_grid((25, 55, 95, 155)),
        beta=(1.0, 8.0),
        replicates=50,
        base_seed=3,
    ),
    "sim4-small": BenchConfig(
        methods=("spec", "sola", "sola_plus", "em"),
        grid=_sim_grid((25, 95)),
        beta=(1.0, 8.0),
        replicates=20,
        base_seed=4,
        timing_repeats=3,
    ),
}
# full-scale runs: 200 replicates
for _name in ("sim1", "sim2", "sim3", "sim4"):
    PRESETS[_name] = replace(PRESETS[f"{_name}-small"], replicates=200)


# ------------------------------------------------------------ config parsing


def _ints(value, lineno, count=None):
    try:
        out = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise BenchConfigError(f"expected integers, got {value!r}", lineno) from None
    if count is not None and len(out) != count:
        raise BenchConfigError(f"expected {count} comma-separated values", lineno)
    return out


def parse_bench_config(text):
    """Parse ``key=value`` lines; ``grid=N,J,K`` may repeat.

    Blank lines and ``#`` comments are ignored. ``preset=NAME`` starts from
    a named preset that later keys override.
    """
    fields = {}
    grid = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BenchConfigError(f"expected key=value, got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            if value not in PRESETS:
                raise BenchConfigError(f"unknown preset {value!r}", lineno)
            base = PRESETS[value]
            fields = {**base.__dict__, **fields}
        elif key == "grid":
            grid.append(_ints(value, lineno, 3))
        elif key == "methods":
            fields["methods"] = tuple(m.strip() for m in value.split(",") if m.strip())
        elif key == "beta":
            try:
                a, b = (float(v) for v in value.split(","))
            except ValueError:
                raise BenchConfigError(f"beta must be 'a,b', got {value!r}", lineno) from None
            if not (a > 0 and b > 0):
                raise BenchConfigError("beta parameters must be positive", lineno)
            fields["beta"] = (a, b)
        elif key in ("replicates", "base_seed", "sola_plus_steps", "timing_repeats"):
            fields[key] = _ints(value, lineno, 1)[0]
        elif key == "failure_policy":
            fields[key] = value
        else:
            raise BenchConfigError(f"unknown key {key!r}", lineno)
    if grid:
        fields["grid"] = tuple(grid)
    try:
        return BenchConfig(**fields)
    except BenchConfigError as exc:
        raise BenchConfigError(str(exc)) from None


def load_bench_config(path_or_preset):
    if path_or_preset in PRESETS:
        return PRESETS[path_or_preset]
    return parse_bench_config(Path(path_or_preset).read_text())


# ------------------------------------------------------------ running


def replicate_seeds(base_seed, n, j, k, replicate):
    """Data and fit seeds for one replicate, independent of the method."""
    ss = np.random.SeedSequence([base_seed, n, j, k, replicate])
    data, fit = ss.spawn(2)
    return int(data.generate_state(1, np.uint64)[0]), int(fit.generate_state(1, np.uint64)[0])


def instance_hash(responses):
    return hashlib.sha256(np.ascontiguousarray(responses, dtype=np.uint8).tobytes()).hexdigest()[:16]


def _run_method(method, instance, seed, cfg):
    R, k = instance.responses, instance.n_classes
    if method == "spec":
        labels = spectral_clustering(R, k, random_state=seed).labels
        return labels, np.unique(labels).size < k
    if method == "oracle":
        return oracle_classify(R, instance.theta), False
    if method == "sola":
        report = sola(R, k, random_state=seed)
    elif method == "sola_plus":
        report = sola_plus(R, k, steps=cfg.sola_plus_steps, random_state=seed)
    elif method == "cem":
        report = cem(R, k, steps=cfg.sola_plus_steps, random_state=seed)
    elif method == "sola_split":
        report = sola_split(R, k, random_state=seed)
    else:
        report = em_baseline(R, k, random_state=seed)
    return report.labels, report.failed


def run_replicate(cfg, grid_point, replicate):
    """Fit every configured method on one generated instance."""
    n, j, k = grid_point
    data_seed, fit_seed = replicate_seeds(cfg.base_seed, n, j, k, replicate)
    instance = generate_instance(n, j, k, *cfg.beta, seed=data_seed)
    digest = instance_hash(instance.responses)
    rows = []
    for method in cfg.methods:
        best = math.inf
        labels, failed = None, True
        for _ in range(cfg.timing_repeats):
            start = time.perf_counter()
            try:
                labels, failed = _run_method(method, instance, fit_seed, cfg)
            except Exception:
                if cfg.failure_policy == "raise":
                    raise
                labels, failed = None, True
            best = min(best, time.perf_counter() - start)
        loss = math.nan if failed else hamming_loss(labels, instance.labels, k)
        rows.append(BenchRow(method, n, j, k, replicate, loss, bool(failed), best, digest))
    return rows


def _task(args):
    return run_replicate(*args)


def run_bench(cfg, jobs=1):
    """Run all replicates; rows come back sorted by method, grid point and replicate."""
    tasks = [(cfg, g, r) for g in cfg.grid for r in range(cfg.replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_task, tasks, chunksize=4))
    else:
        chunks = [_task(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    order = {m: i for i, m in enumerate(cfg.methods)}
    grid_order = {g: i for i, g in enumerate(cfg.grid)}
    rows.sort(key=lambda r: (order[r.method], grid_order[(r.N, r.J, r.K)], r.replicate))
    return rows


# ------------------------------------------------------------ summaries


@dataclass
class Aggregate:
    method: str
    N: int
    J: int
    K: int
    replicates: int
    failures: int
    mean_loss: float
    se_loss: float
    mean_seconds: float
    losses: list = field(default_factory=list, repr=False)

    @property
    def failure_rate(self):
        return self.failures / self.replicates


def _mean_se(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return math.nan, math.nan
    if values.size == 1:
        return float(values[0]), math.nan
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def aggregate(rows):
    """Mean loss and time over non-failed replicates, plus the failure rate."""
    groups = {}
    for row in rows:
        groups.setdefault((row.method, row.N, row.J, row.K), []).append(row)
    out = []
    for (method, n, j, k), members in groups.items():
        ok = [r for r in members if not r.failed]
        mean, se = _mean_se([r.loss for r in ok])
        seconds = float(np.mean([r.seconds for r in ok])) if ok else math.nan
        out.append(
            Aggregate(method, n, j, k, len(members), len(members) - len(ok), mean, se, seconds,
                      losses=[r.loss for r in ok])
        )
    return out


def paired_difference(rows, method_a, method_b):
    """Per grid point mean and standard error of ``loss_a - loss_b``.

    Only replicates where neither method failed enter the comparison.
    Returns ``{(N, J, K): (mean, se, count)}``.
    """
    index = {(r.method, r.N, r.J, r.K, r.replicate): r for r in rows}
    diffs = {}
    for r in rows:
        if r.method != method_a or r.failed:
            continue
        other = index.get((method_b, r.N, r.J, r.K, r.replicate))
        if other is None or other.failed:
            continue
        diffs.setdefault((r.N, r.J, r.K), []).append(r.loss - other.loss)
    return {g: (*_mean_se(d), len(d)) for g, d in diffs.items()}


ROW_FIELDS = ("method", "N", "J", "K", "replicate", "loss", "failed", "instance_hash")


def write_rows_csv(path, rows):
    """Deterministic per-replicate results (no timings), byte-stable across reruns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow([r.method, r.N, r.J, r.K, r.replicate, repr(r.loss), int(r.failed), r.instance_hash])


def write_timings_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "N", "J", "K", "replicate", "seconds"))
        for r in rows:
            w.writerow([r.method, r.N, r.J, r.K, r.replicate, f"{r.seconds:.6e}"])


def write_aggregate_csv(path, aggregates):
    aggregates = sorted(aggregates, key=lambda a: (a.method, a.N, a.J, a.K))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "N", "J", "K", "replicates", "failures", "failure_rate",
                    "mean_loss", "se_loss", "mean_seconds"))
        for a in aggregates:
            w.writerow([a.method, a.N, a.J, a.K, a.replicates, a.failures,
                        f"{a.failure_rate:.4f}", f"{a.mean_loss:.6f}", f"{a.se_loss:.6f}",
                        f"{a.mean_seconds:.6e}"])


def format_table(aggregates):
    """Plain-text table of aggregates for terminal output."""
    header = f"{'method':<11}{'N':>6}{'J':>6}{'K':>4}{'fail%':>8}{'mean_loss':>12}{'se':>10}{'seconds':>12}"
    lines = [header, "-" * len(header)]
    for a in sorted(aggregates, key=lambda a: (a.N, a.J, a.K, METHODS.index(a.method))):
        lines.append(
            f"{a.method:<11}{a.N:>6}{a.J:>6}{a.K:>4}{100 * a.failure_rate:>8.1f}"
            f"{a.mean_loss:>12.5f}{a.se_loss:>10.5f}{a.mean_seconds:>12.2e}"
        )
    return "\n".join(lines)
