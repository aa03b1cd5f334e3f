"""Seeded, parallel Monte Carlo harness for jury-selection experiments.

Replications are grouped in fixed blocks of ``BLOCK_SIZE``.  Block ``b`` draws
its panels from stream ``(seed, b, 0)`` and the random-procedure subsets from
``(seed, b, 1)``.  All procedures see the same panels.  Because the block
layout does not depend on the worker count and block summaries are merged in
block order, results are bit-identical for any number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import jsonschema
import numpy as np

from .distributions import GroupModel, make_rng
from .metrics import SimulationSummary, merge_all
from .procedures import PROCEDURES, draw_panels, random_batch, strike_replace_batch, struck_batch
from .solver import EquilibriumTable, solve

BLOCK_SIZE = 5000
DEFAULT_SEED = 0x5EED_0001

CSV_COLUMNS = ["preset", "scenario", "procedure", "statistic", "x", "threshold",
               "estimate", "std_error", "n_sims", "seed", "git_describe"]
TRACE_COLUMNS = ["sim_id", "procedure", "seat_index", "c", "group"]

SCHEMA_PATH = Path(__file__).with_name("config.schema.json")
_PERCENTILE = re.compile(r"^p(\d+(?:\.\d+)?)$")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


Threshold = Union[float, str]


@dataclass
class ExperimentConfig:
    group_model: GroupModel
    j: int = 12
    d: int = 6
    p: int = 6
    procedures: tuple[str, ...] = PROCEDURES
    n_sims: int = 50_000
    seed: int = DEFAULT_SEED
    thresholds: tuple[Threshold, ...] = ("p10",)
    workers: int = 1
    scenario: str = ""
    out: Optional[str] = None

    def __post_init__(self):
        self.procedures = tuple(self.procedures)
        self.thresholds = tuple(self.thresholds)
        self.validate()

    def validate(self):
        for name in ("j", "d", "p", "n_sims", "workers", "seed"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(getattr(self, name), bool):
                raise ConfigError(name, f"must be an integer, got {getattr(self, name)!r}")
        if self.j < 1:
            raise ConfigError("j", "must be >= 1")
        if self.d < 0 or self.p < 0:
            raise ConfigError("d" if self.d < 0 else "p", "must be >= 0")
        if len(self.procedures) > 1 and min(self.d, self.p) < 1:
            raise ConfigError("d" if self.d < 1 else "p", "comparing procedures needs d, p >= 1")
        if self.n_sims < 1:
            raise ConfigError("n_sims", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if not self.procedures:
            raise ConfigError("procedures", "must name at least one procedure")
        for i, proc in enumerate(self.procedures):
            if proc not in PROCEDURES:
                raise ConfigError(f"procedures[{i}]", f"unknown procedure {proc!r}")
        for i, t in enumerate(self.thresholds):
            if isinstance(t, str):
                if not _PERCENTILE.match(t):
                    raise ConfigError(f"thresholds[{i}]", f"bad percentile spec {t!r} (use e.g. 'p10')")
            elif not (0.0 <= float(t) <= 1.0):
                raise ConfigError(f"thresholds[{i}]", f"{t} outside [0, 1]")

    @property
    def n(self) -> int:
        return self.j + self.d + self.p

    def resolved_thresholds(self) -> list[tuple[str, float]]:
        """``(label, value)`` pairs sorted by value; percentile specs go through the pooled quantile."""
        pooled = self.group_model.pooled
        out = []
        for t in self.thresholds:
            if isinstance(t, str):
                q = float(_PERCENTILE.match(t).group(1)) / 100.0
                out.append((t, pooled.quantile(q)))
            else:
                out.append((_fmt(float(t)), float(t)))
        return sorted(out, key=lambda lv: lv[1])

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        validator = jsonschema.Draft202012Validator(json.loads(SCHEMA_PATH.read_text()))
        errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            path = "$" + "".join(f"[{k}]" if isinstance(k, int) else f".{k}" for k in err.absolute_path)
            raise ConfigError(path, err.message)
        try:
            gm = GroupModel.from_literal(raw["group_model"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("group_model", str(exc)) from exc
        kwargs = {k: v for k, v in raw.items() if k != "group_model"}
        return cls(group_model=gm, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
        return cls.from_dict(raw)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    thresholds: list[tuple[str, float]]
    median: float
    summaries: dict[str, SimulationSummary]
    table: Optional[EquilibriumTable] = None
    trace: list[tuple] = field(default_factory=list)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _run_block(args):
    gm, j, d, p, procedures, seed, block, size, thresholds, median, table, trace_limit = args
    n = j + d + p
    is_a, c = draw_panels(gm, size, n, make_rng(seed, block, 0))
    rows = np.arange(size)[:, None]
    out = {}
    trace = []
    for proc in procedures:
        if proc == "STR":
            seats = struck_batch(c, j, d, p)
        elif proc == "SAR":
            seats, _ = strike_replace_batch(c, table)
        else:
            seats = random_batch(size, n, j, make_rng(seed, block, 1))
        sel_c, sel_a = c[rows, seats], is_a[rows, seats]
        out[proc] = SimulationSummary(j, thresholds, median).accumulate_batch(sel_c, sel_a)
        for r in range(min(size, max(trace_limit - block * BLOCK_SIZE, 0))):
            sim_id = block * BLOCK_SIZE + r
            for s in range(j):
                trace.append((sim_id, proc, s, sel_c[r, s], "a" if sel_a[r, s] else "b"))
    return out, trace


def run_experiment(config: ExperimentConfig, trace_limit: int = 0) -> ExperimentResult:
    """Simulate ``config.n_sims`` jury selections for every requested procedure."""
    thresholds = config.resolved_thresholds()
    thr_values = tuple(v for _, v in thresholds)
    median = config.group_model.pooled.quantile(0.5)
    table = solve(config.group_model.pooled, config.j, config.d, config.p) if "SAR" in config.procedures else None
    n_blocks = math.ceil(config.n_sims / BLOCK_SIZE)
    jobs = [(config.group_model, config.j, config.d, config.p, config.procedures, config.seed, b,
             min(BLOCK_SIZE, config.n_sims - b * BLOCK_SIZE), thr_values, median, table, trace_limit)
            for b in range(n_blocks)]
    if config.workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, n_blocks)) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    summaries = {proc: merge_all([part[proc] for part, _ in parts]) for proc in config.procedures}
    trace = [row for _, tr in parts for row in tr]
    return ExperimentResult(config, thresholds, median, summaries, table, trace)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def git_describe() -> str:
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).resolve().parent)
        return res.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def result_rows(result: ExperimentResult, preset: str = "", tail_xs: Optional[Sequence[int]] = None):
    """One dict per (procedure, statistic, x, threshold) estimate."""
    cfg = result.config
    j = cfg.j
    tail_xs = range(1, j + 1) if tail_xs is None else tail_xs
    rows = []

    def add(proc, stat, x, thr, est, se):
        rows.append({"preset": preset, "scenario": cfg.scenario, "procedure": proc, "statistic": stat,
                     "x": "" if x is None else x, "threshold": thr, "estimate": _fmt(est),
                     "std_error": "" if se is None else _fmt(se), "n_sims": cfg.n_sims, "seed": cfg.seed})

    for proc in cfg.procedures:
        s = result.summaries[proc]
        for ti, (label, value) in enumerate(result.thresholds):
            thr = f"{label}={_fmt(value)}" if label.startswith("p") else label
            for x in tail_xs:
                add(proc, "at_least_below", x, thr, *s.prob_at_least(x, ti))
            add(proc, "expected_below", None, thr, s.expected_tail_count(ti), None)
            mm = s.minmax_extreme_stats(value, value)
            add(proc, "min_below", None, thr, mm["p_min_below"], None)
        ms = s.minority_stats()
        add(proc, "minority_mean_fraction", None, "", ms["mean_fraction"], ms["mean_fraction_se"])
        add(proc, "minority_std_fraction", None, "", ms["std_fraction"], None)
        for x in range(1, j + 1):
            add(proc, "minority_at_least", x, "", *s.minority_at_least(x))
        med = f"median={_fmt(result.median)}"
        for x, (est, se) in enumerate(s.median_count_stats()):
            add(proc, "at_least_below_median", x, med, est, se)
    return rows


def write_csv(rows: Sequence[dict], path=None, git: Optional[str] = None) -> str:
    git = git_describe() if git is None else git
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({**row, "git_describe": row.get("git_describe", git)})
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def write_trace(trace: Sequence[tuple], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for sim_id, proc, seat, c, group in trace:
            w.writerow([sim_id, proc, seat, _fmt(c), group])
