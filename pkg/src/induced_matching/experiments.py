"""Seeded Monte Carlo experiments on induced matchings in G(n,p).

Every random object is drawn from its own stream ``derive_seed(master_seed,
cell, sample)`` so results do not depend on the order or the process in
which tasks run. Reports are deterministic functions of their configuration:
wall-clock fields are only added when ``include_timing`` is set.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DomainError, RefusalError
from .graph import (
    Graph,
    GnpParams,
    derive_seed,
    is_induced_matching,
    iter_matchings,
    pair_index,
    sample_gnp,
    sample_gnp_batch,
)
from .logspace import format_float
from .moments import log_expected_matchings
from .solvers import SolveResult, mim_exact, solve

log = logging.getLogger(__name__)

EXACT_MAX_N = 60
PROPERTY_MAX_N = 14
FIRST_MOMENT_MAX_N = 16
EXPERIMENT_SOLVERS = ("exact", "greedy", "greedy+local_search")
SAMPLE_COLUMNS = ("n", "p", "seed", "size", "optimal", "solver", "millis")


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...]
    p_values: tuple[float, ...]
    epsilon0: float = 0.35
    samples: int = 50
    solver: str = "exact"
    time_budget: float | None = None
    master_seed: int = 0
    parallelism: int = 1
    include_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        if not self.n_values or not self.p_values:
            raise ValueError("need at least one n and one p")
        if any(n < 1 for n in self.n_values):
            raise ValueError("every n must be >= 1")
        if any(not 0 <= p <= 1 for p in self.p_values):
            raise ValueError("every p must lie in [0, 1]")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.epsilon0 <= 1:
            raise ValueError("epsilon0 must lie in [0, 1]")
        if self.solver not in EXPERIMENT_SOLVERS:
            raise ValueError(f"solver must be one of {EXPERIMENT_SOLVERS}, got {self.solver!r}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")

    def cells(self) -> list[tuple[int, float]]:
        return list(itertools.product(self.n_values, self.p_values))

    def to_json(self) -> dict:
        # parallelism is an execution setting and never changes results
        return {
            "n_values": list(self.n_values),
            "p_values": [format_float(p) for p in self.p_values],
            "epsilon0": format_float(self.epsilon0),
            "samples": self.samples,
            "solver": self.solver,
            "time_budget": None if self.time_budget is None else format_float(self.time_budget),
            "master_seed": self.master_seed,
        }


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    cells: list[dict]
    verdicts: dict
    rows: list[dict] = field(default_factory=list)
    execution: dict | None = None

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "config": self.config,
            "cells": [_jsonable(c) for c in self.cells],
            "verdicts": _jsonable(self.verdicts),
        }
        if self.execution is not None:
            out["execution"] = _jsonable(self.execution)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SAMPLE_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _csv_value(row.get(k)) for k in SAMPLE_COLUMNS})
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    return obj


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


# -- scale ---------------------------------------------------------------------


def log_q_np(n: int, p: float) -> float | None:
    """``ln(np) / ln(1/(1-p))``; ``None`` when ``p`` is 0 or 1."""
    if not 0 < p < 1:
        return None
    return math.log(n * p) / -math.log1p(-p)


def target_window(n: int, p: float, epsilon0: float) -> tuple[float, float] | None:
    scale = log_q_np(n, p)
    if scale is None:
        return None
    return (1 - epsilon0) * scale, (1 + epsilon0) * scale


def rounded_window(n: int, p: float, epsilon0: float) -> tuple[int, int] | None:
    """Integer window rounded outward: ``[floor(lo), ceil(hi)]``."""
    win = target_window(n, p, epsilon0)
    if win is None:
        return None
    return math.floor(win[0]), math.ceil(win[1])


# -- task execution ------------------------------------------------------------


def _run_tasks(fn, tasks: list, parallelism: int) -> list:
    if parallelism == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * parallelism))
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _solve_task(task: tuple) -> dict:
    n, p, seed, solver, time_budget = task
    g = sample_gnp(GnpParams(n, p, seed))
    t0 = time.perf_counter()
    res: SolveResult = solve(g, solver, time_budget=time_budget, seed=seed)
    millis = (time.perf_counter() - t0) * 1000
    if not is_induced_matching(g, res.witness):
        raise RuntimeError(f"solver {solver} returned an invalid witness for seed {seed}")
    return {"seed": seed, "size": res.size, "optimal": res.optimal,
            "witness": res.witness.to_json(), "millis": millis}


def _sample_cells(config: ExperimentConfig) -> tuple[list[dict], list[dict], list[dict]]:
    """Solve ``samples`` graphs per cell; returns (cells, rows, refused)."""
    tasks, owners, refused = [], [], []
    for ci, (n, p) in enumerate(config.cells()):
        if config.solver == "exact" and n > EXACT_MAX_N:
            refused.append({"n": n, "p": p, "reason": f"exact solver is capped at n <= {EXACT_MAX_N}"})
            continue
        for si in range(config.samples):
            tasks.append((n, p, derive_seed(config.master_seed, ci, si), config.solver, config.time_budget))
            owners.append(ci)
    results = _run_tasks(_solve_task, tasks, config.parallelism)
    by_cell: dict[int, list[dict]] = {}
    for ci, res in zip(owners, results):
        by_cell.setdefault(ci, []).append(res)
    cells, rows = [], []
    for ci, (n, p) in enumerate(config.cells()):
        if ci not in by_cell:
            continue
        samples = by_cell[ci]
        cells.append({"index": ci, "n": n, "p": p, "samples": samples})
        for s in samples:
            rows.append({"n": n, "p": p, "seed": s["seed"], "size": s["size"], "optimal": s["optimal"],
                         "solver": config.solver,
                         "millis": round(s["millis"], 3) if config.include_timing else None})
        log.info("cell n=%d p=%s: %d samples", n, format_float(p), len(samples))
    return cells, rows, refused


def _summary(sizes: list[int]) -> dict:
    return {
        "median": float(statistics.median(sizes)),
        "mean": float(statistics.fmean(sizes)),
        "stddev": float(statistics.stdev(sizes)) if len(sizes) > 1 else 0.0,
        "min": min(sizes),
        "max": max(sizes),
    }


def _finish(kind: str, config: ExperimentConfig, cells, verdicts, rows, started: float) -> ExperimentReport:
    execution = None
    if config.include_timing:
        execution = {"parallelism": config.parallelism, "wall_time_s": time.perf_counter() - started}
    return ExperimentReport(kind, config.to_json(), cells, verdicts, rows, execution)


# -- experiments ---------------------------------------------------------------


def run_matching_distribution(config: ExperimentConfig) -> ExperimentReport:
    """Distribution of the maximum induced matching size per ``(n, p)`` cell.

    The verdict of a cell is whether the sample median lies in the window
    ``[floor((1-eps0) L), ceil((1+eps0) L)]`` with ``L = log_q(np)``.
    Cells needing the exact solver above ``n = 60`` are refused and listed
    under ``verdicts.refused``.
    """
    started = time.perf_counter()
    raw, rows, refused = _sample_cells(config)
    cells = []
    for c in raw:
        n, p = c["n"], c["p"]
        sizes = [s["size"] for s in c["samples"]]
        window = target_window(n, p, config.epsilon0)
        rounded = rounded_window(n, p, config.epsilon0)
        stats = _summary(sizes)
        if rounded is None:
            in_window, verdict = None, None
        else:
            in_window = sum(rounded[0] <= x <= rounded[1] for x in sizes) / len(sizes)
            verdict = rounded[0] <= stats["median"] <= rounded[1]
        cells.append({
            "n": n, "p": p,
            "log_q_np": log_q_np(n, p),
            "target_window": list(window) if window else None,
            "rounded_window": list(rounded) if rounded else None,
            "sizes": sizes,
            **stats,
            "fraction_in_window": in_window,
            "solver_optimal_fraction": sum(s["optimal"] for s in c["samples"]) / len(sizes),
            "median_in_window": verdict,
            "samples": [{k: s[k] for k in ("seed", "size", "optimal", "witness")} for s in c["samples"]],
        })
    decided = [c["median_in_window"] for c in cells if c["median_in_window"] is not None]
    verdicts = {"all_medians_in_window": all(decided), "cells_checked": len(decided), "refused": refused}
    return _finish("matching_distribution", config, cells, verdicts, rows, started)


def _expected_count(n: int, p: float, r: int) -> float:
    if 0 < p < 1:
        return float(log_expected_matchings(n, p, r))
    # degenerate graphs: empty (only r = 0) or complete (r <= 1)
    if r == 0:
        return 1.0
    if p == 1 and r == 1:
        return float(comb(n, 2))
    return 0.0


def upper_threshold(n: int, p: float, epsilon0: float) -> tuple[int, int]:
    """``(r, threshold)``: a sample violates the bound when its size reaches ``threshold``.

    ``r = ceil((1+eps0) log_q(np))`` and ``threshold = r + 1``. For ``p`` in
    ``{0, 1}`` the scale is undefined and the threshold is the least ``r``
    with ``E[Y_r] = 0``, where Markov's inequality is exact.
    """
    scale = log_q_np(n, p)
    if scale is None:
        r = 1 if p == 0 else 2
        return r, r
    r = math.ceil((1 + epsilon0) * scale)
    return r, r + 1


def run_upper_bound_check(config: ExperimentConfig) -> ExperimentReport:
    """Count samples whose maximum induced matching reaches ``r + 1``."""
    started = time.perf_counter()
    raw, rows, refused = _sample_cells(config)
    cells = []
    for c in raw:
        n, p = c["n"], c["p"]
        sizes = [s["size"] for s in c["samples"]]
        r, threshold = upper_threshold(n, p, config.epsilon0)
        violations = [s["seed"] for s in c["samples"] if s["size"] >= threshold]
        e_r = _expected_count(n, p, r) if r <= n // 2 else 0.0
        e_t = _expected_count(n, p, threshold) if threshold <= n // 2 else 0.0
        cells.append({
            "n": n, "p": p,
            "log_q_np": log_q_np(n, p),
            "r": r,
            "threshold": threshold,
            "sizes": sizes,
            **_summary(sizes),
            "violations": len(violations),
            "violating_seeds": violations,
            "expected_count_at_r": e_r,
            "expected_count_at_threshold": e_t,
            "solver_optimal_fraction": sum(s["optimal"] for s in c["samples"]) / len(sizes),
        })
    verdicts = {"total_violations": sum(c["violations"] for c in cells),
                "holds": all(c["violations"] == 0 for c in cells), "refused": refused}
    return _finish("upper_bound", config, cells, verdicts, rows, started)


def run_concentration_stats(config: ExperimentConfig) -> ExperimentReport:
    """Empirical tail product ``P(M <= a) P(M >= b)`` and spread of ``M``.

    With ``eps = eps0 / 3`` and ``L = log_q(np)``: ``b = floor((1-eps) L)``
    and ``a = b - eps L``. Observational only, no verdict.
    """
    started = time.perf_counter()
    raw, rows, refused = _sample_cells(config)
    eps = config.epsilon0 / 3
    cells = []
    for c in raw:
        n, p = c["n"], c["p"]
        sizes = np.array([s["size"] for s in c["samples"]])
        scale = log_q_np(n, p)
        entry = {"n": n, "p": p, "log_q_np": scale, "sizes": sizes.tolist(), **_summary(sizes.tolist()),
                 "range": int(sizes.max() - sizes.min())}
        if scale is not None:
            b = math.floor((1 - eps) * scale)
            a = b - eps * scale
            lower = float(np.mean(sizes <= a))
            upper = float(np.mean(sizes >= b))
            entry.update({"a": a, "b": b, "p_at_most_a": lower, "p_at_least_b": upper,
                          "tail_product": lower * upper})
        cells.append(entry)
    return _finish("concentration_stats", config, cells, {"refused": refused}, rows, started)


# -- first moment --------------------------------------------------------------


def _matching_masks(n: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Indicator rows over pairs: the matching's pairs, and the other pairs it spans."""
    iu, ju = pair_index(n)
    index = {(int(u), int(v)): i for i, (u, v) in enumerate(zip(iu, ju))}
    present, absent = [], []
    for m in iter_matchings(n, r):
        verts = sorted(v for e in m for v in e)
        pres = np.zeros(iu.size, dtype=np.float32)
        span = np.zeros(iu.size, dtype=np.float32)
        for e in m:
            pres[index[e]] = 1
        for u, v in itertools.combinations(verts, 2):
            span[index[(u, v)]] = 1
        present.append(pres)
        absent.append(span - pres)
    if not present:
        return np.zeros((0, iu.size), np.float32), np.zeros((0, iu.size), np.float32)
    return np.array(present), np.array(absent)


def count_induced_r_matchings_batch(n: int, r: int, batch: np.ndarray) -> np.ndarray:
    """``Y_r`` for each row of a ``(count, C(n,2))`` boolean edge array."""
    if r == 0:
        return np.ones(batch.shape[0], dtype=np.int64)
    present, absent = _matching_masks(n, r)
    counts = np.zeros(batch.shape[0], dtype=np.int64)
    if present.shape[0] == 0:
        return counts
    step = max(1, 4_000_000 // present.shape[0])
    for start in range(0, batch.shape[0], step):
        x = batch[start:start + step].astype(np.float32)
        hit = (x @ present.T == r) & (x @ absent.T == 0)
        counts[start:start + step] = hit.sum(axis=1)
    return counts


def run_first_moment_mc(n: int, p: float, r: int, samples: int, seed: int,
                        include_timing: bool = False) -> ExperimentReport:
    """Monte Carlo mean of ``Y_r`` against the closed-form expectation.

    Passes iff ``|z| <= 4`` with ``z = (mean - E[Y_r]) / (sd / sqrt(samples))``.
    """
    if n > FIRST_MOMENT_MAX_N:
        raise RefusalError(f"enumeration of r-matchings is capped at n <= {FIRST_MOMENT_MAX_N}, got {n}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if r < 0 or 2 * r > n:
        raise DomainError(f"need 0 <= 2r <= n, got r={r}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    started = time.perf_counter()
    batch = sample_gnp_batch(n, p, samples, derive_seed(seed, 0))
    counts = count_induced_r_matchings_batch(n, r, batch)
    expected = _expected_count(n, p, r)
    mean = float(counts.mean())
    sd = float(counts.std(ddof=1)) if samples > 1 else 0.0
    se = sd / math.sqrt(samples)
    if se > 0:
        z = (mean - expected) / se
    else:
        z = 0.0 if math.isclose(mean, expected, rel_tol=1e-12, abs_tol=1e-300) else math.inf
    cell = {"n": n, "p": p, "r": r, "samples": samples, "expected": expected, "mean": mean,
            "stddev": sd, "standard_error": se, "z": z, "min": int(counts.min()), "max": int(counts.max())}
    config = {"n": n, "p": format_float(p), "r": r, "samples": samples, "seed": seed}
    execution = {"wall_time_s": time.perf_counter() - started} if include_timing else None
    return ExperimentReport("first_moment_mc", config, [cell], {"passes": abs(z) <= 4}, [], execution)


# -- concentration hypotheses --------------------------------------------------


def _resample_vertex(g: Graph, v: int, p: float, rng: np.random.Generator) -> Graph:
    rows = list(g.rows)
    new = 0
    draws = rng.random(g.n) < p
    for u in range(g.n):
        if u != v and draws[u]:
            new |= 1 << u
    for u in range(g.n):
        if u == v:
            continue
        if (new >> u) & 1:
            rows[u] |= 1 << v
        else:
            rows[u] &= ~(1 << v)
    rows[v] = new
    return Graph._trusted(g.n, tuple(rows))


def _lipschitz_task(task: tuple) -> dict:
    n, p, seed = task
    rng = np.random.default_rng(seed)
    g = sample_gnp(GnpParams(n, p, int(rng.integers(2**63))))
    v = int(rng.integers(n))
    h = _resample_vertex(g, v, p, rng)
    a, b = mim_exact(g).size, mim_exact(h).size
    return {"seed": seed, "vertex": v, "before": a, "after": b, "difference": abs(a - b)}


def _certificate_task(task: tuple) -> dict:
    n, p, seed = task
    rng = np.random.default_rng(seed)
    g = sample_gnp(GnpParams(n, p, int(rng.integers(2**63))))
    res = mim_exact(g)
    s_mask = res.witness.vertex_mask()
    rows = [0] * n
    draws = rng.random((n, n)) < p
    for u in range(n):
        for v in range(u + 1, n):
            inside = (s_mask >> u) & 1 and (s_mask >> v) & 1
            edge = g.has_edge(u, v) if inside else bool(draws[u, v])
            if edge:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    h = Graph._trusted(n, tuple(rows))
    after = mim_exact(h).size
    certified = is_induced_matching(h, res.witness)
    return {"seed": seed, "certificate_vertices": 2 * res.size, "before": res.size, "after": after,
            "witness_still_induced": certified}


def _property_report(kind: str, fn, trials: int, n: int, p: float, seed: int, parallelism: int,
                     include_timing: bool, violated) -> ExperimentReport:
    if n > PROPERTY_MAX_N:
        raise RefusalError(f"property trials solve exactly and are capped at n <= {PROPERTY_MAX_N}, got {n}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    started = time.perf_counter()
    tasks = [(n, p, derive_seed(seed, t)) for t in range(trials)]
    results = _run_tasks(fn, tasks, parallelism)
    bad = [r for r in results if violated(r)]
    rows = [{"n": n, "p": p, "seed": r["seed"], "size": r["before"], "optimal": True, "solver": "exact",
             "millis": None} for r in results]
    cell = {"n": n, "p": p, "trials": trials, "violations": len(bad),
            "violating_seeds": [r["seed"] for r in bad], "trials_detail": results}
    config = {"n": n, "p": format_float(p), "trials": trials, "seed": seed}
    execution = ({"parallelism": parallelism, "wall_time_s": time.perf_counter() - started}
                 if include_timing else None)
    return ExperimentReport(kind, config, [cell], {"holds": not bad}, rows, execution)


def run_lipschitz_property(trials: int, n: int, p: float, seed: int, parallelism: int = 1,
                           include_timing: bool = False) -> ExperimentReport:
    """Resampling the edges at one vertex moves the maximum by at most 1."""
    return _property_report("lipschitz", _lipschitz_task, trials, n, p, seed, parallelism,
                            include_timing, lambda r: r["difference"] > 1)


def run_certificate_property(trials: int, n: int, p: float, seed: int, parallelism: int = 1,
                             include_timing: bool = False) -> ExperimentReport:
    """Keeping every pair inside a witness's vertex set keeps the maximum at least as large."""
    return _property_report("certificate", _certificate_task, trials, n, p, seed, parallelism,
                            include_timing,
                            lambda r: r["after"] < r["certificate_vertices"] / 2 or not r["witness_still_induced"])


EXPERIMENTS = ("distribution", "upper_bound", "concentration")


def run_experiment(name: str, config: ExperimentConfig) -> ExperimentReport:
    if name == "distribution":
        return run_matching_distribution(config)
    if name == "upper_bound":
        return run_upper_bound_check(config)
    if name == "concentration":
        return run_concentration_stats(config)
    raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")
