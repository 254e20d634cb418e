"""Numerical checks of the inequality chain behind the second-moment bound.

Every check evaluates the quantities at explicit ``(n, c, eps)`` and reports
how much room is left (``margin``, in natural-log units where the bound is
multiplicative) instead of asserting asymptotic statements. A failed
inequality is a result, not an exception: ``holds`` is ``False`` and the
worst grid points are listed as witnesses. Exceptions are reserved for
parameters outside the regime a check was written for.

Concrete choices for the asymptotic notation:

* the Case I / Case II split uses ``2l + s >= k / sqrt(ln c)``;
* an ``o_c(1/c) n`` term is instantiated as ``(n / c) / ln c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, RefusalError
from .logspace import format_float
from .moments import (
    ModelParams,
    b_term_exact,
    feasible,
    log_b_mp,
    log_b_terms,
    second_moment_ratio,
)

DEFAULT_LATTICE_SIZE = 200
FULL_GRID_LIMIT = 50_000_000


@dataclass(frozen=True)
class Lattice:
    step_l: int
    step_s: int

    def __post_init__(self):
        if self.step_l < 1 or self.step_s < 1:
            raise ValueError("lattice steps must be >= 1")


@dataclass(frozen=True)
class CheckConfig:
    """Which ``(l, s)`` points a check evaluates.

    ``grid`` is ``"full"``, a :class:`Lattice`, or an explicit sequence of
    points. Lattices are always augmented with the lines ``l in {0, 1}``,
    ``s in {0, 1}``, ``l + s in {k-1, k}`` and with the Case I/II threshold
    curve.
    """

    params: ModelParams
    grid: str | Lattice | tuple[tuple[int, int], ...] = "full"
    report_worst: int = 5

    def __post_init__(self):
        if isinstance(self.grid, str):
            if self.grid != "full":
                raise ValueError(f"unknown grid spec {self.grid!r}")
        elif not isinstance(self.grid, Lattice):
            pts = tuple((int(l), int(s)) for l, s in self.grid)
            k = self.params.k
            for l, s in pts:
                if l < 0 or s < 0 or l + s > k:
                    raise DomainError(f"({l}, {s}) is not a grid point for k={k}")
            object.__setattr__(self, "grid", pts)

    @classmethod
    def default(cls, params: ModelParams, size: int = DEFAULT_LATTICE_SIZE, report_worst: int = 5) -> CheckConfig:
        step = max(1, math.ceil(params.k / (size - 1)))
        return cls(params, Lattice(step, step), report_worst)

    def describe(self) -> object:
        if isinstance(self.grid, Lattice):
            return {"lattice": [self.grid.step_l, self.grid.step_s]}
        if self.grid == "full":
            return "full"
        return {"explicit": [list(pt) for pt in self.grid]}


@dataclass
class CheckReport:
    check_name: str
    holds: bool
    margin: float
    witnesses: list[dict] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check_name": self.check_name,
            "holds": self.holds,
            "margin": format_float(self.margin),
            "witnesses": [_jsonable(w) for w in self.witnesses],
            "params": _jsonable(self.params),
            "details": _jsonable(self.details),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [
            f"check    : {self.check_name}",
            f"holds    : {self.holds}",
            f"margin   : {format_float(self.margin)}",
        ]
        for key in sorted(self.details):
            lines.append(f"  {key:<28} {_text(self.details[key])}")
        if self.witnesses:
            lines.append("worst points:")
            keys = list(self.witnesses[0])
            lines.append("  " + "  ".join(f"{k:>14}" for k in keys))
            for w in self.witnesses:
                lines.append("  " + "  ".join(f"{_text(w.get(k)):>14}" for k in keys))
        return "\n".join(lines) + "\n"


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
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def _text(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


# -- grids --------------------------------------------------------------------


def case_threshold(params: ModelParams) -> float:
    """``k / sqrt(ln c)``: points with ``2l + s`` at or above it are Case I."""
    return params.k / math.sqrt(math.log(params.c))


def _lines(k: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(k + 1)
    ls = [np.zeros(k + 1, np.int64), r, np.ones(k, np.int64), r[:k]]
    ss = [r, np.zeros(k + 1, np.int64), r[:k], np.ones(k, np.int64)]
    for total in (k - 1, k):
        if total >= 0:
            t = np.arange(total + 1)
            ls.append(t)
            ss.append(total - t)
    return np.concatenate(ls), np.concatenate(ss)


def evaluation_points(config: CheckConfig) -> tuple[np.ndarray, np.ndarray]:
    """Points ``(l, s)`` of the configured grid, deduplicated, ``l`` major."""
    params = config.params
    k = params.k
    if isinstance(config.grid, tuple):
        pts = np.array(config.grid, dtype=np.int64).reshape(-1, 2)
        l, s = pts[:, 0], pts[:, 1]
    elif config.grid == "full":
        size = (k + 1) * (k + 2) // 2
        if size > FULL_GRID_LIMIT:
            raise RefusalError(f"full grid has {size} points; use a lattice")
        l_all, s_all = [], []
        for l0 in range(k + 1):
            l_all.append(np.full(k - l0 + 1, l0, np.int64))
            s_all.append(np.arange(k - l0 + 1, dtype=np.int64))
        l, s = np.concatenate(l_all), np.concatenate(s_all)
    else:
        lat = config.grid
        lv = np.union1d(np.arange(0, k + 1, lat.step_l), [k])
        sv = np.union1d(np.arange(0, k + 1, lat.step_s), [k])
        L, S = np.meshgrid(lv, sv, indexing="ij")
        keep = L + S <= k
        bl, bs = _lines(k)
        tl, ts = [], []
        if params.c > 1:
            t = math.ceil(case_threshold(params))
            for l0 in lv:
                for s0 in (t - 2 * l0 - 1, t - 2 * l0):
                    if 0 <= s0 <= k - l0:
                        tl.append(l0)
                        ts.append(s0)
        l = np.concatenate([L[keep], bl, np.array(tl, np.int64)])
        s = np.concatenate([S[keep], bs, np.array(ts, np.int64)])
    key = np.unique(l.astype(np.int64) * (k + 1) + s.astype(np.int64))
    l, s = np.divmod(key, k + 1)
    ok = (l + s <= k) & (params.n - 4 * k + 2 * l + s >= 0)
    return l[ok], s[ok]


def _interior(params: ModelParams, l: np.ndarray, s: np.ndarray) -> np.ndarray:
    return (l >= 1) & (s >= 1) & (l + s <= params.k - 1)


def _witnesses(l, s, values, bounds, count: int) -> list[dict]:
    margins = bounds - values
    order = np.argsort(margins, kind="stable")[:count]
    return [
        {"l": int(l[i]), "s": int(s[i]), "log_value": float(values[i]),
         "log_bound": float(bounds[i]), "margin": float(margins[i])}
        for i in order
    ]


# -- F and its split ----------------------------------------------------------


def _f_arrays(params: ModelParams, l, s):
    n, c, k, eps = params.n, params.c, params.k, params.epsilon
    l = np.asarray(l, dtype=float)
    s = np.asarray(s, dtype=float)
    log_ratio = math.log((n - 2 * k) / k)
    weight = (c / n) * (1 + eps / 2)
    m = 2 * l + s
    F = (
        l * np.log(k / l) + s * np.log(k / s) + s + 2 * s * math.log(2)
        + weight * m ** 2 / 2 - log_ratio * m
    )
    F1 = l * np.log(k / l) + weight * (2 * l ** 2 + 2 * l * s) - log_ratio * 2 * l
    F2 = (
        s * np.log(k / s) + s + 2 * s * math.log(2)
        + (c * s ** 2 / (2 * n)) * (1 + eps / 2) - log_ratio * s
    )
    return F, F1, F2


def f_terms(params: ModelParams, l: int, s: int) -> tuple[float, float, float]:
    """The exponent ``F`` bounding ``ln b(l,s)`` and its split ``F1 + F2``.

    Defined on the interior ``l, s >= 1``, ``l + s <= k - 1`` only; boundary
    points are handled by :func:`check_boundary_ratios`.
    """
    k = params.k
    if l < 1 or s < 1 or l + s > k - 1:
        raise DomainError(
            f"F is defined for 1 <= l, 1 <= s, l + s <= k-1; got ({l}, {s}) with k={k}. "
            "Boundary points are covered by check_boundary_ratios."
        )
    F, F1, F2 = _f_arrays(params, l, s)
    return float(F), float(F1), float(F2)


def _alpha_profile(x):
    return x * np.log(1 / x) + x + 2 * x * math.log(2)


# -- checks -------------------------------------------------------------------


def check_interior_bound(config: CheckConfig) -> CheckReport:
    """``ln b(l,s) <= n/(3c)`` on interior points, with Case I/II diagnostics."""
    params = config.params
    n, c, k = params.n, params.c, params.k
    l, s = evaluation_points(config)
    inner = _interior(params, l, s)
    l, s = l[inner], s[inner]
    bound = n / (3 * c)
    details: dict = {"points": int(l.size), "log_bound": bound}
    if l.size == 0:
        return CheckReport("interior_bound", True, math.inf, [], params.to_json(),
                           {**details, "note": "no interior points (k < 3)"})
    logb = log_b_terms(params, l, s)
    bounds = np.full(l.size, bound)
    margin = float(np.min(bounds - logb))

    threshold = case_threshold(params)
    case_one = (2 * l + s) >= threshold
    F, F1, F2 = _f_arrays(params, l, s)
    o_term = (n / c) / math.log(c)
    details.update({
        "max_log_b": float(logb.max()),
        "case_threshold": threshold,
        "case_I_points": int(case_one.sum()),
        "case_II_points": int((~case_one).sum()),
        "max_F": float(F.max()),
        "max_F_case_I": float(F[case_one].max()) if case_one.any() else None,
        "max_F_case_II": float(F[~case_one].max()) if (~case_one).any() else None,
        "max_F1_case_II": float(F1[~case_one].max()) if (~case_one).any() else None,
        "max_F2_case_II": float(F2[~case_one].max()) if (~case_one).any() else None,
        "o_term_n_over_c_ln_c": o_term,
        "F_within_o_term": bool(F.max() <= o_term),
    })
    # alpha = c s / (k ln c) on Case II points with s > k/(c ln c)
    big_s = (~case_one) & (s > k / (c * math.log(c)))
    if big_s.any():
        alpha = c * s[big_s] / (k * math.log(c))
        lo, hi = float(alpha.min()), float(alpha.max())
        details["alpha_range"] = [lo, hi]
        if hi > lo:
            res = minimize_scalar(lambda x: -_alpha_profile(x), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-10})
            details["alpha_argmax"] = float(res.x)
            details["alpha_max_profile"] = float(-res.fun)
    return CheckReport(
        "interior_bound", margin >= 0, margin,
        _witnesses(l, s, logb, bounds, config.report_worst), params.to_json(), details,
    )


def check_global_bound(config: CheckConfig) -> CheckReport:
    """``ln b(l,s) <= n/(2c)`` on every point, plus ``9 ln n + n/3c <= n/2c``."""
    params = config.params
    n, c = params.n, params.c
    l, s = evaluation_points(config)
    logb = log_b_terms(params, l, s)
    bound = n / (2 * c)
    bounds = np.full(l.size, bound)
    pointwise = float(np.min(bounds - logb)) if l.size else math.inf
    arith_lhs = 9 * math.log(n) + n / (3 * c)
    arith_margin = bound - arith_lhs
    sparse = c < n / math.log(n) ** 3
    margin = min(pointwise, arith_margin)
    details = {
        "points": int(l.size),
        "log_bound": bound,
        "max_log_b": float(logb.max()) if l.size else None,
        "pointwise_margin": pointwise,
        "arithmetic_lhs_9lnn_plus_n_3c": arith_lhs,
        "arithmetic_margin": arith_margin,
        "sparse_regime": bool(sparse),
        "b00_log": float(log_b_terms(params, [0], [0])[0]) if feasible(n, params.k, 0, 0) else None,
    }
    return CheckReport(
        "global_bound", margin >= 0, margin,
        _witnesses(l, s, logb, bounds, config.report_worst), params.to_json(), details,
    )


# closed forms of consecutive quotients of b, with p^-1 in place of
# k / ((1-eps) ln c); each returns ln(ratio)
def _ratio_s0_over_s1(P: ModelParams, l):
    n, k, p = P.n, P.k, P.p
    return math.log(0.25) + math.log(n - 4 * k + 2 * l + 1) - 2 * math.log(k - l) + 2 * l * math.log1p(-p)


def _ratio_l0_over_l1(P: ModelParams, s):
    n, k, p = P.n, P.k, P.p
    return (math.log(0.5) - 2 * math.log(k - s) + math.log(n - 4 * k + s + 2)
            + math.log(n - 4 * k + s + 1) + math.log(p) + 2 * s * math.log1p(-p))


def _ratio_diag(P: ModelParams, l):
    n, k, p = P.n, P.k, P.p
    return math.log(4) - math.log(k - l) - math.log(n - 3 * k + l) - (k + l - 1) * math.log1p(-p)


def _ratio_top(P: ModelParams):
    n, k, p = P.n, P.k, P.p
    return (math.log(2) - math.log(k) - math.log(n - 2 * k) - math.log(n - 2 * k - 1)
            - math.log(p) + (4 - 4 * k) * math.log1p(-p))


def _ratio_next_top(P: ModelParams):
    n, k, p = P.n, P.k, P.p
    return (math.log(8) - math.log(k - 1) - math.log(n - 2 * k - 2) - math.log(n - 2 * k - 3)
            - math.log(p) + (8 - 4 * k) * math.log1p(-p))


def _exact_closed(P: ModelParams, which: str, idx: int) -> Fraction:
    n, k = P.n, P.k
    p = Fraction(P.p)
    q = 1 - p
    if which == "s0/s1":
        return Fraction(n - 4 * k + 2 * idx + 1, 4 * (k - idx) ** 2) * q ** (2 * idx)
    if which == "l0/l1":
        return Fraction((n - 4 * k + idx + 2) * (n - 4 * k + idx + 1), 2 * (k - idx) ** 2) * p * q ** (2 * idx)
    if which == "diag":
        return Fraction(4, (k - idx) * (n - 3 * k + idx)) * q ** (-(k + idx - 1))
    if which == "top":
        return Fraction(2, k * (n - 2 * k) * (n - 2 * k - 1)) / p * q ** (4 - 4 * k)
    if which == "next_top":
        return Fraction(8, (k - 1) * (n - 2 * k - 2) * (n - 2 * k - 3)) / p * q ** (8 - 4 * k)
    raise ValueError(which)


# (name, numerator point, denominator point, exponent of n in the bound)
def _inequalities(k: int):
    return {
        "s0/s1": (lambda i: (i, 0), lambda i: (i, 1), 1, range(0, k)),
        "l0/l1": (lambda i: (0, i), lambda i: (1, i), 3, range(0, k)),
        "diag": (lambda i: (i, k - i), lambda i: (i, k - i - 1), 2, range(0, k)),
        "top": (lambda i: (k, 0), lambda i: (k - 1, 0), 2, range(0, 1) if k >= 1 else range(0)),
        "next_top": (lambda i: (k - 1, 0), lambda i: (k - 2, 0), 2, range(0, 1) if k >= 2 else range(0)),
    }


_CLOSED = {
    "s0/s1": lambda P, i: _ratio_s0_over_s1(P, i),
    "l0/l1": lambda P, i: _ratio_l0_over_l1(P, i),
    "diag": lambda P, i: _ratio_diag(P, i),
    "top": lambda P, i: _ratio_top(P),
    "next_top": lambda P, i: _ratio_next_top(P),
}


def _boundary_move(k: int, l: int, s: int) -> tuple[str, tuple[int, int]]:
    if s == 0 and l == k:
        return "top", (k - 1, 0)
    if s == 0 and l == k - 1:
        return "next_top", (k - 2, 0)
    if l + s == k:
        return "diag", (l, s - 1)
    if s == 0:
        return "s0/s1", (l, 1)
    if l == 0:
        return "l0/l1", (1, s)
    raise AssertionError(f"({l}, {s}) is not a boundary point")


def boundary_path(k: int, l: int, s: int) -> list[tuple[str, tuple[int, int]]]:
    """Moves taking a boundary point into ``1 <= l, s`` and ``l + s <= k-1``."""
    path = []
    while not (l >= 1 and s >= 1 and l + s <= k - 1):
        name, (l, s) = _boundary_move(k, l, s)
        path.append((name, (l, s)))
        if len(path) > 3:
            break
    return path


def check_boundary_ratios(config: CheckConfig, sample: int = DEFAULT_LATTICE_SIZE) -> CheckReport:
    """Consecutive-quotient inequalities on the boundary of the grid.

    (a) each of the five inequalities over its whole index range;
    (b) closed-form quotients against direct quotients of b, at up to
        ``sample`` indices per inequality in 40-digit arithmetic (every index,
        and exactly in rationals, when ``n <= 30``);
    (c) every boundary point reaches the interior in at most three moves
        whose combined cost is at most ``n^9``.
    """
    params = config.params
    n, k = params.n, params.k
    ln_n = math.log(n)
    ineqs = _inequalities(k)
    details: dict = {}
    witnesses: list[dict] = []
    margins: list[float] = []
    ok_a = ok_b = ok_c = True

    # (a)
    for name, (num, den, power, idx) in ineqs.items():
        idx = np.array([i for i in idx if feasible(n, k, *num(i)) and feasible(n, k, *den(i))], np.int64)
        if idx.size == 0:
            details[f"{name}_indices"] = 0
            continue
        nl, ns = np.array([num(i) for i in idx]).T
        dl, ds = np.array([den(i) for i in idx]).T
        log_ratio = log_b_terms(params, nl, ns) - log_b_terms(params, dl, ds)
        m = power * ln_n - log_ratio
        worst = int(np.argmin(m))
        details[f"{name}_indices"] = int(idx.size)
        details[f"{name}_max_log_ratio"] = float(log_ratio.max())
        details[f"{name}_log_bound"] = power * ln_n
        margins.append(float(m[worst]))
        if m[worst] < 0:
            ok_a = False
        witnesses.append({"inequality": name, "index": int(idx[worst]),
                          "log_ratio": float(log_ratio[worst]), "margin": float(m[worst])})

    # (b)
    max_rel = 0.0
    exact_checked = 0
    for name, (num, den, power, idx) in ineqs.items():
        idx = [i for i in idx if feasible(n, k, *num(i)) and feasible(n, k, *den(i))]
        if not idx:
            continue
        if n <= 30:
            for i in idx:
                direct = b_term_exact(n, Fraction(params.p), k, *num(i)) / b_term_exact(n, Fraction(params.p), k, *den(i))
                exact_checked += 1
                if direct != _exact_closed(params, name, i):
                    ok_b = False
                    witnesses.append({"inequality": name, "index": i, "exact_mismatch": True})
        else:
            if len(idx) > sample:
                pick = np.unique(np.linspace(0, len(idx) - 1, sample).round().astype(int))
                idx = [idx[j] for j in pick]
        for i in idx:
            direct = float(log_b_mp(params, *num(i)) - log_b_mp(params, *den(i)))
            closed = _CLOSED[name](params, i)
            rel = abs(math.expm1(direct - closed))
            max_rel = max(max_rel, rel)
    if max_rel > 1e-9:
        ok_b = False
    details["closed_form_max_rel_error"] = max_rel
    details["closed_form_exact_checks"] = exact_checked

    # (c)
    if k >= 3:
        bl, bs = _boundary_points(params)
        starts, ends, powers, lengths = [], [], [], []
        power_of = {name: spec[2] for name, spec in ineqs.items()}
        for l0, s0 in zip(bl.tolist(), bs.tolist()):
            path = boundary_path(k, l0, s0)
            end = path[-1][1]
            starts.append((l0, s0))
            ends.append(end)
            powers.append(sum(power_of[name] for name, _ in path))
            lengths.append(len(path))
        starts_a = np.array(starts)
        ends_a = np.array(ends)
        ok_feasible = np.array([feasible(n, k, *e) for e in ends])
        log_ratio = (log_b_terms(params, starts_a[ok_feasible, 0], starts_a[ok_feasible, 1])
                     - log_b_terms(params, ends_a[ok_feasible, 0], ends_a[ok_feasible, 1]))
        powers_a = np.array(powers)[ok_feasible]
        m_chain = 9 * ln_n - log_ratio
        m_moves = powers_a * ln_n - log_ratio
        details["chain_points"] = int(ok_feasible.sum())
        details["chain_max_moves"] = int(max(lengths))
        details["chain_max_power"] = int(max(powers))
        details["chain_max_log_ratio"] = float(log_ratio.max())
        worst = int(np.argmin(m_chain))
        margins.append(float(m_chain[worst]))
        if max(lengths) > 3 or max(powers) > 9 or m_chain.min() < 0 or m_moves.min() < 0:
            ok_c = False
        # the longest concatenation: (k-1, 1) -> (k-1, 0) -> (k-2, 0) -> (k-2, 1)
        if feasible(n, k, k - 2, 1):
            worked = float(log_b_mp(params, k - 1, 1) - log_b_mp(params, k - 2, 1))
            details["worked_chain_log_ratio"] = worked
            details["worked_chain_log_bound"] = 5 * ln_n
            if worked > 5 * ln_n:
                ok_c = False
            margins.append(5 * ln_n - worked)
    else:
        details["chain_note"] = "k < 3: the interior is empty, nothing to chain"

    details.update({"part_a": ok_a, "part_b": ok_b, "part_c": ok_c})
    margin = min(margins) if margins else math.inf
    holds = ok_a and ok_b and ok_c
    return CheckReport("boundary_ratios", holds, margin, witnesses, params.to_json(), details)


def _boundary_points(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    k = params.k
    r = np.arange(k + 1)
    l = np.concatenate([np.zeros(k + 1, np.int64), r, r])
    s = np.concatenate([r, np.zeros(k + 1, np.int64), k - r])
    key = np.unique(l * (k + 1) + s)
    l, s = np.divmod(key, k + 1)
    ok = params.n - 4 * k + 2 * l + s >= 0
    return l[ok], s[ok]


def power_factorial_scan(limit: int = 64) -> tuple[Fraction, list[tuple[int, int]], bool]:
    """Exact maximum of ``2^(l+2s) / (l! s!)`` over ``l, s <= limit``.

    Returns ``(max, argmax points, tail_ok)``; ``tail_ok`` confirms that past
    ``limit`` both one-step factors ``2/(l+1)`` and ``4/(s+1)`` are below 1,
    so no larger value exists.
    """
    best = Fraction(0)
    where: list[tuple[int, int]] = []
    for l in range(limit + 1):
        for s in range(limit + 1):
            v = Fraction(2 ** (l + 2 * s), factorial(l) * factorial(s))
            if v > best:
                best, where = v, [(l, s)]
            elif v == best:
                where.append((l, s))
    tail_ok = Fraction(2, limit + 1) < 1 and Fraction(4, limit + 1) < 1
    return best, where, tail_ok


def check_dense_regime(config: CheckConfig) -> CheckReport:
    """Bounds used when ``n / (ln n)^3 <= c < n``.

    (a) ``2^(l+2s)/(l! s!) <= 22`` for all ``l, s``;
    (b) ``b(l,s) <= n^(-eps (l+s))`` for ``l + s > 0`` on the grid;
    (c) ``b(0,0)`` within ``10 k^2 / n`` of 1;
    (d) ``sum b <= 1 + 3 n^(-eps)``, i.e. variance ratio ``<= 3 n^(-eps)``.
    """
    params = config.params
    n, c, k, eps = params.n, params.c, params.k, params.epsilon
    lower = n / math.log(n) ** 3
    if not (c >= lower * (1 - 1e-12) and c < n):
        raise RefusalError(
            f"dense-regime check needs n/(ln n)^3 = {lower:.6g} <= c < n, got c = {c:.6g}"
        )
    details: dict = {"c_lower": lower}
    witnesses: list[dict] = []

    best, where, tail_ok = power_factorial_scan(64)
    ok_a = best <= 22 and tail_ok
    details.update({"constant_max": best, "constant_max_float": float(best),
                    "constant_argmax": [list(w) for w in where], "constant_tail_ok": tail_ok})

    l, s = evaluation_points(config)
    pos = (l + s) > 0
    l, s = l[pos], s[pos]
    logb = log_b_terms(params, l, s)
    bounds = -eps * (l + s) * math.log(n)
    m_b = bounds - logb
    ok_b = bool(m_b.min() >= 0) if l.size else True
    details["b_points"] = int(l.size)
    details["b_violations"] = int((m_b < 0).sum())
    witnesses.extend(_witnesses(l, s, logb, bounds, config.report_worst))

    delta = 10 * k ** 2 / n
    b00 = math.exp(float(log_b_mp(params, 0, 0)))
    ok_c = 1 - delta <= b00 <= 1 + delta
    details.update({"b00": b00, "b00_delta": delta, "b00_at_most_1": b00 <= 1})

    ratio = float(second_moment_ratio(params))
    slack = 3 * n ** (-eps)
    ok_d = ratio <= 1 + slack
    details.update({"sum_b": ratio, "variance_ratio": ratio - 1, "variance_bound": slack})

    details.update({"part_a": ok_a, "part_b": ok_b, "part_c": ok_c, "part_d": ok_d})
    margins = [float(22 - best), float(m_b.min()) if l.size else math.inf,
               delta - abs(b00 - 1), slack - (ratio - 1)]
    holds = ok_a and ok_b and ok_c and ok_d
    return CheckReport("dense_regime", holds, min(margins), witnesses, params.to_json(), details)


def check_talagrand_arithmetic(params: ModelParams | None = None, *, n: float | None = None,
                               c: float | None = None, epsilon: float | None = None) -> CheckReport:
    """Arithmetic of the concentration step with ``b = k`` and ``f(m) = 2m``.

    Accepts either :class:`ModelParams` or explicit ``n, c, epsilon`` (the
    latter allows ``c > n``, e.g. ``c = e^100``, where the inequality is
    meant to hold). Uses the unrounded target size.
    """
    if params is not None:
        n, c, epsilon = params.n, params.c, params.epsilon
    if n is None or c is None or epsilon is None:
        raise ValueError("give ModelParams or all of n, c, epsilon")
    if not c > 1:
        raise DomainError(f"need c > 1, got {c}")
    ln_c = math.log(c)
    eps = epsilon
    echo = {"n": n, "c": c, "ln_c": ln_c, "epsilon": eps}
    if eps >= 1:
        return CheckReport("talagrand_arithmetic", True, math.inf, [], echo,
                           {"threshold_ln_c": 0.0, "note": "eps = 1: exponent is unbounded"})
    k = (1 - eps) * ln_c * n / c
    deviation = eps * ln_c * n / c
    lam = deviation / math.sqrt(2 * k)
    lhs_exp = lam ** 2 / 4
    rhs_exp = eps ** 2 * ln_c * n / (8 * (1 - eps) * c)
    rel_cert = abs(lam * math.sqrt(2 * k) - deviation) / deviation
    rel_exp = abs(lhs_exp - rhs_exp) / rhs_exp
    threshold = 16 * (1 - eps) / eps ** 2 if eps > 0 else math.inf
    # relative slack of 1e-12 so ln c exactly at the threshold counts as holding
    final_ok = eps ** 2 * ln_c / (8 * (1 - eps)) >= 2 * (1 - 1e-12)
    details = {
        "k": k,
        "lambda": lam,
        "lambda_sqrt_2k": lam * math.sqrt(2 * k),
        "deviation": deviation,
        "lambda_sq_over_4": lhs_exp,
        "exponent_closed_form": rhs_exp,
        "rel_error_certificate": rel_cert,
        "rel_error_exponent": rel_exp,
        "exponent_per_n_over_c": eps ** 2 * ln_c / (8 * (1 - eps)),
        "threshold_ln_c": threshold,
        "final_inequality": final_ok,
    }
    holds = rel_cert <= 1e-9 and rel_exp <= 1e-9 and final_ok
    margin = ln_c - threshold
    if abs(margin) <= 1e-12 * threshold:
        margin = 0.0
    return CheckReport("talagrand_arithmetic", holds, margin, [], echo, details)


def check_final_assembly(params: ModelParams, config: CheckConfig | None = None) -> CheckReport:
    """Closing arithmetic: ``P(M small) <= e^(-2n/c) / P(Y_k > 0) <= e^(-n/c)``.

    (a) ``2 ln n + n/(2c) <= n/c``;
    (b) ``ln(e^(-2n/c) / e^(-n/c)) = -n/c < 0``;
    (c) ``ln sum b <= n/c`` so the second-moment bound gives
        ``ln P(Y_k > 0) >= -n/c``. The sum is exact when the grid is small
        enough, otherwise bounded by ``#grid * max b`` over the lattice.
    """
    n, c = params.n, params.c
    upper = n / math.log(n) ** 3
    if c > upper * (1 + 1e-12):
        raise RefusalError(f"final assembly needs c <= n/(ln n)^3 = {upper:.6g}, got c = {c:.6g}")
    a_lhs = 2 * math.log(n) + n / (2 * c)
    ok_a = a_lhs <= n / c
    chain_log = -2 * n / c - (-n / c)
    ok_b = chain_log < 0
    k = params.k
    grid_size = (k + 1) * (k + 2) // 2
    if grid_size <= 2_000_000:
        log_sum_b = second_moment_ratio(params).log_magnitude
        method = "exact grid sum"
    else:
        config = config or CheckConfig.default(params)
        l, s = evaluation_points(config)
        log_sum_b = math.log(grid_size) + float(log_b_terms(params, l, s).max())
        method = "grid size times lattice maximum"
    ok_c = log_sum_b <= n / c
    details = {
        "lhs_2lnn_plus_n_2c": a_lhs,
        "n_over_c": n / c,
        "chain_log": chain_log,
        "log_sum_b": log_sum_b,
        "sum_b_method": method,
        "log_pz_lower_bound": -log_sum_b,
        "part_a": ok_a, "part_b": ok_b, "part_c": ok_c,
    }
    margin = min(n / c - a_lhs, -chain_log, n / c - log_sum_b)
    return CheckReport("final_assembly", ok_a and ok_b and ok_c, margin, [], params.to_json(), details)


CHECKS = ("interior", "global", "boundary", "dense", "talagrand", "assembly")


def run_check(name: str, config: CheckConfig) -> CheckReport:
    if name == "interior":
        return check_interior_bound(config)
    if name == "global":
        return check_global_bound(config)
    if name == "boundary":
        return check_boundary_ratios(config)
    if name == "dense":
        return check_dense_regime(config)
    if name == "talagrand":
        return check_talagrand_arithmetic(config.params)
    if name == "assembly":
        return check_final_assembly(config.params, config)
    raise ValueError(f"unknown check {name!r}; expected one of {CHECKS}")
