"""Closed-form moments of the number of induced k-matchings in G(n,p).

Notation follows the second-moment computation for ``Y_k``, the number of
induced matchings of size ``k``: a fixed matching ``M1`` and a second
matching with ``l`` pairs shared with ``M1`` (type A), ``s`` pairs with one
endpoint in ``V(M1)`` (type B) and ``k-l-s`` pairs avoiding ``V(M1)``
(type C). ``a(l,s)`` is the mass of ``sum E[X_i | X_1 = 1]`` coming from one
class and ``b(l,s) = a(l,s) / E[Y_k]``; the grid sum of ``b`` is
``E[Y_k^2] / E[Y_k]^2``.

Three evaluation routes are provided:

* scalar functions returning :class:`LogValue`, evaluated with mpmath at 40
  significant digits and rounded to float logs only at the end (``log n!`` is
  ~2e9 at ``n=1e8``, so plain float log-gamma loses ~1e-6 absolutely);
* :func:`log_b_terms`, a vectorised float64 version for large sweeps;
* ``*_exact`` functions in rational arithmetic for small ``n``.

The factor ``(k / ((1-eps) ln c))^l`` is written as ``p^(-l)``. The two agree
when ``k`` is the real-valued target size and the second form stays
meaningful for arbitrary test values of ``k``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import DomainError, RefusalError
from .graph import iter_matchings
from .logspace import LogValue, format_float, logsumexp

_MP = mpmath.MPContext()
_MP.dps = 40
_LN2 = _MP.log(2)


def target_size(n: int, p: float, epsilon: float) -> int:
    """``floor((1 - eps) * ln(c) * n / c)`` with ``c = p n``."""
    c = p * n
    if not c > 1:
        raise DomainError(f"target size needs c = p*n > 1, got c={c}")
    if not 0 <= epsilon <= 1:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    return math.floor((1 - epsilon) * math.log(c) * n / c)


@dataclass(frozen=True)
class ModelParams:
    """Parameter bundle ``(n, p, c, q, eps, eps0, k)``.

    ``c = p n`` and ``q = 1/(1-p)`` are derived; ``epsilon0 = 3 epsilon``.
    When ``k`` is omitted it defaults to :func:`target_size`.
    """

    n: int
    p: float
    epsilon: float = 0.1
    k: int | None = None
    c: float = field(init=False)
    q: float = field(init=False)
    epsilon0: float = field(init=False)
    k_is_default: bool = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not 0 < self.p < 1:
            raise DomainError(f"moment formulas need 0 < p < 1, got {self.p}")
        if not 0 <= self.epsilon <= 1:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        object.__setattr__(self, "c", self.p * self.n)
        object.__setattr__(self, "q", 1.0 / (1.0 - self.p))
        object.__setattr__(self, "epsilon0", 3 * self.epsilon)
        object.__setattr__(self, "k_is_default", self.k is None)
        if self.k is None:
            object.__setattr__(self, "k", target_size(self.n, self.p, self.epsilon))
        if self.k < 0 or 2 * self.k > self.n:
            raise DomainError(f"need 0 <= 2k <= n, got k={self.k}, n={self.n}")

    @classmethod
    def from_c(cls, n: int, c: float, epsilon: float = 0.1, k: int | None = None) -> ModelParams:
        return cls(n, c / n, epsilon, k)

    @classmethod
    def from_epsilon0(cls, n: int, p: float, epsilon0: float, k: int | None = None) -> ModelParams:
        return cls(n, p, epsilon0 / 3, k)

    @property
    def k_real(self) -> float:
        """Unrounded target size ``(1 - eps) ln(c) n / c``."""
        return (1 - self.epsilon) * math.log(self.c) * self.n / self.c

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p": format_float(self.p),
            "c": format_float(self.c),
            "q": format_float(self.q),
            "epsilon": format_float(self.epsilon),
            "epsilon0": format_float(self.epsilon0),
            "k": self.k,
            "k_is_default": self.k_is_default,
        }


# -- high-precision scalar route ----------------------------------------------


@lru_cache(maxsize=1 << 20)
def _log_factorial(m: int):
    if m < 0:
        raise DomainError(f"factorial of negative integer {m}")
    return _MP.loggamma(m + 1)


def _log_p(p: float):
    return _MP.log(_MP.mpf(p))


def _log_1mp(p: float):
    return _MP.log1p(-_MP.mpf(p))


def _lv(x) -> LogValue:
    return LogValue.from_log(float(x))


def _check_probability(p: float) -> None:
    if not 0 < p < 1:
        raise DomainError(f"need 0 < p < 1, got {p}")


def _check_grid(n: int, k: int, l: int, s: int) -> None:
    if l < 0 or s < 0:
        raise DomainError(f"l and s must be nonnegative, got ({l}, {s})")
    if l + s > k:
        raise DomainError(f"need l + s <= k, got l={l}, s={s}, k={k}")
    if n - 4 * k + 2 * l + s < 0:
        raise DomainError(
            f"negative factorial argument n-4k+2l+s = {n - 4 * k + 2 * l + s}"
        )


def feasible(n: int, k: int, l: int, s: int) -> bool:
    """Whether the class ``(l, s)`` can be nonempty (enough vertices exist)."""
    return l >= 0 and s >= 0 and l + s <= k and n - 4 * k + 2 * l + s >= 0


def _log_expected_mp(n: int, p: float, r: int):
    return (
        _log_factorial(n) - _log_factorial(n - 2 * r) - _log_factorial(r)
        - r * _LN2 + r * _log_p(p) + (comb(2 * r, 2) - r) * _log_1mp(p)
    )


def log_expected_matchings(n: int, p: float, r: int) -> LogValue:
    """``E[Y_r] = C(n,2r) (2r)!/(r! 2^r) p^r (1-p)^(C(2r,2)-r)``."""
    _check_probability(p)
    if r < 0 or 2 * r > n:
        raise DomainError(f"need 0 <= 2r <= n, got r={r}, n={n}")
    return _lv(_log_expected_mp(n, p, r))


def _log_count_mp(n: int, k: int, l: int, s: int):
    return (
        (l + 2 * s - k) * _LN2 + _log_factorial(k) - _log_factorial(l) - _log_factorial(s)
        - 2 * _log_factorial(k - l - s)
        + _log_factorial(n - 2 * k) - _log_factorial(n - 4 * k + 2 * l + s)
    )


def count_compatible(n: int, k: int, l: int, s: int) -> LogValue:
    """Number of size-k matchings in class ``(l, s)`` relative to a fixed ``M1``."""
    if l < 0 or s < 0:
        raise DomainError(f"l and s must be nonnegative, got ({l}, {s})")
    if l + s > k:
        return LogValue.zero()
    _check_grid(n, k, l, s)
    return _lv(_log_count_mp(n, k, l, s))


def _nonedge_exponent(k: int, l: int, s: int) -> int:
    return comb(2 * k, 2) - k - (comb(2 * l + s, 2) - l)


def _log_cond_mp(p: float, k: int, l: int, s: int):
    return (k - l) * _log_p(p) + _nonedge_exponent(k, l, s) * _log_1mp(p)


def conditional_expectation(params: ModelParams, l: int, s: int) -> LogValue:
    """``E[X_i | X_1 = 1]`` for any ``i`` in class ``(l, s)``."""
    n, p, k = params.n, params.p, params.k
    _check_grid(n, k, l, s)
    return _lv(_log_cond_mp(p, k, l, s))


def a_term(params: ModelParams, l: int, s: int) -> LogValue:
    n, p, k = params.n, params.p, params.k
    _check_grid(n, k, l, s)
    return _lv(_log_count_mp(n, k, l, s) + _log_cond_mp(p, k, l, s))


def log_b_mp(params: ModelParams, l: int, s: int):
    """``ln b(l,s)`` as a 40-digit mpmath number (for ratio identities)."""
    n, p, k = params.n, params.p, params.k
    _check_grid(n, k, l, s)
    m = 2 * l + s
    return (
        (l + 2 * s) * _LN2 + 2 * _log_factorial(k) - _log_factorial(l) - _log_factorial(s)
        - 2 * _log_factorial(k - l - s)
        + 2 * _log_factorial(n - 2 * k) - _log_factorial(n) - _log_factorial(n - 4 * k + m)
        - l * _log_p(p) + (l - comb(m, 2)) * _log_1mp(p)
    )


def b_term(params: ModelParams, l: int, s: int) -> LogValue:
    """``b(l,s) = a(l,s) / E[Y_k]``, evaluated directly in closed form."""
    return _lv(log_b_mp(params, l, s))


def log_b_terms(params: ModelParams, l, s) -> np.ndarray:
    """Vectorised float64 ``ln b(l,s)`` for arrays of grid points.

    Absolute error grows like ``1e-16 * ln(n!)`` (about 1e-6 at ``n = 1e8``),
    which is irrelevant for bounds with margins of order ``n/c`` but too
    coarse for ratio identities; use :func:`log_b_mp` there.
    """
    n, p, k = params.n, params.p, params.k
    l = np.asarray(l, dtype=np.int64)
    s = np.asarray(s, dtype=np.int64)
    if np.any(l < 0) or np.any(s < 0) or np.any(l + s > k) or np.any(n - 4 * k + 2 * l + s < 0):
        raise DomainError("grid point outside the feasible region")
    lf, sf = l.astype(float), s.astype(float)
    m = 2 * lf + sf
    return (
        (lf + 2 * sf) * math.log(2) + 2 * gammaln(k + 1.0) - gammaln(lf + 1) - gammaln(sf + 1)
        - 2 * gammaln(k - lf - sf + 1)
        + 2 * gammaln(n - 2 * k + 1.0) - gammaln(n + 1.0) - gammaln(n - 4 * k + m + 1)
        - lf * math.log(p) + (lf - m * (m - 1) / 2) * math.log1p(-p)
    )


# -- tables and the ratio -----------------------------------------------------


def grid_points(k: int) -> list[tuple[int, int]]:
    """All ``(l, s)`` with ``l + s <= k``, ``l`` outer and ``s`` inner."""
    return [(l, s) for l in range(k + 1) for s in range(k - l + 1)]


@dataclass(frozen=True)
class MomentTable:
    params: ModelParams
    entries: dict[tuple[int, int], tuple[LogValue, LogValue]]
    ratio: LogValue
    full_grid: bool = True

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "s", "log_a", "log_b"])
        for (l, s), (a, b) in self.entries.items():
            w.writerow([l, s, format_float(a.log_magnitude), format_float(b.log_magnitude)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "full_grid": self.full_grid,
            "log_ratio": format_float(self.ratio.log_magnitude),
            "ratio": format_float(float(self.ratio)),
            "entries": [
                {"l": l, "s": s, "log_a": format_float(a.log_magnitude),
                 "log_b": format_float(b.log_magnitude)}
                for (l, s), (a, b) in self.entries.items()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def build_moment_table(params: ModelParams, points: Iterable[tuple[int, int]] | None = None) -> MomentTable:
    """a and b for every grid point (or the requested sub-grid).

    Infeasible classes (fewer than ``4k - 2l - s`` vertices available) are
    empty and enter the table as zeros.
    """
    full = points is None
    pts = grid_points(params.k) if full else list(points)
    entries = {}
    for l, s in pts:
        if feasible(params.n, params.k, l, s):
            entries[(l, s)] = (a_term(params, l, s), b_term(params, l, s))
        else:
            _check_nonneg_in_grid(params.k, l, s)
            entries[(l, s)] = (LogValue.zero(), LogValue.zero())
    ratio = logsumexp(b for _, b in entries.values())
    return MomentTable(params, entries, ratio, full)


def _check_nonneg_in_grid(k: int, l: int, s: int) -> None:
    if l < 0 or s < 0 or l + s > k:
        raise DomainError(f"({l}, {s}) is not a grid point for k={k}")


def second_moment_ratio(params: ModelParams) -> LogValue:
    """``E[Y_k^2] / E[Y_k]^2`` as the sum of b over the full grid."""
    if params.k == 0:
        return LogValue.one()
    if (params.k + 1) * (params.k + 2) // 2 > 50_000:
        return _second_moment_ratio_vectorised(params)
    return logsumexp(
        b_term(params, l, s) for l, s in grid_points(params.k)
        if feasible(params.n, params.k, l, s)
    )


def _second_moment_ratio_vectorised(params: ModelParams) -> LogValue:
    k = params.k
    total = LogValue.zero()
    for l in range(k + 1):
        s = np.arange(k - l + 1)
        s = s[params.n - 4 * k + 2 * l + s >= 0]
        if s.size == 0:
            continue
        logs = log_b_terms(params, np.full(s.size, l), s)
        mx = logs.max()
        total = total + LogValue.from_log(mx + math.log(math.fsum(np.exp(logs - mx))))
    return total


def pz_lower_bound(params: ModelParams) -> LogValue:
    """Second-moment lower bound ``P(Y_k > 0) >= E[Y_k]^2 / E[Y_k^2]``."""
    return second_moment_ratio(params).reciprocal()


# -- exact rational route -----------------------------------------------------


def _exact_p(p) -> Fraction:
    p = Fraction(p)
    if not 0 < p < 1:
        raise DomainError(f"need 0 < p < 1, got {p}")
    return p


def expected_matchings_exact(n: int, p, r: int) -> Fraction:
    p = _exact_p(p)
    if r < 0 or 2 * r > n:
        raise DomainError(f"need 0 <= 2r <= n, got r={r}, n={n}")
    count = Fraction(factorial(n), factorial(n - 2 * r) * factorial(r) * 2 ** r)
    return count * p ** r * (1 - p) ** (comb(2 * r, 2) - r)


def count_compatible_exact(n: int, k: int, l: int, s: int) -> int:
    if l < 0 or s < 0:
        raise DomainError(f"l and s must be nonnegative, got ({l}, {s})")
    if l + s > k:
        return 0
    _check_grid(n, k, l, s)
    value = (
        Fraction(2) ** (l + 2 * s - k)
        * Fraction(factorial(k), factorial(l) * factorial(s) * factorial(k - l - s) ** 2)
        * Fraction(factorial(n - 2 * k), factorial(n - 4 * k + 2 * l + s))
    )
    if value.denominator != 1:
        raise AssertionError(f"count is not an integer: {value}")
    return value.numerator


def conditional_expectation_exact(n: int, p, k: int, l: int, s: int) -> Fraction:
    p = _exact_p(p)
    _check_grid(n, k, l, s)
    return p ** (k - l) * (1 - p) ** _nonedge_exponent(k, l, s)


def a_term_exact(n: int, p, k: int, l: int, s: int) -> Fraction:
    return count_compatible_exact(n, k, l, s) * conditional_expectation_exact(n, p, k, l, s)


def b_term_exact(n: int, p, k: int, l: int, s: int) -> Fraction:
    p = _exact_p(p)
    _check_grid(n, k, l, s)
    m = 2 * l + s
    return (
        Fraction(2) ** (l + 2 * s)
        * Fraction(factorial(k) ** 2, factorial(l) * factorial(s) * factorial(k - l - s) ** 2)
        * Fraction(factorial(n - 2 * k) ** 2, factorial(n) * factorial(n - 4 * k + m))
        * p ** (-l) * (1 - p) ** (l - comb(m, 2))
    )


def second_moment_ratio_exact(n: int, p, k: int) -> Fraction:
    return sum(
        (b_term_exact(n, p, k, l, s) for l, s in grid_points(k) if feasible(n, k, l, s)),
        Fraction(0),
    )


# -- enumeration oracles ------------------------------------------------------

BRUTE_MAX_N = 10
BRUTE_MAX_K = 3


@lru_cache(maxsize=None)
def _pair_table(n: int, k: int) -> tuple[Counter, Counter]:
    """Histograms over ordered pairs of size-k matchings.

    Returns ``(joint, single)``: ``joint[(a, b)]`` counts ordered pairs of
    matchings whose union requires ``a`` edges and ``b`` non-edges without
    contradiction; ``single`` is the same for one matching.
    """
    index = {}
    for u in range(n):
        for v in range(u + 1, n):
            index[(u, v)] = len(index)
    edge_masks, nonedge_masks = [], []
    for m in iter_matchings(n, k):
        e = 0
        for pair in m:
            e |= 1 << index[pair]
        verts = sorted(x for pair in m for x in pair)
        inside = 0
        for i, u in enumerate(verts):
            for v in verts[i + 1:]:
                inside |= 1 << index[(u, v)]
        edge_masks.append(e)
        nonedge_masks.append(inside & ~e)
    E = np.array(edge_masks, dtype=np.uint64)
    N = np.array(nonedge_masks, dtype=np.uint64)
    single = Counter(zip(np.bitwise_count(E).tolist(), np.bitwise_count(N).tolist()))
    joint: Counter = Counter()
    chunk = 256
    for start in range(0, E.size, chunk):
        ee = E[start:start + chunk, None] | E[None, :]
        nn = N[start:start + chunk, None] | N[None, :]
        ok = (ee & nn) == 0
        a = np.bitwise_count(ee[ok]).astype(np.int64)
        b = np.bitwise_count(nn[ok]).astype(np.int64)
        keys, counts = np.unique(a * 4096 + b, return_counts=True)
        for key, cnt in zip(keys.tolist(), counts.tolist()):
            joint[divmod(key, 4096)] += cnt
    return joint, single


def brute_force_second_moment(n: int, k: int, p, exact: bool = False):
    """``E[Y_k^2] / E[Y_k]^2`` by enumerating all ordered pairs of k-matchings.

    Each pair contributes ``p^(#required edges) (1-p)^(#required non-edges)``,
    or 0 when one matching needs an edge the other forbids.
    """
    if n > BRUTE_MAX_N or k > BRUTE_MAX_K:
        raise RefusalError(
            f"pair enumeration is capped at n <= {BRUTE_MAX_N}, k <= {BRUTE_MAX_K}"
        )
    if k < 0 or 2 * k > n:
        raise DomainError(f"need 0 <= 2k <= n, got k={k}, n={n}")
    joint, single = _pair_table(n, k)
    if exact:
        p = _exact_p(p)
        q = 1 - p
        second = sum((cnt * p ** a * q ** b for (a, b), cnt in joint.items()), Fraction(0))
        first = sum((cnt * p ** a * q ** b for (a, b), cnt in single.items()), Fraction(0))
        return second / first ** 2
    _check_probability(p)
    q = 1.0 - p
    second = math.fsum(cnt * p ** a * q ** b for (a, b), cnt in joint.items())
    first = math.fsum(cnt * p ** a * q ** b for (a, b), cnt in single.items())
    return second / first ** 2


def reference_matching(k: int) -> tuple[tuple[int, int], ...]:
    """The fixed ``M1 = {01, 23, ...}`` used by the classification oracle."""
    return tuple((2 * i, 2 * i + 1) for i in range(k))


def classify_against(m1, mi) -> tuple[int, int] | None:
    """``(l, s)`` of ``mi`` relative to ``m1``, or ``None`` if incompatible."""
    part1 = {}
    for idx, (u, v) in enumerate(m1):
        part1[u] = part1[v] = idx
    parti = {}
    for idx, (u, v) in enumerate(mi):
        parti[u] = parti[v] = idx
    for u, v in mi:
        if u in part1 and v in part1 and part1[u] != part1[v]:
            return None
    for u, v in m1:
        if u in parti and v in parti and parti[u] != parti[v]:
            return None
    shared = set(m1)
    l = sum(1 for pair in mi if pair in shared)
    s = sum(1 for u, v in mi if (u in part1) != (v in part1))
    return l, s


def classify_compatible(n: int, k: int) -> tuple[Counter, int]:
    """Exhaustive class sizes ``|I(l, s)|`` and the number of incompatible matchings."""
    if n > 12:
        raise RefusalError("classification enumeration is capped at n <= 12")
    m1 = reference_matching(k)
    counts: Counter = Counter()
    incompatible = 0
    for mi in iter_matchings(n, k):
        cls = classify_against(m1, mi)
        if cls is None:
            incompatible += 1
        else:
            counts[cls] += 1
    return counts, incompatible
