import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from induced_matching.errors import DomainError, RefusalError
from induced_matching.logspace import LogValue
from induced_matching.moments import (
    ModelParams,
    a_term,
    a_term_exact,
    b_term,
    b_term_exact,
    brute_force_second_moment,
    build_moment_table,
    classify_compatible,
    conditional_expectation,
    conditional_expectation_exact,
    count_compatible,
    count_compatible_exact,
    expected_matchings_exact,
    grid_points,
    log_b_terms,
    log_expected_matchings,
    pz_lower_bound,
    second_moment_ratio,
    second_moment_ratio_exact,
    target_size,
)


def close(x, y, rel=1e-9):
    return math.isclose(float(x), float(y), rel_tol=rel)


# -- parameters ----------------------------------------------------------------


def test_target_size_examples():
    assert target_size(1000, 0.1, 0.1) == 41
    assert target_size(100, math.e / 100, 0.0) == 36
    assert target_size(500, 0.3, 1.0) == 0
    with pytest.raises(DomainError):
        target_size(10, 0.1, 0.1)


def test_model_params_derived_fields():
    m = ModelParams(1000, 0.1, 0.1)
    assert m.c == 0.1 * 1000 and m.q == 1 / 0.9 and m.k == 41 and m.k_is_default
    assert ModelParams.from_epsilon0(1000, 0.1, 0.3).epsilon == pytest.approx(0.1)
    assert ModelParams(10, 0.5, k=3).k == 3
    for bad in (dict(n=10, p=0.0), dict(n=10, p=1.0), dict(n=10, p=0.5, k=6)):
        with pytest.raises(DomainError):
            ModelParams(**bad)


# -- first moment ----------------------------------------------------------------


def test_expected_matchings_examples():
    assert close(log_expected_matchings(4, 0.5, 1), 3.0)
    assert close(log_expected_matchings(4, 0.5, 2), 0.046875)
    assert close(log_expected_matchings(9, 0.3, 0), 1.0)
    with pytest.raises(DomainError):
        log_expected_matchings(4, 0.5, 3)


@pytest.mark.parametrize("n", [4, 9, 20, 64])
def test_expected_matchings_log_vs_exact(n):
    for r in range(n // 2 + 1):
        exact = expected_matchings_exact(n, Fraction(3, 10), r)
        assert close(log_expected_matchings(n, 0.3, r), exact)


# -- counting --------------------------------------------------------------------


def test_count_compatible_examples():
    assert close(count_compatible(8, 2, 2, 0), 1)
    assert close(count_compatible(8, 2, 0, 0), 3)
    assert close(count_compatible(8, 2, 0, 1), 48)
    assert count_compatible(8, 2, 2, 1).is_zero
    with pytest.raises(DomainError):
        count_compatible(8, 2, -1, 0)


@pytest.mark.parametrize("n,k", [(4, 1), (6, 1), (6, 2), (8, 1), (8, 2), (9, 2), (10, 1), (10, 2)])
def test_count_compatible_vs_enumeration(n, k):
    counts, incompatible = classify_compatible(n, k)
    total = sum(1 for _ in _all_k_matchings(n, k))
    assert sum(counts.values()) + incompatible == total
    for l, s in grid_points(k):
        if n - 4 * k + 2 * l + s < 0:
            # too few vertices outside V(M1): the class is empty
            assert counts.get((l, s), 0) == 0
            with pytest.raises(DomainError):
                count_compatible(n, k, l, s)
            continue
        assert count_compatible_exact(n, k, l, s) == counts.get((l, s), 0)
        if count_compatible_exact(n, k, l, s):
            assert close(count_compatible(n, k, l, s), count_compatible_exact(n, k, l, s))


def _all_k_matchings(n, k):
    from induced_matching.graph import iter_matchings

    return iter_matchings(n, k)


def test_incompatible_pairs_have_zero_joint_probability():
    # any two distinct perfect matchings of K_4 share no compatible structure
    counts, incompatible = classify_compatible(4, 2)
    assert counts == {(2, 0): 1} and incompatible == 2


# -- conditional expectation, a and b ---------------------------------------------


def test_conditional_expectation_examples():
    p = ModelParams(8, 0.3, k=2)
    assert close(conditional_expectation(p, 2, 0), 1.0)
    assert close(conditional_expectation(p, 0, 0), 0.09 * 0.7 ** 4)
    with pytest.raises(DomainError):
        conditional_expectation(p, 2, 1)


@pytest.mark.parametrize("n,k,p", [(8, 2, 0.3), (12, 3, 0.5), (30, 5, 0.1)])
def test_conditional_expectation_is_probability(n, k, p):
    params = ModelParams(n, p, k=k)
    for l, s in grid_points(k):
        assert float(conditional_expectation(params, l, s)) <= 1.0


def test_a_term_examples():
    p = ModelParams(8, 0.3, k=2)
    assert close(a_term(p, 2, 0), 1.0)
    assert close(a_term(p, 0, 0), 3 * 0.09 * 0.2401)


def test_sum_of_a_equals_pair_enumeration():
    # sum_i E[X_i | X_1 = 1] = E[Y^2] / E[Y]; for k = 1 this is 1 + 14p = 8
    params = ModelParams(6, 0.5, k=1)
    total = sum(float(a_term(params, l, s)) for l, s in grid_points(1))
    oracle = brute_force_second_moment(6, 1, 0.5) * float(log_expected_matchings(6, 0.5, 1))
    assert close(total, oracle)
    assert close(total, 8.0)


def test_b_term_examples():
    for p in (0.1, 0.3, 0.9):
        assert close(b_term(ModelParams(8, p, k=2), 0, 0), 1 / 70)
    params = ModelParams(6, 0.5, k=1)
    assert close(b_term(params, 0, 0), 0.4)
    assert close(b_term(params, 0, 1), 8 / 15)
    assert close(b_term(params, 1, 0), 2 / 15)


def test_b_equals_a_over_first_moment():
    params = ModelParams(10, 0.3, k=2)
    e = log_expected_matchings(10, 0.3, 2)
    for l, s in grid_points(2):
        assert close(b_term(params, l, s), a_term(params, l, s) / e)


@pytest.mark.parametrize("n,k,p", [(12, 3, Fraction(1, 5)), (20, 4, Fraction(1, 2)), (64, 6, Fraction(3, 10))])
def test_log_vs_exact_route(n, k, p):
    params = ModelParams(n, float(p), k=k)
    for l, s in grid_points(k):
        if n - 4 * k + 2 * l + s < 0:
            continue
        assert close(conditional_expectation(params, l, s), conditional_expectation_exact(n, p, k, l, s))
        assert close(a_term(params, l, s), a_term_exact(n, p, k, l, s))
        assert close(b_term(params, l, s), b_term_exact(n, p, k, l, s))
    assert close(second_moment_ratio(params), second_moment_ratio_exact(n, p, k))


def test_vectorised_b_matches_scalar():
    params = ModelParams.from_c(10**8, 1e4, 0.3)
    rng = np.random.default_rng(0)
    l = rng.integers(0, params.k // 2, 50)
    s = rng.integers(0, params.k // 2, 50)
    fast = log_b_terms(params, l, s)
    for i in range(50):
        slow = b_term(params, int(l[i]), int(s[i])).log_magnitude
        assert abs(fast[i] - slow) <= 1e-6 * max(1.0, abs(slow))


# -- ratio and Paley-Zygmund ---------------------------------------------------------


def test_ratio_examples():
    assert close(second_moment_ratio(ModelParams(6, 0.5, k=1)), 16 / 15)
    assert close(second_moment_ratio(ModelParams(6, 0.25, k=1)), 1.2)
    assert second_moment_ratio_exact(6, Fraction(1, 2), 1) == Fraction(16, 15)
    assert close(second_moment_ratio(ModelParams(8, 0.3, k=2)), brute_force_second_moment(8, 2, 0.3))


def test_ratio_k2_on_four_vertices():
    p = 0.5
    assert close(brute_force_second_moment(4, 2, p), 1 / (3 * p ** 2 * (1 - p) ** 4))
    assert close(second_moment_ratio(ModelParams(4, p, k=2)), brute_force_second_moment(4, 2, p))


def test_brute_force_exact_mode_and_refusal():
    assert brute_force_second_moment(6, 1, Fraction(1, 2), exact=True) == Fraction(16, 15)
    with pytest.raises(RefusalError):
        brute_force_second_moment(12, 2, 0.5)
    with pytest.raises(RefusalError):
        brute_force_second_moment(10, 4, 0.5)


def test_pz_lower_bound():
    bound = float(pz_lower_bound(ModelParams(6, 0.5, k=1)))
    assert close(bound, 15 / 16)
    assert bound <= 1 - 2 ** -15
    assert float(pz_lower_bound(ModelParams(6, 0.5, k=0))) == 1.0
    for n, k, p in ((10, 2, 0.2), (30, 4, 0.4), (200, 10, 0.05)):
        assert 0 <= float(pz_lower_bound(ModelParams(n, p, k=k))) <= 1


# -- table -------------------------------------------------------------------------


def test_moment_table_full_grid():
    params = ModelParams(8, 0.3, k=2)
    table = build_moment_table(params)
    assert set(table.entries) == set(grid_points(2))
    assert close(table.ratio, second_moment_ratio(params))
    rows = table.to_csv().splitlines()
    assert rows[0] == "l,s,log_a,log_b" and len(rows) == 1 + len(grid_points(2))
    assert table.to_json()["entries"][0] == {"l": 0, "s": 0, "log_a": rows[1].split(",")[2],
                                            "log_b": rows[1].split(",")[3]}


def test_moment_table_infeasible_points_are_zero():
    table = build_moment_table(ModelParams(6, 0.5, k=3))
    assert table.entries[(0, 0)][1] == LogValue.zero()
    assert close(table.ratio, second_moment_ratio_exact(6, Fraction(1, 2), 3))


def test_grid_points_order():
    assert grid_points(2) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]
    assert len(grid_points(10)) == comb(12, 2)
