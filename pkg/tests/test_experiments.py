import csv
import io
import json
import math

import pytest

from induced_matching.errors import RefusalError
from induced_matching.experiments import (
    ExperimentConfig,
    count_induced_r_matchings_batch,
    log_q_np,
    rounded_window,
    run_certificate_property,
    run_concentration_stats,
    run_first_moment_mc,
    run_lipschitz_property,
    run_matching_distribution,
    run_upper_bound_check,
    upper_threshold,
)
from induced_matching.graph import count_induced_matchings, graph_from_pair_row, sample_gnp_batch
from induced_matching.moments import log_expected_matchings


def cfg(n, p, **kw):
    return ExperimentConfig((n,) if isinstance(n, int) else n, (p,) if isinstance(p, float) else p, **kw)


@pytest.mark.parametrize("kw", [dict(samples=0), dict(solver="bruteforce"), dict(parallelism=0),
                                dict(epsilon0=1.5), dict(time_budget=-1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        cfg(10, 0.5, **kw)
    with pytest.raises(ValueError):
        cfg(10, 1.5)


def test_scale_uses_exact_q():
    assert log_q_np(40, 0.5) == pytest.approx(math.log2(20))
    assert log_q_np(40, 0.5) != pytest.approx(math.log(20) / 0.5)
    assert log_q_np(10, 0.0) is None and log_q_np(10, 1.0) is None
    assert rounded_window(40, 0.5, 0.35) == (2, 6)


def test_distribution_example():
    report = run_matching_distribution(cfg(40, 0.5, samples=20, master_seed=1))
    cell = report.cells[0]
    assert len(cell["sizes"]) == 20
    assert 2 <= cell["median"] <= 7
    assert 0 <= cell["fraction_in_window"] <= 1
    assert min(cell["sizes"]) <= cell["median"] <= max(cell["sizes"])
    assert cell["solver_optimal_fraction"] == 1.0


def test_distribution_degenerate_p():
    report = run_matching_distribution(cfg(10, (0.0, 1.0), samples=5))
    empty, full = report.cells
    assert empty["sizes"] == [0] * 5 and full["sizes"] == [1] * 5
    assert empty["median_in_window"] is None


def test_witnesses_are_induced():
    from induced_matching.graph import GnpParams, Graph, Matching, is_induced_matching, sample_gnp

    report = run_matching_distribution(cfg((15, 25), (0.3, 0.6), samples=4, solver="greedy+local_search"))
    for cell in report.cells:
        for s in cell["samples"]:
            g = sample_gnp(GnpParams(cell["n"], cell["p"], s["seed"]))
            assert is_induced_matching(g, Matching(tuple(map(tuple, s["witness"]))))


def test_exact_cap_refuses_cell():
    report = run_matching_distribution(cfg((20, 61), 0.5, samples=2))
    assert [c["n"] for c in report.cells] == [20]
    assert report.verdicts["refused"][0]["n"] == 61
    greedy = run_matching_distribution(cfg(61, 0.5, samples=2, solver="greedy"))
    assert greedy.verdicts["refused"] == []


def test_upper_bound_example():
    report = run_upper_bound_check(cfg(40, (0.5, 1.0), epsilon0=0.5, samples=30))
    half, full = report.cells
    assert half["threshold"] == 8 and half["violations"] == 0
    assert half["expected_count_at_r"] < 1e-2
    assert half["expected_count_at_r"] == pytest.approx(float(log_expected_matchings(40, 0.5, 7)))
    assert full["sizes"] == [1] * 30 and full["violations"] == 0
    assert report.verdicts["holds"]


def test_upper_threshold_degenerate():
    assert upper_threshold(10, 0.0, 0.5) == (1, 1)
    assert upper_threshold(10, 1.0, 0.5) == (2, 2)


def test_batch_counter_matches_graph_counter():
    batch = sample_gnp_batch(9, 0.4, 50, seed=3)
    for r in range(0, 5):
        counts = count_induced_r_matchings_batch(9, r, batch)
        for row, c in zip(batch, counts):
            assert c == count_induced_matchings(graph_from_pair_row(9, row), r)


def test_first_moment_examples():
    zero = run_first_moment_mc(12, 0.3, 0, 100, seed=1).cells[0]
    assert zero["min"] == zero["max"] == 1 and zero["z"] == 0
    small = run_first_moment_mc(4, 0.5, 2, 10**5, seed=1)
    assert small.cells[0]["expected"] == pytest.approx(0.046875)
    assert small.verdicts["passes"]


def test_first_moment_refuses_large_n():
    with pytest.raises(RefusalError):
        run_first_moment_mc(17, 0.3, 2, 10, seed=0)


def test_lipschitz_examples():
    assert run_lipschitz_property(200, 12, 0.4, seed=2).verdicts["holds"]
    zero = run_lipschitz_property(20, 10, 0.0, seed=2).cells[0]
    assert all(t["difference"] == 0 for t in zero["trials_detail"])
    with pytest.raises(RefusalError):
        run_lipschitz_property(1, 15, 0.4, seed=0)


def test_certificate_examples():
    report = run_certificate_property(200, 12, 0.4, seed=2)
    assert report.verdicts["holds"]
    empty = run_certificate_property(10, 8, 0.0, seed=2).cells[0]
    assert all(t["before"] == 0 and t["after"] == 0 for t in empty["trials_detail"])
    full = run_certificate_property(10, 8, 1.0, seed=2).cells[0]
    assert all(t["before"] == t["after"] == 1 for t in full["trials_detail"])


def test_concentration_stats():
    cell = run_concentration_stats(cfg(40, 0.5, samples=60)).cells[0]
    assert cell["stddev"] >= 0 and cell["range"] <= 3
    assert 0 <= cell["tail_product"] <= 1
    single = run_concentration_stats(cfg(20, 0.5, samples=1)).cells[0]
    assert single["p_at_most_a"] in (0.0, 1.0) and single["p_at_least_b"] in (0.0, 1.0)
    assert run_concentration_stats(cfg(12, 1.0, samples=5)).cells[0]["stddev"] == 0


def test_reports_serialise():
    report = run_matching_distribution(cfg(15, 0.5, samples=3))
    data = json.loads(report.dumps())
    assert data["config"]["master_seed"] == 0 and "parallelism" not in data["config"]
    assert "execution" not in data
    rows = list(csv.DictReader(io.StringIO(report.to_csv())))
    assert len(rows) == 3 and rows[0]["millis"] == "" and rows[0]["solver"] == "exact"
    timed = run_matching_distribution(cfg(15, 0.5, samples=3, include_timing=True))
    assert "execution" in json.loads(timed.dumps())
    assert float(list(csv.DictReader(io.StringIO(timed.to_csv())))[0]["millis"]) >= 0


def test_parallel_equals_sequential():
    a = run_upper_bound_check(cfg((20, 25), (0.3, 0.5), samples=6, master_seed=9, parallelism=1))
    b = run_upper_bound_check(cfg((20, 25), (0.3, 0.5), samples=6, master_seed=9, parallelism=4))
    assert a.dumps() == b.dumps() and a.to_csv() == b.to_csv()
    c = run_certificate_property(30, 10, 0.4, seed=4, parallelism=1)
    d = run_certificate_property(30, 10, 0.4, seed=4, parallelism=3)
    assert c.dumps() == d.dumps()
