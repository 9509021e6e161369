import math

import pytest

from arboreal.exact import count_spanning_trees, exact_log
from arboreal.generators import torus
from arboreal.harness import (CSV_HEADER, reference_value, run_convergence, run_stability,
                              run_unbounded_degree, seed_quantiles)

H_Z2 = 4 * 0.915965594177219 / math.pi


def test_csv_header_frozen():
    report = run_convergence("torus:2", [3], 0.0, mode="exact")
    assert report.to_csv().splitlines()[0] == CSV_HEADER
    assert CSV_HEADER == ("family,params,n_vertices,n_edges,log_tau,normalized,reference,gap,"
                          "certified_lo,certified_hi,seed")


def test_torus_gaps_shrink():
    report = run_convergence("torus:2", [16, 4, 8], "hypercubic:2", mode="exact")
    assert [r.n_vertices for r in report.rows] == [16, 64, 256]
    gaps = [abs(r.gap) for r in report.rows]
    assert gaps[0] > gaps[1] > gaps[2]
    assert report.rows[0].reference == pytest.approx(H_Z2, abs=1e-9)


def test_exact_rows_are_exact():
    report = run_convergence("torus:2", [3, 5], 0.0, mode="exact")
    for r in report.rows:
        n = int(r.params)
        expected = exact_log(count_spanning_trees(torus(2, n)))
        assert r.log_tau == expected
        assert r.normalized == expected / r.n_vertices
        assert r.certified_lo == r.certified_hi == r.log_tau


def test_series_rows_certified():
    report = run_convergence("torus:2", [6], "hypercubic:2", mode="series", tol=1e-5)
    (row,) = report.rows
    truth = exact_log(count_spanning_trees(torus(2, 6)))
    assert row.method == "series" and not row.flagged
    assert row.certified_lo <= truth <= row.certified_hi


def test_auto_mode_cutover():
    report = run_convergence("torus:2", [4, 8], 0.0, mode="auto", cutover=20)
    assert [r.method for r in report.rows] == ["exact", "series"]


def test_zero_law_for_tree_balls():
    report = run_convergence("tree-ball", [1, 3, 5], 0.0, mode="exact")
    assert all(r.log_tau == 0.0 and r.normalized == 0.0 and r.gap == 0.0 for r in report.rows)


def test_reports_deterministic_and_thread_independent():
    a = run_convergence("random-regular:3", [40, 60], "regular-tree:3", seeds=3, seed=5)
    b = run_convergence("random-regular:3", [40, 60], "regular-tree:3", seeds=3, seed=5, threads=4)
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()
    assert [r.seed for r in a.rows] == [5, 6, 7, 5, 6, 7]


def test_seed_quantiles():
    report = run_convergence("random-regular:3", [50], 0.0, seeds=5)
    q = seed_quantiles(report)["50"]
    values = sorted(r.normalized for r in report.rows)
    assert q["0.5"] == values[2]
    assert values[0] <= q["0.1"] <= q["0.9"] <= values[-1]


def test_disconnected_draw_moves_to_next_seed():
    from arboreal.graph import build_graph
    from arboreal.harness import _generate_connected

    def build(size, seed):
        edges = [(0, 1)] if seed < 3 else [(0, 1), (1, 2)]
        return build_graph(edges, vertex_count=3)

    g, used = _generate_connected(build, 3, 0, True)
    assert used == 3 and g.is_connected
    with pytest.raises(ValueError):
        _generate_connected(build, 3, 0, False)


def test_stability_thin_and_hybrid():
    thin = run_stability("torus:2", "thin", [8], "hypercubic:2", fraction=0.05)
    assert len(thin.rows) == 2
    assert all(r.reference == pytest.approx(H_Z2) for r in thin.rows)
    hybrid = run_stability("torus:2", "hybrid", [8], "hypercubic:2", other="random-regular:3",
                           other_reference="regular-tree:3")
    base, joined = sorted(hybrid.rows, key=lambda r: r.n_vertices)
    share = base.n_vertices / joined.n_vertices
    assert share == 0.5
    expected = 0.5 * H_Z2 + 0.5 * math.log(4 / math.sqrt(3))
    assert joined.reference == pytest.approx(expected, abs=1e-9)


def test_stability_argument_checks():
    with pytest.raises(ValueError):
        run_stability("torus:2", "hybrid", [4], 0.0)
    with pytest.raises(ValueError):
        run_stability("torus:2", "shuffle", [4], 0.0)


def test_unbounded_degree_complete():
    report = run_unbounded_degree([4, 10, 100])
    gaps = [r.gap for r in report.rows]
    assert gaps[0] == pytest.approx(math.log(16) / 4 - math.log(3), abs=1e-14)
    assert gaps[2] == pytest.approx(98 * math.log(100) / 100 - math.log(99), abs=1e-12)
    assert abs(gaps[0]) > abs(gaps[1]) > abs(gaps[2])
    assert abs(gaps[2]) < 0.1


def test_unbounded_degree_er_shrinks():
    report = run_unbounded_degree([100, 1000], family="er", seed=1)
    assert abs(report.rows[1].gap) < abs(report.rows[0].gap)


def test_gnuplot_script_and_json_timing():
    report = run_convergence("torus:2", [3], 1.0)
    script = report.gnuplot_script("out.csv")
    assert "plot 'out.csv' using 3:6" in script
    assert "wall_time" not in report.to_json()
    assert "wall_time" in report.to_json(include_timing=True)


@pytest.mark.parametrize("ref, value", [(1.5, 1.5), ("0.25", 0.25), ("zero", 0.0),
                                        ("regular-tree:4", 3 * math.log(1.5))])
def test_reference_value(ref, value):
    assert reference_value(ref) == pytest.approx(value, abs=1e-12)
