import pytest

from tropnet import bench
from tropnet.bench import bench_sweep, counted_matmul, expected_counts
from tropnet.counters import OpCounters
from tropnet.errors import DomainError


@pytest.mark.parametrize("n", range(1, 65))
def test_closed_forms(n):
    c = counted_matmul("classical", n, seed=n)
    assert (c.mults, c.adds, c.comparisons) == (n**3, n * n * (n - 1), 0)
    t = counted_matmul("tropical", n, seed=n)
    assert (t.mults, t.adds, t.comparisons) == (0, n**3, n * n * (n - 1))
    assert c == expected_counts("classical", n) and t == expected_counts("tropical", n)


def test_small_examples():
    c2 = counted_matmul("classical", 2)
    assert (c2.mults, c2.adds) == (8, 4)
    t2 = counted_matmul("tropical", 2)
    assert (t2.mults, t2.adds, t2.comparisons) == (0, 8, 4)
    assert counted_matmul("classical", 1) == OpCounters(1, 0, 0)
    assert counted_matmul("tropical", 1) == OpCounters(0, 1, 0)
    assert t2.total_scalar_ops == 12


def test_counted_matmul_errors():
    with pytest.raises(DomainError):
        counted_matmul("classical", 0)
    with pytest.raises(DomainError):
        counted_matmul("strassen", 3)


def test_sweep_rows():
    rep = bench_sweep(["classical", "tropical"], [4], repetitions=1)
    assert [(r.algorithm, r.n, r.mults, r.adds, r.comparisons) for r in rep.rows] == [
        ("classical", 4, 64, 48, 0),
        ("tropical", 4, 0, 64, 48),
    ]
    assert rep.to_csv(include_time=False) == (
        "algorithm,n,mults,adds,comparisons\nclassical,4,64,48,0\ntropical,4,0,64,48\n"
    )
    assert rep.to_csv().splitlines()[0] == "algorithm,n,mults,adds,comparisons,wall_time_s"


def test_sweep_reports_median_time(monkeypatch):
    ticks = iter([0.0, 5.0, 10.0, 11.0, 20.0, 23.0])
    monkeypatch.setattr(bench.time, "perf_counter", lambda: next(ticks))
    rep = bench_sweep(["tropical"], [2], repetitions=3)
    assert rep.rows[0].wall_time_s == 3.0


def test_sweep_errors():
    with pytest.raises(DomainError):
        bench_sweep([], [4])
    with pytest.raises(DomainError):
        bench_sweep(["classical"], [])
    with pytest.raises(DomainError):
        bench_sweep(["classical"], [4], repetitions=0)
