import numpy as np
import pytest
from pydantic import ValidationError

from gpcpd.algorithms import decompose, gevd_decompose
from gpcpd.bench import BenchConfig, GaussianStream, gen_instance, run_bench
from gpcpd.bench.runner import load_report_schema
from gpcpd.core import cp_equivalent, hs_norm


def test_gaussian_stream_is_reproducible():
    a = GaussianStream(5).normal(101)
    b = GaussianStream(5).normal(101)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, GaussianStream(6).normal(101))
    z = GaussianStream(5).complex_normal((3, 4))
    assert z.shape == (3, 4)
    assert np.iscomplexobj(z)


def test_gaussian_stream_moments():
    x = GaussianStream(0).normal(20000)
    assert abs(np.mean(x)) < 0.05
    assert np.std(x) == pytest.approx(1.0, abs=0.05)


def test_instance_noise_has_requested_norm():
    inst = gen_instance((5, 4, 3), 2, 1e-2, 3)
    assert hs_norm(inst.E) == pytest.approx(1e-2)
    np.testing.assert_allclose(inst.F.array, inst.R.array + inst.E.array)
    np.testing.assert_allclose(inst.factors.expand().array, inst.R.array)
    assert inst.r_true == 2


def test_exact_instance_has_zero_noise():
    inst = gen_instance((5, 4, 3), 2, 0.0, 3)
    assert hs_norm(inst.E) == 0
    again = gen_instance((5, 4, 3), 2, 0.0, 3)
    np.testing.assert_array_equal(inst.F.data, again.F.data)


def test_instance_rejects_negative_noise():
    with pytest.raises(ValueError):
        gen_instance((5, 4, 3), 2, -1.0, 0)


def test_run_bench_records_and_aggregates():
    report = run_bench(BenchConfig(dims=[5, 4, 3], rank=2, eps=[0.0, 1e-3], trials=2, seed=3))
    assert report.failures == []
    assert [(rec.epsilon, rec.trial, rec.seed) for rec in report.records] == [
        (0.0, 0, 3), (0.0, 1, 4), (1e-3, 0, 3), (1e-3, 1, 4)]
    for rec in report.records[:2]:
        assert rec.rho_gp is None
        assert rec.rho_opt is None
        assert rec.rel_resid_gp < 1e-8
    for rec in report.records[2:]:
        assert rec.rho_opt <= rec.rho_gp + 1e-9
        assert rec.rho_opt < 1.5
    assert len(report.aggregates) == 2
    exact_cell = report.aggregates[0]
    assert exact_cell["trials"] == 2
    assert exact_cell["median_rho_gp"] is None
    assert report.aggregates[1]["median_rho_opt"] is not None


def test_run_bench_with_workers_matches_serial_run():
    config = BenchConfig(dims=[5, 4, 3], rank=2, eps=[1e-4], trials=3, seed=1)
    serial = run_bench(config)
    threaded = run_bench(config.model_copy(update={"workers": 3}))
    assert [rec.trial for rec in threaded.records] == [0, 1, 2]
    for a, b in zip(serial.records, threaded.records):
        assert a.resid_gp == pytest.approx(b.resid_gp, rel=1e-6)


def test_both_methods_run_on_each_instance():
    report = run_bench(BenchConfig(dims=[5, 4, 3], rank=2, eps=[0.0], trials=1, method="both"))
    assert [rec.method for rec in report.records] == ["gp", "gevd"]
    assert all(rec.rel_resid_gp < 1e-8 for rec in report.records)
    assert report.records[1].t_opt_ms is None


def test_failures_are_recorded():
    report = run_bench(BenchConfig(dims=[4, 3, 3], rank=4, trials=2, method="gevd"))
    assert report.records == []
    assert report.aggregates == []
    assert [f.error for f in report.failures] == ["RankBoundError", "RankBoundError"]
    assert report.failures[0].details["bound"] == "n_2"


def test_report_matches_schema_required_fields():
    schema = load_report_schema()
    report = run_bench(BenchConfig(dims=[5, 4, 3], rank=2, eps=[1e-3], trials=1)).to_dict()
    assert set(schema["required"]) <= set(report)
    assert report["format"] == "benchreport-v1"
    record_fields = schema["properties"]["records"]["items"]["required"]
    assert set(record_fields) <= set(report["records"][0])
    assert set(schema["properties"]["config"]["required"]) <= set(report["config"])


@pytest.mark.parametrize("fields", [
    {"dims": [3, 3], "rank": 1},
    {"dims": [3, 0, 3], "rank": 1},
    {"dims": [3, 3, 3], "rank": 0},
    {"dims": [3, 3, 3], "rank": 1, "eps": [-1e-3]},
    {"dims": [3, 3, 3], "rank": 1, "method": "als"},
])
def test_bench_config_validation(fields):
    with pytest.raises(ValidationError):
        BenchConfig(**fields)


@pytest.mark.parametrize("seed", range(20))
def test_gp_and_gevd_agree_on_exact_instances(seed):
    inst = gen_instance((7, 6, 5), 4, 0.0, seed)
    gp = decompose(inst.F, 4, seed=seed)
    gevd = gevd_decompose(inst.F, 4, seed=seed)
    for cp in (gp, gevd):
        assert hs_norm(inst.F - cp.expand()) <= 1e-8 * hs_norm(inst.F)
    assert cp_equivalent(gp, gevd, 1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("rank", [5, 10])
def test_refined_error_matches_noise_level(rank):
    report = run_bench(BenchConfig(dims=[20, 20, 20], rank=rank, eps=[1e-2, 1e-4, 1e-6], trials=10))
    assert report.failures == []
    assert len(report.aggregates) == 3
    for cell in report.aggregates:
        assert 0.9 <= cell["median_rho_opt"] <= 1.1
        assert cell["median_rho_opt"] <= cell["median_rho_gp"]
