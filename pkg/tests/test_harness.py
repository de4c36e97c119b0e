import json
import math

import numpy as np
import pytest

from dicomo.errors import DomainError
from dicomo.harness import (
    ExperimentConfig,
    ResultRecord,
    derive_seed,
    generate,
    model_constants,
    omega_default,
    records_csv,
    run,
    run_diameter_convergence,
    run_gw_suite,
    run_typical_distance,
    write_report,
)

POINT22 = {"model": "dcm", "dist": {"family": "point", "d_in": 2, "d_out": 2}}


def test_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig(kind="nope", model={})
    with pytest.raises(DomainError):
        ExperimentConfig(kind="gw_suite", model={}, sizes=(100, 100))
    with pytest.raises(DomainError):
        ExperimentConfig(kind="gw_suite", model={}, replicates=0)


def test_config_from_json():
    cfg = ExperimentConfig.from_json(
        json.dumps(
            {
                "kind": "diameter_convergence",
                "model": POINT22,
                "sizes": [100, 200],
                "replicates": 2,
                "master_seed": 9,
            }
        )
    )
    assert cfg.sizes == (100, 200)
    assert cfg.master_seed == 9


def test_derive_seed_stable_and_distinct():
    a = derive_seed(1, "diameter_convergence", 100, 0)
    assert a == derive_seed(1, "diameter_convergence", 100, 0)
    assert a != derive_seed(1, "diameter_convergence", 100, 1)
    assert a != derive_seed(2, "diameter_convergence", 100, 0)
    assert 0 <= a < 2**64


def test_omega_default():
    assert omega_default(10**5) == min(math.ceil(math.log(10**5) ** 6), 10**4)
    assert omega_default(20) == 2


def test_model_constants_dcm():
    mt = model_constants(POINT22)
    assert mt.nu == pytest.approx(2.0)
    assert mt.diameter_coeff == pytest.approx(1 / math.log(2))


def test_model_constants_dout():
    mt = model_constants({"model": "dout", "d": 2})
    lam = mt.provenance["lambda_d"]
    assert abs(lam * math.exp(-lam) - 2 * math.exp(-2)) < 1e-10
    assert mt.diameter_coeff == pytest.approx(
        1 / math.log(1 / lam) + 1 / math.log(2)
    )


def test_model_constants_binom():
    mt = model_constants({"model": "binom", "c": 2.0})
    nu_hat = mt.provenance["nu_hat"]
    assert mt.diameter_coeff == pytest.approx(
        2 / math.log(1 / nu_hat) + 1 / math.log(2)
    )


def test_generate_models():
    rng = np.random.default_rng(0)
    g = generate(POINT22, 50, rng)
    assert g.n == 50 and g.m == 100
    g = generate({"model": "dout", "d": 3}, 40, rng)
    assert g.m == 120
    g = generate({"model": "binom", "c": 2.0}, 100, rng)
    assert g.n == 100
    g = generate({"model": "dcm-simple", "dist": POINT22["dist"]}, 30, rng)
    assert g.simple_flag


def test_diameter_convergence_report():
    cfg = ExperimentConfig(
        kind="diameter_convergence",
        model=POINT22,
        sizes=(64, 256),
        replicates=3,
        master_seed=13,
    )
    rep = run_diameter_convergence(cfg)
    assert len(rep["records"]) == 6
    assert all(not r.error for r in rep["records"])
    assert rep["aggregate_increment"] is not None
    assert len(rep["increments"]) == 1


def test_diameter_convergence_flags_n1():
    cfg = ExperimentConfig(
        kind="diameter_convergence", model=POINT22, sizes=(1,), master_seed=1
    )
    rep = run_diameter_convergence(cfg)
    rec = rep["records"][0]
    assert rec.error != ""
    assert rec.ratio is None


def test_diameter_convergence_records_failures():
    # simple sampling at n=1 forces self-loops and fails per record
    bad = {"model": "dcm-simple", "dist": {"family": "point", "d_in": 2, "d_out": 2}, "max_attempts": 3}
    cfg = ExperimentConfig(
        kind="diameter_convergence", model=bad, sizes=(1,), master_seed=2
    )
    rep = run_diameter_convergence(cfg)
    assert "AttemptsExhausted" in rep["records"][0].error


def test_typical_distance_report():
    cfg = ExperimentConfig(
        kind="typical_distance",
        model=POINT22,
        sizes=(512,),
        replicates=2,
        master_seed=3,
        params={"pairs": 500},
    )
    rep = run_typical_distance(cfg)
    ratios = rep["mean_ratio_by_n"]
    assert 0.3 < ratios[512] < 2.5


def test_gw_suite_small_budget():
    cfg = ExperimentConfig(
        kind="gw_suite",
        model={},
        master_seed=4,
        params={
            "duality_runs": 50_000,
            "duality_tol": 0.03,
            "thin_runs": 50_000,
            "thin_ts": [5, 7, 9],
            "thin_tol": 0.2,
            "sub_runs": 100_000,
        },
    )
    rep = run_gw_suite(cfg)
    names = {e["name"] for e in rep["entries"]}
    assert names == {"duality_tv", "thin_slope", "subcritical_rate", "point2_survival"}
    assert rep["passed"]


def test_run_dispatcher():
    cfg = ExperimentConfig(
        kind="thin_depth",
        model=POINT22,
        sizes=(200,),
        master_seed=5,
        omega_rule=20,
        params={"budget": 2000},
    )
    rep = run(cfg)
    assert rep["omega_by_n"][200] == 20


def test_records_csv_stable():
    rec = ResultRecord("x", 10, 0, 5, 1.5, 3.0, 0.5, 0.123, "")
    text = records_csv([rec])
    lines = text.splitlines()
    assert lines[0] == "experiment,n,replicate,seed,measured,prediction,ratio,error"
    assert lines[1] == "x,10,0,5,1.5,3.0,0.5,"
    timed = records_csv([rec], include_timing=True)
    assert "wall_time_s" in timed.splitlines()[0]


def test_csv_identical_across_threads():
    def go(threads):
        cfg = ExperimentConfig(
            kind="diameter_convergence",
            model=POINT22,
            sizes=(64, 128),
            replicates=2,
            master_seed=6,
            threads=threads,
        )
        return records_csv(run_diameter_convergence(cfg)["records"])

    assert go(1) == go(2)


def test_write_report(tmp_path):
    cfg = ExperimentConfig(
        kind="diameter_convergence", model=POINT22, sizes=(64,), master_seed=7
    )
    rep = run_diameter_convergence(cfg)
    csv_path = tmp_path / "out.csv"
    json_path = tmp_path / "out.json"
    write_report(rep, csv_path=csv_path, json_path=json_path, cfg=cfg)
    assert csv_path.read_text().startswith("experiment,")
    summary = json.loads(json_path.read_text())
    assert summary["record_count"] == 1
    assert summary["config"]["master_seed"] == 7
    assert "theory" in summary
