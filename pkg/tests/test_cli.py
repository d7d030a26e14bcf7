"""End-to-end runs of every subcommand, in process via cli.main."""

import json

import numpy as np
import pytest

from catbida import (
    DagSample,
    Dataset,
    Pdag,
    evaluate_effect_csvs,
    exact_ipts,
    naive_estimate,
    pc_cpdag,
    read_effects_csv,
    true_effects,
)
from catbida.cli import main

from helpers import confounder_network


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A network file, a sampled dataset, and an exact posterior sample."""
    root = tmp_path_factory.mktemp("cli")
    net = root / "net.json"
    confounder_network().save(net)
    data = root / "data.csv"
    rc = main(["sample-data", "--network", str(net), "--n", "400",
               "--seed", "3", "--out", str(data)])
    assert rc == 0
    sample = root / "sample.jsonl"
    rc = main(["learn", "exact", "--data", str(data), "--out", str(sample)])
    assert rc == 0
    return {"root": root, "net": net, "data": data, "sample": sample}


def test_sample_data_random_network(tmp_path):
    out = tmp_path / "d.csv"
    saved = tmp_path / "n.json"
    rc = main(["sample-data", "--nodes", "4", "--expected-neighbors", "2.0",
               "--cards", "3", "--n", "50",
               "--save-network", str(saved), "--out", str(out)])
    assert rc == 0
    data = Dataset.from_csv(out)
    assert data.n_samples == 50 and data.n_vars == 4
    assert data.cards == (3, 3, 3, 3)
    assert saved.exists()


def test_sample_data_requires_a_source(tmp_path):
    with pytest.raises(SystemExit):
        main(["sample-data", "--n", "10", "--out", str(tmp_path / "d.csv")])


def test_sample_data_deterministic(workdir, tmp_path):
    out = tmp_path / "again.csv"
    main(["sample-data", "--network", str(workdir["net"]), "--n", "400",
          "--seed", "3", "--out", str(out)])
    assert out.read_bytes() == workdir["data"].read_bytes()


def test_true_effects(workdir, tmp_path):
    out = tmp_path / "truth.csv"
    rc = main(["true-effects", "--network", str(workdir["net"]), "--out", str(out)])
    assert rc == 0
    records = read_effects_csv(out)
    bn = confounder_network()
    tau = true_effects(bn, "jsd")
    ipts = exact_ipts(bn)
    assert set(records) == set(ipts)
    for pair, rec in records.items():
        assert rec["effect"] == pytest.approx(tau[pair], abs=1e-12)
        np.testing.assert_allclose(rec["ipt"], ipts[pair].ravel(), atol=1e-12)


def test_pc_writes_pdag_json(workdir, tmp_path):
    out = tmp_path / "pdag.json"
    rc = main(["pc", "--data", str(workdir["data"]), "--out", str(out)])
    assert rc == 0
    pdag = Pdag.from_json(out.read_text())
    assert pdag == pc_cpdag(Dataset.from_csv(workdir["data"]), 0.05)


def test_pc_prints_without_out(workdir, capsys):
    rc = main(["pc", "--data", str(workdir["data"])])
    assert rc == 0
    printed = capsys.readouterr().out
    Pdag.from_json(printed)


def test_learn_exact_sample_loads(workdir):
    sample = DagSample.load(workdir["sample"])
    assert len(sample.dags) >= 1
    assert np.isclose(sum(sample.weights), 1.0)


def test_learn_mcmc(workdir, tmp_path):
    out = tmp_path / "mcmc.jsonl"
    rc = main(["learn", "mcmc", "--data", str(workdir["data"]),
               "--iters", "2000", "--burnin", "200", "--thin", "20",
               "--max-parents", "2", "--seed", "5", "--out", str(out)])
    assert rc == 0
    sample = DagSample.load(out)
    assert len(sample.dags) == 90  # (2000 - 200) / 20


def test_learn_alpha_aliases_ess(workdir, tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    main(["learn", "exact", "--data", str(workdir["data"]),
          "--ess", "4.0", "--out", str(a)])
    main(["learn", "exact", "--data", str(workdir["data"]),
          "--alpha", "4.0", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bida_pipeline(workdir, tmp_path):
    out = tmp_path / "bida.csv"
    rc = main(["bida", "--data", str(workdir["data"]),
               "--sample", str(workdir["sample"]),
               "--adjustment", "o-min", "--draws", "200", "--seed", "9",
               "--out", str(out)])
    assert rc == 0
    records = read_effects_csv(out)
    assert len(records) == 6
    for rec in records.values():
        assert rec["mean_rank"] is not None and rec["prob_zero"] is not None
        assert 0.0 <= rec["effect"] <= np.log(2) + 1e-9


def test_ida_with_and_without_pdag(workdir, tmp_path):
    pdag_path = tmp_path / "pdag.json"
    main(["pc", "--data", str(workdir["data"]), "--out", str(pdag_path)])
    a = tmp_path / "ida_a.csv"
    b = tmp_path / "ida_b.csv"
    rc = main(["ida", "--data", str(workdir["data"]), "--pdag", str(pdag_path),
               "--out", str(a)])
    assert rc == 0
    rc = main(["ida", "--data", str(workdir["data"]), "--out", str(b)])
    assert rc == 0
    # omitting --pdag runs PC internally at the same alpha
    assert a.read_bytes() == b.read_bytes()
    assert next(iter(read_effects_csv(a).values()))["mean_rank"] is None


def test_naive_matches_library(workdir, tmp_path):
    out = tmp_path / "naive.csv"
    rc = main(["naive", "--data", str(workdir["data"]),
               "--estimator", "marginal", "--out", str(out)])
    assert rc == 0
    records = read_effects_csv(out)
    direct = naive_estimate(Dataset.from_csv(workdir["data"]), "marginal", 1.0)
    for pair, table in direct.items():
        np.testing.assert_allclose(records[pair]["ipt"], table.ravel(), atol=1e-12)
        assert records[pair]["effect"] == 0.0  # identical rows


def test_eval_command(workdir, tmp_path, capsys):
    truth = tmp_path / "truth.csv"
    est = tmp_path / "est.csv"
    main(["true-effects", "--network", str(workdir["net"]), "--out", str(truth)])
    main(["naive", "--data", str(workdir["data"]), "--estimator", "conditional",
          "--out", str(est)])
    rc = main(["eval", "--estimate", str(est), "--truth", str(truth)])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "metric,value"
    parsed = dict(line.split(",", 1) for line in lines[1:])
    direct = evaluate_effect_csvs(est, truth)
    assert set(parsed) == set(direct)
    for name, value in direct.items():
        assert float(parsed[name]) == pytest.approx(value, abs=1e-12)

    out_file = tmp_path / "metrics.csv"
    rc = main(["eval", "--estimate", str(est), "--truth", str(truth),
               "--out", str(out_file)])
    assert rc == 0
    assert out_file.read_text().startswith("metric,value\n")


def test_experiment_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "methods": ["naive-conditional", "naive-marginal"],
        "sample_sizes": [150],
        "nodes": 3,
        "expected_neighbors": 1.5,
        "structure": "exact",
        "seed": 21,
    }))
    out_dir = tmp_path / "results"
    rc = main(["experiment", "--config", str(cfg), "--out-dir", str(out_dir)])
    assert rc == 0
    report = (out_dir / "report.csv").read_text().splitlines()
    assert report[0] == "network,sample_size,replicate,method,metric,value,message"
    assert len(report) == 1 + 2 * 4  # two methods, four metrics

    # without --out-dir the report goes to stdout
    rc = main(["experiment", "--config", str(cfg)])
    assert rc == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[0] == report[0]
    assert sorted(printed[1:]) == sorted(report[1:])


def test_experiment_exit_code_on_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "methods": ["naive-conditional"],
        "sample_sizes": [100],
        "nodes": 3,
        "expected_neighbors": 0.0,
        "structure": "exact",
    }))
    rc = main(["experiment", "--config", str(cfg)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "error:" in captured.err


def test_seed_env_overrides_flags(workdir, tmp_path, monkeypatch):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    c = tmp_path / "c.csv"
    monkeypatch.setenv("CATBIDA_SEED", "777")
    main(["sample-data", "--network", str(workdir["net"]), "--n", "100",
          "--seed", "1", "--out", str(a)])
    main(["sample-data", "--network", str(workdir["net"]), "--n", "100",
          "--seed", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("CATBIDA_SEED", "778")
    main(["sample-data", "--network", str(workdir["net"]), "--n", "100",
          "--seed", "1", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()
