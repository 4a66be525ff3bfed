import json

import numpy as np
import pytest

from weakties import ConfigError, DataError, ModelParams
from weakties.cli import main
from weakties.diffusion import MetricSeries
from weakties.report import body_digest, read_csv
from weakties.runner import (ExperimentConfig, RunManifest, aggregate_replications, parse_config,
                             run_experiment)

GEN = "community:c=6,s=8,p_in=0.7,k_out=8"


def series(coverage, n=10):
    coverage = np.asarray(coverage, dtype=float)
    return MetricSeries(n, 0, coverage, np.zeros(len(coverage), int), np.arange(len(coverage)),
                        np.zeros(n, bool), ModelParams(0.0, 0.1))


def test_parse_flags_only():
    cfg = parse_config("diffuse", {"alpha": "0", "beta": "0.01", "runs": "20", "generator": GEN})
    assert (cfg.alpha, cfg.beta, cfg.runs) == ((0.0,), (0.01,), 20)
    assert cfg.tmax is None


def test_parse_range_errors():
    with pytest.raises(ConfigError, match="beta"):
        parse_config("diffuse", {"beta": "1.5", "generator": GEN})
    with pytest.raises(ConfigError):
        parse_config("diffuse", {"runs": "0", "generator": GEN})
    with pytest.raises(ConfigError):
        parse_config("remove-diffuse", {"fr-grid": "0,1.5", "generator": GEN})
    with pytest.raises(ConfigError, match="input"):
        parse_config("percolate", {})
    with pytest.raises(ConfigError, match="not found"):
        parse_config("percolate", {"input": "/nonexistent/file"})


def test_config_file_and_precedence(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(f"# experiment\ngenerator = {GEN}\nalpha = -1,0,1\nbeta = 0.05\nruns = 7\ntmax = auto\n")
    cfg = parse_config("diffuse", {"runs": "9"}, cfg_file)
    assert cfg.alpha == (-1.0, 0.0, 1.0) and cfg.runs == 9 and cfg.beta == (0.05,)
    cfg_file.write_text("bogus = 3\n")
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("diffuse", {"generator": GEN}, cfg_file)


def test_grids_parse():
    cfg = parse_config("remove-diffuse", {"generator": GEN, "fr-grid": "0:0.8:0.2", "order": "both"})
    assert cfg.fr_grid == (0.0, 0.2, 0.4, 0.6, 0.8)
    assert cfg.order == ("weak", "strong")


def test_aggregate_single():
    agg = aggregate_replications([series([0.1, 0.3])])
    assert agg.mean_coverage.tolist() == [0.1, 0.3]
    assert agg.stderr_coverage.tolist() == [0, 0]


def test_aggregate_constant():
    agg = aggregate_replications([series([0.2]), series([0.4])])
    assert agg.mean_coverage.tolist() == pytest.approx([0.3])


def test_aggregate_carries_terminal_value():
    agg = aggregate_replications([series([0.1, 0.2, 0.5]), series([0.3])])
    # second run stays at 0.3 after it finished
    assert agg.mean_coverage.tolist() == pytest.approx([0.2, 0.25, 0.4])
    assert agg.mean_f_pub.tolist() == pytest.approx([0.1, 0.15, 0.2])
    assert agg.stderr_coverage[2] == pytest.approx(0.1)
    with pytest.raises(ValueError):
        aggregate_replications([])


def test_diffuse_outputs(tmp_path):
    cfg = parse_config("diffuse", {"generator": GEN, "alpha": "-1,0", "beta": "0.2", "runs": "20",
                                   "out-dir": str(tmp_path), "per-run": "true"})
    manifest = run_experiment(cfg)
    meta, cols, rows = read_csv(tmp_path / "coverage_alpha0_beta0.2.csv")
    assert cols == ["T", "C", "stderr_C", "f_pub", "stderr_f_pub", "runs"]
    assert all(r[-1] == "20" for r in rows)
    assert meta["alpha"] == "0.0"
    _, cols, rows = read_csv(tmp_path / "local_alpha-1_beta0.2.csv")
    assert cols == ["hop", "ring_size", "published", "known", "f_local"]
    assert rows[0][-1] == "1.0"
    _, cols, rows = read_csv(tmp_path / "final_coverage.csv")
    assert len(rows) == 2
    assert (tmp_path / "runs" / "coverage_alpha0_beta0.2_run0019.csv").exists()
    saved = RunManifest.read(tmp_path / "manifest.json")
    assert saved.dataset == manifest.dataset and saved.dataset["nodes"] == 48
    assert saved.files["final_coverage.csv"] == body_digest(tmp_path / "final_coverage.csv")


def test_same_seed_same_checksums(tmp_path):
    digests = []
    for k in range(2):
        cfg = parse_config("remove-diffuse", {"generator": GEN, "beta": "0.3", "runs": "8",
                                              "order": "both", "out-dir": str(tmp_path / str(k))})
        digests.append(run_experiment(cfg).files)
    assert digests[0] == digests[1]


def test_resume_detects_other_dataset(tmp_path):
    run_experiment(parse_config("load-stats", {"generator": GEN, "out-dir": str(tmp_path)}))
    other = parse_config("load-stats", {"generator": GEN.replace("k_out=8", "k_out=9"),
                                        "out-dir": str(tmp_path), "resume": "true"})
    with pytest.raises(DataError, match="manifest"):
        run_experiment(other)
    same = parse_config("load-stats", {"generator": GEN, "out-dir": str(tmp_path), "resume": "true"})
    run_experiment(same)


def test_percolate_csv(tmp_path):
    run_experiment(parse_config("percolate", {"generator": GEN, "order": "both", "grid-step": "0.1",
                                              "out-dir": str(tmp_path), "seed": "4"}))
    meta, cols, rows = read_csv(tmp_path / "percolation_weak.csv")
    assert cols == ["f_r", "s_bar", "f_gcc"]
    assert len(rows) == 11 and meta["direction"] == "weak" and meta["tie-break-seed"] == "4"
    assert "f_c_sbar" in meta and "f_c_gcc" in meta


def test_strength_cdf_correlate_csv(tmp_path, two_triangles):
    from weakties import write_edge_list
    path = tmp_path / "g.txt"
    write_edge_list(two_triangles, path)
    for cmd in ("strength", "cdf", "correlate"):
        run_experiment(parse_config(cmd, {"input": str(path), "out-dir": str(tmp_path)}))
    _, cols, rows = read_csv(tmp_path / "strength.csv")
    assert cols == ["raw_u", "raw_v", "common_neighbors", "strength", "degenerate"]
    assert ["2", "3", "0", "0.0", "0"] in rows
    _, cols, rows = read_csv(tmp_path / "cdf.csv")
    assert cols == ["threshold", "cdf"] and rows[0] == ["0.0", repr(1 / 7)] and rows[-1][1] == "1.0"
    _, cols, rows = read_csv(tmp_path / "correlation.csv")
    assert rows[0][0] == "kendall_tau_b"


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["gen", "--generator", "scale-free:n=60,m=2", "--out-dir", out]) == 0
    edges = tmp_path / "o" / "graph.edgelist"
    assert main(["load-stats", "--input", str(edges), "--out-dir", out]) == 0
    assert "nodes: 60" in capsys.readouterr().out
    assert main(["diffuse", "--input", str(edges), "--beta", "1.5", "--out-dir", out]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["percolate", "--bogus"])
    assert exc.value.code == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3 x\n")
    assert main(["load-stats", "--input", str(bad), "--out-dir", out]) == 2
    assert "bad.txt:2" in capsys.readouterr().err
    assert main(["gen", "--generator", "ring:n=4", "--out-dir", out]) == 1


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"generator = {GEN}\nalpha = 0\nbeta = 0.3\nruns = 3\n")
    assert main(["diffuse", "--config", str(cfg), "--out-dir", str(tmp_path), "--runs", "4"]) == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["config"]["runs"] == 4


def test_config_dataclass_defaults():
    cfg = ExperimentConfig("percolate", generator=GEN).validate()
    assert cfg.collapse_threshold == 0.01 and cfg.order == ("weak",)
