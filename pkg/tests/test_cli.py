import filecmp
import os

import pytest

from kickcool.cli import RunConfig, main, parse_config, run


def test_minimal_config_gets_defaults():
    config, errors = parse_config("", kind="kick")
    assert errors == []
    assert config.params["n_atoms"] == 100_000
    assert config.seed == 0
    assert config.params["t_f_ms"] == 11.0


def test_negative_quantity_rejected_with_field_name():
    config, errors = parse_config("t_f_ms = -1\n", kind="kick")
    assert config is None
    assert any(e.key == "t_f_ms" and "positive" in e.message
               for e in errors)


def test_all_errors_reported():
    text = "t_f_ms = -1\nbogus_key = 3\nn_atoms = zebra\n"
    config, errors = parse_config(text, kind="kick")
    assert config is None
    assert len(errors) == 3
    assert {e.key for e in errors} == {"t_f_ms", "bogus_key", "n_atoms"}


def test_unit_mismatch_suggestion():
    config, errors = parse_config("t_f_s = 0.011\n", kind="kick")
    assert config is None
    assert "did you mean t_f_ms" in errors[0].message


def test_experiment_kind_mismatch():
    config, errors = parse_config("experiment = kick\n", kind="multispin")
    assert config is None
    assert any(e.key == "experiment" for e in errors)


def test_duplicate_key_rejected():
    config, errors = parse_config("t_f_ms = 1\nt_f_ms = 2\n", kind="kick")
    assert config is None
    assert any("duplicate" in e.message for e in errors)


def test_comments_and_seed():
    text = "# a comment\nseed = 7\nt_f_ms = 9  # trailing comment\n"
    config, errors = parse_config(text, kind="kick")
    assert errors == []
    assert config.seed == 7
    assert config.params["t_f_ms"] == 9.0


def test_round_trip():
    text = "seed = 3\nt_f_ms = 12.5\nkick_dv_cm_per_s = 2.4\ngravity = off\n"
    config, errors = parse_config(text, kind="kick")
    assert errors == []
    again, errors2 = parse_config(config.serialize())
    assert errors2 == []
    assert again.kind == config.kind
    assert again.params == config.params
    assert again.seed == config.seed


def test_si_conversion():
    config, _ = parse_config("t_f_ms = 11\n", kind="kick")
    si = config.params_si()
    assert si["t_f_ms"] == pytest.approx(0.011, rel=1e-15)
    assert si["post_delays_ms"][0] == pytest.approx(1e-3, rel=1e-15)


def _run_kick(tmp_path, sub, n=3000, seed=5, threads=None):
    out = tmp_path / sub
    config, errors = parse_config(f"n_atoms = {n}\nseed = {seed}\n",
                                  kind="kick")
    assert errors == []
    config = RunConfig(kind="kick", params=config.params, seed=seed,
                       out_dir=str(out))
    assert run(config, threads=threads) == 0
    return out


def test_kick_outputs(tmp_path):
    out = _run_kick(tmp_path, "a")
    assert (out / "result.csv").exists()
    assert (out / "expansion.csv").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "config_sha256" in manifest
    assert "seed = 5" in manifest
    header = (out / "result.csv").read_text().splitlines()[0]
    assert header.startswith("axis,T_before,T_after,ratio")


def test_byte_identical_reruns(tmp_path):
    a = _run_kick(tmp_path, "a", threads=1)
    b = _run_kick(tmp_path, "b", threads=4)
    for name in ("result.csv", "expansion.csv", "manifest.txt"):
        assert filecmp.cmp(a / name, b / name, shallow=False), name


def test_coil_field_run(tmp_path):
    config, errors = parse_config("z_points = 11\n", kind="coil-field")
    assert errors == []
    config = RunConfig(kind="coil-field", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    lines = (tmp_path / "field.csv").read_text().splitlines()
    assert lines[0] == "z,B,gradient,curvature"
    assert len(lines) == 12


def test_runtime_error_writes_record(tmp_path):
    # decay with a barrier far below the pocket threshold -> runtime error
    config, errors = parse_config("barrier_nK = 10\nhorizon_ms = 5\n",
                                  kind="qm-decay")
    assert errors == []
    config = RunConfig(kind="qm-decay", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 3
    record = (tmp_path / "error.txt").read_text()
    assert "error_type" in record


def test_scan_expansion_smoke(tmp_path):
    text = "n_atoms = 3000\nt_f_list_ms = 5,10\n"
    config, errors = parse_config(text, kind="scan-expansion")
    assert errors == []
    config = RunConfig(kind="scan-expansion", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0].startswith("param,")
    assert len(lines) == 3


def test_scan_strength_smoke(tmp_path):
    text = "n_atoms = 3000\ndv_points = 3\n"
    config, errors = parse_config(text, kind="scan-strength")
    assert errors == []
    config = RunConfig(kind="scan-strength", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    assert len((tmp_path / "scan.csv").read_text().splitlines()) == 4


def test_multispin_smoke(tmp_path):
    config, errors = parse_config("n_atoms = 6000\n", kind="multispin")
    assert errors == []
    config = RunConfig(kind="multispin", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    for name in ("per_spin.csv", "profile.csv", "bimodal.csv"):
        assert (tmp_path / name).exists()
    per_spin = (tmp_path / "per_spin.csv").read_text().splitlines()
    assert per_spin[0] == "mF,T_before,T_after,ratio"
    assert len(per_spin) == 8
    float(per_spin[1].split(",")[1])  # parses cleanly


def test_qm_sweep_smoke(tmp_path):
    text = ("temperature_uK = 0.3\nbarrier_nK = 400\nwaist_um = 8\n"
            "sweep_start_um = -50\nsweep_stop_um = 70\nspeed_mm_per_s = 1\n"
            "grid_halfwidth_um = 120\ngrid_points = 2048\ndt_us = 3\n"
            "basis_cutoff_kT = 0.3\n")
    config, errors = parse_config(text, kind="qm-sweep")
    assert errors == []
    config = RunConfig(kind="qm-sweep", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    transfer = (tmp_path / "transfer.csv").read_text().splitlines()
    assert transfer[0].startswith("transfer,classical_estimate")
    series = (tmp_path / "series.csv").read_text().splitlines()
    assert series[0] == "t,transfer,absorbed"


def test_qm_depth_scan_smoke(tmp_path):
    text = ("temperature_uK = 0.3\ndepths_nK = 0,400\nwaist_um = 8\n"
            "sweep_start_um = -50\nsweep_stop_um = 70\nspeed_mm_per_s = 1\n"
            "grid_halfwidth_um = 120\ngrid_points = 2048\ndt_us = 3\n"
            "basis_cutoff_kT = 0.3\n")
    config, errors = parse_config(text, kind="qm-depth-scan")
    assert errors == []
    config = RunConfig(kind="qm-depth-scan", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    lines = (tmp_path / "transfer_vs_depth.csv").read_text().splitlines()
    assert lines[0] == "depth_nK,transfer,bound_states"
    assert len(lines) == 3


def test_qm_decay_smoke(tmp_path):
    config, errors = parse_config("horizon_ms = 20\n", kind="qm-decay")
    assert errors == []
    config = RunConfig(kind="qm-decay", params=config.params,
                       out_dir=str(tmp_path))
    assert run(config) == 0
    assert (tmp_path / "decay.csv").exists()
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == "rate,per_period_loss,tau_sec,one_over_e,qb_energy_nK"


def test_main_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("t_f_ms = -2\n")
    assert main(["kick", "--config", str(bad), "--out",
                 str(tmp_path)]) == 2


def test_main_runs_coil_field(tmp_path):
    cfg = tmp_path / "coil.cfg"
    cfg.write_text("z_points = 5\n")
    assert main(["coil-field", "--config", str(cfg), "--out",
                 str(tmp_path), "--seed", "1"]) == 0
    assert (tmp_path / "field.csv").exists()
