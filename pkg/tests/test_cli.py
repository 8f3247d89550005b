import json

import pytest

from xphase.cli import default_config, main


def _run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_simulate_writes_expected_files(tmp_path, capsys):
    out = tmp_path / "run"
    rc, stdout, stderr = _run(capsys, "simulate", "--out", str(out),
                              "--set", "simulate.t1=5")
    assert rc == 0
    assert stderr == ""
    assert str(out) in stdout
    assert (out / "trajectory.csv").exists()
    assert (out / "events.json").exists()
    assert (out / "resolved_config.json").exists()
    assert (out / "run.log").exists()
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,x,y,p,q,generator,constraint"
    events = json.loads((out / "events.json").read_text())
    assert events["termination"] == "completed"


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc, _, _ = _run(capsys, "simulate", "--out", str(out),
                        "--set", "simulate.t1=5")
        assert rc == 0
        outs.append(out)
    for fname in ("trajectory.csv", "events.json", "resolved_config.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_ensemble_seed_determinism(tmp_path, capsys):
    args = ("ensemble", "--set", "ensemble.n=512", "--set", "ensemble.t=0.5")
    rc, _, _ = _run(capsys, *args, "--out", str(tmp_path / "s0a"), "--seed", "4")
    assert rc == 0
    rc, _, _ = _run(capsys, *args, "--out", str(tmp_path / "s0b"), "--seed", "4")
    assert rc == 0
    rc, _, _ = _run(capsys, *args, "--out", str(tmp_path / "s1"), "--seed", "5")
    assert rc == 0
    same = (tmp_path / "s0a" / "ensemble.csv").read_bytes()
    assert same == (tmp_path / "s0b" / "ensemble.csv").read_bytes()
    assert same != (tmp_path / "s1" / "ensemble.csv").read_bytes()
    header = same.decode().splitlines()[0]
    assert header == "x,p,weight"
    assert (tmp_path / "s0a" / "transported.csv").exists()
    moms = json.loads((tmp_path / "s0a" / "moments.json").read_text())
    assert "separatrix_fraction" in moms


def test_unknown_config_key_is_named(tmp_path, capsys):
    rc, _, err = _run(capsys, "simulate", "--out", str(tmp_path / "x"),
                      "--set", "bogus.key=1")
    assert rc == 2
    assert "bogus.key" in err


def test_wrong_value_type_is_named(tmp_path, capsys):
    rc, _, err = _run(capsys, "simulate", "--out", str(tmp_path / "a"),
                      "--set", "simulate.t1=abc")
    assert rc == 2
    assert "simulate.t1" in err and "number" in err

    rc, _, err = _run(capsys, "sweep-uncertainty", "--out", str(tmp_path / "b"),
                      "--set", "uncertainty.delta_e=1.0")
    assert rc == 2
    assert "uncertainty.delta_e" in err and "list" in err

    cfg = tmp_path / "bad.json"
    cfg.write_text('{"simulate": {"t1": "abc"}}')
    rc, _, err = _run(capsys, "simulate", "--out", str(tmp_path / "c"),
                      "--config", str(cfg))
    assert rc == 2
    assert "simulate.t1" in err


def test_set_on_a_block_merges_into_it(tmp_path, capsys):
    rc, _, _ = _run(capsys, "simulate", "--out", str(tmp_path / "d"),
                    "--set", 'system.potential={"kind": "harmonic"}',
                    "--set", "simulate.t1=2")
    assert rc == 0
    resolved = json.loads((tmp_path / "d" / "resolved_config.json").read_text())
    pot = resolved["config"]["system"]["potential"]
    assert pot["kind"] == "harmonic"
    assert "coefficients" in pot


def test_bad_flavor_names_the_field(tmp_path, capsys):
    rc, _, err = _run(capsys, "simulate", "--out", str(tmp_path / "x"),
                      "--set", "system.flavor=banana")
    assert rc == 2
    assert "system.flavor" in err


def test_domain_error_exits_one(tmp_path, capsys):
    rc, _, err = _run(capsys, "spectrum", "--out", str(tmp_path / "x"),
                      "--set", "system.potential.kind=inverted_harmonic")
    assert rc == 1
    assert "confining" in err


def test_usage_error_from_experiment_setup(tmp_path, capsys):
    rc, _, err = _run(capsys, "dwell", "--out", str(tmp_path / "x"),
                      "--set", "dwell.delta_e=0")
    assert rc == 2
    assert "error:" in err


def test_config_file_and_set_precedence(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"simulate": {"t1": 20.0},
                                    "system": {"potential": {"kind": "harmonic"}}}))
    out = tmp_path / "run"
    rc, _, _ = _run(capsys, "simulate", "--config", str(cfg_path),
                    "--out", str(out), "--set", "simulate.t1=5")
    assert rc == 0
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["command"] == "simulate"
    assert resolved["config"]["simulate"]["t1"] == 5
    assert resolved["config"]["system"]["potential"]["kind"] == "harmonic"


def test_config_file_with_unknown_key_is_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"simulate": {"speed": 3}}))
    rc, _, err = _run(capsys, "simulate", "--config", str(cfg_path),
                      "--out", str(tmp_path / "x"))
    assert rc == 2
    assert "simulate.speed" in err


def test_spectrum_levels_flag(tmp_path, capsys):
    out = tmp_path / "spec"
    rc, _, _ = _run(capsys, "spectrum", "--out", str(out), "--levels", "2",
                    "--set", "spectrum.grid.n=1001")
    assert rc == 0
    spec = json.loads((out / "spectrum.json").read_text())
    assert len(spec["energies"]) == 2
    assert spec["energies"][0] < spec["energies"][1]
    assert spec["hbar"] == 0.1
    wf_header = (out / "wavefunctions.csv").read_text().splitlines()[0]
    assert wf_header == "x,psi0,psi1"


def test_sweep_uncertainty_outputs(tmp_path, capsys):
    out = tmp_path / "sweep"
    rc, _, _ = _run(capsys, "sweep-uncertainty", "--out", str(out),
                    "--set", "uncertainty.delta_e=[1.0,0.5]",
                    "--set", "uncertainty.t_max=60")
    assert rc == 0
    lines = (out / "uncertainty.csv").read_text().splitlines()
    assert lines[0] == "delta_E,delta_t,product"
    assert len(lines) == 3
    report = json.loads((out / "uncertainty.json").read_text())
    assert len(report["rows"]) == 2
    assert report["rows"][0]["product"] > 4.5


def test_ellipse_check_report(tmp_path, capsys):
    out = tmp_path / "ellipse"
    rc, _, _ = _run(capsys, "ellipse-check", "--out", str(out))
    assert rc == 0
    rep = json.loads((out / "ellipse.json").read_text())
    assert rep["residual_rms"] < 1e-8
    assert rep["constraint_fit_error"] < 1e-8


def test_dwell_mfqm_mode(tmp_path, capsys):
    out = tmp_path / "dwell"
    rc, _, _ = _run(capsys, "dwell", "--out", str(out),
                    "--set", "dwell.mode=mfqm", "--set", "system.flavor=mfqm",
                    "--set", "dwell.t_max=50")
    assert rc == 0
    rep = json.loads((out / "dwell.json").read_text())
    assert rep["mode"] == "mfqm"
    assert rep["flips"] >= 1
    assert (out / "trajectory.csv").exists()


def test_dwell_mode_flavor_mismatch_is_named(tmp_path, capsys):
    rc, _, err = _run(capsys, "dwell", "--out", str(tmp_path / "x"),
                      "--set", "dwell.mode=mfqm")
    assert rc == 2
    assert "dwell.mode" in err
    assert "system.flavor" in err


def test_identity_check_battery(tmp_path, capsys):
    out = tmp_path / "ident"
    rc, _, _ = _run(capsys, "identity-check", "--out", str(out),
                    "--set", "identity.n_points=200")
    assert rc == 0
    rep = json.loads((out / "identities.json").read_text())
    assert set(rep) == {"harmonic", "inverted_harmonic", "double_well"}
    for block in rep.values():
        for val in block.values():
            assert val < 1e-10


def test_quiet_suppresses_stdout(tmp_path, capsys):
    rc, stdout, _ = _run(capsys, "identity-check", "--quiet",
                         "--out", str(tmp_path / "q"),
                         "--set", "identity.n_points=50")
    assert rc == 0
    assert stdout == ""


def test_help_and_bad_command_exit_via_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--help"])
    assert exc.value.code == 0
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_default_config_round_trips(tmp_path, capsys):
    # the resolved config of a default run reloads as an exact config file
    out1 = tmp_path / "first"
    rc, _, _ = _run(capsys, "ellipse-check", "--out", str(out1))
    assert rc == 0
    resolved = json.loads((out1 / "resolved_config.json").read_text())
    cfg_path = tmp_path / "replay.json"
    cfg_path.write_text(json.dumps(resolved["config"]))
    out2 = tmp_path / "second"
    rc, _, _ = _run(capsys, "ellipse-check", "--config", str(cfg_path),
                    "--out", str(out2))
    assert rc == 0
    assert ((out1 / "ellipse.json").read_bytes()
            == (out2 / "ellipse.json").read_bytes())
    assert ((out1 / "trajectory.csv").read_bytes()
            == (out2 / "trajectory.csv").read_bytes())


def test_default_config_schema():
    cfg = default_config("simulate")
    assert cfg["system"]["flavor"] == "mfqm"
    assert cfg["integrator"]["escape_radius"] == 1e6
    cfg = default_config("ensemble")
    assert cfg["system"]["flavor"] == "classical"
    assert cfg["system"]["potential"]["kind"] == "inverted_harmonic"
