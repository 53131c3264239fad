import io
import os
import subprocess
import sys

import pytest

from mcsoc.cli import RunSpec, execute, main, parse_args
from mcsoc.config import RunBundle, dumps_config, loads_config


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [sys.executable, "-m", "mcsoc.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_parse_sweep_spec():
    spec = parse_args(["sweep", "--seed", "7", "--format", "csv"])
    assert spec == RunSpec(
        command="sweep", config_path=None, seed=7, fmt="csv",
        out=None, iterations=10_000,
    )


def test_parse_missing_seed_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        parse_args(["sweep", "--format", "csv"])
    assert exc.value.code == 2


def test_parse_fit_inline_config():
    spec = parse_args(["fit", "--cpus", "2", "--ic-kb", "32", "--dc-kb", "0"])
    assert (spec.command, spec.cpus, spec.ic_kb, spec.dc_kb) == ("fit", 2, 32, 0)


def test_parse_unknown_flag_rejected():
    code, _, _ = run_cli(["sweep", "--seed", "1", "--frobnicate"])
    assert code == 2


def test_fit_exit_codes():
    assert execute(parse_args(["fit", "--cpus", "2", "--ic-kb", "16", "--dc-kb", "0"])) == 0
    assert execute(parse_args(["fit", "--cpus", "2", "--ic-kb", "32", "--dc-kb", "0"])) == 1
    assert execute(parse_args(["fit", "--cpus", "1", "--ic-kb", "8", "--dc-kb", "64"])) == 1


def test_sweep_emits_eight_row_csv(tmp_path):
    from mcsoc.config import RunBundle, experiment1_space, write_config
    from dataclasses import replace

    bundle = replace(RunBundle(), sweep=experiment1_space())
    cfg = tmp_path / "exp1.cfg"
    with open(cfg, "w") as fp:
        write_config(bundle, fp)
    out = tmp_path / "sweep.csv"
    rc = execute(parse_args([
        "sweep", "--config", str(cfg), "--seed", "7",
        "--iterations", "100", "--out", str(out),
    ]))
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 9
    assert lines[0].startswith("n_cpus,")


def test_cli_outputs_byte_identical(tmp_path):
    args = ["sweep", "--seed", "11", "--iterations", "60", "--format", "plot-data"]
    rc1, out1, _ = run_cli(args)
    rc2, out2, _ = run_cli(args)
    assert rc1 == rc2 == 0
    assert out1 == out2

    args = ["dual-driver", "--seed", "11", "--iterations", "25"]
    rc1, out1, _ = run_cli(args)
    rc2, out2, _ = run_cli(args)
    assert rc1 == rc2 == 0
    assert out1 == out2


def test_config_round_trip(tmp_path):
    bundle = RunBundle()
    text = dumps_config(bundle)
    assert loads_config(text) == bundle


def test_reference_config_matches_defaults():
    here = os.path.dirname(__file__)
    path = os.path.join(here, "..", "configs", "reference.cfg")
    with open(path) as fp:
        from mcsoc.config import read_config

        bundle = read_config(fp)
    assert bundle == RunBundle()


def test_gen_workload_config_round_trips(tmp_path):
    out = tmp_path / "wl.cfg"
    rc = execute(parse_args(["gen-workload", "--seed", "5", "--out", str(out)]))
    assert rc == 0
    with open(out) as fp:
        text = fp.read()
    assert loads_config(text) == RunBundle()


def test_calibrate_writes_reparseable_config(tmp_path):
    out = tmp_path / "fitted.cfg"
    resid = tmp_path / "resid.csv"
    rc = execute(parse_args([
        "calibrate", "--seed", "2014", "--out", str(out),
        "--residuals-out", str(resid),
    ]))
    assert rc == 0
    fitted = loads_config(out.read_text())
    assert fitted.base_cpi_ucycles == 635
    assert resid.read_text().startswith("n_cpus,ic_kb,dc_kb,")


def test_bad_config_file_exits_three(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[system]\nn_cpus = banana\n")
    assert main(["sweep", "--seed", "1", "--config", str(bad)]) == 3
    assert main(["sweep", "--seed", "1", "--config", str(tmp_path / "missing.cfg")]) == 3


def test_config_dir_env_var(tmp_path):
    from mcsoc.config import write_config

    cfgdir = tmp_path / "configs"
    cfgdir.mkdir()
    with open(cfgdir / "base.cfg", "w") as fp:
        write_config(RunBundle(), fp)
    rc, out, _ = run_cli(
        ["fit", "--config", "base.cfg"],
        env_extra={"MCSOC_CONFIG_DIR": str(cfgdir)},
    )
    assert rc == 0
    assert "fits: yes" in out


def test_simulate_single_row(capsys):
    rc = execute(parse_args(["simulate", "--seed", "3", "--iterations", "50"]))
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("n_cpus,")
    assert len(out.splitlines()) == 2


def test_report_contains_reference_tables(capsys):
    rc = execute(parse_args([
        "report", "--seed", "3", "--iterations", "30", "--format", "markdown",
    ]))
    assert rc == 0
    out = capsys.readouterr().out
    assert "Reference VAX MIPS 1.1 scores" in out
    assert "| AMD K62 | 500 | 77.8 |" in out
    assert "| CPUs | IC (KB) | DC (KB) |" in out


def test_python_fallback_backend_selected():
    code, out, err = run_cli(
        ["dual-driver", "--seed", "4", "--iterations", "6"],
        env_extra={"MCSOC_FORCE_PYTHON": "1"},
    )
    assert code == 0
    code2, out2, _ = run_cli(["dual-driver", "--seed", "4", "--iterations", "6"])
    assert out == out2      # backends agree byte-for-byte
