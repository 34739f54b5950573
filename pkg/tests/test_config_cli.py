"""Config parsing, overrides, manifest round-trips, CLI exit codes."""

import json
from pathlib import Path

import pytest

from leadfollow import macro_preset
from leadfollow.cli import main
from leadfollow.config import (
    ConfigError,
    apply_override,
    load_config_file,
    macro_from_dict,
    macro_to_dict,
    micro_from_dict,
    parse_override,
)

EXAMPLE_TOML = """
[domain]
x_min = -1.0
x_max = 1.0
n_cells = 40

[time]
dt = 0.02
t_final = 2.0

[kernels.F]
variant = "hegselmann_krause"
C = 0.2

[kernels.L]
variant = "steering"
x_hat = 0.5

[rates.F]
variant = "target_variance_sigmoid"
x_hat = 0.5
delta = 0.15

[rates.L]
variant = "constant"
value = 0.25

[initial]
kind = "proportional"
shape = "uniform"
sigma0_F = 0.75

[micro]
n_particles = 64
seed = 9
"""


def write_toml(tmp_path: Path) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(EXAMPLE_TOML)
    return path


# ---------------------------------------------------------------------------
# dict round-trips
# ---------------------------------------------------------------------------
def test_preset_config_round_trip():
    for name in ("test-ia", "test-ib", "test-iia", "test-iib", "test-iii"):
        cfg = macro_preset(name)
        assert macro_from_dict(macro_to_dict(cfg)) == cfg


def test_toml_file_builds_configs(tmp_path):
    data = load_config_file(write_toml(tmp_path))
    macro = macro_from_dict(data)
    assert macro.n_cells == 40
    assert macro.kernel_L.x_hat == 0.5
    micro = micro_from_dict(data, macro)
    assert micro.n_particles == 64
    assert micro.seed == 9
    assert micro.dt == macro.dt


def test_unknown_section_rejected(tmp_path):
    data = load_config_file(write_toml(tmp_path))
    data["physics"] = {}
    with pytest.raises(ConfigError, match="physics"):
        macro_from_dict(data)


def test_missing_kernel_named_in_error(tmp_path):
    data = load_config_file(write_toml(tmp_path))
    del data["kernels"]["L"]
    with pytest.raises(ConfigError, match="kernels.L"):
        macro_from_dict(data)


def test_bad_variant_parameter_named(tmp_path):
    data = load_config_file(write_toml(tmp_path))
    data["rates"]["L"]["delta"] = 0.5  # constants have no delta
    with pytest.raises(ConfigError, match="rates.L.delta"):
        macro_from_dict(data)


def test_override_parsing():
    assert parse_override("rates.F.delta=0.15") == (("rates", "F", "delta"), 0.15)
    assert parse_override("micro.seed=12") == (("micro", "seed"), 12)
    assert parse_override("kernels.F.attract=false") == (
        ("kernels", "F", "attract"),
        False,
    )
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")


def test_apply_override_nested():
    cfg = {"rates": {"F": {"delta": 0.35}}}
    apply_override(cfg, ("rates", "F", "delta"), 0.15)
    assert cfg["rates"]["F"]["delta"] == 0.15


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------
def test_cli_preset_writes_expected_files(tmp_path):
    out = tmp_path / "run"
    code = main(["preset", "test-ia", "-o", str(out), "--record-every", "500",
                 "--set", "time.t_final=2.0"])
    assert code == 0
    assert (out / "densities.csv").exists()
    assert (out / "diagnostics.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["preset"] == "test-ia"
    assert manifest["config"]["time"]["t_final"] == 2.0


def test_cli_unknown_preset_exit_2(capsys):
    assert main(["preset", "definitely-not-a-preset"]) == 2
    err = capsys.readouterr().err
    assert "test-ia" in err  # message lists valid names


def test_cli_manifest_round_trip_bitwise(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["preset", "test-iii", "-o", str(out1), "--record-every", "300",
                 "--set", "time.t_final=3.0"]) == 0
    assert main(["macro", "--config", str(out1 / "manifest.json"), "-o", str(out2)]) == 0
    assert (out1 / "densities.csv").read_bytes() == (out2 / "densities.csv").read_bytes()
    assert (out1 / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()


def test_cli_nu_sigma_runs(tmp_path):
    out = tmp_path / "ns"
    code = main(["nu-sigma", "--preset", "test-ia", "-o", str(out),
                 "--set", "time.t_final=1.0"])
    assert code == 0
    header = (out / "densities.csv").read_text().splitlines()[0]
    assert header == "t,cell_index,x,muF,muL,nu"


def test_cli_micro_runs_with_dump(tmp_path):
    out = tmp_path / "micro"
    code = main([
        "micro", "--preset", "test-ia", "-o", str(out), "--seed", "4",
        "--set", "time.t_final=0.5", "--set", "micro.n_particles=32",
        "--dump-particles",
    ])
    assert code == 0
    lines = (out / "micro.csv").read_text().splitlines()
    assert lines[0] == "t,seed,N,sigmaF"
    assert (out / "particles.csv").read_text().splitlines()[0] == "t,i,x,label"


def test_cli_equivalence_runs(tmp_path):
    out = tmp_path / "eq"
    code = main(["equivalence", "--preset", "test-ia", "-o", str(out),
                 "--set", "time.t_final=1.0", "--record-every", "20"])
    assert code == 0
    payload = json.loads((out / "equivalence.json").read_text())
    assert payload["flat_gap"] >= 0.0


def test_cli_convergence_runs(tmp_path):
    out = tmp_path / "conv"
    code = main([
        "convergence", "--preset", "test-ia", "-o", str(out),
        "--Ns", "20,60", "--seeds", "2", "--set", "time.t_final=0.5",
    ])
    assert code == 0
    assert (out / "convergence_raw.csv").read_text().splitlines()[0] == "N,seed,t,w1_space,w1_label"
    agg = (out / "convergence_aggregate.csv").read_text().splitlines()
    assert agg[0] == "N,mean,stderr,theta_ref"
    summary = json.loads((out / "summary.json").read_text())
    assert "slopes" in summary


def test_cli_numerical_failure_exit_3(tmp_path, capsys):
    # a steering kernel with a distant target forces a Courant violation
    code = main([
        "macro", "--preset", "test-iii", "-o", str(tmp_path / "x"),
        "--set", "kernels.L.x_hat=50.0", "--set", "time.t_final=1.0",
    ])
    assert code == 3
    assert "t=" in capsys.readouterr().err


def test_cli_requires_preset_or_config():
    assert main(["macro"]) == 2
