"""Secondary-component tests: figure regeneration from the published CSVs.

The solver outputs are produced through the primary package's CLI (its
external interface); the renderers only ever see the CSV files.
"""

import subprocess
import sys

import pytest

from lfplots import FigureJob, SchemaError, render
from lfplots.cli import main as plot_main

DENSITIES = """t,cell_index,x,muF,muL,nu
0,0,-0.5,0.4,0.1,0.5
0,1,0.5,0.2,0.3,0.5
1,0,-0.5,0.3,0.2,0.5
1,1,0.5,0.3,0.2,0.5
"""

DIAGNOSTICS = """t,massF,massL,varianceF,varianceL,target_variance,alphaF,alphaL,cluster_count
0,0.75,0.25,0.1,0.1,nan,0.1,0.95,1
1,0.8,0.2,0.1,0.1,nan,0.1,0.95,1
"""

AGGREGATE = """N,mean,stderr,theta_ref
50,0.04,0.005,0.86
200,0.02,0.003,0.53
"""


@pytest.fixture
def small_csvs(tmp_path):
    d = tmp_path / "densities.csv"
    d.write_text(DENSITIES)
    g = tmp_path / "diagnostics.csv"
    g.write_text(DIAGNOSTICS)
    a = tmp_path / "aggregate.csv"
    a.write_text(AGGREGATE)
    return d, g, a


def test_all_kinds_render(small_csvs, tmp_path):
    d, g, a = small_csvs
    for kind, src in [
        ("heatmap", d),
        ("mass-curves", g),
        ("snapshots", d),
        ("convergence", a),
    ]:
        out = tmp_path / f"{kind}.png"
        render(FigureJob(kind, (src,), out))
        assert out.exists() and out.stat().st_size > 0


def test_missing_column_raises_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x\n0,0.5\n")
    with pytest.raises(SchemaError, match="nu"):
        render(FigureJob("heatmap", (bad,), tmp_path / "x.png"))


def test_empty_file_raises_schema_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        render(FigureJob("heatmap", (empty,), tmp_path / "x.png"))


def test_header_only_raises_schema_error(tmp_path):
    empty = tmp_path / "no-rows.csv"
    empty.write_text("t,cell_index,x,muF,muL,nu\n")
    with pytest.raises(SchemaError, match="no data rows"):
        render(FigureJob("heatmap", (empty,), tmp_path / "x.png"))


def test_cli_exit_codes(small_csvs, tmp_path):
    d, _, _ = small_csvs
    out = tmp_path / "fig.png"
    assert plot_main(["heatmap", str(d), "-o", str(out)]) == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert plot_main(["heatmap", str(bad), "-o", str(out)]) == 1


def test_snapshot_times_selection(small_csvs, tmp_path):
    d, _, _ = small_csvs
    out = tmp_path / "snap.png"
    assert plot_main(["snapshots", str(d), "-o", str(out), "--times", "0,1"]) == 0
    assert out.exists()


def _run_preset(name, out_dir, t_final):
    subprocess.run(
        [
            sys.executable, "-m", "leadfollow", "preset", name,
            "-o", str(out_dir), "--set", f"time.t_final={t_final}",
        ],
        check=True,
    )


@pytest.mark.slow
def test_byte_identical_renders_from_solver_outputs(tmp_path):
    # acceptance: all figure kinds from test-ia and test-iii outputs render
    # deterministically (two runs, identical bytes)
    for preset, t_final in (("test-ia", 25.0), ("test-iii", 15.0)):
        run_dir = tmp_path / preset
        _run_preset(preset, run_dir, t_final)
        jobs = [
            ("heatmap", run_dir / "densities.csv", None),
            ("snapshots", run_dir / "densities.csv", "0,5,10,15"),
            ("mass-curves", run_dir / "diagnostics.csv", None),
        ]
        for kind, src, times in jobs:
            outs = []
            for attempt in ("one", "two"):
                out = tmp_path / f"{preset}-{kind}-{attempt}.png"
                argv = [kind, str(src), "-o", str(out)]
                if times:
                    argv += ["--times", times]
                assert plot_main(argv) == 0
                outs.append(out.read_bytes())
            assert outs[0] == outs[1], f"{preset}/{kind} render not deterministic"
    # convergence kind from a tiny study through the primary CLI
    conv_dir = tmp_path / "conv"
    subprocess.run(
        [
            sys.executable, "-m", "leadfollow", "convergence",
            "--preset", "test-ia", "-o", str(conv_dir),
            "--Ns", "25,100", "--seeds", "2", "--set", "time.t_final=1.0",
        ],
        check=True,
    )
    outs = []
    for attempt in ("one", "two"):
        out = tmp_path / f"conv-{attempt}.png"
        assert plot_main([
            "convergence", str(conv_dir / "convergence_aggregate.csv"), "-o", str(out)
        ]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    print("ACCEPTANCE 12 plot regeneration: PASS (byte-identical across two runs)")
