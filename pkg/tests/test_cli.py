import json
import subprocess
import sys
from pathlib import Path

from gripsim.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


class TestRunCommand:
    def test_run_writes_trace(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(
            ["run", "--scenario", str(SCENARIO_DIR / "reference_close.json"), "--out", str(out)]
        )
        assert code == EXIT_OK
        assert out.exists()
        assert "1000 ticks" in capsys.readouterr().out
        assert out.read_text().count("\n") == 1001  # header + rows

    def test_run_with_default_figure(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(
            [
                "run",
                "--scenario", str(SCENARIO_DIR / "reference_close.json"),
                "--out", str(out),
                "--figure",
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "trace.png").exists()

    def test_run_with_named_figure(self, tmp_path):
        out = tmp_path / "trace.csv"
        fig = tmp_path / "viz" / "fig.png"
        fig.parent.mkdir()
        code = main(
            [
                "run",
                "--scenario", str(SCENARIO_DIR / "reference_close.json"),
                "--out", str(out),
                "--figure", str(fig),
            ]
        )
        assert code == EXIT_OK and fig.exists()

    def test_malformed_scenario_exits_2(self, tmp_path, capsys):
        bad = write_json(tmp_path / "bad.json", {"durationn_ticks": 7})
        code = main(["run", "--scenario", str(bad), "--out", str(tmp_path / "t.csv")])
        assert code == EXIT_VALIDATION
        assert "durationn_ticks" in capsys.readouterr().err

    def test_missing_scenario_exits_3(self, tmp_path):
        code = main(
            ["run", "--scenario", str(tmp_path / "ghost.json"), "--out", str(tmp_path / "t.csv")]
        )
        assert code == EXIT_RUNTIME

    def test_simulation_fault_exits_3(self, tmp_path, capsys):
        scn = write_json(
            tmp_path / "explode.json",
            {
                "duration_ticks": 100,
                "motor_params": {"j": 1e-313},
                "events": [{"tick": 0, "switch": "close", "action": "press"}],
            },
        )
        code = main(["run", "--scenario", str(scn), "--out", str(tmp_path / "t.csv")])
        assert code == EXIT_RUNTIME
        assert "tick" in capsys.readouterr().err


class TestEmgCommands:
    def test_synth_then_classify(self, tmp_path, capsys):
        out_dir = tmp_path / "emg"
        profile = write_json(tmp_path / "profile.json", {"duration_s": 2.0, "seed": 5})
        code = main(["emg", "synth", "--profile", str(profile), "--out-dir", str(out_dir)])
        assert code == EXIT_OK
        for cond in ("relaxed", "stressed"):
            for pos in ("S1", "S2", "S3", "S4"):
                assert (out_dir / cond / f"{pos}.csv").exists()

        capsys.readouterr()
        code = main(
            [
                "emg", "classify",
                "--traces", str(out_dir / "stressed"),
                "--baseline", str(out_dir / "relaxed"),
            ]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.strip().splitlines()[-1] == "Stressed"

        code = main(
            [
                "emg", "classify",
                "--traces", str(out_dir / "relaxed"),
                "--baseline", str(out_dir / "relaxed"),
            ]
        )
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip().splitlines()[-1] == "Relaxed"

    def test_synth_with_figure(self, tmp_path):
        out_dir = tmp_path / "emg"
        profile = write_json(tmp_path / "p.json", {"duration_s": 0.3})
        code = main(
            ["emg", "synth", "--profile", str(profile), "--out-dir", str(out_dir), "--figure"]
        )
        assert code == EXIT_OK
        assert (out_dir / "emg_traces.png").exists()

    def test_classify_with_figure(self, tmp_path):
        out_dir = tmp_path / "emg"
        profile = write_json(tmp_path / "p.json", {"duration_s": 0.5})
        main(["emg", "synth", "--profile", str(profile), "--out-dir", str(out_dir)])
        fig = tmp_path / "cls.png"
        code = main(
            [
                "emg", "classify",
                "--traces", str(out_dir / "stressed"),
                "--baseline", str(out_dir / "relaxed"),
                "--figure", str(fig),
            ]
        )
        assert code == EXIT_OK and fig.exists()

    def test_bad_profile_exits_2(self, tmp_path):
        profile = write_json(tmp_path / "p.json", {"sample_rate_hz": -1})
        code = main(["emg", "synth", "--profile", str(profile), "--out-dir", str(tmp_path / "o")])
        assert code == EXIT_VALIDATION

    def test_missing_trace_dir_exits_3(self, tmp_path):
        code = main(
            [
                "emg", "classify",
                "--traces", str(tmp_path / "none"),
                "--baseline", str(tmp_path / "none2"),
            ]
        )
        assert code == EXIT_RUNTIME

    def test_degenerate_baseline_exits_3(self, tmp_path, capsys):
        profile = write_json(
            tmp_path / "p.json",
            {
                "duration_s": 0.2,
                "amplitudes_uv": {"S1": {"relaxed": 0, "stressed": 0}},
            },
        )
        out_dir = tmp_path / "emg"
        main(["emg", "synth", "--profile", str(profile), "--out-dir", str(out_dir)])
        code = main(
            [
                "emg", "classify",
                "--traces", str(out_dir / "stressed"),
                "--baseline", str(out_dir / "relaxed"),
            ]
        )
        assert code == EXIT_RUNTIME
        assert "baseline" in capsys.readouterr().err.lower()


class TestServeDefaults:
    def test_port_from_environment(self, monkeypatch):
        from gripsim.cli import build_parser

        monkeypatch.setenv("GRIPSIM_PORT", "9123")
        args = build_parser().parse_args(["serve"])
        assert args.port == 9123

    def test_default_port(self, monkeypatch):
        from gripsim.cli import build_parser

        monkeypatch.delenv("GRIPSIM_PORT", raising=False)
        args = build_parser().parse_args(["serve"])
        assert args.port == 7420


class TestEntryPoint:
    def test_version_via_module(self):
        proc = subprocess.run(
            [sys.executable, "-m", "gripsim", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "gripsim" in proc.stdout

    def test_determinism_across_processes(self, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            proc = subprocess.run(
                [
                    sys.executable, "-m", "gripsim", "run",
                    "--scenario", str(SCENARIO_DIR / "chatter_demo.json"),
                    "--out", str(tmp_path / name),
                ],
                capture_output=True, text=True,
            )
            assert proc.returncode == 0, proc.stderr
            outs.append((tmp_path / name).read_bytes())
        assert outs[0] == outs[1]
