"""Command-line interface checks (exit codes, files, config precedence)."""

import json

import pytest

from iondrive.cli import main


class TestFidelityCommand:
    def test_panel_smoke(self, tmp_path, capsys):
        # reduced problem size through flags; exercises CSV + report outputs
        status = main(["fidelity", "--panel", "fig2", "--cutoff", "16",
                       "--tmax", "100", "--samples", "801",
                       "--out", str(tmp_path)])
        assert status == 0
        assert (tmp_path / "fig2.csv").exists()
        assert (tmp_path / "fig2.report.json").exists()
        out = capsys.readouterr().out
        assert "PASS" in out

    def test_custom_point_matches_panel(self, tmp_path):
        status = main(["fidelity", "--omega", "0.95", "--delta", "0.3",
                       "--cutoff", "16", "--tmax", "100", "--samples", "801",
                       "--out", str(tmp_path)])
        assert status == 0
        payload = json.loads((tmp_path / "custom.report.json").read_text())
        assert payload["config"]["omega"] == 0.95
        assert payload["config"]["delta"] == 0.3

    def test_unknown_panel_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["fidelity", "--panel", "nope", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_missing_parameters_is_usage_error(self, tmp_path):
        assert main(["fidelity", "--out", str(tmp_path)]) == 2


class TestWignerCommand:
    def test_fast_vacuum_smoke(self, tmp_path):
        status = main(["wigner", "--state", "coherent:0", "--gamma", "0",
                       "--regime", "fast", "--slice", "re", "--cutoff", "50",
                       "--tmax", "400", "--samples", "600", "--kmax", "12",
                       "--out", str(tmp_path)])
        assert status == 0
        assert (tmp_path / "wigner_gamma0.csv").exists()
        assert (tmp_path / "wigner.report.json").exists()

    def test_missing_state_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["wigner", "--gamma", "0", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_bad_state_spec(self, tmp_path):
        assert main(["wigner", "--state", "catz2", "--gamma", "0",
                     "--out", str(tmp_path)]) == 2
        assert main(["wigner", "--state", "squeezed:1", "--gamma", "0",
                     "--out", str(tmp_path)]) == 2


class TestQfitCommand:
    def test_number_state_diagnostic(self, tmp_path, capsys):
        status = main(["qfit", "--state", "number:1", "--alpha", "0",
                       "--cutoff", "30", "--tmax", "400", "--samples", "600",
                       "--kmax", "8", "--out", str(tmp_path)])
        assert status == 0
        out = capsys.readouterr().out
        # Q_1 ~ 1 and W ~ -2/pi
        assert "W(alpha) fit -0.6366" in out.replace("  ", " ")

    def test_coherent_poisson_columns(self, tmp_path, capsys):
        status = main(["qfit", "--state", "coherent:1", "--alpha", "0",
                       "--cutoff", "30", "--tmax", "400", "--samples", "600",
                       "--kmax", "8", "--out", str(tmp_path)])
        assert status == 0
        lines = [ln.split() for ln in capsys.readouterr().out.splitlines()
                 if ln.strip() and ln.split()[0].isdigit()]
        for row in lines:
            assert abs(float(row[1]) - float(row[2])) < 2e-3

    def test_bad_alpha(self, tmp_path):
        assert main(["qfit", "--state", "number:1", "--alpha", "lots",
                     "--out", str(tmp_path)]) == 2


class TestConfigFile:
    def test_precedence_flags_over_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("omega = 0.5\ndelta = 0.1   # comment\ncutoff = 16\n")
        status = main(["fidelity", "--omega", "0.95", "--delta", "0.3",
                       "--tmax", "100", "--samples", "801",
                       "--config", str(cfg), "--out", str(tmp_path)])
        assert status == 0
        payload = json.loads((tmp_path / "custom.report.json").read_text())
        assert payload["config"]["omega"] == 0.95      # flag wins
        assert payload["config"]["cutoff"] == 16       # file wins over default

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("speed = 11\n")
        assert main(["fidelity", "--panel", "fig2", "--config", str(cfg),
                     "--out", str(tmp_path)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["fidelity", "--panel", "fig2", "--config",
                     str(tmp_path / "absent.cfg"), "--out", str(tmp_path)]) == 2
