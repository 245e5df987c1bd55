"""Benchmark harness checks: determinism, CSV schemas, criteria evaluation."""

import json
import os

import numpy as np
import pytest

from iondrive.bench import (ExperimentSpec, RunReport, builtin_fidelity_criteria,
                            builtin_wigner_criteria, evaluate, motional_state,
                            run_fidelity_panel, run_wigner_rows, slice_coords,
                            toy_state, write_report_json)
from iondrive.errors import MalformedCriteria
from iondrive.models import HamiltonianKind
from iondrive.tomography import Regime


def small_panel_spec(tmp_path, name="fig2"):
    # reduced cutoff/time: exercises the full pipeline quickly
    return ExperimentSpec.panel(name, cutoff=16, t_max=100.0, samples=801,
                                out_dir=str(tmp_path))


def small_wigner_spec(tmp_path):
    return ExperimentSpec(
        name="wigner", cutoff=30, state=("coherent", 0.0),
        gammas=(0.0,), regimes=(Regime.FAST,), slices=("re",),
        omega_t_max=400.0, scan_samples=600, k_max=12,
        slice_extent=2.0, out_dir=str(tmp_path))


class TestToyState:
    def test_normalization_and_content(self):
        psi = toy_state(50)
        assert abs(np.linalg.norm(psi.vector) - 1.0) < 1e-12
        # equal weight on |e>|alpha=2> and |g>|n=4>
        assert abs(np.sum(np.abs(psi.vector[:50]) ** 2) - 0.5) < 1e-12
        assert abs(abs(psi.vector[50 + 4]) ** 2 - 0.5) < 1e-10

    def test_motional_state_kinds(self):
        assert motional_state("number", 3, 20).vector[3] == 1
        with pytest.raises(ValueError):
            motional_state("squeezed", 1, 20)


class TestFidelityPanel:
    def test_deterministic_csv(self, tmp_path):
        spec = small_panel_spec(tmp_path)
        run_fidelity_panel(spec)
        first = (tmp_path / "fig2.csv").read_bytes()
        run_fidelity_panel(spec)
        assert (tmp_path / "fig2.csv").read_bytes() == first

    def test_csv_schema(self, tmp_path):
        spec = small_panel_spec(tmp_path)
        run_fidelity_panel(spec)
        lines = (tmp_path / "fig2.csv").read_text().splitlines()
        assert lines[0] == "nu_t,kind,fidelity_raw,fidelity_coarse"
        cells = lines[1].split(",")
        assert len(cells) == 4
        float(cells[0]), float(cells[2])
        assert cells[1] in {k.name for k in HamiltonianKind}

    def test_tsrwa_equals_mc_at_zero_detuning(self, tmp_path):
        spec = small_panel_spec(tmp_path)
        report = run_fidelity_panel(spec)
        assert report.stats["MC_vs_TSRWA.max_coarse_diff"] < 1e-10

    def test_unknown_panel(self):
        with pytest.raises(ValueError):
            ExperimentSpec.panel("fig9")

    def test_stats_present(self, tmp_path):
        report = run_fidelity_panel(small_panel_spec(tmp_path))
        for kind in ("RSB", "MC", "TSRWA"):
            for stat in ("min_coarse", "final_coarse", "max_coarse"):
                assert f"{kind}.{stat}" in report.stats


class TestWignerRows:
    def test_deterministic_csv(self, tmp_path):
        spec = small_wigner_spec(tmp_path)
        run_wigner_rows(spec)
        path = tmp_path / "wigner_gamma0.csv"
        first = path.read_bytes()
        run_wigner_rows(spec)
        assert path.read_bytes() == first

    def test_csv_schema_and_accuracy(self, tmp_path):
        spec = small_wigner_spec(tmp_path)
        report = run_wigner_rows(spec)
        lines = (tmp_path / "wigner_gamma0.csv").read_text().splitlines()
        assert lines[0] == "regime,gamma_over_nu,slice,coord,w_reconstructed,w_analytic"
        assert len(lines) == 1 + spec.slice_n
        assert report.stats["fast.gamma0.re.linf"] < 1e-3

    def test_rejects_toy_state(self, tmp_path):
        spec = ExperimentSpec(name="wigner", state=("toy", 0.0),
                              out_dir=str(tmp_path))
        with pytest.raises(ValueError):
            run_wigner_rows(spec)


class TestEvaluate:
    def _report(self):
        rep = RunReport("fig2", "fidelity", {})
        rep.stats = {"TSRWA.min_coarse": 0.995, "MC.min_coarse": 0.995,
                     "MC_vs_TSRWA.max_coarse_diff": 0.0, "RSB.min_coarse": 0.2,
                     "MC.final_coarse": 0.99, "TSRWA.final_coarse": 0.995}
        return rep

    def test_all_pass(self):
        status, table, results = evaluate(self._report(),
                                          builtin_fidelity_criteria("fig2"))
        assert status == 0
        assert all(r["pass"] for r in results.values())
        assert "PASS" in table

    def test_impossible_threshold_fails(self):
        crit = [{"name": "fidelity above one is impossible",
                 "lhs": "fig2.TSRWA.min_coarse", "op": "ge", "rhs": 1.01}]
        status, table, results = evaluate(self._report(), crit)
        assert status == 1
        assert not results["fidelity above one is impossible"]["pass"]

    def test_cross_reference(self):
        crit = [{"name": "tsrwa beats mc", "lhs": "fig2.TSRWA.final_coarse",
                 "op": "ge", "rhs": "fig2.MC.final_coarse"}]
        status, _, _ = evaluate(self._report(), crit)
        assert status == 0

    @pytest.mark.parametrize("bad", [
        [{"name": "x", "lhs": "fig2.TSRWA.min_coarse", "op": "??", "rhs": 1}],
        [{"name": "x", "lhs": "nope.missing", "op": "ge", "rhs": 1}],
        [{"lhs": "fig2.TSRWA.min_coarse", "op": "ge", "rhs": 1}],
    ])
    def test_malformed(self, bad):
        with pytest.raises(MalformedCriteria):
            evaluate(self._report(), bad)

    def test_builtin_wigner_criteria_structure(self, tmp_path):
        spec = ExperimentSpec(name="wigner", state=("cat", 2.0),
                              gammas=(0.0004, 0.01, 0.05))
        names = [c["name"] for c in builtin_wigner_criteria(spec)]
        assert any("fast error <= slow error" in n for n in names)
        assert any("loses negativity" in n for n in names)

    def test_report_json_roundtrip(self, tmp_path):
        rep = self._report()
        status, _, results = evaluate(rep, builtin_fidelity_criteria("fig2"))
        path = tmp_path / "fig2.report.json"
        write_report_json(str(path), rep, results)
        payload = json.loads(path.read_text())
        assert payload["name"] == "fig2"
        assert "config" in payload
        crit = payload["criteria"]["fig2 TSRWA coarse F >= 0.99 everywhere"]
        assert set(crit) == {"threshold", "observed", "pass"}
