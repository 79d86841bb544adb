import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from rydspec.cli import main
from rydspec.constants import EA0
from rydspec.serialization import config_from_dict, config_to_dict, validate

from oracles import FIELD_49MHZ_1000EA0


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_config(path, **fields):
    path.write_text(json.dumps(fields))
    return path


class TestNeig:
    @pytest.mark.parametrize("j, jp, n", [("1/2", "1/2", 2), ("1/2", "3/2", 3), ("0.5", "1.5", 3), ("1", "2", 5)])
    def test_counts(self, capsys, j, jp, n):
        assert run("neig", "--j", j, "--jp", jp) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == str(n)
        record = json.loads(lines[1])
        validate(record, "neig")
        assert record["n_eig"] == n

    def test_selection_rule(self, capsys):
        assert run("neig", "--j", "1/2", "--jp", "5/2") == 2
        assert "J'" in capsys.readouterr().err

    def test_bad_half_integer(self):
        with pytest.raises(SystemExit) as info:
            run("neig", "--j", "1/3", "--jp", "1/2")
        assert info.value.code == 2


class TestEigs:
    def test_spin_half(self, tmp_path):
        out = tmp_path / "eigs.csv"
        assert run("eigs", "--j", "1/2", "--jp", "1/2", "--rabi-hz", 49e6, "--theta-deg", 30, "--out", out) == 0
        rows = read_csv(out)
        assert rows[0] == ["eigenvalue_hz", "multiplicity"]
        assert [float(r[0]) for r in rows[1:]] == pytest.approx([-24.5e6, 24.5e6], rel=1e-12)
        assert [r[1] for r in rows[1:]] == ["2", "2"]

    def test_zero_eigenvalue_exact(self, capsys):
        assert run("eigs", "--j", "1/2", "--jp", "3/2", "--rabi-hz", 1e6) == 0
        rows = capsys.readouterr().out.splitlines()
        assert len(rows) == 4
        assert "0.0,2" in rows


@pytest.fixture(scope="module")
def p12_traces(tmp_path_factory):
    d = tmp_path_factory.mktemp("spec")
    cfg0 = write_config(d / "t0.json", preset="rb87-36s-36p12")
    cfg90 = write_config(d / "t90.json", preset="rb87-36s-36p12", mw_theta=90)
    for cfg, out in ((cfg0, d / "t0.csv"), (cfg90, d / "t90.csv")):
        assert run("spectrum", cfg, "--out", out, "--plot", out.with_suffix(".svg")) == 0
    return d


class TestSpectrum:
    def test_mw_off_single_peak(self, tmp_path):
        cfg = write_config(tmp_path / "off.json", preset="rb87-36s-36p12", mw_rabi=0)
        out = tmp_path / "off.csv"
        assert run("spectrum", cfg, "--points", 161, "--out", out) == 0
        rows = read_csv(out)
        assert rows[0] == ["coupling_detuning_hz", "transmission"]
        y = np.array([float(r[1]) for r in rows[1:]])
        x = np.array([float(r[0]) for r in rows[1:]])
        interior = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])
        assert interior.sum() == 1
        assert x[1:-1][interior][0] == 0.0

    def test_theta_columns_identical(self, p12_traces):
        a = read_csv(p12_traces / "t0.csv")
        b = read_csv(p12_traces / "t90.csv")
        ta = [round(float(r[1]), 8) for r in a[1:]]
        tb = [round(float(r[1]), 8) for r in b[1:]]
        assert ta == tb

    def test_manifest_and_plot(self, p12_traces):
        manifest = json.loads((p12_traces / "t0.csv.manifest.json").read_text())
        validate(manifest, "manifest")
        assert manifest["command"] == "spectrum"
        svg = (p12_traces / "t0.svg").read_text()
        assert svg.startswith("<svg") and "<polyline" in svg

    def test_preset_flag(self, tmp_path):
        out = tmp_path / "p.csv"
        assert run("spectrum", "--preset", "rb87-36s-36p32", "--points", 41, "--out", out) == 0
        assert len(read_csv(out)) == 42

    def test_empty_grid(self, tmp_path):
        assert run("spectrum", "--preset", "rb87-36s-36p12", "--points", 0, "--out", tmp_path / "x.csv") == 2

    def test_schema_violation_reports_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "bad.json", preset="rb87-36s-36p12", decay_e=-1)
        assert run("spectrum", cfg, "--out", tmp_path / "x.csv") == 2
        assert "decay_e" in capsys.readouterr().err

    def test_nested_schema_path(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "bad.json", coupling_weights=[{"m": "1/2", "re": "one"}])
        assert run("spectrum", cfg, "--out", tmp_path / "x.csv") == 2
        assert "coupling_weights/0/re" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert run("spectrum", tmp_path / "absent.json", "--out", tmp_path / "x.csv") == 2
        assert run("spectrum", "--out", tmp_path / "x.csv") == 2

    def test_solver_failure_exit_3(self, tmp_path):
        # no decay anywhere: the steady state is not unique
        cfg = write_config(
            tmp_path / "closed.json", decay_e=0, decay_rS=0, decay_rP=0, probe_rabi=1e6, coupling_rabi=0
        )
        assert run("spectrum", cfg, "--points", 21, "--out", tmp_path / "x.csv") == 3

    def test_determinism(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", preset="rb87-36s-36p12", mw_theta=20)
        outs = []
        for k in range(2):
            out = tmp_path / f"run{k}.csv"
            assert run("spectrum", cfg, "--points", 81, "--out", out) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        m = [json.loads((tmp_path / f"run{k}.csv.manifest.json").read_text()) for k in range(2)]
        assert m[0]["config_digest"] == m[1]["config_digest"]


def test_round_trip_spectrum_fit_field(p12_traces, capsys):
    fit_json = p12_traces / "fit.json"
    assert run("fit", p12_traces / "t0.csv", "--out", fit_json) == 0
    fit = json.loads(fit_json.read_text())
    validate(fit, "peak_fit")
    field_json = p12_traces / "field.json"
    assert run("field", "--splitting-hz", fit["splitting_hz"], "--dipole-atomic", 1000, "--out", field_json) == 0
    field = json.loads(field_json.read_text())
    validate(field, "field_estimate")
    assert field["rabi_rad_per_s"] == pytest.approx(2 * np.pi * 49e6, rel=0.02)


class TestFitAndField:
    def test_fit_flat_is_solver_failure(self, tmp_path):
        trace = tmp_path / "flat.csv"
        trace.write_text("coupling_detuning_hz,transmission\n" + "".join(f"{i}.0,1.0\n" for i in range(40)))
        assert run("fit", trace) == 3

    def test_fit_bad_columns(self, tmp_path):
        trace = tmp_path / "bad.csv"
        trace.write_text("a,b\n1,2\n")
        assert run("fit", trace) == 2

    def test_field_oracle(self, capsys):
        assert run("field", "--splitting-hz", 49e6, "--dipole-atomic", 1000) == 0
        rec = json.loads(capsys.readouterr().out)
        assert rec["field_amplitude_v_per_m"] == pytest.approx(FIELD_49MHZ_1000EA0, rel=1e-12)

    def test_field_si_matches_atomic(self, capsys):
        run("field", "--splitting-hz", 1e6, "--dipole-atomic", 500)
        a = json.loads(capsys.readouterr().out)
        run("field", "--splitting-hz", 1e6, "--dipole-si", 500 * EA0)
        b = json.loads(capsys.readouterr().out)
        assert a == b

    def test_field_bad_dipole(self):
        assert run("field", "--splitting-hz", 1e6, "--dipole-si", 0) == 2

    def test_field_deterministic(self, tmp_path):
        outs = []
        for k in range(2):
            out = tmp_path / f"f{k}.json"
            run("field", "--splitting-hz", 70e6, "--dipole-atomic", 1020, "--out", out)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestAngleScan:
    def test_outputs(self, tmp_path):
        out = tmp_path / "map.csv"
        argv = ["angle-scan", "--preset", "rb87-36s-36p12", "--points", 201]
        argv += ["--theta-start", 0, "--theta-stop", 90, "--theta-step", 45, "--out", out, "--plot", tmp_path / "c.svg"]
        assert run(*argv) == 0
        rows = read_csv(out)
        assert rows[0] == ["theta_deg", "coupling_detuning_hz", "transmission"]
        assert len(rows) == 1 + 3 * 201
        centers = read_csv(tmp_path / "map_centers.csv")
        assert len(centers) == 4
        summary = json.loads((tmp_path / "map_summary.json").read_text())
        validate(summary, "angle_scan_summary")
        assert summary["mean_splitting_hz"] == pytest.approx(49e6, rel=0.02)
        assert summary["max_center_deviation_hz"] < 1e-6 * 49e6

    def test_single_angle_equals_spectrum(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", preset="rb87-36s-36p12", mw_theta=30)
        assert run("spectrum", cfg, "--points", 101, "--out", tmp_path / "s.csv") == 0
        argv = ["angle-scan", "--preset", "rb87-36s-36p12", "--points", 101]
        argv += ["--theta-start", 30, "--theta-stop", 30, "--out", tmp_path / "a.csv"]
        assert run(*argv) == 0
        spec = [r[1] for r in read_csv(tmp_path / "s.csv")[1:]]
        scan = [r[2] for r in read_csv(tmp_path / "a.csv")[1:]]
        assert spec == scan

    def test_bad_step(self, tmp_path):
        argv = ["angle-scan", "--preset", "rb87-36s-36p12", "--theta-step", 0, "--out", tmp_path / "a.csv"]
        assert run(*argv) == 2


def test_config_dict_round_trip():
    cfg = config_from_dict({"preset": "rb87-36s-36p32", "mw_theta": 45, "probe_detuning": 1e6})
    again = config_from_dict(config_to_dict(cfg))
    assert again == cfg


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rydspec", "neig", "--j", "1/2", "--jp", "1/2"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "2"
