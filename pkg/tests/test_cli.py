"""End-to-end command-line tests.

Every subcommand runs in-process through main(argv) against temp
directories. The exit-code contract is pinned down on all branches:
0 for a holding verdict or plain success, 2 for a failing verdict, 1 for
usage and numeric errors. Artifact outputs are re-read and re-run to
check both content and byte-level determinism.
"""
from __future__ import annotations

import argparse
import json

import numpy as np
import pytest

from magflow.cli import RunConfig, main
from magflow.profiles import load_profile, validate


def _knot_json(tmp_path, name, pts):
    path = tmp_path / name
    path.write_text(json.dumps([[float(c) for c in row] for row in pts]))
    return str(path)


def _circle4(P, e1, e2, rad, n=512):
    s = np.linspace(0.0, 2.0 * np.pi, n + 1)
    return (np.cos(rad) * np.asarray(P)[None, :]
            + np.sin(rad) * (np.cos(s)[:, None] * np.asarray(e1)
                             + np.sin(s)[:, None] * np.asarray(e2)))


class TestUsageErrors:
    def test_no_arguments(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_unknown_group(self, capsys):
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_help_exits_clean(self, capsys):
        assert main(["--help"]) == 0
        assert "magflow" in capsys.readouterr().out

    def test_missing_profile_file(self, capsys):
        assert main(["profile", "check", "/nonexistent/prof.json"]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_state_string(self, capsys, tmp_path):
        rc = main(["flow", "trace", "sphere", "--m", "1",
                   "--state", "1.0,0.3", "--horizon", "1"])
        assert rc == 1
        capsys.readouterr()


class TestProfileCommands:
    def test_make_sphere_artifacts(self, capsys, tmp_path):
        out = tmp_path / "sphere.json"
        table = tmp_path / "sphere.csv"
        rc = main(["profile", "make", "sphere", "--out", str(out),
                   "--table", str(table), "--samples", "32"])
        assert rc == 0
        assert ": OK" in capsys.readouterr().out
        p = load_profile(str(out))
        assert p.gamma(1.0) == pytest.approx(np.sin(1.0), rel=1e-12)
        lines = table.read_text().splitlines()
        assert lines[0] == "t,gamma,dgamma,curvature"
        assert len(lines) == 33

    def test_check_builtin_ok(self, capsys):
        assert main(["profile", "check", "ellipsoid:1.5"]) == 0
        capsys.readouterr()

    def test_check_invalid_profile(self, capsys, tmp_path):
        t = np.linspace(0.0, np.pi, 201)
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kind": "samples", "t": list(t),
                                   "gamma": list(0.8 * np.sin(t))}))
        assert main(["profile", "check", str(bad)]) == 2
        assert "INVALID" in capsys.readouterr().out


class TestContactBounds:
    def test_sphere_json(self, capsys, tmp_path):
        out = tmp_path / "bounds.json"
        rc = main(["contact", "bounds", "sphere", "--json-out", str(out)])
        assert rc == 0
        capsys.readouterr()
        rep = json.loads(out.read_text())
        assert rep["m_gamma"] < 1e-8

    def test_spindle_bounds(self, capsys, tmp_path):
        out = tmp_path / "bounds.json"
        rc = main(["contact", "bounds", "spindle:0.1:0.2",
                   "--json-out", str(out)])
        assert rc == 0
        capsys.readouterr()
        rep = json.loads(out.read_text())
        assert rep["m_gamma"] > 1.0


class TestActionScan:
    def test_sphere_scan_content(self, capsys, tmp_path):
        out = tmp_path / "scan.csv"
        rc = main(["action", "scan", "sphere", "--m", "1",
                   "--levels", "9", "--out", str(out)])
        assert rc == 0
        assert "min action 2" in capsys.readouterr().out
        lines = out.read_text().splitlines()
        assert lines[0] == "I,t_minus,t_plus,s_half,action"
        acts = [float(r.split(",")[4]) for r in lines[1:]]
        assert len(acts) == 11             # 9 interior levels + 2 latitudes
        assert np.allclose(acts, 2.0, rtol=1e-8)

    def test_deterministic_output(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["action", "scan", "ellipsoid:1.3", "--m", "0.7",
                         "--levels", "7", "--out", str(path)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()


class TestFlowTrace:
    def test_trace_csv(self, capsys, tmp_path):
        out = tmp_path / "trace.csv"
        rc = main(["flow", "trace", "sphere", "--m", "1",
                   "--state", "1.2,0.3,0", "--horizon", "5",
                   "--n-out", "51", "--out", str(out)])
        assert rc == 0
        assert "pole_terminated=False" in capsys.readouterr().out
        lines = out.read_text().splitlines()
        assert lines[0] == "s,t,phi,theta,I_hat"
        assert len(lines) == 52
        I = [float(r.split(",")[4]) for r in lines[1:]]
        assert max(I) - min(I) < 1e-9


class TestCzCommands:
    def test_latitude_index(self, capsys):
        rc = main(["cz", "latitude", "sphere", "--m", "0.05"])
        assert rc == 0
        assert "cz index 3" in capsys.readouterr().out

    def test_report_holds(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["cz", "report", "sphere", "--m", "0.05",
                   "--levels", "9", "--rho-orbits", "2",
                   "--json-out", str(out)])
        assert rc == 0
        capsys.readouterr()
        rep = json.loads(out.read_text())
        assert rep["verdict"] is True
        assert rep["lhs"] < rep["rhs"]

    def test_report_fails_at_large_m(self, capsys):
        rc = main(["cz", "report", "sphere", "--m", "2",
                   "--levels", "9", "--rho-orbits", "1"])
        assert rc == 2
        assert "fails" in capsys.readouterr().out


class TestHopfCommands:
    def test_verify(self, capsys):
        rc = main(["hopf", "verify", "--samples", "200"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("[ok ]") == 4
        assert "FAIL" not in out

    def test_link_unlinked_circles(self, capsys, tmp_path):
        P = [1.0, 0, 0, 0]
        e1 = [0.0, 1, 0, 0]
        e2 = [0.0, 0, 1, 0]
        k1 = _knot_json(tmp_path, "k1.json", _circle4(P, e1, e2, 0.4))
        k2 = _knot_json(tmp_path, "k2.json",
                        _circle4([-1.0, 0, 0, 0], e1, e2, 0.4))
        assert main(["hopf", "link", k1, k2]) == 0
        assert "linking number 0" in capsys.readouterr().out

    def test_lift_closed_latitude_double(self, capsys, tmp_path):
        csv = tmp_path / "path.csv"
        out = tmp_path / "lift.json"
        th = np.linspace(0.0, 4.0 * np.pi, 1601)
        rows = ["t,phi,theta"]
        rows += ["%.12g,%.12g,%.12g" % (np.pi / 4, np.pi / 2, v)
                 for v in th]
        csv.write_text("\n".join(rows) + "\n")
        rc = main(["hopf", "lift", str(csv), "--out", str(out)])
        assert rc == 0
        assert "closes after one traversal" in capsys.readouterr().out
        U = np.asarray(json.loads(out.read_text()))
        assert U.shape == (1601, 4)
        assert np.allclose(np.linalg.norm(U, axis=1), 1.0, atol=1e-9)

    def test_lift_open_path(self, capsys, tmp_path):
        csv = tmp_path / "open.csv"
        th = np.linspace(0.0, np.pi, 401)
        rows = ["t,phi,theta"]
        rows += ["%.12g,%.12g,%.12g" % (np.pi / 4, np.pi / 2, v)
                 for v in th]
        csv.write_text("\n".join(rows) + "\n")
        assert main(["hopf", "lift", str(csv)]) == 0
        assert "open path lifted" in capsys.readouterr().out

    def test_lift_missing_column(self, capsys, tmp_path):
        csv = tmp_path / "cols.csv"
        csv.write_text("t,phi\n0.5,0.1\n0.6,0.2\n")
        assert main(["hopf", "lift", str(csv)]) == 1
        assert "missing" in capsys.readouterr().err


class TestReproCommands:
    def test_ellipsoids_small(self, capsys, tmp_path):
        out = tmp_path / "table.csv"
        rc = main(["repro", "ellipsoids", "--ratios", "1,2",
                   "--m", "0.5", "--levels", "9", "--out", str(out)])
        assert rc == 0
        assert "verdict: all actions positive on 2" in \
            capsys.readouterr().out
        lines = out.read_text().splitlines()
        assert lines[0] == "ratio,m,n_levels,min_action,argmin_I,all_positive"
        assert len(lines) == 3
        assert all(r.endswith("True") for r in lines[1:])

    def test_noncon_witness(self, capsys, tmp_path):
        out = tmp_path / "witness.json"
        rc = main(["repro", "noncon", "--delta", "0.1", "--eps", "0.9",
                   "--json-out", str(out)])
        assert rc == 0
        assert "not_contact_witness" in capsys.readouterr().out
        rep = json.loads(out.read_text())
        assert rep["action"] < -0.5

    def test_bigm_profile(self, capsys, tmp_path):
        out = tmp_path / "spindle.json"
        rc = main(["repro", "bigm", "--target", "3", "--out", str(out)])
        assert rc == 0
        assert "verdict: True" in capsys.readouterr().out
        p = load_profile(str(out))
        assert validate(p).passed

    def test_bigm_unreachable_target(self, capsys):
        # cap radius below representable resolution is a numeric error
        assert main(["repro", "bigm", "--target", "1e9"]) == 1
        capsys.readouterr()


class TestRunConfig:
    def test_env_overrides_jobs_flag(self, monkeypatch):
        ns = argparse.Namespace(jobs=4)
        monkeypatch.setenv("MAGFLOW_JOBS", "2")
        assert RunConfig.from_args(ns).jobs == 2
        monkeypatch.delenv("MAGFLOW_JOBS")
        assert RunConfig.from_args(ns).jobs == 4

    def test_none_flags_keep_defaults(self):
        ns = argparse.Namespace(n_levels=None, band=None, out=None)
        cfg = RunConfig.from_args(ns)
        assert cfg.n_levels == 33
        assert cfg.band == 1e-6
