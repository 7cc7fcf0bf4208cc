import json
import subprocess
import sys

import numpy as np
import pytest

from crithardy import cli


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr().out
    return code, out


class TestCommands:
    def test_ea_value(self, capsys):
        code, out = run_cli(["ea", "--a", "0.5"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["eigenvalue"] == pytest.approx(1.779357881, rel=1e-6)
        assert doc["residual"] < 1e-8
        assert doc["meta"]["config_hash"]

    def test_ea_sweep_csv(self, capsys):
        code, out = run_cli(["ea", "sweep", "--num", "4"], capsys)
        assert code == 0
        lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert lines[0] == "a,eigenvalue,residual"
        assert len(lines) == 5

    def test_radial(self, capsys):
        code, out = run_cli(["radial", "--N", "3"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["infimum_estimate"] == pytest.approx(8 / 27, abs=0.02)

    def test_weight_sweep(self, capsys):
        code, out = run_cli(["weight", "sweep", "--num", "3"], capsys)
        assert code == 0
        assert "x_norm,weight,taylor_gap" in out

    def test_domain_classify(self, tmp_path, capsys):
        path = tmp_path / "quad.json"
        from crithardy import DomainSpec
        path.write_text(json.dumps(DomainSpec.quadratic_cusp(0.5).to_json()))
        code, out = run_cli(["domain", "classify", "--domain", str(path)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["regime"] == "Attained"

    def test_quotient_eval_radial(self, tmp_path, capsys):
        path = tmp_path / "fn.json"
        path.write_text(json.dumps({
            "type": "radial", "R": 1.0, "N": 2,
            "r": [0.25, 0.5, 0.75], "values": [0.0, 1.0, 0.0]}))
        code, out = run_cli(["quotient", "eval", "--input", str(path)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["ratio"] == pytest.approx(5.323394757, rel=1e-8)

    def test_upperbound_families(self, capsys):
        for fam in ("phi_alpha", "psi_beta"):
            code, out = run_cli(["upperbound", "--family", fam,
                                 "--schedule", "3,4,5"], capsys)
            assert code == 0
            lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
            assert len(lines) == 4

    def test_rearrange(self, tmp_path, capsys):
        from crithardy import DomainSpec
        dpath = tmp_path / "half.json"
        dpath.write_text(json.dumps(DomainSpec.half_disk().to_json()))
        fpath = tmp_path / "fn.json"
        nr, nt = 8, 16
        r = np.linspace(0.1, 0.9, nr)
        vals = np.random.default_rng(0).uniform(0, 1, (nr, nt))
        fpath.write_text(json.dumps({"r": r.tolist(), "theta_count": nt,
                                     "values": vals.tolist()}))
        code, out = run_cli(["rearrange", "--domain", str(dpath),
                             "--fn", str(fpath)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["checks"]["equimeasurable"] is True
        assert doc["checks"]["polya_szego_margin"] >= -1e-9

    def test_constant_and_vtk(self, tmp_path, capsys):
        from crithardy import DomainSpec
        dpath = tmp_path / "ball.json"
        dpath.write_text(json.dumps(DomainSpec.ball(1.0).to_json()))
        vtk = tmp_path / "eig.vtk"
        code, out = run_cli(["constant", "--domain", str(dpath),
                             "--schedule", "4,8", "--h", "0.05",
                             "--emit-vtk", str(vtk)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert len(doc["per_n"]) == 2
        text = vtk.read_text()
        assert text.startswith("# vtk DataFile")
        assert "SCALARS eigenvector" in text

    def test_deterministic_output(self, tmp_path, capsys):
        from crithardy import DomainSpec
        dpath = tmp_path / "ball.json"
        dpath.write_text(json.dumps(DomainSpec.ball(1.0).to_json()))
        outs = []
        for tag in ("a", "b"):
            opath = tmp_path / f"out_{tag}.json"
            code, _ = run_cli(["constant", "--domain", str(dpath),
                               "--schedule", "4", "--h", "0.08",
                               "--out", str(opath)], capsys)
            assert code == 0
            # hash-relevant config excludes the output path
            doc = json.loads(opath.read_text())
            doc["meta"].pop("config_hash")
            outs.append(json.dumps(doc, sort_keys=True))
        assert outs[0] == outs[1]

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        from crithardy import DomainSpec
        dpath = tmp_path / "ball.json"
        dpath.write_text(json.dumps(DomainSpec.ball(1.0).to_json()))
        code = cli.main(["constant", "--domain", str(dpath),
                         "--schedule", "1"])
        assert code == 1

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "crithardy.cli", "--bogus-flag"],
            capture_output=True)
        assert proc.returncode == 2


class TestVerifyAll:
    def test_quick_matrix(self, capsys):
        code, out = run_cli(["verify-all", "--quick"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["all_pass"] is True
        names = {row["theorem"] for row in doc["rows"]}
        assert {"origin_interior", "interior_sphere", "strict_inequality",
                "attained", "cusp_nonattained", "angular_limit",
                "ball_constant"} <= names
