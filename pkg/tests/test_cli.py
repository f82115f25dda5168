import json
import subprocess
import sys

import pytest

from spacings_gof.cli import main


@pytest.fixture
def sample_file(tmp_path):
    p = tmp_path / "sample.txt"
    p.write_text("0.25\n0.5\n0.75\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestTestVerb:
    def test_greenwood_example(self, capsys, sample_file):
        code, out = run(capsys, "test", sample_file, "--h", "greenwood",
                        "--m", "2", "--mode", "overlapping", "--json")
        assert code == 0
        d = json.loads(out)
        assert d["statistic"] == 16.0
        assert d["standardized"] == pytest.approx(-0.894427190999916, rel=1e-12)
        assert d["reject"] is False

    def test_pd1_normalized_zero(self, capsys, sample_file):
        code, out = run(capsys, "test", sample_file, "--h", "pd:1", "--m", "2",
                        "--scaling", "normalized", "--json")
        assert code == 0
        d = json.loads(out)
        assert d["statistic"] == pytest.approx(0.0, abs=1e-12)
        assert d["reject"] is False

    def test_out_of_range_exits_2(self, capsys, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0.5\n1.5\n")
        code, _ = run(capsys, "test", str(p), "--h", "greenwood", "--m", "1")
        assert code == 2

    def test_missing_file_exits_2(self, capsys):
        code, _ = run(capsys, "test", "/nonexistent.txt", "--h", "greenwood",
                      "--m", "1")
        assert code == 2

    def test_tied_sample_moran_exits_3(self, capsys, tmp_path):
        p = tmp_path / "tied.txt"
        p.write_text("0.3\n0.3\n0.8\n")
        code, _ = run(capsys, "test", str(p), "--h", "moran", "--m", "1")
        assert code == 3

    def test_rao_warns(self, capsys, sample_file):
        code, out = run(capsys, "test", sample_file, "--h", "rao", "--m", "2",
                        "--json")
        assert code == 0
        assert "derivative" in json.loads(out)["warnings"][0]


class TestTables:
    def test_moments_columns(self, capsys):
        code, out = run(capsys, "moments", "--h", "greenwood", "--m", "1..3",
                        "--json")
        assert code == 0
        rows = json.loads(out)
        assert [r["sigma2"] for r in rows] == [4.0, 20.0, 56.0]
        assert [r["sigma_star2"] for r in rows] == [4.0, 12.0, 24.0]

    def test_moments_m_list_forms(self, capsys):
        code, out = run(capsys, "moments", "--h", "moran", "--m", "1,3", "--json")
        assert code == 0
        assert [r["m"] for r in json.loads(out)] == [1, 3]

    def test_efficacy_limit(self, capsys):
        code, out = run(capsys, "efficacy", "--h", "greenwood", "--m", "1000000",
                        "--mode", "overlapping", "--json")
        assert code == 0
        assert json.loads(out)[0]["e2"] == pytest.approx(0.75, abs=1e-5)

    def test_are_regime(self, capsys):
        code, out = run(capsys, "are", "--h1", "greenwood", "--m1", "10",
                        "--mode1", "overlapping", "--h2", "greenwood",
                        "--m2", "10", "--mode2", "disjoint",
                        "--c1", "1", "--p1", "0.5", "--c2", "1", "--p2", "0.5",
                        "--json")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(1.5)

    def test_are_partial_regime_exits_2(self, capsys):
        code, _ = run(capsys, "are", "--h1", "greenwood", "--m1", "10",
                      "--h2", "greenwood", "--m2", "10", "--c1", "1")
        assert code == 2

    def test_are_finite(self, capsys):
        code, out = run(capsys, "are", "--h1", "greenwood", "--m1", "2",
                        "--mode1", "overlapping", "--h2", "greenwood",
                        "--m2", "2", "--mode2", "disjoint", "--json")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(1.2, rel=1e-10)


class TestSimulate:
    def test_golden_bytes(self, capsys):
        args = ("simulate", "null", "--h", "greenwood", "--m", "5", "--n", "500",
                "--reps", "200", "--seed", "7", "--json")
        code1, out1 = run(capsys, *args)
        code2, out2 = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_json_csv_equivalence(self, capsys):
        import csv
        import io

        args = ("simulate", "null", "--h", "greenwood", "--m", "5", "--n", "500",
                "--reps", "200", "--seed", "7")
        _, jout = run(capsys, *args, "--json")
        _, cout = run(capsys, *args, "--csv")
        jd = json.loads(jout)
        rows = list(csv.DictReader(io.StringIO(cout)))
        assert len(rows) == 1
        for key in ("empirical_mean", "empirical_var", "ks_to_normal",
                    "rejection_rate"):
            assert float(rows[0][key]) == jd[key]

    def test_power_null_path_near_alpha(self, capsys):
        code, out = run(capsys, "simulate", "power", "--h", "greenwood",
                        "--m", "5", "--n", "500", "--reps", "500", "--seed", "3",
                        "--path", "cos:1:0", "--json")
        assert code == 0
        d = json.loads(out)
        assert abs(d["rejection_rate"] - 0.05) < 3 * (0.05 * 0.95 / 500) ** 0.5

    def test_corr_verb(self, capsys):
        code, out = run(capsys, "simulate", "corr", "--h", "moran", "--m", "5",
                        "--n", "1000", "--reps", "300", "--seed", "5", "--json")
        assert code == 0
        d = json.loads(out)
        assert abs(d["correlations"]["empirical"] - d["correlations"]["mu_m"]) < 0.15

    def test_raw_csv(self, capsys, tmp_path):
        raw = tmp_path / "raw.csv"
        code, _ = run(capsys, "simulate", "null", "--h", "greenwood", "--m", "5",
                      "--n", "500", "--reps", "120", "--seed", "7",
                      "--raw-csv", str(raw), "--json")
        assert code == 0
        lines = raw.read_text().strip().split("\n")
        assert lines[0] == "rep,statistic,standardized,reject"
        assert len(lines) == 121

    def test_out_file(self, capsys, tmp_path):
        out_file = tmp_path / "report.json"
        code, out = run(capsys, "simulate", "null", "--h", "greenwood",
                        "--m", "5", "--n", "500", "--reps", "150", "--seed", "2",
                        "--json", "--out", str(out_file))
        assert code == 0
        assert out_file.read_text() == out


class TestDeterminismAcrossProcesses:
    def test_thread_env_does_not_change_bytes(self, sample_file):
        cmd = [sys.executable, "-m", "spacings_gof.cli", "simulate", "null",
               "--h", "moran", "--m", "5", "--n", "500", "--reps", "200",
               "--seed", "11", "--json"]
        outs = []
        for threads in ("1", "4"):
            r = subprocess.run(cmd, capture_output=True,
                               env={"SPACINGS_GOF_THREADS": threads,
                                    "PATH": "/usr/bin:/bin:/usr/local/bin"})
            assert r.returncode == 0, r.stderr
            outs.append(r.stdout)
        assert outs[0] == outs[1]
