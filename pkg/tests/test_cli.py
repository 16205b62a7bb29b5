import json

import pytest

from mqpgsim import __version__
from mqpgsim.cli import main
from mqpgsim.io import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestMubs:
    @pytest.mark.parametrize("d,n", [(3, 4), (5, 6)])
    def test_basis_count(self, capsys, d, n):
        code, out, _ = run(capsys, "mubs", str(d))
        assert code == 0
        doc = json.loads(out)
        assert doc["n_bases"] == n and len(doc["bases"]) == n
        assert doc["metadata"]["version"] == __version__

    def test_non_prime(self, capsys):
        code, _, err = run(capsys, "mubs", "4")
        assert code == 1
        assert "d must be an odd prime" in err

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "--format", "csv", "mubs", "3")
        meta, header, rows = read_csv(out)
        assert header == ["basis", "vector", "component", "re", "im"]
        assert len(rows) == 4 * 3 * 3


class TestCompilePump:
    def test_ffb_d5_summary(self, capsys):
        code, out, _ = run(capsys, "compile-pump", "--preset", "table1-d5-ffb", "--basis", "1")
        assert code == 0
        doc = json.loads(out)
        assert doc["bin_count"] == 9
        assert doc["span_THz"] <= doc["pump_bandwidth_limit_THz"]

    def test_standard_d3_freqbins(self, capsys):
        code, out, _ = run(capsys, "compile-pump", "--preset", "table1-d3-freqbins", "--basis", "2")
        assert json.loads(out)["bin_count"] == 9

    def test_writes_files(self, tmp_path, capsys):
        code, _, _ = run(capsys, "compile-pump", "--preset", "table1-d3-ffb", "--basis", "1",
                         "--out", str(tmp_path))
        assert code == 0
        meta, header, rows = read_csv((tmp_path / "pump_b1.csv").read_text())
        assert header == ["frequency_THz", "amplitude_re", "amplitude_im"]
        assert meta["config"]["preset"] == "table1-d3-ffb"
        assert (tmp_path / "pump_b1.json").exists()

    def test_span_over_limit_fails(self, tmp_path, capsys):
        cfg = tmp_path / "c.toml"
        cfg.write_text('preset = "table1-d5-ffb"\n[device]\npump_bandwidth_limit = 2.0\n')
        code, _, err = run(capsys, "compile-pump", "--config", str(cfg), "--basis", "1")
        assert code == 1
        assert "bandwidth" in err

    def test_unsortable_basis(self, capsys):
        code, _, err = run(capsys, "compile-pump", "--preset", "table1-d3-ffb", "--basis", "3")
        assert code == 1


class TestSimulate:
    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_bin_routes_to_channel(self, capsys, j):
        code, out, _ = run(capsys, "simulate", "--preset", "table1-d3-freqbins",
                           "--state", f"0:{j}")
        p = json.loads(out)["probabilities"]
        assert max(range(3), key=p.__getitem__) == j

    def test_zero_input(self, capsys):
        code, out, _ = run(capsys, "simulate", "--preset", "table1-d3-ffb", "--coeffs", "0,0,0",
                           "--counts")
        doc = json.loads(out)
        assert code == 0
        assert doc["probabilities"] == [0.0, 0.0, 0.0]
        assert doc["counts"] == [0, 0, 0]

    def test_same_seed_same_counts(self, capsys):
        args = ("simulate", "--preset", "table1-d3-ffb", "--state", "1:0", "--basis", "1",
                "--counts", "--seed", "11")
        _, a, _ = run(capsys, *args)
        _, b, _ = run(capsys, *args)
        assert a == b
        _, c, _ = run(capsys, *args[:-1], "12")
        assert json.loads(a)["counts"] != json.loads(c)["counts"]

    def test_bad_state(self, capsys):
        code, _, err = run(capsys, "simulate", "--preset", "table1-d3-ffb", "--state", "9:9")
        assert code == 1

    def test_spectrum_file(self, tmp_path, capsys):
        run(capsys, "simulate", "--preset", "table1-d3-ffb", "--out", str(tmp_path))
        meta, header, rows = read_csv((tmp_path / "spectrum.csv").read_text())
        assert header == ["frequency_THz", "intensity", "smeared"]


class TestTomographyCommand:
    def test_ffb_d3(self, tmp_path, capsys):
        code, _, _ = run(capsys, "tomography", "--preset", "table1-d3-ffb", "--out", str(tmp_path))
        assert code == 0
        doc = json.loads((tmp_path / "tomography.json").read_text())
        assert doc["mean_fidelity"] >= 0.99
        assert sorted(p.name for p in tmp_path.glob("crosstalk_b*.csv")) == [
            "crosstalk_b0.csv", "crosstalk_b1.csv", "crosstalk_b2.csv"]

    def test_byte_identical_reruns(self, tmp_path, capsys):
        for sub in ("a", "b"):
            run(capsys, "tomography", "--preset", "table1-d3-ffb", "--seed", "3",
                "--out", str(tmp_path / sub))
        assert (tmp_path / "a" / "tomography.json").read_bytes() == (
            tmp_path / "b" / "tomography.json").read_bytes()

    def test_malformed_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.toml"
        cfg.write_text("[alphabet]\nkind = 3\n")
        code, _, err = run(capsys, "tomography", "--config", str(cfg))
        assert code == 1
        assert "line 2" in err and "[alphabet].kind" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "tomography", "--config", str(tmp_path / "none.toml"))
        assert code == 1

    def test_non_convergence_exit_code(self, monkeypatch, capsys):
        import dataclasses

        import mqpgsim.experiment as exp

        orig = exp.reconstruct_povm
        monkeypatch.setattr(exp, "reconstruct_povm",
                            lambda *a, **k: dataclasses.replace(orig(*a, **k), converged=False))
        code, _, err = run(capsys, "tomography", "--preset", "table1-d3-ffb")
        assert code == 2
        assert "converge" in err


class TestSweepCommand:
    def test_csv(self, tmp_path, capsys):
        cfg = tmp_path / "s.toml"
        cfg.write_text("[sweep]\ndimensions = [3]\nratios = [30.0, 100.0]\nn_points = 1024\n")
        code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--format", "csv",
                           "--threads", "2")
        assert code == 0
        meta, header, rows = read_csv(out)
        assert header == ["d", "ratio", "error", "feasible"]
        assert len(rows) == 2
        assert meta["config"]["sweep"]["ratios"] == [30.0, 100.0]

    def test_bad_threads(self, tmp_path, capsys):
        cfg = tmp_path / "s.toml"
        cfg.write_text("[sweep]\ndimensions = [3]\nratios = [100.0]\n")
        code, _, _ = run(capsys, "sweep", "--config", str(cfg), "--threads", "0")
        assert code == 1
