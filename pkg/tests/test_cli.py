import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from zoda import cli


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(
        "[experiment]\nname = c\ndimension = 4\nhorizon = 20\ntrials = 2\nseed = 3\nworkers = 1\n"
        f"[output]\ncsv = {tmp_path / 'c.csv'}\nsvg = {tmp_path / 'c.svg'}\n"
    )
    return p


class TestExitCodes:
    def test_run(self, cfg_file, tmp_path, capsys):
        assert cli.main(["run", str(cfg_file)]) == 0
        assert (tmp_path / "c.csv").exists() and (tmp_path / "c.svg").exists()
        assert "seed=3" in capsys.readouterr().out

    def test_run_config_errors(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2
        bad = tmp_path / "bad.cfg"
        bad.write_text("[schedule]\nkind = fixed_canceling\n")
        assert cli.main(["run", str(bad)]) == 2

    def test_usage_error(self):
        assert cli.main(["explode"]) == 2
        assert cli.main([]) == 2

    def test_verify_empty(self, tmp_path):
        assert cli.main(["verify", "--grid", "", "--out", str(tmp_path / "v.csv")]) == 0

    def test_verify_bad_grid(self, tmp_path):
        assert cli.main(["verify", "--grid", "d=abc", "--out", str(tmp_path / "v.csv")]) == 2

    def test_verify_canary(self, tmp_path):
        args = ["verify", "--grid", "checks=unbiasedness;d=3;n_moment=100000", "--out", str(tmp_path / "v.csv")]
        assert cli.main(args) == 0
        assert cli.main(args + ["--inject-scale-bug"]) == 1

    def test_hidden_flag(self, capsys):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args(["verify", "--help"])
        assert "inject" not in capsys.readouterr().out

    def test_runtime_abort(self, cfg_file, monkeypatch):
        from zoda import experiment
        from zoda.dual_averaging import RunAbort

        def boom(*a, **k):
            raise RunAbort(7, "test")

        monkeypatch.setattr(experiment, "run_experiment", boom)
        assert cli.main(["run", str(cfg_file)]) == 3


class TestSample:
    @pytest.mark.parametrize("dist", ["l1sphere", "l1ball", "l2sphere"])
    def test_output(self, dist, capsys):
        assert cli.main(["sample", "--dist", dist, "--d", "3", "--n", "50", "--seed", "1"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["x1", "x2", "x3"] and len(rows) == 51
        x = np.array(rows[1:], float)
        if dist == "l1sphere":
            np.testing.assert_allclose(np.abs(x).sum(axis=1), 1.0, atol=1e-12)
        elif dist == "l1ball":
            assert np.abs(x).sum(axis=1).max() < 1.0
        else:
            np.testing.assert_allclose((x * x).sum(axis=1), 1.0, atol=1e-12)

    def test_bad(self):
        assert cli.main(["sample", "--dist", "l1sphere", "--d", "0", "--n", "1"]) == 2
        assert cli.main(["sample", "--dist", "cube", "--d", "2", "--n", "1"]) == 2


class TestReferenceMin:
    def test_prints_value(self, cfg_file, capsys):
        assert cli.main(["reference-min", str(cfg_file)]) == 0
        out = capsys.readouterr().out
        assert abs(float(out.split("f_star=")[1].split()[0]) - 0.9) < 1e-9

    def test_wrong_objective(self, tmp_path):
        p = tmp_path / "d.cfg"
        p.write_text("[experiment]\ngeometry = squared_l2_ball\n[objective]\nname = distance\n")
        assert cli.main(["reference-min", str(p)]) == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "zoda.cli", "sample", "--dist", "l1sphere", "--d", "2", "--n", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("x1,x2")
