import csv
import io
from contextlib import redirect_stdout

import pytest

from polarbd.cli import main


def run_cli(args):
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = main(args)
    return rc, buf.getvalue()


class TestConstruct:
    def test_golden_output(self):
        rc, out = run_cli(["construct", "--n", "8", "--k", "2", "--id-len", "2",
                           "--id-mode", "3"])
        assert rc == 0
        assert out.splitlines() == [
            "N=8",
            "K=2",
            "id_mode=3",
            "info=6,7",
            "id=3,5",
            "frozen=0,1,2,4",
        ]

    def test_mode1_default(self):
        rc, out = run_cli(["construct", "--n", "8", "--k", "2", "--id-len", "2"])
        assert rc == 0
        lines = dict(line.split("=") for line in out.splitlines())
        assert lines["info"] == "6,7"
        assert lines["id"] == "3,5"

    def test_bad_params_exit_nonzero(self):
        rc, _ = run_cli(["construct", "--n", "8", "--k", "7", "--id-len", "2"])
        assert rc == 2
        rc, _ = run_cli(["construct", "--n", "12", "--k", "2"])
        assert rc == 2


class TestLatency:
    def test_reference_table(self):
        rc, out = run_cli(["latency", "--t-sort", "5"])
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["n_sclmax"] for r in rows] == ["1", "2", "3", "4", "5"]
        worst = {int(r["n_sclmax"]): float(r["worst_cycles"]) for r in rows}
        for n, ref in {1: 14720, 2: 8330, 3: 5555, 4: 4710, 5: 3620}.items():
            assert abs(worst[n] - ref) <= 15
        us = {int(r["n_sclmax"]): float(r["worst_us"]) for r in rows}
        assert round(us[5], 1) == 3.6

    def test_figures(self, tmp_path):
        rc, _ = run_cli(["latency", "--n-sclmax", "1", "2",
                         "--figures", str(tmp_path / "figs")])
        assert rc == 0
        assert (tmp_path / "figs" / "latency.png").exists()

    def test_out_file(self, tmp_path):
        dest = tmp_path / "lat.csv"
        rc, out = run_cli(["latency", "--n-sclmax", "3", "--out", str(dest)])
        assert rc == 0
        assert out == ""
        assert dest.read_text().startswith("n_sclmax,")


class TestSimulate:
    ARGS = ["simulate", "--n1", "32", "--n2", "64", "--k", "8", "--id-len", "4",
            "--c1", "8", "--c2", "3", "--l1", "2", "--lmax", "4",
            "--snr-start", "3", "--snr-stop", "5", "--snr-step", "2",
            "--trials", "24", "--seed", "5"]

    def test_csv_to_stdout(self):
        rc, out = run_cli(self.ARGS)
        assert rc == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 2
        assert rows[0]["snr_db"] == "3"
        assert rows[0]["trials"] == "24"

    def test_out_and_figures(self, tmp_path):
        dest = tmp_path / "sweep.csv"
        figs = tmp_path / "figs"
        rc, _ = run_cli(self.ARGS + ["--out", str(dest), "--figures", str(figs)])
        assert rc == 0
        assert dest.exists()
        for name in ("bler_mdr.png", "far.png", "estimated_fraction.png"):
            assert (figs / name).exists()

    def test_early_stop_flag_parses(self):
        rc, out = run_cli(self.ARGS + ["--early-stop", "off", "--ue-sent", "off"])
        assert rc == 0
        row = next(csv.DictReader(io.StringIO(out)))
        assert row["mdr"] == "nan"  # no sent trials

    def test_bad_flag_value(self):
        with pytest.raises(SystemExit):
            main(self.ARGS + ["--early-stop", "maybe"])

    def test_bad_step(self):
        rc, _ = run_cli(["simulate", "--snr-start", "1", "--snr-stop", "2",
                         "--snr-step", "0", "--trials", "4"])
        assert rc == 2


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# small smoke configuration\n"
            "n1=32\nn2=64\nk=8\nid-len=4\nc1=8\nc2=3\nl1=2\nlmax=4\n"
            "snr-start=4\nsnr-stop=4\ntrials=8\nseed=7\nue-sent=on\n"
        )
        rc, out = run_cli(["simulate", "--config", str(cfg)])
        assert rc == 0
        row = next(csv.DictReader(io.StringIO(out)))
        assert row["snr_db"] == "4" and row["trials"] == "8"

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("n=8\nk=2\nid-len=2\nid-mode=1\n")
        rc, out = run_cli(["construct", "--config", str(cfg), "--id-mode", "3"])
        assert rc == 0
        assert "id_mode=3" in out
        assert "id=3,5" in out

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nonsense=1\n")
        rc, _ = run_cli(["construct", "--config", str(cfg), "--n", "8", "--k", "2"])
        assert rc == 2

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just some words\n")
        rc, _ = run_cli(["construct", "--config", str(cfg), "--n", "8", "--k", "2"])
        assert rc == 2
