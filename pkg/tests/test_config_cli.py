from __future__ import annotations

import csv
import json
import textwrap

import pytest

from cpmlc.cli import EXIT_CONFIG, EXIT_UNBRACKETED, EXIT_UNRESOLVED, main
from cpmlc.config import ConfigError, load, loads, parse_grid, with_overrides

ID_CONFIG = """
[scheme]
kind = cp-mlc-id
code = ebch-128-106
flipping_set = t0+t1
iterations = 3
damping = 0.3, 1.0, 1.0
interleaver_size = 8

[channel]
kind = awgn
seed = 11

[experiment]
snr = 3.0:3.5:0.25
target_ber = 1e-2
bracket = 1.0, 6.0
tol = 0.25
min_errors = 30
min_frames = 20
max_frames = 400
block_frames = 20
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


class TestConfig:
    def test_full_file(self, tmp_path):
        run = load(write(tmp_path, ID_CONFIG))
        s = run.scheme
        assert (s.kind, s.d, s.code.name, s.iterations) == ("cp-mlc-id", 3, "ebch-128-106", 3)
        assert s.damping == (0.3, 1.0, 1.0)
        assert [str(x) for x in s.interleavers] == ["identity", "digit_swap(8)", "identity"]
        assert s.bypass_includes_channel_llr is False
        assert run.channel.master_seed == 11
        e = run.experiment
        assert e.snr_grid == (3.0, 3.25, 3.5)
        assert e.bracket == (1.0, 6.0)
        assert e.rule.min_bit_errors == 30 and e.rule.max_frames == 400

    def test_defaults(self):
        run = loads("[scheme]\nkind = concatenated\n")
        assert run.scheme.code.name == "ebch-128-113"
        assert run.scheme.d == 3
        assert str(run.scheme.osd_spec) == "t0+t1+t2(40,29)"
        run = loads("[scheme]\nkind = cp-mlc-id\niterations = 6\n")
        assert run.scheme.damping == (0.2, 0.3, 0.5, 0.7, 0.9, 1.0)
        assert run.scheme.interleavers[1].size == 128

    def test_explicit_interleavers_and_flag(self):
        run = loads(textwrap.dedent("""
            [scheme]
            kind = cp-mlc-id
            interleavers = identity, random_involution(8, 4), identity
            bypass_includes_channel_llr = yes
        """))
        assert str(run.scheme.interleavers[1]) == "random_involution(8,4)"
        assert run.scheme.bypass_includes_channel_llr

    def test_bsc_channel(self):
        run = loads("[scheme]\nkind = cp-mlc-id\n[channel]\nkind = bsc\np = 0.01\n")
        assert run.channel.kind == "bsc" and run.channel.p == 0.01

    @pytest.mark.parametrize(
        "text",
        [
            "[scheme]\nkind = turbo\n",
            "[scheme]\nd = 3\n",
            "[channel]\nseed = 1\n",
            "[scheme]\nkind = cp-mlc-id\ncolour = red\n",
            "[scheme]\nkind = cp-mlc-id\niterations = 4\n",
            "[scheme]\nkind = cp-mlc-id\ninterleavers = identity\ninterleaver_size = 8\n",
            "[scheme]\nkind = cp-mlc-id\ncode = ebch-128-100\n",
            "[scheme]\nkind = concatenated\nbypass_includes_channel_llr = maybe\n",
            "[scheme]\nkind = concatenated\n[extra]\na = 1\n",
            "[scheme]\nkind = concatenated\n[experiment]\nbracket = 1\n",
            "[scheme]\nkind = concatenated\n[experiment]\nsnr = 5:4:1\n",
            "not an ini file",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            loads(text)

    def test_grid(self):
        assert parse_grid("4, 4.5,5") == (4.0, 4.5, 5.0)
        assert parse_grid("0:1:0.5") == (0.0, 0.5, 1.0)

    def test_overrides(self, tmp_path):
        run = load(write(tmp_path, ID_CONFIG))
        r2 = with_overrides(run, seed=5, workers=3, min_errors=7, max_frames=10)
        assert r2.channel.master_seed == 5 and r2.experiment.workers == 3
        assert r2.experiment.rule.min_bit_errors == 7
        assert r2.experiment.rule.max_frames == 10 and r2.experiment.rule.min_frames == 10
        assert run.experiment.rule.max_frames == 400  # original untouched


class TestCli:
    def test_sweep_writes_csv_and_sidecar(self, tmp_path):
        cfg = write(tmp_path, ID_CONFIG)
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert [float(r["snr_db"]) for r in rows] == [3.0, 3.25, 3.5]
        meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
        assert meta["configs"][0]["scheme"]["kind"] == "cp-mlc-id"
        assert meta["configs"][0]["channel"]["seed"] == 11
        assert "package_version" in meta and "rng" in meta

    def test_sweep_seed_flag_is_deterministic(self, tmp_path):
        cfg = write(tmp_path, ID_CONFIG)
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        main(["sweep", "--config", str(cfg), "--seed", "4", "--snr", "3", "--out", str(a)])
        main(["sweep", "--config", str(cfg), "--seed", "4", "--snr", "3", "--out", str(b), "--workers", "2"])
        main(["sweep", "--config", str(cfg), "--seed", "5", "--snr", "3", "--out", str(c)])
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_sweep_to_stdout(self, tmp_path, capsys):
        cfg = write(tmp_path, ID_CONFIG)
        assert main(["sweep", "--config", str(cfg), "--snr", "3", "--fixed-frames"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("scheme,snr_db,frames")
        assert ",300," in lines[1]

    def test_threshold_and_ncg(self, tmp_path, capsys):
        cfg = write(tmp_path, ID_CONFIG)
        out = tmp_path / "t.csv"
        rc = main(["threshold", "--config", str(cfg), "--out", str(out), "--allow-unresolved"])
        assert rc == 0
        assert "required_snr_db=" in capsys.readouterr().out
        meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
        assert meta["summary"][0]["target_ber"] == 1e-2
        rc = main(["ncg", "--config", str(cfg), "--config", str(cfg), "--allow-unresolved"])
        text = capsys.readouterr().out
        assert rc == 0 and text.count("ncg_delta_db=0.0") == 2

    def test_unresolved_exit_code(self, tmp_path):
        cfg = write(tmp_path, ID_CONFIG)
        # 20 frames cannot deliver 10^6 errors
        rc = main(["threshold", "--config", str(cfg), "--min-errors", "1000000", "--max-frames", "20"])
        assert rc == EXIT_UNRESOLVED
        rc = main(["threshold", "--config", str(cfg), "--min-errors", "1000000", "--max-frames", "20",
                   "--allow-unresolved"])
        assert rc == 0

    def test_unbracketed_exit_code(self, tmp_path):
        text = ID_CONFIG.replace("bracket = 1.0, 6.0", "bracket = 8.0, 9.0")
        cfg = write(tmp_path, text)
        assert main(["threshold", "--config", str(cfg)]) == EXIT_UNBRACKETED

    def test_config_errors(self, tmp_path, capsys):
        assert main(["sweep", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
        bad = write(tmp_path, "[scheme]\nkind = nope\n", "bad.ini")
        assert main(["sweep", "--config", str(bad)]) == EXIT_CONFIG
        assert "error:" in capsys.readouterr().err

    def test_interleaver_sweep(self, tmp_path):
        text = ID_CONFIG + "sizes = 1, 8, 128\niteration_counts = 3\n"
        cfg = write(tmp_path, text)
        out = tmp_path / "ilv.csv"
        rc = main(["interleaver-sweep", "--config", str(cfg), "--out", str(out), "--allow-unresolved"])
        assert rc == 0
        rows = list(csv.DictReader(out.open()))
        assert [int(r["size"]) for r in rows] == [1, 8, 128]
        assert float(rows[-1]["snr_loss_db"]) == 0.0
        assert (tmp_path / "ilv.csv.meta.json").exists()

    def test_schedule_trace(self, tmp_path, capsys):
        assert main(["schedule-trace", "--d", "3", "--iterations", "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [l.split()[1] for l in lines] == ["j=1", "j=2", "j=1"]
        cfg = write(tmp_path, ID_CONFIG)
        assert main(["schedule-trace", "--config", str(cfg), "--snr", "4.0", "--frame", "2"]) == 0
        out = capsys.readouterr().out
        assert "osd flips=" in out and "info-bit errors" in out

    def test_module_entry_point(self):
        import subprocess
        import sys

        r = subprocess.run([sys.executable, "-m", "cpmlc", "--version"], capture_output=True, text=True)
        assert r.returncode == 0 and "0.1.0" in r.stdout
