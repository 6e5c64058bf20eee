import json
import subprocess
import sys

import numpy as np
import pytest

from tirwave.cli import main, parse_pairlist
from tirwave.imaging import Image, load_image, save_image, synthetic_scene


@pytest.fixture
def pair_dir(tmp_path):
    clean = synthetic_scene((32, 32), 1)
    save_image(clean, tmp_path / "clean.png", 16)
    save_image(Image(np.clip(clean.data + 0.05 * np.sin(np.arange(32))[None, :], 0, 1)),
               tmp_path / "noisy.png", 16)
    (tmp_path / "pairs.txt").write_text("clean.png,noisy.png\n")
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestPairList:
    def test_comments_and_blanks(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("# header\na.png,b.png\n\n  c.png\td.png  \n")
        pairs = parse_pairlist(p)
        assert pairs == [(str(tmp_path / "a.png"), str(tmp_path / "b.png")),
                         (str(tmp_path / "c.png"), str(tmp_path / "d.png"))]

    def test_absolute_paths_kept(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("/x/a.png,/x/b.png\n")
        assert parse_pairlist(p) == [("/x/a.png", "/x/b.png")]

    def test_empty(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("# nothing\n\n")
        with pytest.raises(ValueError, match="no pairs"):
            parse_pairlist(p)

    def test_three_fields(self, tmp_path):
        p = tmp_path / "l.txt"
        p.write_text("a,b\n# c\na,b,c\n")
        with pytest.raises(ValueError, match="line 3"):
            parse_pairlist(p)


class TestCommands:
    def test_energy_report_identity(self, tmp_path, capsys):
        save_image(synthetic_scene((32, 32), 2), tmp_path / "a.png", 16)
        (tmp_path / "l.txt").write_text("a.png,a.png\n")
        code, out, _ = run(["energy-report", tmp_path / "l.txt"], capsys)
        assert code == 0
        ratio_lines = [ln for ln in out.splitlines() if "ratio" in ln and not ln.startswith("#")]
        assert len(ratio_lines) == 6
        for ln in ratio_lines:
            assert ln.split()[1:] == ["100.00%"] * 4

    def test_energy_report_formats(self, pair_dir, capsys):
        code, out, _ = run(["energy-report", pair_dir / "pairs.txt", "--family", "db4,dtcwt",
                            "--format", "json", "--peak", "255"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["schema"] == 1 and [r["family"] for r in doc["rows"]] == ["db4", "dtcwt"]
        assert doc["scale"] == 65025.0
        code, out, _ = run(["energy-report", pair_dir / "pairs.txt", "--format", "csv",
                            "--out", pair_dir / "r.csv"], capsys)
        assert code == 0 and out == ""
        assert (pair_dir / "r.csv").read_text().startswith("family,levels,pairs,band")

    def test_loss_eval_identity(self, pair_dir, capsys):
        code, out, _ = run(["loss-eval", pair_dir / "clean.png", pair_dir / "clean.png",
                            "--format", "json"], capsys)
        rec = json.loads(out)
        assert code == 0 and rec["value"] == 0
        assert all(v == 0 for v in rec["components"].values())
        assert rec["weights"] == {"alpha": 1.0, "beta": 100.0, "j": 2, "selector": "bior4.4",
                                  "all_levels": False}

    def test_loss_eval_table(self, pair_dir, capsys):
        code, out, _ = run(["loss-eval", pair_dir / "clean.png", pair_dir / "noisy.png",
                            "--beta", "0"], capsys)
        rows = dict(ln.split() for ln in out.splitlines()[2:])
        assert code == 0 and float(rows["total"]) == pytest.approx(float(rows["latent"]))

    def test_metrics_offset(self, tmp_path, capsys):
        save_image(Image(np.full((16, 16), 100 / 255)), tmp_path / "a.pgm", 8)
        save_image(Image(np.full((16, 16), 110 / 255)), tmp_path / "b.pgm", 8)
        code, out, _ = run(["metrics", tmp_path / "a.pgm", tmp_path / "b.pgm"], capsys)
        assert code == 0
        assert out.splitlines()[2].split()[2] == "28.13"
        code, out, _ = run(["metrics", tmp_path / "a.pgm", tmp_path / "b.pgm", "--peak", "255",
                            "--format", "json"], capsys)
        rec = json.loads(out)["records"][0]
        assert rec["psnr_db"] == pytest.approx(28.1308, abs=1e-4)
        assert rec["mse"] == pytest.approx(100.0, rel=1e-12)

    def test_decompose_reconstruct(self, pair_dir, capsys):
        code, out, _ = run(["decompose", pair_dir / "clean.png", "--family", "bior4.4,dtcwt",
                            "--levels", "3", "--out", pair_dir / "pyr", "--container", "zip"], capsys)
        written = out.split()
        assert code == 0 and len(written) == 2
        for path in written:
            code, _, _ = run(["reconstruct", path, "--out", pair_dir / "back.png", "--depth", "16"], capsys)
            assert code == 0
            np.testing.assert_array_equal(load_image(pair_dir / "back.png").data,
                                          load_image(pair_dir / "clean.png").data)

    def test_denoise_pairs(self, pair_dir, capsys):
        code, out, _ = run(["denoise", "--pairs", pair_dir / "pairs.txt", "--out", pair_dir / "den",
                            "--format", "csv"], capsys)
        assert code == 0
        header, row = out.splitlines()
        assert header == "noisy,output,psnr_before,psnr_after,ssim_before,ssim_after"
        assert (pair_dir / "den" / "noisy.denoised.png").exists()

    def test_denoise_images(self, pair_dir, capsys):
        code, out, _ = run(["denoise", pair_dir / "noisy.png", "--family", "dtcwt", "--rule",
                            "universal", "--out", pair_dir / "den"], capsys)
        assert code == 0 and "psnr" not in out
        assert load_image(pair_dir / "den" / "noisy.denoised.png").source_depth == 16

    def test_synth_noise_scenes(self, tmp_path, capsys):
        code, out, _ = run(["synth-noise", "--scenes", "3", "--shape", "16x24", "--noise",
                            "strip:0.05", "--seed", "4", "--out", tmp_path / "c"], capsys)
        assert code == 0
        pairs = parse_pairlist(tmp_path / "c" / "pairs.txt")
        assert len(pairs) == 3
        assert load_image(pairs[2][1]).shape == (16, 24)

    def test_synth_noise_from_images(self, pair_dir, capsys):
        code, _, _ = run(["synth-noise", pair_dir / "clean.png", "--noise", "column-fpn:0.1",
                          "--out", pair_dir / "n", "--ext", "pgm", "--depth", "8"], capsys)
        assert code == 0
        (clean, noisy), = parse_pairlist(pair_dir / "n" / "pairs.txt")
        assert clean == str((pair_dir / "clean.png").resolve())
        assert noisy.endswith("clean.noisy.pgm")


class TestFailures:
    @pytest.mark.parametrize("argv", [
        ["energy-report", "x.txt", "--levels", "0"],
        ["energy-report", "x.txt", "--family", "db99"],
        ["energy-report", "x.txt", "--format", "xml"],
        ["loss-eval", "a", "b", "--alpha", "-1"],
        ["synth-noise", "--noise", "speckle:1", "--out", "o"],
        ["metrics", "only-one.png"],
        ["frobnicate"],
    ])
    def test_bad_flags_exit_2(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_missing_file_exit_1(self, pair_dir, capsys):
        code, _, err = run(["metrics", pair_dir / "clean.png", pair_dir / "missing.png"], capsys)
        assert code == 1 and "missing.png" in err

    def test_shape_mismatch_names_pair(self, pair_dir, capsys):
        save_image(Image(np.zeros((16, 16))), pair_dir / "small.png")
        (pair_dir / "bad.txt").write_text("clean.png,noisy.png\nclean.png,small.png\n")
        (pair_dir / "out").mkdir()
        for argv in (["energy-report", pair_dir / "bad.txt", "--out", pair_dir / "out" / "r.txt"],
                     ["metrics", "--pairs", pair_dir / "bad.txt", "--out", pair_dir / "out" / "m.txt"]):
            code, _, err = run(argv, capsys)
            assert code == 1
            assert "pair 2" in err and "small.png" in err
        assert list((pair_dir / "out").iterdir()) == []

    def test_malformed_pairlist_exit_1(self, tmp_path, capsys):
        (tmp_path / "l.txt").write_text("a,b,c\n")
        code, _, err = run(["energy-report", tmp_path / "l.txt"], capsys)
        assert code == 1 and "line 1" in err

    def test_bad_worker_env(self, pair_dir, capsys, monkeypatch):
        monkeypatch.setenv("TIRWAVE_WORKERS", "zero")
        code, _, err = run(["energy-report", pair_dir / "pairs.txt"], capsys)
        assert code == 1 and "TIRWAVE_WORKERS" in err


def test_console_entry_point(pair_dir):
    proc = subprocess.run([sys.executable, "-m", "tirwave", "metrics", str(pair_dir / "clean.png"),
                           str(pair_dir / "clean.png"), "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].split(",")[2:4] == ["inf", "1.0000"]
    proc = subprocess.run([sys.executable, "-m", "tirwave", "metrics", "--levels"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
