"""Regenerate the golden files under tests/golden/.

Run from the repository root:  python3 tools/freeze_goldens.py
"""

import json
from pathlib import Path

from tirwave.analysis import RatioReport, batch_energy_report, render_report
from tirwave.denoise import ShrinkSpec, shrink_denoise
from tirwave.imaging import NoiseSpec, add_noise, synthetic_scene
from tirwave.losses import psnr

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

FAMILIES = ["haar", "db4", "sym4", "coif2", "bior4.4", "dtcwt"]
FPN_SHAPE = (64, 64)
FPN_SEEDS = range(1, 21)
DENOISE_SHAPE = (128, 128)
DENOISE_SEEDS = range(1, 11)
DENOISE_SIGMA = 15 / 255


def fpn_corpus():
    for seed in FPN_SEEDS:
        clean = synthetic_scene(FPN_SHAPE, seed)
        yield clean, add_noise(clean, NoiseSpec("column-fpn", 0.1, seed))


def fpn_report() -> RatioReport:
    return batch_energy_report(list(fpn_corpus()), FAMILIES, levels=2)


def denoise_margins() -> dict:
    spec = ShrinkSpec("bayes", "soft", "db4", 2)
    out = []
    for seed in DENOISE_SEEDS:
        clean = synthetic_scene(DENOISE_SHAPE, seed)
        noisy = add_noise(clean, NoiseSpec("gaussian", DENOISE_SIGMA, 100 + seed))
        before = psnr(noisy, clean)
        after = psnr(shrink_denoise(noisy, spec), clean)
        out.append({"scene_seed": seed, "noise_seed": 100 + seed,
                    "psnr_noisy": round(before, 4), "psnr_denoised": round(after, 4),
                    "gain_db": round(after - before, 4)})
    return {"schema": 1, "spec": spec.label, "shape": list(DENOISE_SHAPE),
            "sigma": DENOISE_SIGMA, "images": out,
            "min_gain_db": min(r["gain_db"] for r in out)}


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    (GOLDEN / "energy_column_fpn.txt").write_text(render_report(fpn_report(), "table"))
    (GOLDEN / "denoise_margins.json").write_text(json.dumps(denoise_margins(), indent=2) + "\n")
    print("wrote", *sorted(p.name for p in GOLDEN.iterdir()))
