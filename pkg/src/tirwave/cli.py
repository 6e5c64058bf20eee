"""Command-line interface: ``tirwave <command> ...``.

Exit status is 0 on success, 2 for bad flags and 1 for I/O failures or
mismatched image pairs. Every output file is written to a temporary name and
renamed once complete. Set ``TIRWAVE_WORKERS`` to control the number of
threads used for per-pair work; results do not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import PairError, batch_energy_report, decompose, render_report
from .denoise import MODES, RULES, ShrinkSpec, shrink_denoise
from .dtcwt import ComplexPyramid, dtcwt2_inverse
from .dwt import dwt2_inverse
from .filters import parse_selector, selector_label
from .imaging import Image, NoiseSpec, add_noise, atomic_write, load_image, save_image, synthetic_scene
from .losses import LossWeights, psnr, ssim, total_loss
from .pyramid_io import load_pyramid, save_pyramid

WORKERS_ENV = "TIRWAVE_WORKERS"


class CliError(Exception):
    """Runtime failure reported with exit status 1."""


def parse_pairlist(path) -> list[tuple[str, str]]:
    """Read ``clean, noisy`` pairs, one per line, comma or tab separated.

    Blank lines and lines starting with ``#`` are skipped. Relative paths are
    resolved against the list file's directory.
    """
    path = Path(path)
    base = path.parent
    pairs = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in (line.split("\t") if "\t" in line else line.split(","))]
        if len(fields) != 2 or not all(fields):
            raise ValueError(f"{path}: malformed line {lineno}: expected 'clean,noisy', got {raw!r}")
        pairs.append(tuple(str(base / f) if not os.path.isabs(f) else f for f in fields))
    if not pairs:
        raise ValueError(f"{path}: no pairs")
    return pairs


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CliError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def _ordered_map(fn, items):
    items = list(items)
    workers = _workers()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _emit(text: str, out) -> None:
    if out:
        atomic_write(Path(out), text.encode())
    else:
        sys.stdout.write(text)


def _load_pair(clean, noisy, idx=None):
    tag = f"pair {idx}" if idx is not None else "pair"
    try:
        c, n = load_image(clean), load_image(noisy)
    except (OSError, ValueError) as exc:
        raise CliError(f"{tag} ({clean}, {noisy}): {exc}") from exc
    if c.shape != n.shape:
        raise CliError(f"{tag} ({clean}, {noisy}): shape mismatch {c.shape} vs {n.shape}")
    return c, n


def _fmt(v: float, digits: int) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.{digits}f}"


def _records_out(records: list[dict], columns: list[str], fmt: str, digits: dict) -> str:
    """Render flat records as an aligned table, CSV or JSON."""
    if fmt == "json":
        clean = [{k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in r.items()}
                 for r in records]
        return json.dumps({"schema": 1, "records": clean}, indent=2, sort_keys=True) + "\n"
    cells = [[(_fmt(r[c], digits.get(c, 6)) if isinstance(r[c], float) else str(r[c]))
              for c in columns] for r in records]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max(len(x) for x in col) for col in zip(columns, *cells)]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in
                       enumerate(zip(row, widths))).rstrip() for row in [columns] + cells]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_decompose(args) -> None:
    selectors = args.family
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".zip" if args.container == "zip" else ""

    def work(item):
        path, sel = item
        try:
            img = load_image(path)
        except (OSError, ValueError) as exc:
            raise CliError(f"{path}: {exc}") from exc
        try:
            pyr = decompose(img, sel, args.levels)
        except ValueError as exc:
            raise CliError(f"{path}: {exc}") from exc
        target = out / f"{Path(path).stem}.{selector_label(sel)}{suffix}"
        save_pyramid(pyr, target)
        return str(target)

    written = _ordered_map(work, [(p, s) for p in args.images for s in selectors])
    sys.stdout.write("".join(f"{w}\n" for w in written))


def cmd_reconstruct(args) -> None:
    try:
        pyr = load_pyramid(args.pyramid)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"{args.pyramid}: {exc}") from exc
    raw = dtcwt2_inverse(pyr) if isinstance(pyr, ComplexPyramid) else dwt2_inverse(pyr)
    save_image(Image.clipped(raw), args.out, args.depth)


def cmd_energy_report(args) -> None:
    pairs = parse_pairlist(args.pairs)
    try:
        report = batch_energy_report(pairs, args.family, args.levels, workers=_workers(),
                                     per_level=args.per_level)
    except PairError as exc:
        raise CliError(str(exc)) from exc
    _emit(render_report(report, args.format, scale=args.peak ** 2, per_level=args.per_level),
          args.out)


def cmd_loss_eval(args) -> None:
    x, xhat = _load_pair(args.reference, args.prediction)
    weights = LossWeights(args.alpha, args.beta, args.levels, args.family[0], args.all_levels)
    try:
        res = total_loss(xhat.data, x.data, xhat.data, x.data, weights)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        rec = res.to_record()
        rec["schema"] = 1
        _emit(json.dumps(rec, indent=2, sort_keys=True) + "\n", args.out)
        return
    rows = [{"term": "total", "value": res.total}]
    rows += [{"term": k, "value": v} for k, v in res.components.items()]
    _emit(_records_out(rows, ["term", "value"], args.format, {"value": 12}), args.out)


def _pair_metrics(c: Image, n: Image, peak: float) -> dict:
    a, b = c.data * peak, n.data * peak
    err = float(np.mean((a - b) ** 2))
    return {"psnr_db": psnr(a, b, peak), "ssim": ssim(c.data, n.data), "mse": err}


def _pairs_from_args(args):
    if args.pairs:
        return parse_pairlist(args.pairs)
    if len(args.images) != 2:
        raise argparse.ArgumentTypeError("give two images or --pairs LIST")
    return [tuple(args.images)]


def cmd_metrics(args) -> None:
    pairs = _pairs_from_args(args)

    def work(item):
        idx, (cp, np_) = item
        c, n = _load_pair(cp, np_, idx)
        rec = {"clean": cp, "noisy": np_}
        rec.update(_pair_metrics(c, n, args.peak))
        return rec

    records = _ordered_map(work, enumerate(pairs, start=1))
    _emit(_records_out(records, ["clean", "noisy", "psnr_db", "ssim", "mse"], args.format,
                       {"psnr_db": 2, "ssim": 4, "mse": 8}), args.out)


def cmd_denoise(args) -> None:
    spec = ShrinkSpec(args.rule, args.mode, args.family[0], args.levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.pairs:
        items = [(c, n) for c, n in parse_pairlist(args.pairs)]
    else:
        items = [(None, p) for p in args.images]
    if not items:
        raise argparse.ArgumentTypeError("give noisy images or --pairs LIST")

    def work(item):
        idx, (cp, np_) = item
        if cp is not None:
            clean, noisy = _load_pair(cp, np_, idx)
        else:
            clean = None
            try:
                noisy = load_image(np_)
            except (OSError, ValueError) as exc:
                raise CliError(f"{np_}: {exc}") from exc
        try:
            restored = shrink_denoise(noisy, spec)
        except ValueError as exc:
            raise CliError(f"{np_}: {exc}") from exc
        target = out / f"{Path(np_).stem}.denoised{Path(np_).suffix or '.png'}"
        save_image(restored, target, noisy.source_depth)
        rec = {"noisy": np_, "output": str(target)}
        if clean is not None:
            before = _pair_metrics(clean, noisy, 1.0)
            after = _pair_metrics(clean, restored, 1.0)
            rec.update({"psnr_before": before["psnr_db"], "psnr_after": after["psnr_db"],
                        "ssim_before": before["ssim"], "ssim_after": after["ssim"]})
        return rec

    records = _ordered_map(work, enumerate(items, start=1))
    cols = ["noisy", "output"]
    if items[0][0] is not None:
        cols += ["psnr_before", "psnr_after", "ssim_before", "ssim_after"]
    digits = {"psnr_before": 2, "psnr_after": 2, "ssim_before": 4, "ssim_after": 4}
    _emit(_records_out(records, cols, args.format, digits), args.report)


def cmd_synth_noise(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.scenes:
        shape = args.shape
        sources = [(f"scene_{i:03d}", synthetic_scene(shape, args.seed + i)) for i in range(args.scenes)]
    elif args.images:
        sources = []
        for p in args.images:
            try:
                sources.append((Path(p).stem, load_image(p)))
            except (OSError, ValueError) as exc:
                raise CliError(f"{p}: {exc}") from exc
    else:
        raise argparse.ArgumentTypeError("give clean images or --scenes N")
    kind, amp = args.noise
    lines = ["# clean,noisy"]
    for i, (stem, clean) in enumerate(sources):
        noisy = add_noise(clean, NoiseSpec(kind, amp, args.seed + i))
        noisy_path = out / f"{stem}.noisy.{args.ext}"
        if args.scenes:
            clean_ref = f"{stem}.clean.{args.ext}"
            save_image(clean, out / clean_ref, args.depth)
        else:
            clean_ref = str(Path(args.images[i]).resolve())
        save_image(noisy, noisy_path, args.depth)
        lines.append(f"{clean_ref},{noisy_path.name}")
    atomic_write(out / "pairs.txt", ("\n".join(lines) + "\n").encode())
    sys.stdout.write(f"{out / 'pairs.txt'}\n")


# ---------------------------------------------------------------------------
# argument parsing

def _families(text: str):
    try:
        return [parse_selector(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _noise(text: str):
    try:
        spec = NoiseSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return spec.kind, spec.amplitude


def _shape(text: str):
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like 64x64, got {text!r}") from None
    if r < 1 or c < 1:
        raise argparse.ArgumentTypeError("shape must be positive")
    return r, c


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tirwave", description="Wavelet analysis, denoising and scoring for thermal-infrared image pairs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family_default="db4", multi=True):
        sp.add_argument("--family", type=_families, default=_families(family_default),
                        help="wavelet family" + ("(s), comma separated" if multi else "")
                        + " e.g. haar, db4, sym4, coif2, bior4.4, dtcwt")
        sp.add_argument("--levels", type=_positive_int, default=2, help="decomposition levels j")

    def fmt(sp):
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")

    d = sub.add_parser("decompose", help="write pyramid containers for images")
    d.add_argument("images", nargs="+")
    common(d)
    d.add_argument("--out", required=True, help="output directory")
    d.add_argument("--container", choices=("dir", "zip"), default="dir")
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("reconstruct", help="rebuild an image from a pyramid container")
    r.add_argument("pyramid")
    r.add_argument("--out", required=True, help="output image (.png or .pgm)")
    r.add_argument("--depth", type=int, choices=(8, 16), default=8)
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("energy-report", help="clean/noisy sub-band energy ratios over a pair list")
    e.add_argument("pairs", help="pair list file")
    common(e, "haar,db4,sym4,coif2,bior4.4,dtcwt")
    fmt(e)
    e.add_argument("--out", help="write the report here instead of stdout")
    e.add_argument("--peak", type=_positive_float, default=1.0,
                   help="quote energies for images scaled to this peak (e.g. 255)")
    e.add_argument("--per-level", action="store_true", help="add per-level ratios")
    e.set_defaults(func=cmd_energy_report)

    lo = sub.add_parser("loss-eval", help="combined loss components for a reference/prediction pair")
    lo.add_argument("reference")
    lo.add_argument("prediction")
    common(lo, "bior4.4", multi=False)
    lo.add_argument("--alpha", type=_nonneg_float, default=1.0)
    lo.add_argument("--beta", type=_nonneg_float, default=100.0)
    lo.add_argument("--all-levels", action="store_true", help="sum the wavelet term over levels 1..j")
    fmt(lo)
    lo.add_argument("--out")
    lo.set_defaults(func=cmd_loss_eval)

    m = sub.add_parser("metrics", help="PSNR and SSIM for image pairs")
    m.add_argument("images", nargs="*", help="clean and noisy image")
    m.add_argument("--pairs", help="pair list file")
    m.add_argument("--peak", type=_positive_float, default=1.0,
                   help="express pixels in units whose maximum is PEAK (MSE scales, PSNR does not)")
    fmt(m)
    m.add_argument("--out")
    m.set_defaults(func=cmd_metrics)

    dn = sub.add_parser("denoise", help="wavelet-shrinkage denoising")
    dn.add_argument("images", nargs="*", help="noisy images")
    dn.add_argument("--pairs", help="pair list; reports PSNR/SSIM before and after")
    common(dn, "db4", multi=False)
    dn.add_argument("--rule", choices=RULES, default="bayes")
    dn.add_argument("--mode", choices=MODES, default="soft")
    dn.add_argument("--out", required=True, help="output directory for restored images")
    dn.add_argument("--report", help="write the metrics table here instead of stdout")
    fmt(dn)
    dn.set_defaults(func=cmd_denoise)

    s = sub.add_parser("synth-noise", help="write noisy counterparts and a pair list")
    s.add_argument("images", nargs="*", help="clean images")
    s.add_argument("--scenes", type=_positive_int, help="generate this many synthetic clean scenes")
    s.add_argument("--shape", type=_shape, default=(64, 64), help="scene shape, e.g. 64x64")
    s.add_argument("--noise", type=_noise, required=True, help="kind:amplitude, e.g. column-fpn:0.1")
    s.add_argument("--seed", type=int, default=0, help="seed of the first image; later ones add 1")
    s.add_argument("--out", required=True)
    s.add_argument("--depth", type=int, choices=(8, 16), default=16)
    s.add_argument("--ext", choices=("png", "pgm"), default="png")
    s.set_defaults(func=cmd_synth_noise)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) == []:
        parser.error("--family needs at least one entry")
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except CliError as exc:
        print(f"tirwave: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"tirwave: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
