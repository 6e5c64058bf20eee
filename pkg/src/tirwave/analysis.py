"""Sub-band energy accounting and clean/noisy energy ratio reports."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dtcwt, dwt
from .dtcwt import ComplexPyramid
from .dwt import BANDS, SubbandPyramid
from .filters import DUALTREE, parse_selector, selector_label
from .imaging import as_array, load_image

__all__ = [
    "EnergyReport",
    "RatioRow",
    "RatioReport",
    "subband_energy",
    "decompose",
    "energy_ratio",
    "batch_energy_report",
    "format_energy",
    "render_report",
    "PairError",
]

KEYS = ("lo", "h", "v", "d")


class PairError(ValueError):
    """A clean/noisy pair that cannot be compared (shape mismatch, bad file)."""


@dataclass(frozen=True)
class EnergyReport:
    """Energies of one decomposition up to level ``levels``.

    ``e_lo`` is the low-pass energy at that level; ``e_h``, ``e_v`` and ``e_d``
    are summed over levels ``1..levels``. ``per_level`` optionally holds
    ``{"h", "v", "d"}`` energies for each level, finest first.
    """

    family: str
    levels: int
    e_lo: float
    e_h: float
    e_v: float
    e_d: float
    per_level: tuple | None = None

    def __post_init__(self):
        for key in KEYS:
            if getattr(self, f"e_{key}") < 0:
                raise ValueError("energies must be non-negative")

    def energy(self, key: str) -> float:
        return getattr(self, f"e_{key}")

    @property
    def total(self) -> float:
        return math.fsum(self.energy(k) for k in KEYS)

    def to_dict(self) -> dict:
        out = {"family": self.family, "levels": self.levels}
        out.update({f"e_{k}": self.energy(k) for k in KEYS})
        if self.per_level is not None:
            out["per_level"] = [dict(x) for x in self.per_level]
        return out


def _sq(x: np.ndarray) -> float:
    return math.fsum(np.abs(np.asarray(x)).ravel() ** 2)


def subband_energy(pyramid, j: int | None = None, per_level: bool = False) -> EnergyReport:
    """Sub-band energies of a DWT or dual-tree pyramid at level ``j``.

    Complex bands contribute their squared magnitude; the dual tree's six
    orientations are grouped into h (+-15), v (+-75) and d (+-45).
    """
    j = pyramid.levels if j is None else j
    if not 1 <= j <= pyramid.levels:
        raise ValueError(f"level {j} out of range 1..{pyramid.levels}")
    if isinstance(pyramid, ComplexPyramid):
        groups = dtcwt.map_orientations_to_hvd(pyramid)[:j]
        levels = [{k: _sq(g[k]) for k in BANDS} for g in groups]
        e_lo = _sq(dtcwt.lowpass_at(pyramid, j))
        family = DUALTREE
    elif isinstance(pyramid, SubbandPyramid):
        levels = [{k: _sq(b[k]) for k in BANDS} for b in pyramid.details[:j]]
        e_lo = _sq(dwt.lowpass_at(pyramid, j))
        family = pyramid.family.label
    else:
        raise TypeError(f"expected a SubbandPyramid or ComplexPyramid, got {type(pyramid).__name__}")
    sums = {k: math.fsum(lv[k] for lv in levels) for k in BANDS}
    return EnergyReport(
        family, j, e_lo, sums["h"], sums["v"], sums["d"],
        tuple(levels) if per_level else None,
    )


def decompose(image, selector, levels: int):
    """Forward transform for a family or the ``DUALTREE`` marker."""
    if isinstance(selector, str):
        selector = parse_selector(selector)
    if selector == DUALTREE:
        return dtcwt.dtcwt2_forward(image, levels)
    return dwt.dwt2_forward(image, selector, levels)


def _ratio(clean: float, noisy: float) -> float | None:
    return None if noisy == 0 else 100.0 * clean / noisy


@dataclass(frozen=True)
class RatioRow:
    family: str
    clean: EnergyReport
    noisy: EnergyReport

    def ratio(self, key: str) -> float | None:
        """clean/noisy energy in percent, or None when the noisy energy is 0."""
        return _ratio(self.clean.energy(key), self.noisy.energy(key))

    @property
    def ratio_lo(self):
        return self.ratio("lo")

    @property
    def ratio_h(self):
        return self.ratio("h")

    @property
    def ratio_v(self):
        return self.ratio("v")

    @property
    def ratio_d(self):
        return self.ratio("d")


@dataclass(frozen=True)
class RatioReport:
    """One row per family, in the order the families were requested."""

    rows: tuple
    levels: int
    pairs: int = 1

    def row(self, family: str) -> RatioRow:
        for r in self.rows:
            if r.family == family:
                return r
        raise KeyError(family)


def _selectors(families):
    out = []
    for f in families:
        out.append(parse_selector(f) if isinstance(f, str) else f)
    if not out:
        raise ValueError("at least one family is required")
    return out


def _pair_energies(clean, noisy, selectors, levels, per_level) -> list[tuple[EnergyReport, EnergyReport]]:
    c, n = as_array(clean), as_array(noisy)
    if c.shape != n.shape:
        raise PairError(f"shape mismatch: clean {c.shape} vs noisy {n.shape}")
    out = []
    for sel in selectors:
        out.append((
            subband_energy(decompose(c, sel, levels), levels, per_level),
            subband_energy(decompose(n, sel, levels), levels, per_level),
        ))
    return out


def energy_ratio(clean, noisy, families, levels: int = 2, per_level: bool = False) -> RatioReport:
    """Decompose both images with every family and compare band energies."""
    selectors = _selectors(families)
    energies = _pair_energies(clean, noisy, selectors, levels, per_level)
    rows = tuple(
        RatioRow(selector_label(sel), ce, ne) for sel, (ce, ne) in zip(selectors, energies)
    )
    return RatioReport(rows, levels, 1)


def _sum_reports(reports: list[EnergyReport]) -> EnergyReport:
    first = reports[0]
    per_level = None
    if first.per_level is not None:
        per_level = tuple(
            {k: math.fsum(r.per_level[i][k] for r in reports) for k in BANDS}
            for i in range(first.levels)
        )
    sums = {k: math.fsum(r.energy(k) for r in reports) for k in KEYS}
    return EnergyReport(first.family, first.levels, sums["lo"], sums["h"], sums["v"], sums["d"],
                        per_level)


def batch_energy_report(pairs, families, levels: int = 2, workers: int = 1,
                        per_level: bool = False, loader=load_image) -> RatioReport:
    """Corpus report: energies are summed over all pairs before taking ratios.

    ``pairs`` holds (clean, noisy) entries that are either paths (read with
    ``loader``) or images/arrays. Work is spread over ``workers`` threads; the
    exactly rounded sums make the result independent of scheduling and of the
    pair order.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs")
    selectors = _selectors(families)

    def work(item):
        idx, (clean, noisy) = item
        try:
            c = loader(clean) if isinstance(clean, (str, bytes)) or hasattr(clean, "__fspath__") else clean
            n = loader(noisy) if isinstance(noisy, (str, bytes)) or hasattr(noisy, "__fspath__") else noisy
            return _pair_energies(c, n, selectors, levels, per_level)
        except (OSError, ValueError) as exc:
            raise PairError(f"pair {idx + 1} ({clean}, {noisy}): {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, enumerate(pairs)))
    else:
        results = [work(item) for item in enumerate(pairs)]
    rows = []
    for i, sel in enumerate(selectors):
        clean = _sum_reports([r[i][0] for r in results])
        noisy = _sum_reports([r[i][1] for r in results])
        rows.append(RatioRow(selector_label(sel), clean, noisy))
    return RatioReport(tuple(rows), levels, len(pairs))


# ---------------------------------------------------------------------------
# rendering

def format_energy(value: float) -> str:
    """Magnitude-suffixed energy: ``2.340B``, ``3.789M``, ``0.239M`` or ``12.500``."""
    if value >= 1e9:
        return f"{value / 1e9:.3f}B"
    if value >= 1e3:
        return f"{value / 1e6:.3f}M"
    return f"{value:.3f}"


def format_ratio(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}%"


HEADER_NOTE = "ratio = clean energy / noisy energy, in percent"


def _scaled(report: RatioReport, scale: float):
    for row in report.rows:
        yield row, {k: row.clean.energy(k) * scale for k in KEYS}, {
            k: row.noisy.energy(k) * scale for k in KEYS
        }


def render_report(report: RatioReport, fmt: str = "table", scale: float = 1.0,
                  per_level: bool = False) -> str:
    """Render as an aligned text table, CSV or JSON.

    ``scale`` multiplies every energy (use 255**2 to quote energies of
    8-bit-range images); ratios are unaffected.
    """
    if fmt == "table":
        return _render_table(report, scale, per_level)
    if fmt == "csv":
        return _render_csv(report, scale, per_level)
    if fmt == "json":
        return _render_json(report, scale, per_level)
    raise ValueError(f"unknown report format {fmt!r}")


def _render_table(report: RatioReport, scale: float, per_level: bool) -> str:
    head = ["family", "", "E_lo", "E_h", "E_v", "E_d"]
    body = []
    for row, clean, noisy in _scaled(report, scale):
        body.append([row.family, "noisy"] + [format_energy(noisy[k]) for k in KEYS])
        body.append(["", "clean"] + [format_energy(clean[k]) for k in KEYS])
        body.append(["", "ratio"] + [format_ratio(row.ratio(k)) for k in KEYS])
        if per_level and row.clean.per_level is not None:
            for lev, (cl, nl) in enumerate(zip(row.clean.per_level, row.noisy.per_level), 1):
                body.append(["", f"L{lev} ratio", ""] + [format_ratio(_ratio(cl[k], nl[k])) for k in BANDS])
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]

    def line(cells):
        left = [cells[0].ljust(widths[0]), cells[1].ljust(widths[1])]
        right = [c.rjust(w) for c, w in zip(cells[2:], widths[2:])]
        return "  ".join(left + right).rstrip()

    rule = "-" * len(line(head))
    out = [f"# {HEADER_NOTE}; levels={report.levels}; pairs={report.pairs}", line(head), rule]
    for i, cells in enumerate(body):
        out.append(line(cells))
        if cells[1] == "ratio" and (i + 1 == len(body) or body[i + 1][1] == "noisy"):
            out.append(rule)
    return "\n".join(out) + "\n"


def _render_csv(report: RatioReport, scale: float, per_level: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "levels", "pairs", "band", "noisy", "clean", "ratio_percent"])
    for row, clean, noisy in _scaled(report, scale):
        for k in KEYS:
            r = row.ratio(k)
            w.writerow([row.family, report.levels, report.pairs, k, repr(noisy[k]), repr(clean[k]),
                        "" if r is None else f"{r:.2f}"])
        if per_level and row.clean.per_level is not None:
            for lev, (cl, nl) in enumerate(zip(row.clean.per_level, row.noisy.per_level), 1):
                for k in BANDS:
                    r = _ratio(cl[k], nl[k])
                    w.writerow([row.family, report.levels, report.pairs, f"L{lev}.{k}",
                                repr(nl[k] * scale), repr(cl[k] * scale),
                                "" if r is None else f"{r:.2f}"])
    return buf.getvalue()


def _render_json(report: RatioReport, scale: float, per_level: bool) -> str:
    rows = []
    for row, clean, noisy in _scaled(report, scale):
        item = {
            "family": row.family,
            "noisy": {f"e_{k}": noisy[k] for k in KEYS},
            "clean": {f"e_{k}": clean[k] for k in KEYS},
            "ratio_percent": {k: (None if row.ratio(k) is None else round(row.ratio(k), 2))
                              for k in KEYS},
        }
        if per_level and row.clean.per_level is not None:
            item["per_level"] = [
                {"level": lev, "noisy": {k: nl[k] * scale for k in BANDS},
                 "clean": {k: cl[k] * scale for k in BANDS}}
                for lev, (cl, nl) in enumerate(zip(row.clean.per_level, row.noisy.per_level), 1)
            ]
        rows.append(item)
    doc = {"schema": 1, "report": "energy-ratio", "ratio": "clean/noisy", "levels": report.levels,
           "pairs": report.pairs, "scale": scale, "rows": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
