"""Wavelet families and their two-channel filter banks.

All orthogonal and biorthogonal coefficients live as literal tables in
``_tables.py``. Filters are stored in correlation order: the low-pass output
at position ``k`` is ``sum_j h[j] * x[2k + j]`` (plus a centring offset for
the symmetric biorthogonal filters).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _tables

__all__ = [
    "WaveletFamily",
    "FilterBank",
    "DualTreeFilters",
    "DUALTREE",
    "parse_family",
    "parse_selector",
    "make_filterbank",
    "make_dualtree_filters",
    "DEFAULT_ORDERS",
]

DEFAULT_ORDERS = {
    "haar": 1,
    "daubechies": 4,
    "symlet": 4,
    "coiflet": 2,
    "biorthogonal": (4, 4),
}
_SHORT = {"haar": "haar", "daubechies": "db", "symlet": "sym", "coiflet": "coif", "biorthogonal": "bior"}
_ALIASES = {
    "haar": "haar",
    "db": "daubechies", "daub": "daubechies", "daubechies": "daubechies",
    "sym": "symlet", "symlet": "symlet",
    "coif": "coiflet", "coiflet": "coiflet",
    "bior": "biorthogonal", "biorthogonal": "biorthogonal",
}
ORTHOGONAL_NAMES = ("haar", "daubechies", "symlet", "coiflet")

# Marker for the dual-tree complex transform wherever a family is accepted.
DUALTREE = "dtcwt"


def _supported(name: str, order) -> bool:
    if name == "haar":
        return order == 1
    if name == "biorthogonal":
        return order in _tables.BIORTHOGONAL
    return (name, order) in _tables.ORTHOGONAL


@dataclass(frozen=True)
class WaveletFamily:
    """A (family name, order) pair from the supported table.

    ``order`` is an int, except for the biorthogonal family where it is the
    ``(N, M)`` pair written ``biorN.M``.
    """

    name: str
    order: int | tuple[int, int] = None

    def __post_init__(self):
        name = _ALIASES.get(str(self.name).lower())
        if name is None:
            raise ValueError(f"unknown wavelet family {self.name!r}")
        order = DEFAULT_ORDERS[name] if self.order is None else self.order
        if name == "biorthogonal" and not isinstance(order, tuple):
            raise ValueError("biorthogonal order must be an (N, M) pair")
        if name != "biorthogonal":
            order = int(order)
        if not _supported(name, order):
            raise ValueError(f"unsupported order {order!r} for {name}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "order", order)

    @property
    def label(self) -> str:
        if self.name == "haar":
            return "haar"
        if self.name == "biorthogonal":
            return f"bior{self.order[0]}.{self.order[1]}"
        return f"{_SHORT[self.name]}{self.order}"

    @property
    def orthogonal(self) -> bool:
        return self.name in ORTHOGONAL_NAMES

    def __str__(self) -> str:
        return self.label


_GRAMMAR = re.compile(r"^([a-z]+?)(\d+(?:\.\d+)?)?$")


def parse_family(text: str) -> WaveletFamily:
    """Parse ``haar``, ``db4``, ``sym4``, ``coif2``, ``bior4.4`` or a bare family name."""
    m = _GRAMMAR.match(text.strip().lower())
    if not m:
        raise ValueError(f"cannot parse wavelet family {text!r}")
    word, num = m.groups()
    if word not in _ALIASES:
        raise ValueError(f"unknown wavelet family {text!r}")
    name = _ALIASES[word]
    if num is None:
        return WaveletFamily(name)
    if name == "biorthogonal":
        if "." not in num:
            raise ValueError(f"biorthogonal order must be written N.M, got {text!r}")
        a, b = num.split(".")
        return WaveletFamily(name, (int(a), int(b)))
    if "." in num:
        raise ValueError(f"order of {name} must be an integer, got {text!r}")
    return WaveletFamily(name, int(num))


def parse_selector(text: str):
    """Parse a family string, or return ``DUALTREE`` for ``dtcwt``."""
    if text.strip().lower() in (DUALTREE, "dualtree", "dual-tree"):
        return DUALTREE
    return parse_family(text)


def selector_label(selector) -> str:
    return DUALTREE if selector == DUALTREE else selector.label


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FilterBank:
    """Analysis and synthesis low/high-pass filters of one wavelet.

    ``symmetric`` banks have odd-length, centred filters; the transform pairs
    them with symmetric boundary extension. The others are orthogonal and are
    applied periodically.
    """

    analysis_lo: np.ndarray
    analysis_hi: np.ndarray
    synthesis_lo: np.ndarray
    synthesis_hi: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        for name in ("analysis_lo", "analysis_hi", "synthesis_lo", "synthesis_hi"):
            arr = _frozen(getattr(self, name))
            if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be a non-empty finite 1-D sequence")
            if self.symmetric and arr.size % 2 == 0:
                raise ValueError(f"{name} must have odd length in a symmetric bank")
            object.__setattr__(self, name, arr)


def _alternate(h: np.ndarray, start: int) -> np.ndarray:
    return h * np.where(np.arange(h.size) % 2 == 0, 1.0, -1.0) * (1 if start == 0 else -1)


def orthogonal_bank(lo) -> FilterBank:
    """Quadrature-mirror bank from an orthonormal low-pass filter."""
    h = np.asarray(lo, dtype=np.float64)
    g = _alternate(h[::-1], 0)
    return FilterBank(h, g, h[::-1], g[::-1])


def symmetric_bank(analysis_lo, synthesis_lo) -> FilterBank:
    """Centred biorthogonal bank from its two symmetric low-pass filters.

    The high-pass filters are the opposite low-pass filters with alternate
    signs, positive at the centre tap.
    """
    h0 = np.asarray(analysis_lo, dtype=np.float64)
    f0 = np.asarray(synthesis_lo, dtype=np.float64)
    g0 = _alternate(f0, (f0.size // 2) % 2)
    g1 = _alternate(h0, (h0.size // 2) % 2)
    return FilterBank(h0, g0, f0, g1, symmetric=True)


@lru_cache(maxsize=None)
def _make(name: str, order) -> FilterBank:
    if name == "haar":
        return orthogonal_bank([np.sqrt(0.5), np.sqrt(0.5)])
    if name == "biorthogonal":
        ana, syn = _tables.BIORTHOGONAL[order]
        return symmetric_bank(ana, syn)
    return orthogonal_bank(_tables.ORTHOGONAL[(name, order)])


def make_filterbank(family) -> FilterBank:
    """Filter bank for a WaveletFamily or a family string such as ``"db4"``."""
    if isinstance(family, str):
        family = parse_family(family)
    return _make(family.name, family.order)


# ---------------------------------------------------------------------------
# dual tree

# Length-14 quarter-shift low-pass prototype (orthonormal, exact Nyquist zero).
QSHIFT_14 = _tables.QSHIFT_14


@dataclass(frozen=True)
class DualTreeFilters:
    """Filter sets for the dual-tree transform.

    ``level1`` holds the (tree a, tree b) banks used at the first level: the
    same symmetric pair, with tree b delayed by one sample so that, after
    decimation, it sits half a sample away from tree a. ``higher`` holds the
    quarter-shift banks used at levels two and up; tree b is the time reverse
    of tree a.
    """

    level1: tuple[FilterBank, FilterBank]
    higher: tuple[FilterBank, FilterBank]


def _delayed(bank: FilterBank) -> FilterBank:
    pad = lambda f: np.concatenate(([0.0], f))  # noqa: E731
    return FilterBank(pad(bank.analysis_lo), pad(bank.analysis_hi),
                      pad(bank.synthesis_lo), pad(bank.synthesis_hi))


@lru_cache(maxsize=None)
def make_dualtree_filters() -> DualTreeFilters:
    """The level-1 CDF 9/7 pair and the 14-tap quarter-shift pair."""
    l1a = make_filterbank(WaveletFamily("biorthogonal", (4, 4)))
    l1b = _delayed(l1a)
    ha = np.array(QSHIFT_14[::-1])
    return DualTreeFilters(
        level1=(l1a, l1b),
        higher=(orthogonal_bank(ha), orthogonal_bank(ha[::-1])),
    )
