"""Two-dimensional dual-tree complex wavelet transform.

Level 1 filters the image without decimation using the symmetric 9/7 pair,
so both trees are present in one full-rate output: tree a on even samples,
tree b on odd samples. Levels two and up apply the quarter-shift pair to the
interleaved low-pass, tree a reading the even and tree b the odd samples, and
write the two trees interleaved again at half rate.

Every full-rate high-pass image is split into its four tree combinations
(even/odd rows x even/odd columns) and mixed into two complex bands of
opposite orientation. Boundaries use half-sample symmetric extension (the
edge sample repeated). Under that extension the quarter-shift stage is an
orthogonal operator and the level-1 stage satisfies G0 H0 + G1 H1 = I, so the
inverse is exact up to rounding.

Orientation labels give the direction of the stripes a band responds to, in
degrees counter-clockwise from horizontal with the y axis pointing up the
image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .filters import make_dualtree_filters
from .imaging import as_array
from .dwt import _check_levels

__all__ = [
    "ComplexPyramid",
    "ORIENTATIONS",
    "dtcwt2_forward",
    "dtcwt2_inverse",
    "map_orientations_to_hvd",
    "dtcwt_band_shapes",
    "lowpass_at",
    "analysis_chains",
]

ORIENTATIONS = (15, 45, 75, -75, -45, -15)
# positions in ORIENTATIONS fed by each full-rate high-pass image: (z0, z1)
_PAIRS = {
    "hl": (0, 5),  # high-pass along axis 0, low-pass along axis 1
    "lh": (2, 3),  # low-pass along axis 0, high-pass along axis 1
    "hh": (1, 4),
}
_HVD_GROUPS = {"h": (0, 5), "v": (2, 3), "d": (1, 4)}


def _hs_index(i: np.ndarray, n: int) -> np.ndarray:
    """Half-sample symmetric extension (edge sample repeated) onto 0..n-1."""
    i = np.mod(i, 2 * n)
    return np.where(i >= n, 2 * n - 1 - i, i)


def _sparse(rows, cols, vals, shape) -> sp.csr_matrix:
    return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


def _full_rate(taps: np.ndarray, n: int) -> sp.csr_matrix:
    """Undecimated centred filtering of a length-n signal."""
    centre = taps.size // 2
    m = np.arange(n)[:, None]
    j = np.arange(taps.size)[None, :]
    cols = _hs_index(m + j - centre, n)
    rows = np.broadcast_to(m, cols.shape)
    vals = np.broadcast_to(taps[None, :], cols.shape)
    return _sparse(rows.ravel(), cols.ravel(), vals.ravel(), (n, n))


@lru_cache(maxsize=128)
def _level1_ops(n: int):
    """(H0, H1, G0, G1) full-rate operators for an even length n."""
    bank = make_dualtree_filters().level1[0]
    s = np.sqrt(0.5)
    return (
        _full_rate(bank.analysis_lo * s, n),
        _full_rate(bank.analysis_hi * s, n),
        _full_rate(bank.synthesis_lo * s, n),
        _full_rate(bank.synthesis_hi * s, n),
    )


def _qshift(ha: np.ndarray, hb: np.ndarray, n: int) -> sp.csr_matrix:
    # Y[2k] = sum_j ha[j] X[4k + 14 - 2j]  (tree a, even input samples)
    # Y[2k+1] = sum_j hb[j] X[4k + 15 - 2j] (tree b, odd input samples)
    offset = ha.size
    k = np.arange(n // 4)[:, None]
    j = np.arange(ha.size)[None, :]
    cols_a = _hs_index(4 * k + offset - 2 * j, n)
    cols_b = _hs_index(4 * k + offset + 1 - 2 * j, n)
    rows_a = np.broadcast_to(2 * k, cols_a.shape)
    rows = np.concatenate([rows_a.ravel(), rows_a.ravel() + 1])
    cols = np.concatenate([cols_a.ravel(), cols_b.ravel()])
    vals = np.concatenate([np.broadcast_to(ha, cols_a.shape).ravel(),
                           np.broadcast_to(hb, cols_b.shape).ravel()])
    return _sparse(rows, cols, vals, (n // 2, n))


@lru_cache(maxsize=128)
def _higher_ops(n: int):
    """(L, H) half-rate quarter-shift operators for n divisible by 4."""
    tree_a, tree_b = make_dualtree_filters().higher
    lo = _qshift(tree_a.analysis_lo, tree_b.analysis_lo, n)
    hi = _qshift(tree_a.analysis_hi, tree_b.analysis_hi, n)
    return lo, hi


def _q2c(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.sqrt(0.5)
    a, b = y[0::2, 0::2], y[0::2, 1::2]
    c, d = y[1::2, 0::2], y[1::2, 1::2]
    z0 = s * (a - d) + 1j * s * (b + c)
    z1 = s * (a + d) + 1j * s * (b - c)
    return z0, z1


def _c2q(z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    s = np.sqrt(0.5)
    p = s * (z0 + z1)
    q = s * (z0 - z1)
    r, c = z0.shape
    y = np.empty((2 * r, 2 * c))
    y[0::2, 0::2] = p.real
    y[0::2, 1::2] = p.imag
    y[1::2, 0::2] = q.imag
    y[1::2, 1::2] = -q.real
    return y


def _even(n: int) -> int:
    return n + (n % 2)


def _mult4(n: int) -> int:
    return n if n % 4 == 0 else n + 2


def dtcwt_band_shapes(shape: tuple[int, int], levels: int) -> tuple[list, tuple]:
    """Oriented band shape per level and the final low-pass shape."""
    r, c = _even(shape[0]), _even(shape[1])
    bands = [(r // 2, c // 2)]
    for _ in range(1, levels):
        r, c = _mult4(r) // 2, _mult4(c) // 2
        bands.append((r // 2, c // 2))
    return bands, (r, c)


@dataclass(frozen=True)
class ComplexPyramid:
    """Dual-tree coefficients.

    ``oriented[l]`` is a complex array of shape ``(6, rows, cols)`` for level
    ``l + 1``, ordered as ``ORIENTATIONS``. ``lowpass`` is the real, interleaved
    two-tree low-pass band of the coarsest level.
    """

    levels: int
    lowpass: np.ndarray
    oriented: tuple
    original_shape: tuple[int, int]
    band_shapes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if len(self.oriented) != self.levels:
            raise ValueError(f"expected {self.levels} oriented levels, got {len(self.oriented)}")
        object.__setattr__(self, "original_shape", tuple(self.original_shape))
        shapes, low = dtcwt_band_shapes(self.original_shape, self.levels)
        object.__setattr__(self, "band_shapes", tuple(shapes))
        if np.shape(self.lowpass) != low:
            raise ValueError(f"lowpass shape {np.shape(self.lowpass)} != expected {low}")
        for lev, (bands, shape) in enumerate(zip(self.oriented, shapes), start=1):
            if np.shape(bands) != (6,) + shape:
                raise ValueError(
                    f"level {lev} oriented bands have shape {np.shape(bands)}, expected {(6,) + shape}"
                )

    @property
    def orientations(self) -> tuple[int, ...]:
        return ORIENTATIONS

    def band(self, level: int, orientation: int) -> np.ndarray:
        return self.oriented[level - 1][ORIENTATIONS.index(orientation)]

    def map_oriented(self, fn) -> "ComplexPyramid":
        """New pyramid with ``fn(level, bands)`` applied to each (6, r, c) stack."""
        return ComplexPyramid(
            self.levels,
            self.lowpass,
            tuple(np.asarray(fn(lev, b)) for lev, b in enumerate(self.oriented, start=1)),
            self.original_shape,
        )


def _split(stack: np.ndarray, key: str, y: np.ndarray) -> None:
    z0, z1 = _q2c(y)
    i0, i1 = _PAIRS[key]
    stack[i0], stack[i1] = z0, z1


def _merge(stack: np.ndarray, key: str) -> np.ndarray:
    i0, i1 = _PAIRS[key]
    return _c2q(stack[i0], stack[i1])


def _pad_edges(x: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Replicate the first and last row/column where needed for a multiple of 4."""
    pr = 1 if x.shape[0] % 4 else 0
    pc = 1 if x.shape[1] % 4 else 0
    if pr or pc:
        x = np.pad(x, ((pr, pr), (pc, pc)), mode="edge")
    return x, (pr, pc)


def dtcwt2_forward(image, levels: int) -> ComplexPyramid:
    """Decompose an Image or 2-D array into ``levels`` levels of six complex bands."""
    x = as_array(image)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D raster, got shape {x.shape}")
    _check_levels(x.shape, levels)
    r, c = x.shape
    x = np.pad(x, ((0, r % 2), (0, c % 2)), mode="edge")
    h0r, h1r, _, _ = _level1_ops(x.shape[0])
    h0c, h1c, _, _ = _level1_ops(x.shape[1])
    lo_r = h0r @ x
    hi_r = h1r @ x
    stack = np.empty((6, x.shape[0] // 2, x.shape[1] // 2), dtype=np.complex128)
    _split(stack, "hl", (h0c @ hi_r.T).T)
    _split(stack, "lh", (h1c @ lo_r.T).T)
    _split(stack, "hh", (h1c @ hi_r.T).T)
    oriented = [stack]
    low = np.ascontiguousarray((h0c @ lo_r.T).T)
    for _ in range(1, levels):
        low, _pads = _pad_edges(low)
        lr, hr = _higher_ops(low.shape[0])
        lc, hc = _higher_ops(low.shape[1])
        lo_r = lr @ low
        hi_r = hr @ low
        stack = np.empty((6, low.shape[0] // 4, low.shape[1] // 4), dtype=np.complex128)
        _split(stack, "hl", (lc @ hi_r.T).T)
        _split(stack, "lh", (hc @ lo_r.T).T)
        _split(stack, "hh", (hc @ hi_r.T).T)
        oriented.append(stack)
        low = np.ascontiguousarray((lc @ lo_r.T).T)
    return ComplexPyramid(levels, low, tuple(oriented), (r, c))


def _level_input_shapes(shape, levels):
    """Shape of the low-pass entering each level >= 2 before edge padding."""
    r, c = _even(shape[0]), _even(shape[1])
    out = []
    for _ in range(1, levels):
        out.append((r, c))
        r, c = _mult4(r) // 2, _mult4(c) // 2
    return out


def _reconstruct(pyramid: ComplexPyramid, stop: int) -> np.ndarray:
    """Invert levels ``levels..stop+1``; ``stop=0`` returns the image."""
    low = np.asarray(pyramid.lowpass, dtype=np.float64)
    inputs = _level_input_shapes(pyramid.original_shape, pyramid.levels)
    for lev in range(pyramid.levels, max(stop, 1), -1):
        stack = pyramid.oriented[lev - 1]
        r, c = inputs[lev - 2]
        lr, hr = _higher_ops(_mult4(r))
        lc, hc = _higher_ops(_mult4(c))
        # each stage is orthogonal, so its inverse is the transpose
        lo_r = (lc.T @ low.T).T + (hc.T @ _merge(stack, "lh").T).T
        hi_r = (lc.T @ _merge(stack, "hl").T).T + (hc.T @ _merge(stack, "hh").T).T
        full = lr.T @ lo_r + hr.T @ hi_r
        pr, pc = (_mult4(r) - r) // 2, (_mult4(c) - c) // 2
        low = full[pr:pr + r, pc:pc + c]
    if stop >= 1:
        return np.ascontiguousarray(low)
    stack = pyramid.oriented[0]
    r, c = _even(pyramid.original_shape[0]), _even(pyramid.original_shape[1])
    _, _, g0r, g1r = _level1_ops(r)
    _, _, g0c, g1c = _level1_ops(c)
    lo_r = (g0c @ low.T).T + (g1c @ _merge(stack, "lh").T).T
    hi_r = (g0c @ _merge(stack, "hl").T).T + (g1c @ _merge(stack, "hh").T).T
    full = g0r @ lo_r + g1r @ hi_r
    return np.ascontiguousarray(full[: pyramid.original_shape[0], : pyramid.original_shape[1]])


def dtcwt2_inverse(pyramid: ComplexPyramid) -> np.ndarray:
    """Reconstruct the raster (float array of ``original_shape``)."""
    return _reconstruct(pyramid, 0)


def lowpass_at(pyramid: ComplexPyramid, level: int) -> np.ndarray:
    """The low-pass band after ``level`` levels, rebuilt from coarser levels."""
    if not 1 <= level <= pyramid.levels:
        raise ValueError(f"level {level} out of range 1..{pyramid.levels}")
    return _reconstruct(pyramid, level)


def map_orientations_to_hvd(pyramid: ComplexPyramid) -> list[dict[str, np.ndarray]]:
    """Per level, root-sum-square magnitudes of the +-15, +-75 and +-45 degree pairs.

    ``h`` collects +-15 degrees (near-horizontal stripes), ``v`` +-75 degrees
    and ``d`` +-45 degrees.
    """
    out = []
    for stack in pyramid.oriented:
        mag2 = np.abs(stack) ** 2
        out.append({k: np.sqrt(mag2[i] + mag2[j]) for k, (i, j) in _HVD_GROUPS.items()})
    return out


def _edge_pad_matrix(n: int, before: int, after: int) -> sp.csr_matrix:
    idx = np.concatenate([np.zeros(before, int), np.arange(n), np.full(after, n - 1)])
    return _sparse(np.arange(idx.size), idx, np.ones(idx.size), (idx.size, n))


def analysis_chains(n: int, levels: int) -> list[tuple]:
    """Per level, composite 1-D (low, high) operators from a length-n signal.

    The high operator yields the full-rate, two-tree interleaved samples that
    are later paired into complex coefficients.
    """
    m = _even(n)
    h0, h1, _, _ = _level1_ops(m)
    cur = _edge_pad_matrix(n, 0, m - n)
    out = [((h0 @ cur).tocsr(), (h1 @ cur).tocsr())]
    cur = out[0][0]
    for _ in range(1, levels):
        size = cur.shape[0]
        pad = (_mult4(size) - size) // 2
        cur = (_edge_pad_matrix(size, pad, pad) @ cur).tocsr()
        lo, hi = _higher_ops(cur.shape[0])
        out.append(((lo @ cur).tocsr(), (hi @ cur).tocsr()))
        cur = out[-1][0]
    return out
