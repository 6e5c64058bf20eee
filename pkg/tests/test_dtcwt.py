import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tirwave.dtcwt import (
    ORIENTATIONS,
    ComplexPyramid,
    dtcwt2_forward,
    dtcwt2_inverse,
    dtcwt_band_shapes,
    lowpass_at,
    map_orientations_to_hvd,
)
from tirwave.dwt import BANDS, dwt2_forward
from tirwave.filters import make_filterbank


def _grating(angle_deg, n=64, w=3 * np.pi / 8):
    """Stripes running at ``angle_deg`` counter-clockwise from horizontal, y up."""
    t = np.deg2rad(angle_deg)
    row, col = np.mgrid[0:n, 0:n].astype(float)
    y_up = -row
    return 0.5 + 0.4 * np.cos(w * (-np.sin(t) * col + np.cos(t) * y_up))


def _band_energies(pyr, level, crop=2):
    stack = pyr.oriented[level - 1][:, crop:-crop, crop:-crop]
    return np.sum(np.abs(stack) ** 2, axis=(1, 2))


def _level1_oracle(x):
    """Level-1 complex bands from direct full-rate filtering with edge-repeating mirrors."""
    bank = make_filterbank("bior4.4")
    s = np.sqrt(0.5)

    def filt(arr, taps, axis):
        c = taps.size // 2
        ext = np.pad(arr, [(c, c) if a == axis else (0, 0) for a in range(2)], mode="symmetric")
        return np.apply_along_axis(lambda v: np.correlate(v, taps * s, mode="valid"), axis, ext)

    lo0, hi0 = filt(x, bank.analysis_lo, 0), filt(x, bank.analysis_hi, 0)
    full = {"hl": filt(hi0, bank.analysis_lo, 1), "lh": filt(lo0, bank.analysis_hi, 1),
            "hh": filt(hi0, bank.analysis_hi, 1)}
    out = {}
    for key, y in full.items():
        a, b, c, d = y[0::2, 0::2], y[0::2, 1::2], y[1::2, 0::2], y[1::2, 1::2]
        out[key] = ((a - d) * s + 1j * (b + c) * s, (a + d) * s + 1j * (b - c) * s)
    return out


class TestForward:
    def test_constant_image(self):
        pyr = dtcwt2_forward(np.full((32, 32), 0.7), 3)
        for stack in pyr.oriented:
            assert np.max(np.abs(stack)) < 1e-10
        assert np.ptp(pyr.lowpass) < 1e-10

    def test_level1_matches_direct_filtering(self, rng):
        x = rng.random((16, 20))
        pyr = dtcwt2_forward(x, 1)
        ref = _level1_oracle(x)
        pairs = {"hl": (15, -15), "lh": (75, -75), "hh": (45, -45)}
        for key, (p, q) in pairs.items():
            np.testing.assert_allclose(pyr.band(1, p), ref[key][0], atol=1e-13)
            np.testing.assert_allclose(pyr.band(1, q), ref[key][1], atol=1e-13)

    def test_orientation_order(self):
        assert ORIENTATIONS == (15, 45, 75, -75, -45, -15)

    @pytest.mark.parametrize("angle", ORIENTATIONS)
    def test_grating_selects_matching_band(self, angle):
        pyr = dtcwt2_forward(_grating(angle), 2)
        e = _band_energies(pyr, 2)
        assert ORIENTATIONS[int(np.argmax(e))] == angle

    def test_45_degree_grating(self):
        e = _band_energies(dtcwt2_forward(_grating(45), 2), 2)
        assert ORIENTATIONS[int(np.argmax(e))] in (45, -45)

    def test_shapes(self):
        pyr = dtcwt2_forward(np.zeros((65, 63)), 3)
        assert [s.shape for s in pyr.oriented] == [(6, 33, 32), (6, 17, 16), (6, 9, 8)]
        assert dtcwt_band_shapes((65, 63), 3)[0] == [(33, 32), (17, 16), (9, 8)]

    def test_too_many_levels(self):
        with pytest.raises(ValueError, match="too many levels"):
            dtcwt2_forward(np.zeros((8, 8)), 4)


class TestInverse:
    def test_round_trip_64(self, rng):
        x = rng.random((64, 64))
        assert np.max(np.abs(dtcwt2_inverse(dtcwt2_forward(x, 2)) - x)) < 1e-8

    def test_round_trip_odd(self, rng):
        x = rng.random((65, 63))
        for levels in (1, 2, 3):
            assert np.max(np.abs(dtcwt2_inverse(dtcwt2_forward(x, levels)) - x)) < 1e-8

    def test_zero_pyramid(self):
        pyr = dtcwt2_forward(np.ones((16, 16)), 2)
        zero = ComplexPyramid(2, np.zeros_like(pyr.lowpass),
                              tuple(np.zeros_like(s) for s in pyr.oriented), (16, 16))
        assert not np.any(dtcwt2_inverse(zero))

    def test_inconsistent_shapes(self):
        pyr = dtcwt2_forward(np.ones((16, 16)), 2)
        with pytest.raises(ValueError):
            ComplexPyramid(2, pyr.lowpass, (pyr.oriented[0], pyr.oriented[0]), (16, 16))

    def test_lowpass_at_matches_shallower_transform(self, rng):
        x = rng.random((32, 32))
        deep = dtcwt2_forward(x, 3)
        for level in (1, 2):
            np.testing.assert_allclose(lowpass_at(deep, level), dtcwt2_forward(x, level).lowpass,
                                       atol=1e-12)


class TestHVD:
    def test_zero(self):
        pyr = dtcwt2_forward(np.zeros((16, 16)), 2)
        for lev in map_orientations_to_hvd(pyr):
            for key in BANDS:
                assert not np.any(lev[key])

    def test_horizontal_edge(self):
        x = np.zeros((32, 32))
        x[15:, :] = 1.0
        hvd = map_orientations_to_hvd(dtcwt2_forward(x, 2))[0]
        e = {k: np.sum(hvd[k] ** 2) for k in BANDS}
        assert e["h"] > e["v"] and e["h"] > e["d"]

    def test_equal_magnitudes(self):
        pyr = dtcwt2_forward(np.zeros((16, 16)), 1)
        ones = ComplexPyramid(1, pyr.lowpass, (np.full_like(pyr.oriented[0], 0.6 + 0.8j),), (16, 16))
        hvd = map_orientations_to_hvd(ones)[0]
        np.testing.assert_allclose(hvd["h"], np.sqrt(2.0))
        np.testing.assert_array_equal(hvd["h"], hvd["v"])
        np.testing.assert_array_equal(hvd["h"], hvd["d"])

    def test_root_sum_square(self, rng):
        pyr = dtcwt2_forward(rng.random((16, 16)), 1)
        hvd = map_orientations_to_hvd(pyr)[0]
        expect = np.sqrt(np.abs(pyr.band(1, 75)) ** 2 + np.abs(pyr.band(1, -75)) ** 2)
        np.testing.assert_allclose(hvd["v"], expect, rtol=1e-15)


def _impulse(r, c, n=64):
    x = np.zeros((n, n))
    x[r, c] = 1.0
    return x


def _dwt_level_energy(x, family, level):
    b = dwt2_forward(x, family, level).details[level - 1]
    return {k: float(np.sum(b[k] ** 2)) for k in BANDS}


def _dtcwt_level_energy(x, level):
    hvd = map_orientations_to_hvd(dtcwt2_forward(x, level))[level - 1]
    return {k: float(np.sum(hvd[k] ** 2)) for k in BANDS}


class TestShiftInvariance:
    def test_single_shift_changes_less_than_db4(self):
        a, b = _impulse(16, 16), _impulse(17, 16)
        pa, pb = dtcwt2_forward(a, 2), dtcwt2_forward(b, 2)
        ea, eb = _band_energies(pa, 2, crop=1), _band_energies(pb, 2, crop=1)
        rel_dt = np.abs(eb - ea) / ea
        da, db = _dwt_level_energy(a, "db4", 2), _dwt_level_energy(b, "db4", 2)
        group = {15: "h", -15: "h", 75: "v", -75: "v", 45: "d", -45: "d"}
        for i, angle in enumerate(ORIENTATIONS):
            k = group[angle]
            assert rel_dt[i] < abs(db[k] - da[k]) / da[k]

    @pytest.mark.parametrize("level", [2, 3])
    def test_cov_over_shifts_db4(self, level):
        shifts = [_impulse(16 + s, 16) for s in range(8)]
        for k in BANDS:
            dt = np.array([_dtcwt_level_energy(x, level)[k] for x in shifts])
            dw = np.array([_dwt_level_energy(x, "db4", level)[k] for x in shifts])
            assert dt.std() / dt.mean() < dw.std() / dw.mean()


@given(st.integers(8, 128), st.integers(8, 128), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_round_trip_property(r, c, levels, seed):
    x = np.random.default_rng(seed).random((r, c))
    assert np.max(np.abs(dtcwt2_inverse(dtcwt2_forward(x, levels)) - x)) < 1e-8


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_property(seed, a, b):
    g = np.random.default_rng(seed)
    x, y = g.random((24, 18)), g.random((24, 18))
    pz, px, py = (dtcwt2_forward(v, 2) for v in (a * x + b * y, x, y))
    np.testing.assert_allclose(pz.lowpass, a * px.lowpass + b * py.lowpass, atol=1e-12)
    for sz, sx, sy in zip(pz.oriented, px.oriented, py.oriented):
        np.testing.assert_allclose(sz, a * sx + b * sy, atol=1e-12)


def test_haar_impulse_energy_is_position_independent():
    # every level-2 Haar basis function is +-1/4 on its 4x4 support, so any
    # impulse puts energy exactly 1/16 in each band: the CoV over shifts is 0
    energies = {(r, c): _dwt_level_energy(_impulse(r, c), "haar", 2)
                for r in range(24, 32) for c in range(24, 32)}
    for e in energies.values():
        for k in BANDS:
            assert e[k] == pytest.approx(1 / 16, abs=1e-15)
