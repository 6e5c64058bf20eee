import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ALL_SELECTORS, ORTHOGONAL_FAMILIES
from tirwave.analysis import (
    EnergyReport,
    PairError,
    RatioReport,
    RatioRow,
    batch_energy_report,
    decompose,
    energy_ratio,
    format_energy,
    render_report,
    subband_energy,
)
from tirwave.dtcwt import map_orientations_to_hvd
from tirwave.dwt import BANDS, lowpass_at
from tirwave.imaging import Image, NoiseSpec, add_noise, save_image, synthetic_scene

KEYS = ("lo", "h", "v", "d")

# Table III energies (noisy, clean) for two rows, with the tabulated ratios.
TABLE3 = {
    "Haar": ((2.340e9, 3.789e6, 2.585e6, 1.720e6), (2.310e9, 2.444e6, 1.161e6, 0.239e6),
             (98.73, 64.51, 44.94, 13.93)),
    "Bior.": ((2.464e9, 23.093e6, 21.301e6, 7.989e6), (2.385e9, 3.443e6, 1.378e6, 0.227e6),
              (96.81, 14.91, 6.47, 2.85)),
}


def _energy_oracle(pyr, j):
    """Brute-force sums of squares, one coefficient at a time."""
    if hasattr(pyr, "oriented"):
        from tirwave.dtcwt import lowpass_at as low
        groups = map_orientations_to_hvd(pyr)
    else:
        low = lowpass_at
        groups = pyr.details
    out = {"lo": sum(float(v) ** 2 for v in np.ravel(low(pyr, j)))}
    for k in BANDS:
        out[k] = sum(float(abs(v)) ** 2 for lev in groups[:j] for v in np.ravel(lev[k]))
    return out


def _corpus(n=3, shape=(32, 32)):
    for seed in range(1, n + 1):
        clean = synthetic_scene(shape, seed)
        yield clean, add_noise(clean, NoiseSpec("column-fpn", 0.1, seed))


class TestSubbandEnergy:
    def test_zero_image(self):
        for sel in ALL_SELECTORS:
            rep = subband_energy(decompose(np.zeros((16, 16)), sel, 2))
            assert rep.total == 0

    def test_haar_pinned_example(self):
        rep = subband_energy(decompose(np.array([[1.0, 1.0], [0.0, 0.0]]), "haar", 1), 1)
        assert (rep.e_lo, rep.e_h, rep.e_v, rep.e_d) == pytest.approx((1.0, 1.0, 0.0, 0.0), abs=1e-15)

    @pytest.mark.parametrize("sel", ALL_SELECTORS)
    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_matches_brute_force(self, sel, j, rng):
        pyr = decompose(rng.random((24, 20)), sel, 3)
        rep = subband_energy(pyr, j)
        ref = _energy_oracle(pyr, j)
        for k in KEYS:
            assert rep.energy(k) == pytest.approx(ref[k], rel=1e-12)

    def test_level_out_of_range(self):
        pyr = decompose(np.zeros((16, 16)), "db4", 2)
        with pytest.raises(ValueError):
            subband_energy(pyr, 3)
        with pytest.raises(ValueError):
            subband_energy(pyr, 0)

    def test_per_level_sums(self, rng):
        rep = subband_energy(decompose(rng.random((32, 32)), "sym4", 3), per_level=True)
        for k in BANDS:
            assert math.fsum(lv[k] for lv in rep.per_level) == pytest.approx(rep.energy(k), rel=1e-14)

    @given(st.sampled_from(ORTHOGONAL_FAMILIES), st.sampled_from([16, 32, 64]), st.integers(1, 3),
           st.integers(0, 2**32 - 1))
    def test_parseval_pass_through(self, family, n, j, seed):
        x = np.random.default_rng(seed).standard_normal((n, n))
        rep = subband_energy(decompose(x, family, 3), j)
        assert rep.total == pytest.approx(float(np.sum(x * x)), rel=1e-8)

    def test_negative_energy_rejected(self):
        with pytest.raises(ValueError):
            EnergyReport("haar", 1, -1.0, 0, 0, 0)


class TestRatios:
    def test_identical_images(self):
        x = synthetic_scene((32, 32), 3)
        rep = energy_ratio(x, x, ALL_SELECTORS, 2)
        for row in rep.rows:
            for k in KEYS:
                assert row.ratio(k) == pytest.approx(100.0, abs=1e-12)
        assert render_report(rep).count("100.00%") == 4 * len(ALL_SELECTORS)

    def test_ratio_is_clean_over_noisy(self):
        clean, noisy = next(_corpus())
        row = energy_ratio(clean, noisy, ["db4"], 2).rows[0]
        assert row.ratio_v == pytest.approx(100 * row.clean.e_v / row.noisy.e_v)

    def test_zero_noisy_energy_is_absent(self):
        x = np.full((16, 16), 0.5)
        row = energy_ratio(x, x, ["haar"], 1).rows[0]
        assert row.ratio_h is None and row.ratio_lo == pytest.approx(100.0)
        assert "n/a" in render_report(energy_ratio(x, x, ["haar"], 1))

    def test_shape_mismatch(self):
        with pytest.raises(PairError, match="shape"):
            energy_ratio(np.zeros((16, 16)), np.zeros((16, 18)), ["haar"], 1)

    @given(st.floats(0.1, 10.0), st.sampled_from(ALL_SELECTORS))
    def test_scale_invariance(self, c, sel):
        clean, noisy = next(_corpus(1, (16, 16)))
        a = energy_ratio(clean, noisy, [sel], 2).rows[0]
        b = energy_ratio(clean.data * c, noisy.data * c, [sel], 2).rows[0]
        for k in KEYS:
            assert b.ratio(k) == pytest.approx(a.ratio(k), rel=1e-10)

    def test_column_fpn_separability(self):
        clean = synthetic_scene((64, 64), 1)
        noisy = add_noise(clean, NoiseSpec("column-fpn", 0.1, 1))
        for row in energy_ratio(clean, noisy, ALL_SELECTORS, 2).rows:
            assert row.ratio_lo > 90
            assert min(row.ratio_h, row.ratio_v, row.ratio_d) < 20


class TestBatch:
    def test_single_pair_equals_energy_ratio(self):
        pair = next(_corpus())
        a = batch_energy_report([pair], ALL_SELECTORS)
        b = energy_ratio(*pair, ALL_SELECTORS, 2)
        assert render_report(a, "json") == render_report(b, "json")

    def test_duplicated_pairs_same_ratios(self):
        pair = next(_corpus())
        a = batch_energy_report([pair], ["db4", "dtcwt"])
        b = batch_energy_report([pair, pair], ["db4", "dtcwt"])
        for ra, rb in zip(a.rows, b.rows):
            for k in KEYS:
                assert rb.ratio(k) == pytest.approx(ra.ratio(k), rel=1e-14)
                assert rb.clean.energy(k) == pytest.approx(2 * ra.clean.energy(k), rel=1e-14)

    def test_two_pairs_hand_summed(self):
        pairs = list(_corpus(2))
        rep = batch_energy_report(pairs, ["bior4.4"])
        singles = [energy_ratio(c, n, ["bior4.4"], 2).rows[0] for c, n in pairs]
        for k in KEYS:
            expect = 100 * (singles[0].clean.energy(k) + singles[1].clean.energy(k)) / (
                singles[0].noisy.energy(k) + singles[1].noisy.energy(k))
            assert rep.rows[0].ratio(k) == pytest.approx(expect, rel=1e-12)

    def test_order_and_workers_independent(self):
        pairs = list(_corpus(4))
        base = render_report(batch_energy_report(pairs, ALL_SELECTORS), "csv")
        assert render_report(batch_energy_report(pairs[::-1], ALL_SELECTORS), "csv") == base
        assert render_report(batch_energy_report(pairs, ALL_SELECTORS, workers=3), "csv") == base

    def test_rows_in_requested_order(self):
        rep = batch_energy_report(list(_corpus(1)), ["dtcwt", "haar", "bior4.4"])
        assert [r.family for r in rep.rows] == ["dtcwt", "haar", "bior4.4"]
        assert rep.row("haar").family == "haar"

    def test_empty(self):
        with pytest.raises(ValueError, match="no pairs"):
            batch_energy_report([], ["haar"])

    def test_paths_and_bad_pair(self, tmp_path):
        clean, noisy = next(_corpus())
        save_image(clean, tmp_path / "c.png", 16)
        save_image(noisy, tmp_path / "n.png", 16)
        rep = batch_energy_report([(tmp_path / "c.png", tmp_path / "n.png")], ["haar"])
        assert rep.pairs == 1
        save_image(Image(np.zeros((8, 8))), tmp_path / "small.png")
        with pytest.raises(PairError, match="pair 2"):
            batch_energy_report([(tmp_path / "c.png", tmp_path / "n.png"),
                                 (tmp_path / "c.png", tmp_path / "small.png")], ["haar"])
        with pytest.raises(PairError, match="missing.png"):
            batch_energy_report([(tmp_path / "c.png", tmp_path / "missing.png")], ["haar"])


class TestRendering:
    @pytest.mark.parametrize("value, text", [
        (2.340e9, "2.340B"), (3.789e6, "3.789M"), (0.239e6, "0.239M"), (23.093e6, "23.093M"),
        (12.5, "12.500"), (0.0, "0.000"),
    ])
    def test_format_energy(self, value, text):
        assert format_energy(value) == text

    @staticmethod
    def _table3_report():
        rows = []
        for name, (noisy, clean, _) in TABLE3.items():
            rows.append(RatioRow(name, EnergyReport(name, 2, *clean), EnergyReport(name, 2, *noisy)))
        return RatioReport(tuple(rows), 2, 1)

    def test_table_layout_reproduces_published_rows(self):
        text = render_report(self._table3_report())
        lines = text.splitlines()
        assert lines[0].startswith("# ratio = clean energy / noisy energy")
        assert lines[1].split() == ["family", "E_lo", "E_h", "E_v", "E_d"]
        assert lines[3].split() == ["Haar", "noisy", "2.340B", "3.789M", "2.585M", "1.720M"]
        assert lines[4].split() == ["clean", "2.310B", "2.444M", "1.161M", "0.239M"]
        assert lines[7].split() == ["Bior.", "noisy", "2.464B", "23.093M", "21.301M", "7.989M"]

    def test_clean_over_noisy_matches_published_ratios(self):
        # Energies are printed to 3 decimals of their B/M unit, so each one is
        # known to +-0.0005 units; the printed percentage must fall inside the
        # clean/noisy interval those bounds allow (plus its own rounding).
        for row in self._table3_report().rows:
            for k, published in zip(KEYS, TABLE3[row.family][2]):
                unit = 1e9 if k == "lo" else 1e6
                c, n = row.clean.energy(k), row.noisy.energy(k)
                half = 0.0005 * unit
                lo = 100 * (c - half) / (n + half) - 0.005
                hi = 100 * (c + half) / (n - half) + 0.005
                assert lo <= published <= hi
                # the inverse direction is nowhere near the printed values
                assert not 100 * n / c <= hi

    def test_csv_and_json(self):
        rep = batch_energy_report(list(_corpus(2)), ["haar", "dtcwt"], per_level=True)
        csv_text = render_report(rep, "csv", per_level=True)
        assert csv_text.splitlines()[0] == "family,levels,pairs,band,noisy,clean,ratio_percent"
        assert "haar,2,2,L1.v," in csv_text
        doc = json.loads(render_report(rep, "json", scale=255.0 ** 2, per_level=True))
        assert doc["schema"] == 1 and doc["ratio"] == "clean/noisy"
        assert doc["rows"][0]["clean"]["e_lo"] == pytest.approx(rep.rows[0].clean.e_lo * 255 ** 2)
        assert doc["rows"][1]["family"] == "dtcwt"
        assert len(doc["rows"][0]["per_level"]) == 2

    def test_table_per_level(self):
        rep = batch_energy_report(list(_corpus(1)), ["db4"], per_level=True)
        text = render_report(rep, per_level=True)
        assert "L1 ratio" in text and "L2 ratio" in text

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(batch_energy_report(list(_corpus(1)), ["db4"]), "xml")
