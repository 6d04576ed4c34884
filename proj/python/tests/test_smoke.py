import json
import math

import numpy as np
import pytest

import yarnscope as ys


def test_calibration_and_band():
    ppm = ys.calibrate(34, 0.5)
    assert ppm == pytest.approx(68)
    assert ys.px_to_mm(10.2, ppm) == pytest.approx(0.15)
    lo, hi = ys.trommer_band(40, "Ne1")
    assert lo < 0.15 < hi
    with pytest.raises(ValueError):
        ys.calibrate(0, 1)


def test_band_threshold_shape_and_values():
    img = np.array([[79, 80, 130], [180, 181, 0]], dtype=np.uint8)
    out = ys.band_threshold(img, 80, 180)
    assert out.shape == (2, 3)
    assert out.tolist() == [[0, 80, 130], [180, 0, 0]]


def test_diameter_and_twist_on_synthetic_yarn():
    img = ys.render_yarn(core_width=17, height=60, core_axis=30)
    assert img.shape == (60, 256)
    assert abs(ys.histogram_level_diameter(img) - 17) <= 1
    assert abs(ys.histogram_level_diameter(img, "inflection") - 17) <= 1

    stripes = ys.render_yarn(stripes=True, height=96, core_width=48, core_axis=48, twist_angle_deg=30)
    assert abs(ys.twist_angle(stripes, "fft")["angle_deg"] - 30) < 2
    assert ys.twist_angle(stripes, "lines")["direction"] == "Z"


def test_slubs_and_splice_grades():
    img = ys.render_yarn(width=1200, core_width=10, slubs=[{"start": 100, "length": 300, "width": 25}])
    rep = ys.detect_slubs(img, 10)
    assert len(rep["segments"]) == 1
    assert rep["segments"][0]["length_mm"] == pytest.approx(30)
    assert ys.classify_opening(0.4, 12, 1.0, 0.9, 0.6) == "A"
    assert ys.classify_opening(0.4, 3, 0.3) == "D"
    with pytest.raises(RuntimeError):
        ys.classify_opening(0.4, 7, 1.0)


def test_stats_against_textbook_values():
    t = ys.one_way_anova([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert t["ss_between"] == pytest.approx(54)
    assert t["ss_error"] == pytest.approx(6)
    assert t["f"] == pytest.approx(27)
    pw = ys.pairwise_mean_diff([38.01, 41.91, 23.86], [5, 5, 5], 22.106, 12)
    assert pw[0]["diff"] == pytest.approx(-3.90)
    assert pw[0]["se"] == pytest.approx(math.sqrt(22.106 * 0.4))


def test_texture_and_wavelet():
    field = ys.render_fiber_field(angle_deg=30)
    r = ys.analyze_texture(field)
    assert abs(r["mean_angle_deg"] - 30) < 1.3
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(37, 53), dtype=np.uint8)
    assert np.array_equal(ys.haar_roundtrip(img, 3), img)
    hairy = ys.render_yarn(core_width=15, hairs=[{"column": 40, "length_px": 9, "side": "above"}])
    core = ys.separate_core(hairy)
    assert set(np.unique(core)) <= {0, 1}
    assert abs(int(core[:, 40].sum()) - 15) <= 1


def test_cli_in_process():
    code, out, err = ys.run_cli(["calibrate", "--pixels", "34", "--mm", "0.5", "--measure-px", "10.2"])
    assert code == 0
    report = json.loads(out)
    assert report["subcommand"] == "calibrate"
    code, _, err = ys.run_cli(["diameter", "--image", "/nonexistent.pgm"])
    assert code == 2
    assert err
