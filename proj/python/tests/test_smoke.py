import math

import numpy as np
import pytest

import omnigsr


def texture(h=128, w=256, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    lon = (xx + 0.5) / w * 2 * np.pi
    lat = (0.5 - (yy + 0.5) / h) * np.pi
    img = np.zeros((h, w, 3))
    for ch in range(3):
        k = rng.integers(1, 6)
        img[..., ch] = 127 + 100 * np.sin(k * lon) * np.cos(lat) * np.cos(3 * lat)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def test_generate_defaults():
    paths = omnigsr.generate_scanpaths(seed=7)
    pts = paths.points
    assert pts.shape == (49, 20, 2)
    assert np.all(pts[:, 0] == 0.5)
    assert np.all((pts >= 0) & (pts <= 1))
    assert paths == omnigsr.generate_scanpaths(seed=7)
    assert paths.to_json() != omnigsr.generate_scanpaths(seed=8).to_json()


def test_generate_rejects_zero():
    with pytest.raises(ValueError, match="n must be"):
        omnigsr.generate_scanpaths(n=0)


def test_convert_and_score(tmp_path):
    ref = texture()
    dist = ref.copy()
    dist[40:80, 100:160] //= 2
    paths = omnigsr.generate_scanpaths(seed=1)
    a = omnigsr.convert(ref, paths)
    b = omnigsr.convert(dist, paths)
    assert a.frames.shape == (20, 224, 224, 3)
    assert a.meta["grid"] == [7, 7]
    assert a.patch(0, 0).shape == (32, 32, 3)

    same = omnigsr.score(a, a)
    assert same["pooled"] == 100.0
    rep = omnigsr.score(a, b, metric="psnr", pool="gw")
    assert rep["matrix"].shape == (49, 20)
    assert rep["pooled"] < 100.0

    a.save(tmp_path / "a.gsr")
    back = omnigsr.read_gsr(tmp_path / "a.gsr")
    assert np.array_equal(back.frames, a.frames)
    assert back.meta == a.meta


def test_convert_rejects_non_square():
    paths = omnigsr.generate_scanpaths(n=48)
    with pytest.raises(omnigsr.ConfigError):
        omnigsr.convert(texture(), paths)


def test_points_roundtrip():
    pts = np.array([[[0.5, 0.5], [0.4, 0.6]],
                    [[0.5, 0.5], [0.7, 0.1]],
                    [[0.5, 0.5], [0.0, 0.9]],
                    [[0.5, 0.5], [1.0, 0.0]]])
    paths = omnigsr.scanpaths_from_points(pts)
    assert np.array_equal(paths.points, pts)
    seq = omnigsr.convert(texture(), paths, patch=(8, 12), sampling="erp")
    assert seq.frames.shape == (2, 16, 24, 3)
    assert seq.meta["sampling"] == "erp_crop"


def test_image_metrics():
    a = texture(seed=2)
    b = np.clip(a.astype(int) + 5, 0, 255).astype(np.uint8)
    assert omnigsr.psnr(a, a) == 100.0
    assert 0 < omnigsr.ssim(a, b) <= 1
    c = (a % 200).astype(np.uint8)
    assert omnigsr.ws_psnr(c, c + 5) == pytest.approx(20 * math.log10(255 / 5), abs=1e-9)
    assert omnigsr.s_psnr(a, b, points=4096) > 20


def test_pooling_and_correlation():
    m = np.array([[1.0, 2.0, 3.0]])
    assert omnigsr.pool(m, "am") == pytest.approx(2.0)
    assert omnigsr.pool(m, "gw:1") == pytest.approx(2.49640, abs=1e-5)
    assert omnigsr.srcc([1, 2, 2, 3], [1, 3, 2, 4]) == pytest.approx(3 / math.sqrt(10))
    x = np.linspace(0, 10, 30)
    y = 1 + 4 / (1 + np.exp(-(x - 5)))
    assert omnigsr.plcc(x, y, mapping="logistic4") >= 0.999999


def test_make_splits():
    ids = [f"r{i}" for i in range(10)]
    plan = omnigsr.make_splits(ids, seed=3)
    assert len(plan) == 5
    for part in plan:
        assert (len(part["train"]), len(part["val"]), len(part["test"])) == (7, 1, 2)
        assert sorted(part["train"] + part["val"] + part["test"]) == sorted(ids)
    assert plan == omnigsr.make_splits(ids, seed=3)
