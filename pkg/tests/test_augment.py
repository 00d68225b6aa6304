import json
import math

import numpy as np
import pytest

from histopatch.augment import (
    AugmentParams,
    RNG_ALGORITHM,
    apply_transform,
    draw_transform,
    flip,
    make_rng,
    random_augment,
    rotate,
    translate,
    zoom,
)


# --- independent reference resampler (scalar loops, no shared code paths) ---

def ref_reflect(i, n):
    if n == 1:
        return 0
    period = 2 * n
    m = i % period
    if m < 0:
        m += period
    return m if m < n else period - 1 - m


def ref_sample(img, sx, sy):
    h, w = img.shape[:2]
    x0, y0 = math.floor(sx), math.floor(sy)
    fx, fy = sx - x0, sy - y0
    out = []
    for c in range(3):
        p00 = float(img[ref_reflect(y0, h), ref_reflect(x0, w), c])
        p01 = float(img[ref_reflect(y0, h), ref_reflect(x0 + 1, w), c])
        p10 = float(img[ref_reflect(y0 + 1, h), ref_reflect(x0, w), c])
        p11 = float(img[ref_reflect(y0 + 1, h), ref_reflect(x0 + 1, w), c])
        top = p00 * (1 - fx) + p01 * fx
        bot = p10 * (1 - fx) + p11 * fx
        v = top * (1 - fy) + bot * fy
        out.append(min(255, max(0, math.floor(v + 0.5))))
    return out


def ref_rotate(img, angle):
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2, (h - 1) / 2
    theta = math.radians(angle)
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            dx, dy = x - cx, y - cy
            sx = cx + math.cos(theta) * dx + math.sin(theta) * dy
            sy = cy - math.sin(theta) * dx + math.cos(theta) * dy
            out[y, x] = ref_sample(img, sx, sy)
    return out


def ref_zoom(img, factor):
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2, (h - 1) / 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            out[y, x] = ref_sample(img, cx + (x - cx) / factor, cy + (y - cy) / factor)
    return out


def rand_image(rng, h=16, w=16):
    return rng.integers(0, 256, (h, w, 3), dtype=np.uint8)


class TestFlip:
    def test_2x2_horizontal(self):
        a, b, c, d = (10, 0, 0), (0, 20, 0), (0, 0, 30), (40, 40, 40)
        img = np.array([[a, b], [c, d]], dtype=np.uint8)
        expected = np.array([[b, a], [d, c]], dtype=np.uint8)
        assert np.array_equal(flip(img, "horizontal"), expected)

    def test_involution(self, rng):
        img = rand_image(rng)
        for axis in ("horizontal", "vertical"):
            assert np.array_equal(flip(flip(img, axis), axis), img)

    def test_single_row_vertical_fixed_point(self, rng):
        img = rand_image(rng, h=1, w=9)
        assert np.array_equal(flip(img, "vertical"), img)

    def test_bad_axis(self, rng):
        with pytest.raises(ValueError):
            flip(rand_image(rng), "diagonal")


class TestRotate:
    def test_identity(self, rng):
        img = rand_image(rng)
        assert np.array_equal(rotate(img, 0.0), img)

    def test_180_equals_double_flip(self, rng):
        img = rand_image(rng, 2, 2)
        assert np.array_equal(
            rotate(img, 180.0), flip(flip(img, "horizontal"), "vertical")
        )

    def test_matches_reference_resampler(self, rng):
        img = rand_image(rng)
        for angle in (40.0, -23.5, 90.0, 7.0):
            ours = rotate(img, angle).astype(np.int16)
            ref = ref_rotate(img, angle).astype(np.int16)
            assert np.abs(ours - ref).max() <= 1

    def test_same_dimensions(self, rng):
        img = rand_image(rng, 11, 23)
        assert rotate(img, 33.0).shape == img.shape


class TestTranslate:
    def test_identity(self, rng):
        img = rand_image(rng)
        assert np.array_equal(translate(img, 0.0, 0.0), img)

    def test_one_pixel_right_reflect(self):
        row = np.array([[[1] * 3, [2] * 3, [3] * 3, [4] * 3]], dtype=np.uint8)
        shifted = translate(row, 0.25, 0.0)   # 1 pixel of a 4-wide row
        assert shifted[0, :, 0].tolist() == [1, 1, 2, 3]

    def test_full_width_shift_equals_hflip(self, rng):
        img = rand_image(rng, 5, 8)
        assert np.array_equal(translate(img, 1.0, 0.0), flip(img, "horizontal"))

    def test_fraction_bounds(self, rng):
        with pytest.raises(ValueError):
            translate(rand_image(rng), 1.5, 0.0)

    def test_subpixel_matches_reference(self, rng):
        img = rand_image(rng, 8, 8)
        dx, dy = 0.13, -0.27
        ours = translate(img, dx, dy)
        ref = np.zeros_like(img)
        for y in range(8):
            for x in range(8):
                ref[y, x] = ref_sample(img, x - dx * 8, y - dy * 8)
        assert np.abs(ours.astype(int) - ref.astype(int)).max() <= 1


class TestZoom:
    def test_identity(self, rng):
        img = rand_image(rng)
        assert np.array_equal(zoom(img, 1.0), img)

    def test_constant_image_unchanged(self):
        img = np.full((13, 9, 3), 111, dtype=np.uint8)
        for factor in (0.5, 0.8, 1.2, 2.0):
            assert np.array_equal(zoom(img, factor), img)

    def test_matches_reference_resampler(self, rng):
        img = rand_image(rng)
        for factor in (1.2, 0.8):
            ours = zoom(img, factor).astype(np.int16)
            ref = ref_zoom(img, factor).astype(np.int16)
            assert np.abs(ours - ref).max() <= 1

    def test_rejects_nonpositive(self, rng):
        with pytest.raises(ValueError):
            zoom(rand_image(rng), 0.0)


class TestRandomAugment:
    def test_determinism(self, rng):
        img = rand_image(rng, 20, 20)
        params = AugmentParams()
        assert np.array_equal(random_augment(img, params, 99), random_augment(img, params, 99))

    def test_draw_ranges_over_many_seeds(self):
        params = AugmentParams()
        for seed in range(1000):
            d = draw_transform(params, make_rng(seed))
            assert -40.0 <= d.angle <= 40.0
            assert 0.8 <= d.zoom_factor <= 1.2
            assert -0.2 <= d.dx <= 0.2
            assert -0.2 <= d.dy <= 0.2

    def test_degenerate_params_identity(self, rng):
        img = rand_image(rng)
        params = AugmentParams(zoom_range=0, rotation_range=0, width_shift=0,
                               height_shift=0, hflip=False, vflip=False)
        for seed in (0, 1, 7, 2**63):
            assert np.array_equal(random_augment(img, params, seed), img)

    def test_output_dims_preserved(self, rng):
        img = rand_image(rng, 17, 31)
        assert random_augment(img, AugmentParams(), 5).shape == img.shape

    def test_no_fill_zeros(self, rng):
        img = rng.integers(1, 256, (24, 24, 3), dtype=np.uint8)
        for seed in range(10):
            assert random_augment(img, AugmentParams(), seed).min() >= 1

    def test_fixed_application_order(self, rng):
        img = rand_image(rng, 20, 20)
        params = AugmentParams()
        r = make_rng(31)
        draw = draw_transform(params, r)
        expected = zoom(img, draw.zoom_factor)
        expected = rotate(expected, draw.angle)
        expected = translate(expected, draw.dx, draw.dy)
        if draw.hflip:
            expected = flip(expected, "horizontal")
        if draw.vflip:
            expected = flip(expected, "vertical")
        assert np.array_equal(apply_transform(img, draw), expected)

    def test_flip_draws_consumed_even_when_disabled(self):
        # stream layout is fixed: disabling flips must not shift later draws
        p_on = AugmentParams()
        p_off = AugmentParams(hflip=False, vflip=False)
        d_on = draw_transform(p_on, make_rng(5))
        d_off = draw_transform(p_off, make_rng(5))
        assert d_on.angle == d_off.angle and d_on.zoom_factor == d_off.zoom_factor
        assert not d_off.hflip and not d_off.vflip


class TestParamsConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            AugmentParams(rotation_range=200)
        with pytest.raises(ValueError):
            AugmentParams(zoom_range=-0.1)
        with pytest.raises(ValueError):
            AugmentParams(fill="constant")

    def test_config_round_trip(self, tmp_path):
        cfg = {
            "zoom_range": 0.1,
            "rotation_range": 15,
            "width_shift_range": 0.05,
            "height_shift_range": 0.07,
            "horizontal_flip": True,
            "vertical_flip": False,
            "fill_mode": "reflect",
        }
        path = tmp_path / "aug.json"
        path.write_text(json.dumps(cfg))
        params = AugmentParams.from_config(path)
        assert params.zoom_range == 0.1
        assert params.rotation_range == 15
        assert params.width_shift == 0.05
        assert params.height_shift == 0.07
        assert params.hflip and not params.vflip
        out = params.to_config()
        assert out["fill_mode"] == "reflect"
        assert out["rng"] == RNG_ALGORITHM
        # canonical keys round-trip through from_config unchanged
        assert AugmentParams.from_config(out) == params
