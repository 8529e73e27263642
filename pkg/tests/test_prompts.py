"""Prompt types, JSON schema, rasterization, encoding, and simulation."""

import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oneprompt.numerics import ParamStore
from oneprompt.numerics.tensor import ShapeError
from oneprompt.prompts import (InvalidPromptError, MaskAutoencoder, Prompt,
                               PromptKind, QualityLevel, bresenham,
                               encode_prompt, encode_prompt_vecs,
                               init_prompt_params, prompt_from_json,
                               prompt_to_json, rasterize_doodle, rle_decode,
                               rle_encode, simulate_prompt)
from oneprompt.numerics import functional as F

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def square_mask(lo=27, hi=36, size=64):
    m = np.zeros((size, size), dtype=np.uint8)
    m[lo:hi + 1, lo:hi + 1] = 1
    return m


# ----------------------------------------------------------------- validation


class TestPromptValidation:
    def test_exactly_one_payload(self):
        with pytest.raises(InvalidPromptError):
            Prompt(PromptKind.CLICK, fg_points=[(1, 1)],
                   top_left=(0, 0), bottom_right=(5, 5)).validate()
        with pytest.raises(InvalidPromptError):
            Prompt(PromptKind.CLICK).validate()
        with pytest.raises(InvalidPromptError):
            Prompt(PromptKind.SEGLAB).validate()

    def test_bbox_corner_order(self):
        with pytest.raises(InvalidPromptError):
            Prompt(PromptKind.BBOX, top_left=(5, 5),
                   bottom_right=(5, 9)).validate()
        Prompt(PromptKind.BBOX, top_left=(4, 5),
               bottom_right=(5, 9)).validate()


# --------------------------------------------------------------------- schema


class TestSchema:
    def test_rle_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            mask = (rng.random((64, 64)) < 0.3).astype(np.uint8)
            assert np.array_equal(rle_decode(rle_encode(mask), (64, 64)),
                                  mask)

    def test_rle_starts_with_background_run(self):
        mask = np.ones((2, 2), dtype=np.uint8)
        # leading background count is 0 when the mask starts with foreground
        assert rle_encode(mask) == "0 4"
        assert rle_encode(np.zeros((2, 2), dtype=np.uint8)) == "4"

    def test_rle_length_mismatch(self):
        with pytest.raises(InvalidPromptError):
            rle_decode("3 2", (64, 64))

    @pytest.mark.parametrize("prompt", [
        Prompt(PromptKind.CLICK, fg_points=[(3, 4)], bg_points=[(10, 12)]),
        Prompt(PromptKind.BBOX, top_left=(2, 3), bottom_right=(10, 11)),
        Prompt(PromptKind.DOODLE, fg_polylines=[[(1, 1), (5, 5)]]),
        Prompt(PromptKind.SEGLAB, mask=square_mask()),
    ])
    def test_json_round_trip(self, prompt):
        back = prompt_from_json(json.loads(json.dumps(prompt_to_json(prompt))))
        assert back.kind == prompt.kind
        assert back.fg_points == prompt.fg_points
        assert back.bg_points == prompt.bg_points
        assert back.top_left == prompt.top_left
        assert back.bottom_right == prompt.bottom_right
        assert back.fg_polylines == prompt.fg_polylines
        if prompt.mask is not None:
            assert np.array_equal(back.mask, prompt.mask)

    def test_unknown_kind_named(self):
        with pytest.raises(InvalidPromptError, match="text"):
            prompt_from_json({"kind": "text"})

    def test_bad_point_names_field(self):
        with pytest.raises(InvalidPromptError, match="tl"):
            prompt_from_json({"kind": "bbox", "tl": [1.5, 2], "br": [5, 6]})


# -------------------------------------------------------------- rasterization


class TestRasterizeDoodle:
    def test_single_point_dilation(self):
        # independent oracle: the point plus its full 8-neighborhood
        got = set(rasterize_doodle([[(5, 5)]], 64))
        want = {(5 + dx, 5 + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)}
        assert got == want

    def test_horizontal_line(self):
        # Bresenham on (0,0)->(3,0) is the 4 pixels y=0, x=0..3; dilation
        # adds the rows y=-1 (clipped) and y=1 plus x=-1/x=4 columns.
        got = set(rasterize_doodle([[(0, 0), (3, 0)]], 64))
        want = {(x, y) for x in range(-1, 5) for y in (-1, 0, 1)
                if 0 <= x < 64 and 0 <= y < 64}
        assert got == want

    def test_idempotent_union(self):
        line = [(3, 3), (9, 7)]
        once = rasterize_doodle([line], 64)
        twice = rasterize_doodle([line, line], 64)
        assert once == twice

    def test_bresenham_endpoints_and_connectivity(self):
        pts = bresenham((2, 3), (11, 7))
        assert pts[0] == (2, 3) and pts[-1] == (11, 7)
        for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
            assert max(abs(x1 - x0), abs(y1 - y0)) == 1

    def test_fixture_corpus_bit_exact(self):
        # Shared 50-case corpus; the browser client must reproduce it too.
        with open(os.path.join(FIXTURES, "doodle_cases.json")) as fh:
            doc = json.load(fh)
        assert len(doc["cases"]) == 50
        for case in doc["cases"]:
            polylines = [[tuple(p) for p in line]
                         for line in case["polylines"]]
            got = rasterize_doodle(polylines, doc["image_size"])
            assert [list(p) for p in got] == case["pixels"]

    def test_empty_doodle_rejected(self):
        with pytest.raises(InvalidPromptError):
            rasterize_doodle([], 64)


# ------------------------------------------------------------------- encoding


@pytest.fixture(scope="module")
def prompt_scope():
    store = ParamStore(0)
    scope = store.scope("prompt")
    init_prompt_params(scope, 128)
    return scope


@pytest.fixture(scope="module")
def zero_scope():
    store = ParamStore(0)
    scope = store.scope("prompt")
    init_prompt_params(scope, 128)
    for name in ("emb_fg", "emb_bg", "emb_tl", "emb_br"):
        scope[name].data[:] = 0.0
    return scope


@pytest.fixture(scope="module")
def mask_ae():
    return MaskAutoencoder(seed=0)


class TestEncodePrompt:
    def test_click_zero_init_equals_pe(self, zero_scope):
        pair = encode_prompt(Prompt(PromptKind.CLICK, fg_points=[(0, 0)]),
                             zero_scope, n_tokens=64, length=128,
                             image_size=64)
        pe = F.sinusoidal_pe((0, 0), 128, 64)
        assert pair.p1.shape == (64, 128)
        for row in pair.p1.data:
            assert np.array_equal(row, pe)

    def test_bbox_zero_init_rows(self, zero_scope):
        pair = encode_prompt(
            Prompt(PromptKind.BBOX, top_left=(27, 27), bottom_right=(36, 36)),
            zero_scope, n_tokens=64, length=128, image_size=64)
        assert np.array_equal(pair.p1.data[0], F.sinusoidal_pe((27, 27), 128, 64))
        assert np.array_equal(pair.p2.data[0], F.sinusoidal_pe((36, 36), 128, 64))

    def test_seglab_p1_equals_p2(self, prompt_scope, mask_ae):
        pair = encode_prompt(Prompt(PromptKind.SEGLAB, mask=square_mask()),
                             prompt_scope, mask_ae, n_tokens=64, length=128,
                             image_size=64)
        assert np.array_equal(pair.p1.data, pair.p2.data)

    def test_all_kinds_shape(self, prompt_scope, mask_ae):
        prompts = [
            Prompt(PromptKind.CLICK, fg_points=[(3, 4), (5, 6)]),
            Prompt(PromptKind.BBOX, top_left=(1, 2), bottom_right=(9, 9)),
            Prompt(PromptKind.DOODLE, fg_polylines=[[(0, 0), (20, 30)]]),
            Prompt(PromptKind.SEGLAB, mask=square_mask()),
        ]
        for p in prompts:
            pair = encode_prompt(p, prompt_scope, mask_ae, n_tokens=64,
                                 length=128, image_size=64)
            assert pair.p1.shape == (64, 128)
            assert pair.p2.shape == (64, 128)
            assert np.isfinite(pair.p1.data).all()
            assert np.isfinite(pair.p2.data).all()

    def test_seglab_size_mismatch(self, prompt_scope, mask_ae):
        small = np.ones((32, 32), dtype=np.uint8)
        with pytest.raises(ShapeError):
            encode_prompt_vecs(Prompt(PromptKind.SEGLAB, mask=small),
                               prompt_scope, mask_ae, length=128,
                               image_size=64)


# ----------------------------------------------------------------- simulation


class TestSimulatePrompt:
    def test_oracle_click_centroid(self):
        # centroid of rows/cols 27..36 is 31.5 -> round half up -> 32
        rng = np.random.default_rng(0)
        p = simulate_prompt(square_mask(), PromptKind.CLICK,
                            QualityLevel.ORACLE, rng)
        assert p.fg_points == [(32, 32)]

    def test_oracle_bbox_tight(self):
        rng = np.random.default_rng(0)
        p = simulate_prompt(square_mask(), PromptKind.BBOX,
                            QualityLevel.ORACLE, rng)
        assert p.top_left == (27, 27)
        assert p.bottom_right == (36, 36)

    def test_oracle_seglab_identity(self):
        rng = np.random.default_rng(0)
        p = simulate_prompt(square_mask(), PromptKind.SEGLAB,
                            QualityLevel.ORACLE, rng)
        assert np.array_equal(p.mask, square_mask())

    def test_oracle_doodle_inside_mask(self):
        mask = square_mask()
        rng = np.random.default_rng(3)
        p = simulate_prompt(mask, PromptKind.DOODLE, QualityLevel.ORACLE, rng)
        for line in p.fg_polylines:
            for x, y in line:
                assert mask[y, x] == 1

    def test_oracle_click_inside_for_all_masks(self):
        rng = np.random.default_rng(1)
        for seed in range(10):
            r = np.random.default_rng(seed)
            mask = (r.random((64, 64)) < 0.2).astype(np.uint8)
            mask[30:34, 30:34] = 1
            p = simulate_prompt(mask, PromptKind.CLICK, QualityLevel.ORACLE,
                                rng)
            x, y = p.fg_points[0]
            assert 0 <= x < 64 and 0 <= y < 64

    def test_deterministic_under_seed(self):
        mask = square_mask()
        for kind in PromptKind:
            a = simulate_prompt(mask, kind, QualityLevel.LOW,
                                np.random.default_rng(42))
            b = simulate_prompt(mask, kind, QualityLevel.LOW,
                                np.random.default_rng(42))
            assert prompt_to_json(a) == prompt_to_json(b)

    def test_empty_mask_rejected(self):
        with pytest.raises(InvalidPromptError):
            simulate_prompt(np.zeros((64, 64), dtype=np.uint8),
                            PromptKind.CLICK, QualityLevel.ORACLE,
                            np.random.default_rng(0))

    def test_recorded_tier_not_simulatable(self):
        with pytest.raises(InvalidPromptError):
            simulate_prompt(square_mask(), PromptKind.CLICK,
                            QualityLevel.RECORDED, np.random.default_rng(0))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_simulated_prompts_always_validate(self, seed):
        rng = np.random.default_rng(seed)
        mask = np.zeros((64, 64), dtype=np.uint8)
        cx, cy = int(rng.integers(10, 54)), int(rng.integers(10, 54))
        r = int(rng.integers(3, 9))
        yy, xx = np.mgrid[0:64, 0:64]
        mask[(xx - cx) ** 2 + (yy - cy) ** 2 <= r * r] = 1
        kind = list(PromptKind)[seed % 4]
        tier = [QualityLevel.LOW, QualityLevel.MEDIUM, QualityLevel.HIGH,
                QualityLevel.ORACLE][(seed // 4) % 4]
        simulate_prompt(mask, kind, tier, rng).validate()


# -------------------------------------------------------------- mask AE basics


class TestMaskAutoencoder:
    def test_encode_deterministic(self, mask_ae):
        mask = square_mask()
        a = mask_ae.encode(mask).data
        b = mask_ae.encode(mask).data
        assert np.array_equal(a, b)
        assert np.isfinite(a).all()

    def test_all_zero_mask_finite(self, mask_ae):
        z = np.zeros((64, 64), dtype=np.uint8)
        latent = mask_ae.encode(z).data
        assert np.isfinite(latent).all()

    def test_too_few_masks_rejected(self):
        from oneprompt.numerics import ConfigError
        from oneprompt.prompts import train_mask_autoencoder
        with pytest.raises(ConfigError):
            train_mask_autoencoder([square_mask()] * 10, epochs=1,
                                   rng=np.random.default_rng(0))
