import numpy as np
import pytest

from artinv import datagen, featio
from artinv.datagen import (
    GenConfig,
    allocate_utterances,
    gen_speaker,
    gen_utterance,
    write_corpus,
)
from artinv.ema_geometry import read_ema_csv
from artinv.errors import ShapeMismatch
from artinv.featio import frame_labels, phoneme_class_id, read_afm, read_alignment_tsv


class TestGenSpeaker:
    def test_same_seed_identical(self):
        a = gen_speaker(123)
        b = gen_speaker(123)
        assert np.array_equal(a.mixing, b.mixing)
        assert a.rest == b.rest
        assert a.dome_apex == b.dome_apex

    def test_distinct_seeds_distinct_matrices(self):
        mixings = [gen_speaker(s).mixing for s in range(1, 17)]
        for i in range(16):
            for j in range(i + 1, 16):
                assert not np.array_equal(mixings[i], mixings[j])

    def test_mixing_full_rank(self):
        for s in range(5):
            assert np.linalg.matrix_rank(gen_speaker(s).mixing) == 9

    def test_palate_above_rest_tongue(self):
        for s in range(10):
            spk = gen_speaker(s)
            for sensor in ("TT", "TB", "TD"):
                x, y = spk.rest[sensor]
                assert spk.dome_height(x) > y

    def test_acoustic_dim_floor(self):
        with pytest.raises(ShapeMismatch):
            gen_speaker(0, GenConfig(acoustic_dim=8))


class TestGenUtterance:
    def test_shapes_and_rates(self):
        spk = gen_speaker(7)
        ema, feat, align = gen_utterance(spk, 120, np.random.default_rng(0))
        assert ema.frames.shape == (120, 12)
        assert feat.data.shape == (120, spk.config.acoustic_dim)
        assert ema.frame_rate == feat.frame_rate == 100.0
        assert len(align) >= 1

    def test_deterministic_given_rng_state(self):
        spk = gen_speaker(7)
        a = gen_utterance(spk, 60, np.random.default_rng(42))
        b = gen_utterance(spk, 60, np.random.default_rng(42))
        assert np.array_equal(a[0].frames, b[0].frames)
        assert np.array_equal(a[1].data, b[1].data)
        assert a[2].intervals == b[2].intervals

    def test_tongue_contained_under_dome(self):
        for seed in range(5):
            spk = gen_speaker(seed)
            ema, _, _ = gen_utterance(spk, 200, np.random.default_rng(seed))
            pts = ema.tongue_points()
            assert (pts[:, 1] <= spk.dome_height(pts[:, 0])).all()

    def test_min_length_enforced(self):
        with pytest.raises(ShapeMismatch):
            gen_utterance(gen_speaker(0), 5, np.random.default_rng(0))

    def test_noiseless_features_are_exact_linear_image(self):
        spk = gen_speaker(3, GenConfig(noise_sigma=0.0))
        ema, feat, _ = gen_utterance(spk, 80, np.random.default_rng(1))
        tv = datagen._underlying_tvs(spk, ema)
        want = spk.acoustics_from_tvs(tv.frames)
        np.testing.assert_allclose(feat.data, want, atol=1e-12)

    def test_mixing_inverse_recovers_tvs(self):
        spk = gen_speaker(4, GenConfig(noise_sigma=0.0))
        ema, feat, _ = gen_utterance(spk, 80, np.random.default_rng(2))
        tv = datagen._underlying_tvs(spk, ema)
        recovered = spk.tvs_from_clean_acoustics(feat.data)
        assert np.abs(recovered - tv.frames).mean() < 1e-9

    def test_constriction_degrees_nonnegative(self):
        spk = gen_speaker(5)
        ema, _, _ = gen_utterance(spk, 100, np.random.default_rng(3))
        tv = datagen._underlying_tvs(spk, ema)
        for c in (4, 6, 8):  # TTCD, TBCD, TDCD
            assert (tv.frames[:, c] >= 0).all()

    def test_alignment_carries_ae_uw_contrast(self):
        spk = gen_speaker(6)
        ema, _, align = gen_utterance(spk, 300, np.random.default_rng(4))
        labels = frame_labels(align, 100.0, 300)
        tv = datagen._underlying_tvs(spk, ema)
        ae = tv.frames[labels == phoneme_class_id("AE"), 0]
        uw = tv.frames[labels == phoneme_class_id("UW"), 0]
        assert len(ae) > 0 and len(uw) > 0
        assert ae.mean() > uw.mean()

    def test_generated_types_satisfy_invariants_in_bulk(self):
        # constructing the dataclasses runs their validators
        rng = np.random.default_rng(5)
        for seed in range(8):
            spk = gen_speaker(seed)
            ema, feat, align = gen_utterance(spk, int(rng.integers(10, 200)), rng)
            assert np.isfinite(ema.frames).all()
            assert np.isfinite(feat.data).all()


class TestCorpus:
    def test_allocate_utterances(self):
        assert allocate_utterances(50, 9) == [6, 6, 6, 6, 6, 5, 5, 5, 5]
        assert sum(allocate_utterances(50, 9)) == 50
        assert allocate_utterances(6, 3) == [2, 2, 2]

    def test_write_corpus_layout_and_formats(self, tmp_path):
        dirs = write_corpus(tmp_path, 2, 3, 60, seed=9)
        assert dirs == ["spk00", "spk01"]
        for d in dirs:
            files = sorted((tmp_path / d).iterdir())
            assert len(files) == 9  # 3 utterances x 3 files
            ema = read_ema_csv(tmp_path / d / "utt000.ema.csv")
            feat = read_afm(tmp_path / d / "utt000.feat.afm")
            align = read_alignment_tsv(tmp_path / d / "utt000.align.tsv")
            assert ema.n_frames == feat.n_frames == 60
            assert len(align) >= 1

    def test_write_corpus_deterministic(self, tmp_path):
        write_corpus(tmp_path / "a", 1, 2, 40, seed=3)
        write_corpus(tmp_path / "b", 1, 2, 40, seed=3)
        for name in ("utt000.ema.csv", "utt000.feat.afm", "utt001.align.tsv"):
            assert (tmp_path / "a/spk00" / name).read_bytes() == \
                   (tmp_path / "b/spk00" / name).read_bytes()
