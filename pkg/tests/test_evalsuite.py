import math

import numpy as np
import pytest

from artinv import evalsuite
from artinv.errors import (
    DimMismatch,
    LengthMismatch,
    NoVowelFrames,
    ZeroVariance,
)
from artinv.evalsuite import (
    EvalReport,
    dtw,
    dtw_mcd,
    format_l1_comparison,
    format_mcd_comparison,
    mcd,
    mean_pcc,
    pearson,
    per_phoneme_l1,
    phoneme_accuracy,
    vowel_la_summary,
)
from artinv.featio import PhonemeAlignment, encode_phoneme_pm, phoneme_class_id


def enumerate_paths(n, m):
    """All monotone paths from (0,0) to (n-1,m-1) with steps (1,1),(1,0),(0,1)."""
    if n == 1 and m == 1:
        return [[(0, 0)]]
    out = []
    if n > 1:
        out += [p + [(n - 1, m - 1)] for p in enumerate_paths(n - 1, m)]
    if m > 1:
        out += [p + [(n - 1, m - 1)] for p in enumerate_paths(n, m - 1)]
    if n > 1 and m > 1:
        out += [p + [(n - 1, m - 1)] for p in enumerate_paths(n - 1, m - 1)]
    return out


def brute_force_dtw_cost(a, b):
    best = math.inf
    for path in enumerate_paths(len(a), len(b)):
        cost = sum(np.linalg.norm(a[i] - b[j]) for i, j in path)
        best = min(best, cost)
    return best


class TestPearson:
    def test_self_correlation(self):
        x = np.random.default_rng(0).standard_normal(20)
        assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_anticorrelation(self):
        x = np.random.default_rng(1).standard_normal(20)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_covariance_formula(self):
        rng = np.random.default_rng(2)
        x, y = rng.standard_normal(10), rng.standard_normal(10)
        want = (((x - x.mean()) * (y - y.mean())).sum()
                / math.sqrt(((x - x.mean()) ** 2).sum() * ((y - y.mean()) ** 2).sum()))
        assert pearson(x, y) == pytest.approx(want, abs=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(15), rng.standard_normal(15)
        assert pearson(3.0 * x + 2.0, y) == pytest.approx(pearson(x, y), abs=1e-12)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            pearson(np.zeros(3), np.zeros(4))
        with pytest.raises(ZeroVariance):
            pearson(np.ones(5), np.arange(5.0))
        with pytest.raises(ZeroVariance):
            pearson(np.ones(1), np.ones(1))

    def test_mean_pcc_unweighted(self):
        rng = np.random.default_rng(4)
        pred = rng.standard_normal((30, 3))
        true = rng.standard_normal((30, 3))
        per, mean = mean_pcc(pred, true)
        assert mean == pytest.approx(per.mean(), abs=1e-15)


class TestPerPhonemeL1:
    ALIGN = PhonemeAlignment(((0.0, 0.1, "AA"), (0.1, 0.25, "S")))

    def test_zero_when_equal(self):
        tv = np.random.default_rng(5).standard_normal((25, 9))
        out = per_phoneme_l1(tv, tv, self.ALIGN, 100.0)
        assert all(v == 0.0 for v in out.values())

    def test_constant_offset(self):
        tv = np.zeros((25, 9))
        out = per_phoneme_l1(tv + 0.1, tv, self.ALIGN, 100.0)
        for v in out.values():
            assert v == pytest.approx(0.1, abs=1e-12)

    def test_weighted_mean_equals_global_mae(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(5, 60))
            pred = rng.standard_normal((n, 9))
            true = rng.standard_normal((n, 9))
            t, intervals = 0.0, []
            for _ in range(int(rng.integers(0, 5))):
                t += rng.uniform(0, 0.05)
                end = t + rng.uniform(0.02, 0.2)
                intervals.append((t, end, str(rng.choice(["AA", "S", "M", "IY"]))))
                t = end
            align = PhonemeAlignment(tuple(intervals))
            table = per_phoneme_l1(pred, true, align, 100.0)
            counts = evalsuite.phoneme_frame_counts(align, 100.0, n)
            weighted = sum(table[k] * counts[k] for k in table) / n
            global_mae = np.abs(pred - true).mean()
            assert weighted == pytest.approx(global_mae, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            per_phoneme_l1(np.zeros((3, 9)), np.zeros((4, 9)), self.ALIGN, 100.0)


class TestDtw:
    def test_identical_sequences_diagonal(self):
        a = np.random.default_rng(7).standard_normal((6, 3))
        path, cost = dtw(a, a)
        assert cost == pytest.approx(0.0, abs=1e-12)
        assert path == [(i, i) for i in range(6)]

    def test_single_frame_against_many(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((1, 4))
        b = rng.standard_normal((5, 4))
        _, cost = dtw(a, b)
        want = sum(np.linalg.norm(a[0] - b[j]) for j in range(5))
        assert cost == pytest.approx(want, abs=1e-12)

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            a = rng.standard_normal((n, 2))
            b = rng.standard_normal((m, 2))
            _, cost = dtw(a, b)
            assert cost == pytest.approx(brute_force_dtw_cost(a, b), abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((5, 3))
        b = rng.standard_normal((8, 3))
        assert dtw(a, b)[1] == pytest.approx(dtw(b, a)[1], abs=1e-12)

    def test_cost_at_most_diagonal(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((7, 2))
        b = rng.standard_normal((7, 2))
        diag = sum(np.linalg.norm(a[i] - b[i]) for i in range(7))
        assert dtw(a, b)[1] <= diag + 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            dtw(np.zeros((3, 2)), np.zeros((3, 3)))


class TestMcd:
    def test_identical_frames(self):
        c = np.random.default_rng(12).standard_normal(24)
        assert mcd(c, c) == 0.0

    def test_single_coefficient_difference(self):
        a = np.zeros(24)
        b = np.zeros(24)
        b[5] = 1.0
        want = (10.0 / math.log(10.0)) * math.sqrt(2.0)
        assert mcd(a, b) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(6.141851463713754, abs=1e-12)

    def test_dtw_mcd_self_is_zero(self):
        A = np.random.default_rng(13).standard_normal((10, 25))
        assert dtw_mcd(A, A) == 0.0

    def test_dtw_mcd_ignores_energy_coefficient(self):
        rng = np.random.default_rng(14)
        A = rng.standard_normal((6, 25))
        B = A.copy()
        B[:, 0] += rng.standard_normal(6)  # energy-only difference
        assert dtw_mcd(A, B) == pytest.approx(0.0, abs=1e-12)
        assert dtw_mcd(A, B, exclude_c0=False) > 0.1

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            dtw_mcd(np.zeros((3, 25)), np.zeros((3, 24)))


class TestVowelLa:
    @staticmethod
    def _item(speaker, la_by_label, rate=100.0, frames_per=10):
        intervals, t = [], 0.0
        for label in la_by_label:
            intervals.append((t, t + frames_per / rate, label))
            t += frames_per / rate
        n = frames_per * len(la_by_label)
        tv = np.zeros((n, 9))
        for k, label in enumerate(la_by_label):
            tv[k * frames_per:(k + 1) * frames_per, 0] = la_by_label[label]
        return speaker, tv, PhonemeAlignment(tuple(intervals)), rate

    def test_single_speaker_zero_variance(self):
        out = vowel_la_summary([self._item("s1", {"AE": 0.8, "UW": -0.8})])
        assert out["AE"].variance == 0.0
        assert out["AE"].mean == pytest.approx(0.8)

    def test_constant_la(self):
        items = [self._item(f"s{i}", {"AE": 0.5, "UW": 0.5}) for i in range(3)]
        out = vowel_la_summary(items)
        for v in out.values():
            assert v.mean == pytest.approx(0.5)
            assert v.variance == pytest.approx(0.0)

    def test_recovers_wide_narrow_ordering(self):
        rng = np.random.default_rng(15)
        items = []
        for i in range(6):
            wide = 0.8 + rng.normal(0, 0.05)
            narrow = -0.8 + rng.normal(0, 0.05)
            items.append(self._item(f"s{i}", {"AE": wide, "UW": narrow, "AA": 0.1}))
        out = vowel_la_summary(items)
        assert out["AE"].mean > out["UW"].mean
        for spk in out["AE"].per_speaker:
            assert out["AE"].per_speaker[spk] > out["UW"].per_speaker[spk]

    def test_missing_vowel_raises(self):
        with pytest.raises(NoVowelFrames):
            vowel_la_summary([self._item("s1", {"AE": 0.5})], vowels=["UW"])


class TestPhonemeAccuracy:
    def test_perfect_logits(self):
        labels = np.array([3, 7, 3, 0])
        logits = np.zeros((4, 41))
        logits[np.arange(4), labels] = 5.0
        assert phoneme_accuracy(logits, labels) == 1.0

    def test_all_sil(self):
        sil = phoneme_class_id("sil")
        labels = np.full(6, sil)
        logits = np.zeros((6, 41))
        logits[:, sil] = 1.0
        assert phoneme_accuracy(logits, labels) == 1.0

    def test_uniform_random_near_chance(self):
        rng = np.random.default_rng(16)
        n = 100_000
        logits = rng.standard_normal((n, 41))
        labels = rng.integers(0, 41, n)
        acc = phoneme_accuracy(logits, labels)
        assert abs(acc - 1.0 / 41.0) < 0.005

    def test_logit_shift_invariance(self):
        rng = np.random.default_rng(17)
        logits = rng.standard_normal((50, 41))
        labels = rng.integers(0, 41, 50)
        shifted = logits + rng.standard_normal((50, 1))
        assert phoneme_accuracy(logits, labels) == phoneme_accuracy(shifted, labels)

    def test_pm_head_nearest_row(self):
        labels = np.array([phoneme_class_id("M"), phoneme_class_id("sil")])
        pm = np.vstack([encode_phoneme_pm("M"), encode_phoneme_pm("sil")])
        assert phoneme_accuracy(pm * 0.9 + 0.02, labels) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            phoneme_accuracy(np.zeros((3, 41)), np.zeros(4, dtype=int))


class TestReports:
    def test_l1_comparison_matches_published_style(self):
        base = {"AA": 0.206, "AO": 0.214}
        ours = {"AA": 0.175, "AO": 0.182}
        text = format_l1_comparison(base, ours)
        assert "AA\t0.206\t0.175\t0.031" in text
        assert "AO\t0.214\t0.182\t0.032" in text

    def test_mcd_comparison_matches_published_style(self):
        base = {"AWB": 9.23, "SLT": 10.24}
        ours = {"AWB": 8.03, "SLT": 9.69}
        text = format_mcd_comparison(base, ours)
        assert "AWB\t9.23\t8.03" in text
        assert "SLT\t10.24\t9.69" in text
        assert "AVERAGE" in text and "+/-" in text

    def test_report_tsvs(self, tmp_path):
        rep = EvalReport(
            per_channel_pcc={"LA": 0.9, "LP": 0.8},
            mean_pcc=0.85,
            per_phoneme_l1={"AA": 0.1},
            phoneme_acc=0.7,
            dtw_mcd_per_utt={"u1": 9.0, "u2": 10.0},
        )
        paths = rep.write_tsvs(str(tmp_path) + "/")
        assert len(paths) == 4
        pcc = open(paths[0]).read()
        assert "MEAN\t0.850000" in pcc
        mean, std = rep.mcd_mean_std()
        assert mean == pytest.approx(9.5) and std == pytest.approx(0.5)
