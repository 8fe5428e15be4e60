import numpy as np
import pytest

from artinv import cli, featio
from artinv.ema_geometry import read_palate_csv


def run(*argv):
    return cli.main(list(argv))


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """Small synthetic corpus with derived TVs for two speakers."""
    root = tmp_path_factory.mktemp("corpus")
    assert run("gen-synth", "--speakers", "2", "--utts", "3", "--out", str(root),
               "--frames", "100", "--seed", "13") == 0
    for spk in ("spk00", "spk01"):
        d = root / spk
        assert run("palate-fit", "--ema-dir", str(d), "--out", str(d / "palate.csv")) == 0
        assert run("derive-tv", "--ema", str(d), "--palate", str(d / "palate.csv"),
                   "--out", str(d)) == 0
    return root


class TestHelpAndUsage:
    def test_help_exits_zero(self):
        for sub in ("palate-fit", "derive-tv", "gen-synth", "train", "invert",
                    "evaluate", "plot-data"):
            with pytest.raises(SystemExit) as exc:
                run(sub, "--help")
            assert exc.value.code == 0

    def test_top_level_help(self):
        with pytest.raises(SystemExit) as exc:
            run("--help")
        assert exc.value.code == 0

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run("gen-synth", "--bogus-flag", "1")
        assert exc.value.code == 2

    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run("frobnicate")
        assert exc.value.code == 2


class TestGenSynth:
    def test_expected_file_count(self, corpus):
        for spk in ("spk00", "spk01"):
            assert len(list((corpus / spk).glob("*.ema.csv"))) == 3
            assert len(list((corpus / spk).glob("*.feat.afm"))) == 3
            assert len(list((corpus / spk).glob("*.align.tsv"))) == 3


class TestPalateAndTv:
    def test_palate_file_is_valid(self, corpus):
        palate = read_palate_csv(corpus / "spk00" / "palate.csv")
        assert palate.vertices.shape[0] >= 2

    def test_derive_tv_outputs(self, corpus):
        tv = featio.read_afm(corpus / "spk00" / "utt000.tv.afm")
        assert tv.n_dims == 9
        assert np.abs(tv.data).max() <= 1.0
        assert (corpus / "spk00" / "stats.tsv").exists()

    def test_derive_tv_deterministic(self, corpus, tmp_path):
        d = corpus / "spk00"
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert run("derive-tv", "--ema", str(d), "--palate",
                       str(d / "palate.csv"), "--out", str(out)) == 0
        a = (out1 / "utt000.tv.afm").read_bytes()
        b = (out2 / "utt000.tv.afm").read_bytes()
        assert a == b

    def test_missing_dir_exits_two(self, tmp_path):
        assert run("palate-fit", "--ema-dir", str(tmp_path / "nope"),
                   "--out", str(tmp_path / "p.csv")) == 2


@pytest.fixture(scope="module")
def trained(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = out / "train.cfg"
    cfg.write_text(
        f"model = baseline\n"
        f"seed = 4\n"
        f"data_root = {corpus}\n"
        f"test_speakers = spk01\n"
        f"checkpoint = {out / 'model.ckpt'}\n"
        f"log = {out / 'log.tsv'}\n"
        f"gru_hidden = 6\ngru_layers = 1\nmlp_hidden = 6\n"
        f"epochs = 2\nlr = 0.002\n"
    )
    assert run("train", "--config", str(cfg)) == 0
    return out


class TestTrainInvertEvaluate:
    def test_checkpoint_and_log_written(self, trained):
        assert (trained / "model.ckpt").exists()
        log = (trained / "log.tsv").read_text().splitlines()
        assert log[0].startswith("epoch\t")
        assert len(log) == 3  # header + 2 epochs

    def test_invert_writes_tv_afm(self, corpus, trained, tmp_path):
        pred = tmp_path / "pred"
        assert run("invert", "--checkpoint", str(trained / "model.ckpt"),
                   "--features", str(corpus / "spk01"), "--out", str(pred)) == 0
        files = sorted(pred.glob("*.tv.afm"))
        assert len(files) == 3
        assert featio.read_afm(files[0]).n_dims == 9

    def test_invert_deterministic(self, corpus, trained, tmp_path):
        outs = []
        for name in ("p1", "p2"):
            out = tmp_path / name
            assert run("invert", "--checkpoint", str(trained / "model.ckpt"),
                       "--features", str(corpus / "spk01"), "--out", str(out)) == 0
            outs.append((out / "utt000.tv.afm").read_bytes())
        assert outs[0] == outs[1]

    def test_evaluate_identical_files_gives_unit_pcc(self, corpus, tmp_path):
        d = corpus / "spk01"
        rep = tmp_path / "rep"
        assert run("evaluate", "--pred", str(d), "--true", str(d),
                   "--align", str(d), "--report", str(rep) + "/") == 0
        pcc = (rep / "pcc.tsv").read_text()
        assert "MEAN\t1.000000" in pcc
        l1 = (rep / "per_phoneme_l1.tsv").read_text()
        assert all(line.split("\t")[1] == "0.000000"
                   for line in l1.splitlines()[1:])

    def test_evaluate_mismatched_lengths_exits_two(self, corpus, tmp_path):
        short = tmp_path / "short.tv.afm"
        tv = featio.read_afm(corpus / "spk01" / "utt000.tv.afm")
        featio.write_afm(short, featio.FeatureMatrix(tv.data[:-5], tv.frame_rate))
        assert run("evaluate", "--pred", str(short),
                   "--true", str(corpus / "spk01" / "utt000.tv.afm"),
                   "--report", str(tmp_path) + "/r_") == 2

    def test_evaluate_dtw_mcd_section(self, corpus, tmp_path):
        d = corpus / "spk01"
        rep = tmp_path / "mcdrep"
        assert run("evaluate", "--pred", str(d), "--true", str(d),
                   "--mcd-pred", str(d), "--mcd-true", str(d),
                   "--report", str(rep) + "/") == 0
        text = (rep / "dtw_mcd.tsv").read_text()
        assert "MEAN\t0.000000" in text


class TestPlotData:
    def test_vowel_la_orders_ae_above_uw(self, corpus, tmp_path):
        out = tmp_path / "la.tsv"
        assert run("plot-data", "--kind", "vowel-la", "--data-root", str(corpus),
                   "--out", str(out)) == 0
        rows = {line.split("\t")[0]: line.split("\t")
                for line in out.read_text().splitlines()[1:]}
        assert float(rows["AE"][2]) > float(rows["UW"][2])

    def test_vowel_la_empty_input_header_only(self, tmp_path):
        (tmp_path / "spk00").mkdir()
        out = tmp_path / "la.tsv"
        assert run("plot-data", "--kind", "vowel-la",
                   "--data-root", str(tmp_path), "--out", str(out)) == 0
        assert out.read_text() == "vowel\tn_speakers\tmean_la\tvar_la\n"

    def test_tv_traces_row_count(self, corpus, tmp_path):
        out = tmp_path / "tr.tsv"
        tv_file = corpus / "spk00" / "utt000.tv.afm"
        assert run("plot-data", "--kind", "tv-traces", "--tv", str(tv_file),
                   "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + featio.read_afm(tv_file).n_frames

    def test_training_curve_passthrough(self, trained, tmp_path):
        out = tmp_path / "curve.tsv"
        assert run("plot-data", "--kind", "training-curve",
                   "--log", str(trained / "log.tsv"), "--out", str(out)) == 0
        assert out.read_text().startswith("epoch\t")


class TestConfig:
    def test_set_overrides(self, corpus, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(f"data_root = {corpus}\ntest_speakers = spk01\n"
                       f"checkpoint = {tmp_path / 'm.ckpt'}\n"
                       f"log = {tmp_path / 'l.tsv'}\n"
                       "gru_hidden = 4\ngru_layers = 1\nmlp_hidden = 4\nepochs = 1\n")
        assert run("train", "--config", str(cfg), "--set", "epochs=2") == 0
        assert len((tmp_path / "l.tsv").read_text().splitlines()) == 3

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("not_a_key = 1\n")
        assert run("train", "--config", str(cfg)) == 2

    def test_checkpoint_carries_config(self, trained):
        from artinv.diffcore import load_checkpoint
        ckpt = load_checkpoint(trained / "model.ckpt")
        assert "model=baseline" in ckpt.config_text
        assert "input_dim=24" in ckpt.config_text
