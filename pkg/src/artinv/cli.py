"""Command-line pipeline.

Subcommands: palate-fit, derive-tv, gen-synth, train, invert, evaluate,
plot-data. Every command is deterministic given its inputs and --seed;
exit codes are 0 (success), 1 (internal or numeric error), 2 (usage or
validation error).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import datagen, evalsuite, featio
from . import ema_geometry as geo
from .aai_models import (
    BaselineConfig,
    BaselineModel,
    DecoderConfig,
    DecoderModel,
    DiscConfig,
    Discriminator,
    ProposedConfig,
    ProposedModel,
    Sample,
    TrainConfig,
    predict_tv,
    split_train_val,
    train as run_training,
)
from .diffcore import load_checkpoint, save_checkpoint
from .diffcore.checkpoint import restore_into
from .errors import (
    LengthMismatch,
    NumericError,
    UnknownKind,
    ValidationError,
)


# --- helpers -------------------------------------------------------------------

def _ema_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(path.glob("*.ema.csv"))
        if not files:
            raise ValidationError(f"no *.ema.csv files under {path}")
        return files
    return [path]


def _pooled_tongue_points(files: list[Path]) -> tuple[np.ndarray, float]:
    """(pooled tongue points, mean upper-lip x) over a speaker's files."""
    points, ulx_sum, n = [], 0.0, 0
    for f in files:
        track = geo.read_ema_csv(f)
        points.append(track.tongue_points())
        ulx_sum += float(track.frames[:, 2].sum())
        n += track.n_frames
    return np.vstack(points), ulx_sum / n


def _afm_files(path: Path, suffix: str) -> list[Path]:
    if path.is_dir():
        files = sorted(path.glob(f"*{suffix}"))
        if not files:
            raise ValidationError(f"no *{suffix} files under {path}")
        return files
    return [path]


def _stem(path: Path, suffix: str) -> str:
    name = path.name
    return name[: -len(suffix)] if name.endswith(suffix) else path.stem


def _maybe_resample(m: featio.FeatureMatrix, rate: float) -> featio.FeatureMatrix:
    if rate > 0 and m.frame_rate > 0 and m.frame_rate != rate:
        return featio.resample_linear(m, rate)
    return m


def _crop_pair(a: np.ndarray, b: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Allow a 2-frame resampling slack; anything larger is a real mismatch."""
    if abs(a.shape[0] - b.shape[0]) > 2:
        raise LengthMismatch(f"{what}: {a.shape[0]} vs {b.shape[0]} frames")
    n = min(a.shape[0], b.shape[0])
    return a[:n], b[:n]


def _build_model(cfg: dict[str, str], input_dim: int, decoder_out: int):
    seed = cfgmod.as_int(cfg, "seed")
    kind = cfg["model"]
    init_rng = np.random.default_rng([seed, 1])
    if kind == "baseline":
        mc = BaselineConfig(
            input_dim=input_dim,
            gru_hidden=cfgmod.as_int(cfg, "gru_hidden"),
            gru_layers=cfgmod.as_int(cfg, "gru_layers"),
            mlp_hidden=cfgmod.as_int(cfg, "mlp_hidden"),
            dropout=cfgmod.as_float(cfg, "dropout"),
            ce_weight=cfgmod.as_float(cfg, "ce_weight"),
        )
        return BaselineModel(mc, init_rng), None
    if kind == "proposed":
        mc = ProposedConfig(
            input_dim=input_dim,
            gru_hidden=cfgmod.as_int(cfg, "gru_hidden"),
            gru_layers=cfgmod.as_int(cfg, "gru_layers"),
            mlp_hidden=cfgmod.as_int(cfg, "mlp_hidden"),
            dropout=cfgmod.as_float(cfg, "dropout"),
            chunk_len=cfgmod.as_int(cfg, "chunk_len"),
            ar_hidden=cfgmod.as_int(cfg, "ar_hidden"),
            ar_dim=cfgmod.as_int(cfg, "ar_dim"),
            pm_weight=cfgmod.as_float(cfg, "pm_weight"),
            adv_weight=cfgmod.as_float(cfg, "adv_weight"),
            feature_matching=cfgmod.as_bool(cfg, "feature_matching"),
            disc=DiscConfig(
                channels=cfgmod.as_int_list(cfg, "disc_channels"),
                kernel=cfgmod.as_int(cfg, "disc_kernel"),
                stride=cfgmod.as_int(cfg, "disc_stride"),
            ),
        )
        return ProposedModel(mc, init_rng), Discriminator(mc.disc, np.random.default_rng([seed, 2]))
    if kind == "decoder":
        mc = DecoderConfig(
            input_dim=input_dim,
            out_dim=decoder_out,
            gru_hidden=cfgmod.as_int(cfg, "gru_hidden"),
            gru_layers=cfgmod.as_int(cfg, "gru_layers"),
            mlp_hidden=cfgmod.as_int(cfg, "mlp_hidden"),
            dropout=cfgmod.as_float(cfg, "dropout"),
        )
        return DecoderModel(mc, init_rng), None
    raise ValidationError(f"unknown model kind {kind!r}")


def _load_samples(cfg: dict[str, str], speaker_dir: Path) -> list[Sample]:
    kind = cfg["model"]
    tv_suffix = cfg["tv_suffix"]
    feat_suffix = cfg["feature_suffix"]
    align_suffix = cfg["align_suffix"]
    tv_rate_cfg = cfgmod.as_float(cfg, "tv_rate")
    emb = None
    if kind == "decoder" and cfg["embedding_file"]:
        emb = featio.read_afm(cfg["embedding_file"])
    samples = []
    for tv_file in sorted(speaker_dir.glob(f"*{tv_suffix}")):
        stem = _stem(tv_file, tv_suffix)
        tv = featio.read_afm(tv_file)
        rate = tv.frame_rate if tv_rate_cfg <= 0 else tv_rate_cfg
        if kind == "decoder":
            inp = tv
            if emb is not None:
                inp = featio.concat_speaker_embedding(inp, emb)
            target = _maybe_resample(
                featio.read_afm(speaker_dir / f"{stem}{cfg['target_suffix']}"), rate)
            x, y = _crop_pair(inp.data, target.data, stem)
            samples.append(Sample(f"{speaker_dir.name}/{stem}", x, target=y))
            continue
        feat = _maybe_resample(
            featio.read_afm(speaker_dir / f"{stem}{feat_suffix}"), rate)
        x, y = _crop_pair(feat.data, tv.data, stem)
        align = featio.read_alignment_tsv(speaker_dir / f"{stem}{align_suffix}")
        labels = featio.frame_labels(align, rate, x.shape[0])
        pm = featio.inventory().pm_vectors[labels]
        samples.append(Sample(f"{speaker_dir.name}/{stem}", x, tv=y, labels=labels, pm=pm))
    if not samples:
        raise ValidationError(f"no usable utterances under {speaker_dir}")
    return samples


# --- subcommands -----------------------------------------------------------------

def cmd_palate_fit(args) -> int:
    files = _ema_files(Path(args.ema_dir))
    points, _ = _pooled_tongue_points(files)
    palate = geo.fit_palate(points, offset_mm=args.offset)
    geo.write_palate_csv(args.out, palate)
    print(f"palate-fit: {len(files)} files, {points.shape[0]} tongue points, "
          f"{palate.vertices.shape[0]} hull vertices -> {args.out}")
    return 0


def cmd_derive_tv(args) -> int:
    ema_path = Path(args.ema)
    files = _ema_files(ema_path)
    palate = geo.read_palate_csv(args.palate)
    if args.lp_ref is not None:
        lp_ref = args.lp_ref
    else:
        _, lp_ref = _pooled_tongue_points(files)
    tracks = {}

    def derive(f: Path):
        return f, geo.derive_tvs(geo.read_ema_csv(f), palate, lp_reference=lp_ref)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for f, tv in pool.map(derive, files):
            tracks[f] = tv
    if args.stats:
        stats = geo.read_stats_tsv(args.stats)
    else:
        stats = geo.compute_speaker_stats(list(tracks.values()))
    out = Path(args.out)
    if ema_path.is_dir():
        out.mkdir(parents=True, exist_ok=True)
        if not args.stats:
            geo.write_stats_tsv(out / "stats.tsv", stats)
    normalize = not args.no_normalize
    for f in files:
        tv = geo.normalize_tvs(tracks[f], stats) if normalize else tracks[f]
        dest = out / f"{_stem(f, '.ema.csv')}.tv.afm" if ema_path.is_dir() else out
        featio.write_afm(dest, tv.to_feature_matrix())
    print(f"derive-tv: {len(files)} files -> {args.out}"
          + ("" if normalize else " (unnormalized)"))
    return 0


def cmd_gen_synth(args) -> int:
    cfg = datagen.GenConfig(noise_sigma=args.sigma, acoustic_dim=args.acoustic_dim,
                            nonlinear=args.nonlinear)
    dirs = datagen.write_corpus(args.out, args.speakers, args.utts, args.frames,
                                args.seed, cfg)
    print(f"gen-synth: {args.speakers} speakers x {args.utts} utterances "
          f"({args.frames} frames) -> {args.out} [{', '.join(dirs)}]")
    return 0


def cmd_train(args) -> int:
    cfg = cfgmod.load_config(args.config, args.set or [])
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    root = Path(cfg["data_root"])
    if not root.is_dir():
        raise ValidationError(f"data_root {root} is not a directory")
    all_speakers = sorted(d.name for d in root.iterdir() if d.is_dir())
    test = cfgmod.as_str_list(cfg, "test_speakers")
    train_speakers = cfgmod.as_str_list(cfg, "train_speakers") or [
        s for s in all_speakers if s not in test]
    missing = [s for s in train_speakers + test if s not in all_speakers]
    if missing:
        raise ValidationError(f"speakers not found under {root}: {missing}")
    pool = []
    for s in train_speakers:
        pool.extend(_load_samples(cfg, root / s))
    seed = cfgmod.as_int(cfg, "seed")
    tr, val = split_train_val(pool, cfgmod.as_float(cfg, "val_fraction"),
                              np.random.default_rng([seed, 3]))
    input_dim = pool[0].features.shape[1]
    cfg["input_dim"] = str(input_dim)
    decoder_out = pool[0].target.shape[1] if cfg["model"] == "decoder" else 0
    cfg["decoder_out_dim"] = str(decoder_out)
    model, disc = _build_model(cfg, input_dim, decoder_out)
    tcfg = TrainConfig(
        epochs=cfgmod.as_int(cfg, "epochs"),
        lr=cfgmod.as_float(cfg, "lr"),
        beta1=cfgmod.as_float(cfg, "beta1"),
        beta2=cfgmod.as_float(cfg, "beta2"),
        adam_eps=cfgmod.as_float(cfg, "adam_eps"),
        clip_norm=cfgmod.as_float(cfg, "clip_norm"),
        patience=cfgmod.as_int(cfg, "patience"),
        seed=seed,
        teacher_forcing=cfgmod.as_bool(cfg, "teacher_forcing"),
    )
    result = run_training(model, tr, val, tcfg, disc=disc,
                          adv_weight=cfgmod.as_float(cfg, "adv_weight"))
    ckpt_path = Path(cfg["checkpoint"])
    if ckpt_path.parent != Path("."):
        ckpt_path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ckpt_path, cfgmod.canonical_text(cfg),
                    model.named_parameters(), model.named_buffers())
    result.write_log_tsv(cfg["log"])
    last = result.log_rows[-1]
    print(f"train[{cfg['model']}]: {len(result.log_rows)} epochs "
          f"({len(tr)} train / {len(val)} val utterances), "
          f"best val MAE {result.best_val_mae:.4f} at epoch {result.best_epoch}, "
          f"final val PCC {last['val_pcc']:.4f} -> {ckpt_path}")
    return 0


def _restore_model(checkpoint_path):
    ckpt = load_checkpoint(checkpoint_path)
    cfg = dict(cfgmod.DEFAULTS)
    cfg.update(cfgmod.parse_config_text(ckpt.config_text))
    model, _ = _build_model(cfg, int(cfg["input_dim"]), int(cfg.get("decoder_out_dim", "0") or 0))
    restore_into(ckpt, model.named_parameters(), model.set_buffer)
    return model, cfg


def cmd_invert(args) -> int:
    model, cfg = _restore_model(args.checkpoint)
    feat_suffix = cfg["feature_suffix"] if cfg["model"] != "decoder" else cfg["tv_suffix"]
    in_path = Path(args.features)
    files = _afm_files(in_path, feat_suffix)
    out = Path(args.out)
    if in_path.is_dir():
        out.mkdir(parents=True, exist_ok=True)
    tv_rate = cfgmod.as_float(cfg, "tv_rate")
    emb = None
    if cfg["model"] == "decoder" and cfg["embedding_file"]:
        emb = featio.read_afm(cfg["embedding_file"])

    def run_one(f: Path):
        m = _maybe_resample(featio.read_afm(f), tv_rate)
        rate = m.frame_rate
        if cfg["model"] == "decoder":
            if emb is not None:
                m = featio.concat_speaker_embedding(m, emb)
            pred = model.forward(m.data, training=False).data
            phon = None
        elif cfg["model"] == "baseline":
            tv, logits = model.forward(m.data, training=False)
            pred, phon = tv.data, logits.data
        else:
            tv, pm = model.forward(m.data, teacher_tv=None, training=False)
            pred, phon = tv.data, pm.data
        return f, pred, phon, rate

    out_suffix = ".dec.afm" if cfg["model"] == "decoder" else ".tv.afm"
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for f, pred, phon, rate in pool.map(run_one, files):
            stem = _stem(f, feat_suffix)
            dest = out / f"{stem}{out_suffix}" if in_path.is_dir() else out
            featio.write_afm(dest, featio.FeatureMatrix(pred, rate))
            if args.emit_phonemes and phon is not None:
                featio.write_afm(out / f"{stem}.phon.afm" if in_path.is_dir() else
                                 Path(str(out) + ".phon.afm"),
                                 featio.FeatureMatrix(phon, rate))
    print(f"invert[{cfg['model']}]: {len(files)} files -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    pred_path, true_path = Path(args.pred), Path(args.true)
    pred_files = _afm_files(pred_path, ".tv.afm")
    report = evalsuite.EvalReport()
    preds, trues = [], []
    l1_sums: dict[int, tuple[float, int]] = {}
    acc_hits, acc_total = 0, 0
    for pf in pred_files:
        stem = _stem(pf, ".tv.afm")
        tf = true_path / pf.name if true_path.is_dir() else true_path
        pred = featio.read_afm(pf)
        true = featio.read_afm(tf)
        if pred.n_frames != true.n_frames or pred.n_dims != true.n_dims:
            raise LengthMismatch(
                f"{stem}: prediction {pred.data.shape} vs reference {true.data.shape}")
        preds.append(pred.data)
        trues.append(true.data)
        if args.align:
            align_dir = Path(args.align)
            af = (align_dir / f"{stem}.align.tsv") if align_dir.is_dir() else align_dir
            align = featio.read_alignment_tsv(af)
            ids = featio.frame_labels(align, true.frame_rate, true.n_frames)
            err = np.abs(pred.data - true.data).mean(axis=1)
            for cid in np.unique(ids):
                s, n = l1_sums.get(int(cid), (0.0, 0))
                mask = ids == cid
                l1_sums[int(cid)] = (s + float(err[mask].sum()), n + int(mask.sum()))
            if args.pred_phonemes:
                ph_dir = Path(args.pred_phonemes)
                ph_file = (ph_dir / f"{stem}.phon.afm") if ph_dir.is_dir() else ph_dir
                ph = featio.read_afm(ph_file)
                n = min(ph.n_frames, len(ids))
                acc_hits += evalsuite.phoneme_accuracy(ph.data[:n], ids[:n]) * n
                acc_total += n
    pred_all, true_all = np.vstack(preds), np.vstack(trues)
    per, mean = evalsuite.mean_pcc(pred_all, true_all)
    names = geo.TV_CHANNELS if pred_all.shape[1] == 9 else [
        f"dim{i}" for i in range(pred_all.shape[1])]
    report.per_channel_pcc = {n: float(r) for n, r in zip(names, per)}
    report.mean_pcc = mean
    if l1_sums:
        report.per_phoneme_l1 = {
            featio.phoneme_label(cid): s / n for cid, (s, n) in sorted(l1_sums.items())}
    if acc_total:
        report.phoneme_acc = acc_hits / acc_total
    if args.mcd_pred and args.mcd_true:
        mp, mt = Path(args.mcd_pred), Path(args.mcd_true)

        def one_mcd(f: Path):
            ref = mt / f.name if mt.is_dir() else mt
            return _stem(f, ".afm"), evalsuite.dtw_mcd(
                featio.read_afm(f).data, featio.read_afm(ref).data)

        with ThreadPoolExecutor(max_workers=args.jobs) as tpool:
            for name, value in tpool.map(one_mcd, _afm_files(mp, ".afm")):
                report.dtw_mcd_per_utt[name] = value
    prefix = args.report
    if prefix.endswith("/") or Path(prefix).is_dir():
        Path(prefix).mkdir(parents=True, exist_ok=True)
        prefix = str(Path(prefix)) + "/"
    paths = report.write_tsvs(prefix)
    print(f"evaluate: {len(pred_files)} utterances, mean PCC {mean:.4f} -> "
          + ", ".join(paths))
    return 0


def cmd_plot_data(args) -> int:
    out = Path(args.out)
    if args.kind == "vowel-la":
        root = Path(args.data_root)
        items = []
        for spk_dir in sorted(d for d in root.iterdir() if d.is_dir()):
            for tv_file in sorted(spk_dir.glob("*.tv.afm")):
                align_file = spk_dir / f"{_stem(tv_file, '.tv.afm')}.align.tsv"
                if not align_file.exists():
                    continue
                tv = featio.read_afm(tv_file)
                align = featio.read_alignment_tsv(align_file)
                items.append((spk_dir.name, tv.data, align, tv.frame_rate))
        with open(out, "w", encoding="utf-8") as f:
            f.write("vowel\tn_speakers\tmean_la\tvar_la\n")
            if items:
                summary = evalsuite.vowel_la_summary(items)
                for vowel in sorted(summary):
                    st = summary[vowel]
                    f.write(f"{vowel}\t{len(st.per_speaker)}\t{st.mean:.6f}\t"
                            f"{st.variance:.6f}\n")
    elif args.kind == "training-curve":
        with open(args.log, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0].split("\t")[0] != "epoch":
            raise ValidationError(f"{args.log} is not a training log TSV")
        with open(out, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    elif args.kind == "tv-traces":
        m = featio.read_afm(args.tv)
        true = featio.read_afm(args.true) if args.true else None
        with open(out, "w", encoding="utf-8") as f:
            cols = ["time"] + [f"pred_{c}" for c in geo.TV_CHANNELS]
            if true is not None:
                cols += [f"true_{c}" for c in geo.TV_CHANNELS]
            f.write("\t".join(cols) + "\n")
            for i in range(m.n_frames):
                row = [repr(i / m.frame_rate)] + [f"{v:.6f}" for v in m.data[i]]
                if true is not None:
                    row += [f"{v:.6f}" for v in true.data[i]]
                f.write("\t".join(row) + "\n")
    else:
        raise UnknownKind(f"unknown plot kind {args.kind!r}")
    print(f"plot-data[{args.kind}] -> {out}")
    return 0


# --- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artinv",
                                description="Acoustic-to-articulatory inversion toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    pf = sub.add_parser("palate-fit", help="fit a palate polyline from EMA tongue data")
    pf.add_argument("--ema-dir", required=True, help="directory of *.ema.csv files")
    pf.add_argument("--out", required=True, help="output palate CSV")
    pf.add_argument("--offset", type=float, default=0.0,
                    help="upward shift in mm applied to the fitted hull")
    pf.set_defaults(func=cmd_palate_fit)

    dt = sub.add_parser("derive-tv", help="derive (normalized) tract variables")
    dt.add_argument("--ema", required=True, help="EMA CSV file or speaker directory")
    dt.add_argument("--palate", required=True, help="palate CSV")
    dt.add_argument("--stats", help="speaker stats TSV; computed from --ema when absent")
    dt.add_argument("--lp-ref", type=float, default=None,
                    help="lip-protrusion reference x; mean upper-lip x when absent")
    dt.add_argument("--out", required=True, help="output AFM file or directory")
    dt.add_argument("--no-normalize", action="store_true")
    dt.add_argument("--jobs", type=int, default=1)
    dt.set_defaults(func=cmd_derive_tv)

    gs = sub.add_parser("gen-synth", help="generate a synthetic corpus")
    gs.add_argument("--speakers", type=int, required=True)
    gs.add_argument("--utts", type=int, required=True, help="utterances per speaker")
    gs.add_argument("--out", required=True)
    gs.add_argument("--frames", type=int, default=300)
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--sigma", type=float, default=0.01, help="acoustic noise stdev")
    gs.add_argument("--acoustic-dim", type=int, default=24)
    gs.add_argument("--nonlinear", action="store_true",
                    help="tanh-squash the forward map")
    gs.set_defaults(func=cmd_gen_synth)

    tr = sub.add_parser("train", help="train a model from a key=value config")
    tr.add_argument("--config", required=True)
    tr.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config entry (repeatable)")
    tr.add_argument("--seed", type=int, default=None, help="override config seed")
    tr.set_defaults(func=cmd_train)

    iv = sub.add_parser("invert", help="run a checkpointed model over feature files")
    iv.add_argument("--checkpoint", required=True)
    iv.add_argument("--features", required=True, help="AFM file or directory")
    iv.add_argument("--out", required=True)
    iv.add_argument("--emit-phonemes", action="store_true",
                    help="also write per-frame phoneme outputs (*.phon.afm)")
    iv.add_argument("--jobs", type=int, default=1)
    iv.set_defaults(func=cmd_invert)

    ev = sub.add_parser("evaluate", help="score predicted against reference TVs")
    ev.add_argument("--pred", required=True, help="predicted *.tv.afm file or dir")
    ev.add_argument("--true", required=True, help="reference *.tv.afm file or dir")
    ev.add_argument("--align", help="alignment TSV file or dir (per-phoneme L1)")
    ev.add_argument("--pred-phonemes", help="*.phon.afm file or dir (accuracy)")
    ev.add_argument("--mcd-pred", help="predicted mel-cepstra AFMs (DTW-MCD)")
    ev.add_argument("--mcd-true", help="reference mel-cepstra AFMs (DTW-MCD)")
    ev.add_argument("--report", required=True, help="output prefix or directory")
    ev.add_argument("--jobs", type=int, default=1)
    ev.set_defaults(func=cmd_evaluate)

    pd = sub.add_parser("plot-data", help="emit plot-ready TSV tables")
    pd.add_argument("--kind", required=True,
                    choices=["vowel-la", "training-curve", "tv-traces"])
    pd.add_argument("--data-root", help="corpus root with spk*/ dirs (vowel-la)")
    pd.add_argument("--log", help="training log TSV (training-curve)")
    pd.add_argument("--tv", help="TV AFM (tv-traces)")
    pd.add_argument("--true", help="reference TV AFM (tv-traces)")
    pd.add_argument("--out", required=True)
    pd.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
