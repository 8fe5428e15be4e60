"""Flat key=value run configuration.

Files hold one ``key = value`` pair per line; ``#`` starts a comment. CLI
``--set key=value`` pairs override file entries. The canonical serialization
(sorted keys) is what gets hashed and embedded in checkpoints, so a run is
reproducible from its checkpoint alone.
"""

from __future__ import annotations

from .errors import ValidationError

DEFAULTS = {
    # run
    "model": "baseline",            # baseline | proposed | decoder
    "seed": "0",
    "data_root": "corpus",
    "train_speakers": "",           # comma-separated; empty = all but test
    "test_speakers": "",
    "val_fraction": "0.1",
    "checkpoint": "model.ckpt",
    "log": "train_log.tsv",
    # corpus file suffixes
    "feature_suffix": ".feat.afm",
    "tv_suffix": ".tv.afm",
    "align_suffix": ".align.tsv",
    "target_suffix": ".feat.afm",   # decoder regression targets
    "embedding_file": "",           # optional speaker-embedding AFM (decoder)
    "tv_rate": "0",                 # resample features to this rate; 0 = keep
    # model (input/output dims 0 = infer from the data at train time)
    "input_dim": "0",
    "decoder_out_dim": "0",
    "gru_hidden": "256",
    "gru_layers": "2",
    "mlp_hidden": "128",
    "dropout": "0.3",
    "ce_weight": "0.5",
    "chunk_len": "50",
    "ar_hidden": "64",
    "ar_dim": "32",
    "pm_weight": "0.5",
    "adv_weight": "1.0",
    "feature_matching": "false",
    "disc_channels": "16,32,64,64",
    "disc_kernel": "5",
    "disc_stride": "2",
    # training
    "epochs": "30",
    "lr": "0.0001",
    "beta1": "0.9",
    "beta2": "0.999",
    "adam_eps": "1e-8",
    "clip_norm": "1.0",
    "patience": "10",
    "teacher_forcing": "true",
}


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path, overrides: list[str] | None = None) -> dict[str, str]:
    """Defaults, then the file, then ``key=value`` override strings."""
    cfg = dict(DEFAULTS)
    with open(path, encoding="utf-8") as f:
        entries = parse_config_text(f.read())
    unknown = set(entries) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    cfg.update(entries)
    for item in overrides or []:
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        if key.strip() not in DEFAULTS:
            raise ValidationError(f"unknown config key {key.strip()!r}")
        cfg[key.strip()] = value.strip()
    return cfg


def canonical_text(cfg: dict[str, str]) -> str:
    return "".join(f"{k}={cfg[k]}\n" for k in sorted(cfg))


def as_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError:
        raise ValidationError(f"config {key}={cfg[key]!r} is not an integer") from None


def as_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError:
        raise ValidationError(f"config {key}={cfg[key]!r} is not a number") from None


def as_bool(cfg: dict[str, str], key: str) -> bool:
    v = cfg[key].lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ValidationError(f"config {key}={cfg[key]!r} is not a boolean")


def as_int_list(cfg: dict[str, str], key: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in cfg[key].split(",") if x.strip())
    except ValueError:
        raise ValidationError(f"config {key}={cfg[key]!r} is not an int list") from None


def as_str_list(cfg: dict[str, str], key: str) -> list[str]:
    return [x.strip() for x in cfg[key].split(",") if x.strip()]
