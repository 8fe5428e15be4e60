#!/usr/bin/env python3
"""End-to-end closed loop on synthetic data, in miniature: build a corpus
with a known forward map, train the baseline inversion model on most
speakers, and score the held-out speaker with Pearson correlation.

A larger version of this run (50 utterances, 30 epochs) is the release
acceptance test; this demo trades a little accuracy for a ~1 minute runtime.

Run:  python3 demos/demo_closed_loop.py
"""

import numpy as np

from artinv import datagen, evalsuite, featio
from artinv import ema_geometry as geo
from artinv.aai_models import (
    BaselineConfig,
    BaselineModel,
    Sample,
    TrainConfig,
    predict_tv,
    split_train_val,
    train,
)

SEED = 5
N_SPEAKERS = 5  # last one is held out
gen_cfg = datagen.GenConfig(noise_sigma=0.01)

speakers = []
for si in range(N_SPEAKERS):
    spk = datagen.gen_speaker([SEED, si], gen_cfg)
    utts = [datagen.gen_utterance(spk, 300, np.random.default_rng([SEED, si, ui]))
            for ui in range(4)]
    # per-speaker preparation mirrors the real pipeline: hull palate,
    # habitual-lip reference, min-max normalization
    palate = geo.fit_palate(np.vstack([u[0].tongue_points() for u in utts]))
    lp_ref = float(np.mean([u[0].frames[:, 2].mean() for u in utts]))
    tracks = [geo.derive_tvs(u[0], palate, lp_ref) for u in utts]
    stats = geo.compute_speaker_stats(tracks)
    samples = []
    for (ema, feat, align), tv in zip(utts, tracks):
        ntv = geo.normalize_tvs(tv, stats)
        labels = featio.frame_labels(align, gen_cfg.frame_rate, ema.n_frames)
        samples.append(Sample(f"spk{si}", feat.data, ntv.frames, labels))
    speakers.append(samples)

train_pool = [s for sp in speakers[:-1] for s in sp]
heldout = speakers[-1]
tr, val = split_train_val(train_pool, 0.15, np.random.default_rng(SEED))
print(f"{len(tr)} train / {len(val)} val utterances, "
      f"{len(heldout)} held-out from an unseen speaker")

model = BaselineModel(
    BaselineConfig(input_dim=24, gru_hidden=48, mlp_hidden=64, dropout=0.05),
    np.random.default_rng(SEED))
result = train(model, tr, val, TrainConfig(epochs=12, lr=3e-3, patience=12, seed=SEED))
print(f"trained {len(result.log_rows)} epochs, "
      f"best val MAE {result.best_val_mae:.4f}")

pred = np.vstack([predict_tv(model, s) for s in heldout])
true = np.vstack([s.tv for s in heldout])
per_channel, mean = evalsuite.mean_pcc(pred, true)
print("held-out per-channel PCC:")
for name, r in zip(geo.TV_CHANNELS, per_channel):
    print(f"  {name:5s} {r:+.3f}")
print(f"held-out mean PCC: {mean:.3f}")
