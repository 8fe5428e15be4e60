#!/usr/bin/env python3
"""Walk through the geometry stage: generate one synthetic speaker, fit the
palate from pooled tongue positions, derive the 9 tract variables, and
normalize them to [-1, 1].

Run:  python3 demos/demo_palate_and_tvs.py
"""

import numpy as np

from artinv import datagen
from artinv import ema_geometry as geo

# a synthetic speaker and a few utterances stand in for a real EMA session
speaker = datagen.gen_speaker(seed=42)
utterances = [
    datagen.gen_utterance(speaker, 300, np.random.default_rng([42, i]))
    for i in range(4)
]
print(f"generated {len(utterances)} utterances x 300 frames at "
      f"{speaker.config.frame_rate:.0f} Hz")

# step 1: pool every tongue sample the speaker produced and fit the palate
tongue = np.vstack([ema.tongue_points() for ema, _, _ in utterances])
palate = geo.fit_palate(tongue)
print(f"palate hull: {palate.vertices.shape[0]} vertices spanning "
      f"x = [{palate.vertices[0, 0]:.1f}, {palate.vertices[-1, 0]:.1f}] mm")

# every tongue point sits on or below the fitted polyline
clearances = [palate.height_at(x) - y for x, y in tongue[:2000]]
print(f"min tongue clearance below hull: {min(clearances):.4f} mm (>= ~0)")

# step 2: derive tract variables; protrusion is measured against the
# speaker's habitual upper-lip x position
lp_ref = float(np.mean([ema.frames[:, 2].mean() for ema, _, _ in utterances]))
tracks = [geo.derive_tvs(ema, palate, lp_reference=lp_ref)
          for ema, _, _ in utterances]
print("channels:", ", ".join(geo.TV_CHANNELS))
print("first frame:", np.round(tracks[0].frames[0], 3))

# step 3: speaker-level min/max, then normalize every track to [-1, 1]
stats = geo.compute_speaker_stats(tracks)
normalized = [geo.normalize_tvs(t, stats) for t in tracks]
flat = np.vstack([t.frames for t in normalized])
print(f"normalized range: [{flat.min():.3f}, {flat.max():.3f}]")
print(f"lip aperture spans {stats.minima[0]:.2f}..{stats.maxima[0]:.2f} mm "
      "before normalization")
