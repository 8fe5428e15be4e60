"""artinv: desk-scale acoustic-to-articulatory inversion toolkit.

Subpackages/modules:
    ema_geometry  -- palate estimation and tract-variable derivation from EMA
    featio        -- feature matrices, phoneme inventory, alignments, AFM1 format
    diffcore      -- minimal reverse-mode autodiff engine (layers, losses, Adam)
    aai_models    -- baseline and autoregressive-adversarial inversion models
    evalsuite     -- Pearson, per-phoneme L1, DTW, MCD, vowel-LA metrics
    datagen       -- synthetic multi-speaker corpus with a known forward map
    cli           -- command-line pipeline (palate-fit, derive-tv, train, ...)
"""

import os

# Pin BLAS to one thread before numpy loads: training is specified as
# single-threaded and bit-reproducible under a fixed seed.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

__version__ = "0.1.0"
