import os

# single-threaded BLAS before numpy loads anywhere: bit-reproducibility
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
