import os

# Single-threaded BLAS keeps runs bitwise reproducible and is faster at the
# matrix sizes used here; must be set before numpy loads its backend.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
