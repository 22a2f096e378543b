"""Symmetric eigensolver backends.

Two interchangeable implementations sit behind `sym_eigh`:

* ``jacobi`` -- the compiled cyclic-Jacobi kernel (convergence when the
  off-diagonal Frobenius norm drops below 1e-12 times the input norm, hard
  cap of 100 sweeps).
* ``numpy`` -- LAPACK via numpy.linalg.eigh; the pure-Python fallback when
  the extension is not built.

The compiled kernel is preferred when importable.  Set INSTREVAL_BACKEND to
``jacobi`` or ``numpy`` to force one.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConvergenceError, ValidationError

JACOBI_TOL_FACTOR = 1e-12
JACOBI_MAX_SWEEPS = 100

try:
    from . import _jacobi as _compiled
except ImportError:
    _compiled = None


def available_backends() -> tuple[str, ...]:
    if _compiled is not None:
        return ("jacobi", "numpy")
    return ("numpy",)


def _default_backend() -> str:
    forced = os.environ.get("INSTREVAL_BACKEND", "")
    if forced:
        if forced not in available_backends():
            raise ValidationError(
                f"INSTREVAL_BACKEND={forced!r} not available; "
                f"choose from {available_backends()}"
            )
        return forced
    return "jacobi" if _compiled is not None else "numpy"


DEFAULT_BACKEND = _default_backend()


def sym_eigh(a: np.ndarray, vectors: bool = True, backend: str | None = None):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvector columns or None).  The input
    must already be symmetric; callers symmetrize first.
    """
    name = backend or DEFAULT_BACKEND
    if name == "jacobi":
        return _jacobi_eigh(a, vectors)
    if name == "numpy":
        if vectors:
            w, v = np.linalg.eigh(a)
            return w, v
        return np.linalg.eigvalsh(a), None
    raise ValidationError(f"unknown eigensolver backend {name!r}")


def _jacobi_eigh(a: np.ndarray, vectors: bool):
    if _compiled is None:
        raise ValidationError("compiled jacobi kernel is not built")
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    n = work.shape[0]
    tol = JACOBI_TOL_FACTOR * float(np.linalg.norm(work))
    vt = np.eye(n, dtype=np.float64) if vectors else np.empty((0, 0))
    sweeps = _compiled.cyclic_jacobi(work, vt, vectors, tol, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(
            f"jacobi sweeps did not converge in {JACOBI_MAX_SWEEPS} sweeps (n={n})"
        )
    w = np.diag(work).copy()
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], np.ascontiguousarray(vt.T[:, order])
    return w[order], None
