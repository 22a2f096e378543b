"""Dense symmetric linear-algebra kernels.

Everything downstream (FAD, timbral-consistency scores, reference-ensemble
coloration) reduces to a handful of operations on symmetric matrices: Gram
computation over unit-norm embedding columns, eigendecomposition, PSD square
roots, Tr((A B)^{1/2}) for PSD pairs, and imposing a target Gram on an
ensemble.  All of them live here, on top of the `_kernels` eigensolver.

Conventions: Gram matrices are kept with unit diagonal (the per-instrument
1/N_k factor is applied inside the metric formulas, so grids with different
sample counts can share the 440-cell layout).  Tr((A B)^{1/2}) is always
evaluated through the symmetric conjugation A^{1/2} B A^{1/2}; the
nonsymmetric eigendecomposition of A B exists only as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    NotPositiveSemidefiniteError,
    RankDeficiencyError,
    ValidationError,
)

CLAMP_FACTOR = 1e-10   # eigenvalues in [-clamp, 0) count as rounding noise
RANK_FACTOR = 1e-8     # pseudo-inverse cutoff for coloration
SYMMETRY_RTOL = 1e-9
UNIT_NORM_TOL = 1e-6
MAX_DIM = 4096


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_symmetric(a, name: str) -> np.ndarray:
    """Validate and symmetrize a square matrix."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        raise ValidationError(f"{name} is empty")
    if n > MAX_DIM:
        raise ValidationError(f"{name} is {n}x{n}; the kernel cap is {MAX_DIM}")
    if not np.isfinite(a).all():
        raise ValidationError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.linalg.norm(a)))
    if float(np.linalg.norm(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ValidationError(f"{name} is not symmetric within {SYMMETRY_RTOL:g} relative")
    return (a + a.T) / 2.0


def _clamped_psd_spectrum(w: np.ndarray, name: str) -> np.ndarray:
    """Apply the clamp rule: [-clamp, 0) -> 0, below -clamp -> error."""
    lam_max = max(float(w[-1]), 0.0)
    clamp = CLAMP_FACTOR * lam_max
    lam_min = float(w[0])
    if lam_min < -clamp:
        raise NotPositiveSemidefiniteError(
            f"{name} has eigenvalue {lam_min:.6e}, below the clamp "
            f"tolerance -{clamp:.6e}"
        )
    return np.clip(w, 0.0, None)


def sym_eigen(a, backend: str | None = None) -> SpectralDecomp:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""
    s = _as_symmetric(a, "matrix")
    w, v = _kernels.sym_eigh(s, vectors=True, backend=backend)
    return SpectralDecomp(w[::-1].copy(), np.ascontiguousarray(v[:, ::-1]))


def cosine_gram(columns) -> np.ndarray:
    """Gram matrix Z^T Z of unit-norm embedding columns, diagonal forced to 1.

    No mean subtraction; cosine and covariance coincide for this data by
    construction.
    """
    z = np.asarray(columns, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] == 0:
        raise ValidationError(f"expected a dz x N column matrix, got shape {z.shape}")
    if not np.isfinite(z).all():
        raise ValidationError("embedding columns contain non-finite entries")
    norms = np.linalg.norm(z, axis=0)
    worst = float(np.abs(norms - 1.0).max())
    if worst > UNIT_NORM_TOL:
        raise ValidationError(
            f"columns must be unit-norm within {UNIT_NORM_TOL:g} "
            f"(worst deviation {worst:.3e})"
        )
    c = z.T @ z
    c = (c + c.T) / 2.0
    np.fill_diagonal(c, 1.0)
    return c


def psd_sqrt(a, backend: str | None = None) -> np.ndarray:
    """Symmetric PSD square root; negative rounding noise is clamped to 0."""
    s = _as_symmetric(a, "matrix")
    w, v = _kernels.sym_eigh(s, vectors=True, backend=backend)
    w = _clamped_psd_spectrum(w, "matrix")
    root = (v * np.sqrt(w)) @ v.T
    return (root + root.T) / 2.0


def trace_sqrt_product(a, b, backend: str | None = None) -> float:
    """Tr((A^{1/2} B A^{1/2})^{1/2}) for PSD A, B; equals Tr((A B)^{1/2}).

    Both operands are validated against the clamp rule.  The conjugated
    matrix inherits only rounding-level spectral noise from validated inputs,
    but the square root amplifies it (sqrt(1e-18) = 1e-9 per mode), so its
    eigenvalues are floored at CLAMP_FACTOR times the largest before the
    final square root.  True spectra in this pipeline carry no mass at that
    scale; without the floor, rank-deficient products accumulate visible
    error.
    """
    sa = _as_symmetric(a, "left operand")
    sb = _as_symmetric(b, "right operand")
    if sa.shape != sb.shape:
        raise ValidationError(f"operand shapes differ: {sa.shape} vs {sb.shape}")
    wb = _kernels.sym_eigh(sb, vectors=False, backend=backend)[0]
    _clamped_psd_spectrum(wb, "right operand")

    wa, va = _kernels.sym_eigh(sa, vectors=True, backend=backend)
    wa = _clamped_psd_spectrum(wa, "left operand")
    root = (va * np.sqrt(wa)) @ va.T
    m = root @ sb @ root
    m = (m + m.T) / 2.0
    wm = _kernels.sym_eigh(m, vectors=False, backend=backend)[0]
    floor = CLAMP_FACTOR * max(float(wm[-1]), 0.0)
    wm = np.where(wm > floor, wm, 0.0)
    return float(np.sqrt(wm).sum())


def color_to_target(z, c_target, backend: str | None = None) -> np.ndarray:
    """Recolor an ensemble so its Gram matches a unit-diagonal PSD target.

    Returns Z' = Z G^{-1/2} C^{1/2} with G = Z^T Z; G is inverted through its
    pseudo-inverse square root (eigenvalues at or below RANK_FACTOR times the
    largest are dropped).  When rank(G) < rank(C) the target is unreachable
    and a RankDeficiencyError names both ranks.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] == 0:
        raise ValidationError(f"expected a dz x N column matrix, got shape {z.shape}")
    if not np.isfinite(z).all():
        raise ValidationError("embedding columns contain non-finite entries")
    norms = np.linalg.norm(z, axis=0)
    if float(np.abs(norms - 1.0).max()) > UNIT_NORM_TOL:
        raise ValidationError(f"columns must be unit-norm within {UNIT_NORM_TOL:g}")
    ct = _as_symmetric(c_target, "target Gram")
    if ct.shape[0] != z.shape[1]:
        raise ValidationError(
            f"target Gram is {ct.shape[0]}x{ct.shape[0]} but the ensemble has "
            f"{z.shape[1]} columns"
        )
    if float(np.abs(np.diag(ct) - 1.0).max()) > UNIT_NORM_TOL:
        raise ValidationError("target Gram must have unit diagonal")

    g = z.T @ z
    g = (g + g.T) / 2.0
    wg, vg = _kernels.sym_eigh(g, vectors=True, backend=backend)
    wc, vc = _kernels.sym_eigh(ct, vectors=True, backend=backend)
    wc = _clamped_psd_spectrum(wc, "target Gram")

    g_cut = RANK_FACTOR * max(float(wg[-1]), 0.0)
    c_cut = RANK_FACTOR * max(float(wc[-1]), 0.0)
    rank_g = int(np.count_nonzero(wg > g_cut))
    rank_c = int(np.count_nonzero(wc > c_cut))
    if rank_g < rank_c:
        raise RankDeficiencyError(rank_g, rank_c)

    inv_root = np.where(wg > g_cut, 1.0 / np.sqrt(np.where(wg > g_cut, wg, 1.0)), 0.0)
    g_inv_half = (vg * inv_root) @ vg.T
    c_half = (vc * np.sqrt(wc)) @ vc.T
    return z @ g_inv_half @ c_half
