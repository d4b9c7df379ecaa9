"""Input validation helpers shared by the estimators and builders."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

#: eigenvalues of a Laplacian below this are classified as kernel
KERNEL_TOL = 1e-10
SELF_ADJOINT_TOL = 1e-10


class NotFittedError(ValueError, AttributeError):
    """Raised when an estimator is used before ``fit``."""


def check_is_fitted(estimator, attributes: str | list[str]) -> None:
    attrs = [attributes] if isinstance(attributes, str) else attributes
    if not all(hasattr(estimator, a) for a in attrs):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first.")


def as_block_list(blocks, n_blocks: int) -> list:
    """Accept a single matrix for one-block algebras, else a sequence of blocks."""
    if n_blocks == 1 and (sp.issparse(blocks) or (isinstance(blocks, np.ndarray) and blocks.ndim == 2)):
        return [blocks]
    blocks = list(blocks)
    if len(blocks) != n_blocks:
        raise ValueError(f"expected {n_blocks} blocks, got {len(blocks)}")
    return blocks


def check_self_adjoint(m, tol: float = SELF_ADJOINT_TOL) -> None:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"operator block is not square: {m.shape}")
    diff = m - m.conj().T
    err = (abs(diff).max() if diff.nnz else 0.0) if sp.issparse(diff) else (
        np.abs(diff).max() if diff.size else 0.0)
    if err > tol:
        raise ValueError(f"operator is not self-adjoint (|f - f*| = {err:.3g} > {tol:g})")


def check_degree(k: int, top: int) -> int:
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= top:
        raise ValueError(f"degree {k!r} outside 0..{top}")
    return int(k)


def check_lambda_grid(lams) -> np.ndarray:
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("lambda grid must be a nonempty 1-d array")
    if np.any(~np.isfinite(lams)):
        raise ValueError("lambda grid contains non-finite values")
    return lams


def check_window(window) -> tuple[float, float]:
    lo, hi = (float(v) for v in window)
    if not (0 < lo < hi):
        raise ValueError(f"fit window {window!r} is empty")
    return lo, hi
