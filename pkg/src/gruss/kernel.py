"""The matrix C*-algebra M_k(C) together with its Hilbert-Schmidt H*-structure.

Algebra elements are plain ``numpy`` arrays of shape ``(k, k)`` and dtype
``complex128``.  The operator norm makes M_k(C) a C*-algebra; the Frobenius
inner product ``<a, b> = tr(a* b)`` makes it a proper H*-algebra in which every
element is trace class, ``tr`` is the matrix trace and ``tau(a) = tr|a|`` is the
nuclear (trace) norm.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import NonFiniteInput, NotHermitian, NotPositive, ShapeMismatch

TOL_HERM = 1e-10
TOL_POS = 1e-10
TOL_EIG = 1e-13
MAX_DIM = 32
GELFAND_POWER = 64  # must be a power of two

__all__ = [
    "EigenDecomposition",
    "as_element",
    "identity",
    "adjoint",
    "hermitian_eig",
    "jacobi_eig",
    "is_hermitian",
    "is_normal",
    "operator_norm",
    "is_positive",
    "positive_sqrt",
    "abs_value",
    "trace",
    "trace_norm",
    "frobenius_norm",
    "spectral_radius",
    "spectral_radius_estimate",
]


class EigenDecomposition(NamedTuple):
    """Ascending real eigenvalues and the unitary whose columns are eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_element(a) -> np.ndarray:
    """Coerce ``a`` into a finite square complex matrix.

    Scalars are promoted to ``1 x 1`` matrices, which is how the scalar
    (Hilbert space) case of every result is reached.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ShapeMismatch(f"algebra element must be a non-empty square matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("algebra element has NaN or infinite entries")
    return arr


def identity(k: int) -> np.ndarray:
    return np.eye(k, dtype=np.complex128)


def adjoint(a) -> np.ndarray:
    a = as_element(a)
    return a.conj().T


def is_hermitian(a, tol: float = TOL_HERM) -> bool:
    a = as_element(a)
    return _hermitian_defect(a) <= tol * (1.0 + np.linalg.norm(a))


def _hermitian_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def is_normal(a, tol: float = TOL_HERM) -> bool:
    """True when ``a a* = a* a`` up to ``tol`` relative to ``||a||_F^2``."""
    a = as_element(a)
    ah = a.conj().T
    return float(np.linalg.norm(a @ ah - ah @ a)) <= tol * (1.0 + np.linalg.norm(a) ** 2)


def _require_hermitian(a: np.ndarray, tol: float) -> np.ndarray:
    if _hermitian_defect(a) > tol * (1.0 + np.linalg.norm(a)):
        raise NotHermitian(f"matrix is not Hermitian (||a - a*||_F = {_hermitian_defect(a):.3e})")
    # Symmetrize so the solver sees an exactly Hermitian matrix.
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a, *, tol: float = TOL_HERM, method: str = "jacobi") -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` runs the cyclic Jacobi solver below (ties keep their
    first-seen order); ``method="lapack"`` calls :func:`numpy.linalg.eigh`.
    Both are deterministic for a fixed input.
    """
    a = as_element(a)
    if a.shape[0] > MAX_DIM:
        raise ShapeMismatch(f"dimension {a.shape[0]} exceeds the cap of {MAX_DIM}")
    h = _require_hermitian(a, tol)
    if method == "lapack":
        values, vectors = np.linalg.eigh(h)
        return EigenDecomposition(values, vectors)
    if method == "jacobi":
        return _jacobi(h, TOL_EIG)
    raise ValueError(f"unknown eigensolver {method!r}")


def jacobi_eig(a, *, tol: float = TOL_HERM) -> EigenDecomposition:
    return hermitian_eig(a, tol=tol, method="jacobi")


def _jacobi(h: np.ndarray, sweep_tol: float, max_sweeps: int = 64) -> EigenDecomposition:
    """Cyclic complex Jacobi.

    Each rotation first removes the phase of ``h[p, q]`` with a diagonal unitary
    and then applies a real Givens rotation in the ``(p, q)`` plane.
    """
    a = h.copy()
    k = a.shape[0]
    v = np.eye(k, dtype=np.complex128)
    threshold = sweep_tol * max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                g = abs(apq)
                if g == 0.0:
                    continue
                phase = apq / g
                theta = 0.5 * math.atan2(2.0 * g, a[q, q].real - a[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], v[:, order])


def _singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(a, compute_uv=False)


def operator_norm(a) -> float:
    """Largest singular value, i.e. ``sqrt(max spec(a* a))``."""
    return float(_singular_values(as_element(a))[0])


def trace_norm(a) -> float:
    """``tau(a) = tr|a|``, the sum of singular values."""
    return float(_singular_values(as_element(a)).sum())


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_element(a)))


def trace(a) -> complex:
    return complex(np.trace(as_element(a)))


def is_positive(a, *, tol_herm: float = TOL_HERM, tol_pos: float = TOL_POS) -> bool:
    a = as_element(a)
    if _hermitian_defect(a) > tol_herm * (1.0 + np.linalg.norm(a)):
        return False
    values = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    scale = float(np.abs(values).max())
    return bool(values[0] >= -tol_pos * (1.0 + scale))


def positive_sqrt(a, *, tol_herm: float = TOL_HERM, tol_pos: float = TOL_POS) -> np.ndarray:
    """The unique positive square root, via the spectral map ``lambda -> sqrt(lambda)``.

    Eigenvalues in ``[-tol_pos * scale, 0)`` are rounding noise and clamped to 0.
    """
    a = as_element(a)
    if not is_positive(a, tol_herm=tol_herm, tol_pos=tol_pos):
        raise NotPositive("positive_sqrt needs a positive element")
    values, vectors = hermitian_eig(a, tol=tol_herm)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def abs_value(a) -> np.ndarray:
    """``|a| = (a* a)^(1/2)``."""
    a = as_element(a)
    return positive_sqrt(a.conj().T @ a)


def spectral_radius_estimate(a) -> tuple[float, bool]:
    """Return ``(r(a), exact)``.

    For normal ``a`` the spectral radius equals the operator norm and ``exact``
    is True.  Otherwise the Gelfand quantity ``||a^m||^(1/m)`` with
    ``m = GELFAND_POWER`` is returned and flagged as approximate.
    """
    a = as_element(a)
    if is_normal(a):
        return operator_norm(a), True
    # b stays normalized; log_c tracks log ||a^(2^j)|| across squarings.
    norm_a = operator_norm(a)
    b = a / norm_a
    log_c = math.log(norm_a)
    for _ in range(int(math.log2(GELFAND_POWER))):
        b = b @ b
        nb = operator_norm(b)
        if nb == 0.0:
            return 0.0, False
        b /= nb
        log_c = 2.0 * log_c + math.log(nb)
    return math.exp(log_c / GELFAND_POWER), False


def spectral_radius(a) -> float:
    return spectral_radius_estimate(a)[0]
