"""Semi-inner product modules X = A^d over A = M_k(C).

A module vector is an array of shape ``(d, k, k)``; a tuple of ``n`` vectors is
an array of shape ``(n, d, k, k)``.  The A-valued pairing is

    <x, y> = sum_j x_j^* y_j

which is additive, right A-linear, adjoint symmetric and positive.  It is
conjugate linear in the first slot and linear in the second, so
``<x, alpha y> = alpha <x, y>`` for scalars.

Two seminorms live on X: the C*-norm ``||x|| = ||<x, x>||^(1/2)`` and the
H*-trace seminorm ``|||x||| = (tr <x, x>)^(1/2)``.
"""

from __future__ import annotations

import math

import numpy as np

from .certificate import BoundCertificate
from .errors import NonFiniteInput, NotUnit, ShapeMismatch
from .kernel import operator_norm, spectral_radius, trace_norm

PROB_TOL = 1e-12
FLAVORS = ("cstar", "hstar")


def _finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{what} has NaN or infinite entries")
    return arr


def as_vector(x) -> np.ndarray:
    """Coerce to a module vector of shape ``(d, k, k)``.

    A bare ``(k, k)`` matrix is read as a rank-one vector and a scalar as the
    ``1 x 1`` case.
    """
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1, 1)
    elif arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or 0 in arr.shape:
        raise ShapeMismatch(f"module vector must have shape (d, k, k), got {arr.shape}")
    return _finite(arr, "module vector")


def as_tuple(xs) -> np.ndarray:
    """Coerce to a vector tuple of shape ``(n, d, k, k)``.

    ``(n, k, k)`` is read as ``n`` rank-one vectors and ``(n,)`` as ``n`` scalars.
    """
    arr = np.asarray(xs, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1, 1, 1)
    elif arr.ndim == 3:
        arr = arr[:, None]
    if arr.ndim != 4 or arr.shape[2] != arr.shape[3] or 0 in arr.shape:
        raise ShapeMismatch(f"vector tuple must have shape (n, d, k, k), got {arr.shape}")
    return _finite(arr, "vector tuple")


def as_probability(p, n: int | None = None) -> np.ndarray:
    w = np.asarray(p, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ShapeMismatch(f"probability vector must be a non-empty 1-d array, got shape {w.shape}")
    if n is not None and w.size != n:
        raise ShapeMismatch(f"probability vector has length {w.size}, expected {n}")
    _finite(w, "probability vector")
    if (w < 0).any() or abs(w.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"not a probability vector (min {w.min():.3e}, sum {w.sum():.17g})")
    return w


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def as_weights(alphas, n: int | None = None) -> np.ndarray:
    w = np.asarray(alphas, dtype=np.complex128)
    if w.ndim != 1 or (n is not None and w.size != n):
        raise ShapeMismatch(f"scalar weights have shape {w.shape}, expected ({n},)")
    return _finite(w, "scalar weights")


def same_shape(x: np.ndarray, y: np.ndarray, what: str = "operands") -> None:
    if x.shape != y.shape:
        raise ShapeMismatch(f"{what} differ in shape: {x.shape} vs {y.shape}")


def zero_vector(k: int, d: int = 1) -> np.ndarray:
    return np.zeros((d, k, k), dtype=np.complex128)


def unit_vector(k: int, d: int = 1, flavor: str = "cstar") -> np.ndarray:
    """``(c I, 0, ..., 0)`` with ``c`` chosen so the flavor's norm is 1."""
    e = zero_vector(k, d)
    e[0] = np.eye(k) if flavor == "cstar" else np.eye(k) / math.sqrt(k)
    return e


def normalize(x, flavor: str = "cstar") -> np.ndarray:
    x = as_vector(x)
    nrm = module_norm(x) if flavor == "cstar" else hs_seminorm(x)
    if nrm == 0.0:
        raise NotUnit("cannot normalize a null vector")
    return x / nrm


def vector_norm(x, flavor: str) -> float:
    return module_norm(x) if flavor == "cstar" else hs_seminorm(x)


# -- pairing and norms -------------------------------------------------------


def _ip(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("jba,jbc->ac", x.conj(), y)


def _ips(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return np.einsum("njba,njbc->nac", xs.conj(), ys)


def inner_product(x, y) -> np.ndarray:
    x, y = as_vector(x), as_vector(y)
    same_shape(x, y)
    return _ip(x, y)


def inner_products(xs, ys) -> np.ndarray:
    """``<x_i, y_i>`` for every index, shape ``(n, k, k)``."""
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys)
    return _ips(xs, ys)


def _module_norms(xs: np.ndarray) -> np.ndarray:
    # ||<x,x>||^(1/2) is the top singular value of the stacked (d*k, k) block.
    n, d, k, _ = xs.shape
    return np.linalg.svd(xs.reshape(n, d * k, k), compute_uv=False)[:, 0]


def _hs_seminorms(xs: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("nijk,nijk->n", xs.real, xs.real) + np.einsum("nijk,nijk->n", xs.imag, xs.imag))


def module_norm(x) -> float:
    """``||x|| = ||<x, x>||^(1/2)``."""
    return float(_module_norms(as_vector(x)[None])[0])


def hs_seminorm(x) -> float:
    """``|||x||| = (tr <x, x>)^(1/2)``, i.e. the Frobenius norm of all parts."""
    return float(np.linalg.norm(as_vector(x)))


def module_norms(xs) -> np.ndarray:
    return _module_norms(as_tuple(xs))


def hs_seminorms(xs) -> np.ndarray:
    return _hs_seminorms(as_tuple(xs))


def tuple_norms(xs: np.ndarray, flavor: str) -> np.ndarray:
    return _module_norms(xs) if flavor == "cstar" else _hs_seminorms(xs)


# -- linear structure --------------------------------------------------------


def weighted_combination(w, xs) -> np.ndarray:
    """``sum_i w_i x_i`` for real probabilities or complex scalar weights."""
    xs = as_tuple(xs)
    w = np.asarray(w)
    if w.ndim != 1 or w.size != xs.shape[0]:
        raise ShapeMismatch(f"{w.size} weights for {xs.shape[0]} vectors")
    return np.tensordot(w, xs, axes=1)


def translate(xs, a) -> np.ndarray:
    xs, a = as_tuple(xs), as_vector(a)
    if xs.shape[1:] != a.shape:
        raise ShapeMismatch(f"cannot translate tuple of {xs.shape[1:]} vectors by {a.shape}")
    return xs - a


def right_multiply(x, a) -> np.ndarray:
    """The module action ``x . a``, applied to every part."""
    x = as_vector(x)
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != x.shape[1:]:
        raise ShapeMismatch(f"cannot act with {a.shape} on a vector of {x.shape[1:]} parts")
    return x @ a


# -- Schwarz inequalities ----------------------------------------------------
# phi := matrix trace (positive linear functional), gamma := operator norm.


def _pair(x, y):
    x, y = as_vector(x), as_vector(y)
    same_shape(x, y)
    return _ip(x, y), _ip(x, x), _ip(y, y)


def check_norm_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``||<x,y>||^2 <= ||<x,x>|| ||<y,y>||`` in the C*-module."""
    xy, xx, yy = _pair(x, y)
    return BoundCertificate.evaluate(
        "2.1", operator_norm(xy) ** 2, (operator_norm(xx) * operator_norm(yy),), slack_scale=slack_scale
    )


def check_real_trace_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Weak form ``(Re tr<x,y>)^2 <= tr<x,x> tr<y,y>``."""
    xy, xx, yy = _pair(x, y)
    lhs = np.trace(xy).real ** 2
    return BoundCertificate.evaluate(
        "2.2", lhs, (np.trace(xx).real * np.trace(yy).real,), slack_scale=slack_scale
    )


def check_trace_norm_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Strong form ``tau(<x,y>)^2 <= tr<x,x> tr<y,y>``."""
    xy, xx, yy = _pair(x, y)
    return BoundCertificate.evaluate(
        "2.3", trace_norm(xy) ** 2, (np.trace(xx).real * np.trace(yy).real,), slack_scale=slack_scale
    )


def check_trace_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    xy, xx, yy = _pair(x, y)
    return BoundCertificate.evaluate(
        "2.4", abs(np.trace(xy)) ** 2, (np.trace(xx).real * np.trace(yy).real,), slack_scale=slack_scale
    )


def check_spectral_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``phi(<x,y><y,x>) <= phi(<x,x>) r(<y,y>)`` with ``r`` the spectral radius."""
    xy, xx, yy = _pair(x, y)
    lhs = np.trace(xy @ xy.conj().T).real
    return BoundCertificate.evaluate(
        "2.5", lhs, (np.trace(xx).real * spectral_radius(yy),), slack_scale=slack_scale
    )


def check_operator_norm_schwarz(x, y, *, slack_scale: float = 1.0) -> BoundCertificate:
    xy, xx, yy = _pair(x, y)
    gamma = operator_norm
    return BoundCertificate.evaluate(
        "2.6", gamma(xy) ** 2, (gamma(xx) * gamma(yy),), slack_scale=slack_scale
    )


SCHWARZ_CHECKS = {
    "2.1": check_norm_schwarz,
    "2.2": check_real_trace_schwarz,
    "2.3": check_trace_norm_schwarz,
    "2.4": check_trace_schwarz,
    "2.5": check_spectral_schwarz,
    "2.6": check_operator_norm_schwarz,
}
