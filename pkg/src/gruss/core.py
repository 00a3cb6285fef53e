"""The Grüss functional on semi-inner product modules and its certified bounds.

For a probability vector ``p`` and tuples ``xs``, ``ys`` the functional is the
algebra element

    G_p(xs, ys) = sum_i p_i <x_i, y_i> - < sum_i p_i x_i, sum_i p_i y_i >.

C*-flavored checks measure elements with the operator norm and vectors with
``||x|| = ||<x,x>||^(1/2)``.  H*-flavored checks use the trace norm ``tau`` and
the seminorm ``|||x||| = (tr<x,x>)^(1/2)``.

Every ``check_*`` returns a :class:`~gruss.certificate.BoundCertificate`.
Radii left as ``None`` are set to the tightest admissible value, i.e. the
largest distance from the centre.  Supplied radii are verified and a
:class:`~gruss.errors.RadiusViolated` is raised when they are too small.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .certificate import SLACK, BoundCertificate
from .errors import NotUnit, RadiusViolated, ShapeMismatch
from .kernel import operator_norm, trace_norm
from .module import (
    _hs_seminorms,
    _ip,
    _ips,
    as_probability,
    as_tuple,
    as_vector,
    as_weights,
    hs_seminorm,
    module_norm,
    same_shape,
    tuple_norms,
    vector_norm,
)

IDENTITY_TOL = 1e-11
UNIT_TOL = 1e-12


# -- argument handling -------------------------------------------------------


def _prepare(p, xs, ys=None):
    xs = as_tuple(xs)
    ys = xs if ys is None else as_tuple(ys)
    same_shape(xs, ys, "tuples")
    return as_probability(p, xs.shape[0]), xs, ys


def _centre(a, xs: np.ndarray) -> np.ndarray:
    if a is None:
        return np.zeros(xs.shape[1:], dtype=np.complex128)
    a = as_vector(a)
    if a.shape != xs.shape[1:]:
        raise ShapeMismatch(f"centre has shape {a.shape}, tuple items have {xs.shape[1:]}")
    return a


def resolve_radius(diffs: np.ndarray, r, flavor: str, label: str = "x", slack_scale: float = 1.0) -> float:
    """Return the radius to use for the ball condition ``norm(diffs_i) <= r``.

    ``r=None`` yields the supremum of the distances.  An explicit radius is
    checked against every distance with the standard slack.
    """
    norms = tuple_norms(diffs, flavor)
    if r is None:
        return float(norms.max())
    r = float(r)
    if r < 0 or not math.isfinite(r):
        raise ValueError(f"radius must be a finite nonnegative number, got {r}")
    bad = np.flatnonzero(norms > r + SLACK * slack_scale * (1.0 + r))
    if bad.size:
        i = int(bad[0])
        raise RadiusViolated(
            f"||{label}_{i + 1} - centre|| = {norms[i]:.17g} exceeds radius {r:.17g}",
            index=i,
            distance=float(norms[i]),
            radius=r,
        )
    return r


# -- the functional and its identities ---------------------------------------


def _gruss_definition(p, xs, ys) -> np.ndarray:
    mixed = np.einsum("n,nac->ac", p, _ips(xs, ys))
    return mixed - _ip(np.tensordot(p, xs, axes=1), np.tensordot(p, ys, axes=1))


def _gruss(p, xs, ys) -> np.ndarray:
    # Same value as the definition, evaluated after centring at the weighted
    # means so that large common offsets cancel before the products are formed.
    return _translated_gruss(p, xs, ys, np.tensordot(p, xs, axes=1), np.tensordot(p, ys, axes=1))


def _translated_parts(p, xs, ys, a, b):
    dx, dy = xs - a, ys - b
    first = np.einsum("n,nac->ac", p, _ips(dx, dy))
    second = _ip(np.tensordot(p, dx, axes=1), np.tensordot(p, dy, axes=1))
    return first, second


def _translated_gruss(p, xs, ys, a, b) -> np.ndarray:
    first, second = _translated_parts(p, xs, ys, a, b)
    return first - second


def gruss(p, xs, ys=None) -> np.ndarray:
    """``G_p(xs, ys)``; with ``ys`` omitted this is ``G_p(xs) = G_p(xs, xs)``."""
    p, xs, ys = _prepare(p, xs, ys)
    return _gruss(p, xs, ys)


def gruss_double_sum(p, xs, ys=None) -> np.ndarray:
    """``(1/2) sum_{i,j} p_i p_j <x_i - x_j, y_i - y_j>``."""
    p, xs, ys = _prepare(p, xs, ys)
    dx = xs[:, None] - xs[None, :]
    dy = ys[:, None] - ys[None, :]
    return 0.5 * np.einsum("i,j,ijsba,ijsbc->ac", p, p, dx.conj(), dy)


def residual_scale(xs, ys=None, a=None, b=None, alphas=None) -> float:
    """Magnitude against which identity residuals are measured.

    The product of ``1 + max|||x_i||| + |||a|||`` and the same quantity for the
    second argument (or ``1 + max|alpha_i|`` when scalar weights are given).
    """
    xs = as_tuple(xs)
    sx = 1.0 + float(_hs_seminorms(xs).max()) + (hs_seminorm(a) if a is not None else 0.0)
    if alphas is not None:
        return sx * (1.0 + float(np.abs(as_weights(alphas)).max()))
    ys = xs if ys is None else as_tuple(ys)
    sy = 1.0 + float(_hs_seminorms(ys).max()) + (hs_seminorm(b) if b is not None else 0.0)
    return sx * sy


def mean_deviation_residual(p, alphas, xs, a, *, normalized: bool = False) -> float:
    """``|||lhs - rhs|||`` for

    ``sum p_i alpha_i x_i - (sum p_i alpha_i)(sum p_i x_i)
    = sum p_i (alpha_i - sum_j p_j alpha_j)(x_i - a)``.
    """
    p, xs, _ = _prepare(p, xs)
    alphas = as_weights(alphas, xs.shape[0])
    a = _centre(a, xs)
    mean_alpha = np.dot(p, alphas)
    lhs = np.tensordot(p * alphas, xs, axes=1) - mean_alpha * np.tensordot(p, xs, axes=1)
    rhs = np.tensordot(p * (alphas - mean_alpha), xs - a, axes=1)
    res = hs_seminorm(lhs - rhs)
    return res / residual_scale(xs, a=a, alphas=alphas) if normalized else res


def translation_residual(p, xs, ys, a, b, *, normalized: bool = False) -> float:
    """Frobenius distance between ``G_p(xs, ys)`` (as defined) and its translated form."""
    p, xs, ys = _prepare(p, xs, ys)
    a, b = _centre(a, xs), _centre(b, ys)
    res = float(np.linalg.norm(_gruss_definition(p, xs, ys) - _translated_gruss(p, xs, ys, a, b)))
    return res / residual_scale(xs, ys, a, b) if normalized else res


def variance_parts(p, xs, a):
    """``(sum p_i |x_i - a|^2, |sum p_i x_i - a|^2)`` whose difference is ``G_p(xs)``."""
    p, xs, _ = _prepare(p, xs)
    a = _centre(a, xs)
    d = xs - a
    first = np.einsum("n,nac->ac", p, _ips(d, d))
    m = np.tensordot(p, xs, axes=1) - a
    return first, _ip(m, m)


def double_sum_residual(p, xs, ys, *, normalized: bool = False) -> float:
    """Frobenius distance between ``G_p(xs, ys)`` (as defined) and the double sum."""
    p, xs, ys = _prepare(p, xs, ys)
    res = float(np.linalg.norm(_gruss_definition(p, xs, ys) - gruss_double_sum(p, xs, ys)))
    return res / residual_scale(xs, ys) if normalized else res


def check_gruss_schwarz(p, xs, ys, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Schwarz inequality for ``G_p`` viewed as a semi-inner product on ``X^n``."""
    p, xs, ys = _prepare(p, xs, ys)
    lhs = operator_norm(_gruss(p, xs, ys)) ** 2
    rhs = operator_norm(_gruss(p, xs, xs)) * operator_norm(_gruss(p, ys, ys))
    return BoundCertificate.evaluate("3.4", lhs, (rhs,), slack_scale=slack_scale)


# -- C*-module bounds --------------------------------------------------------


def check_gruss_mean_square(p, xs, ys, a, b, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``||G||^2 <= ||G_p(x; a)|| ||G_p(y; b)|| <= (sum p||x_i-a||^2)(sum p||y_i-b||^2)``.

    The middle link evaluates ``sum p_i |x_i - a|^2 - |sum p_i x_i - a|^2`` (and
    its ``y`` counterpart) literally, so it exercises the translated identity.
    """
    p, xs, ys = _prepare(p, xs, ys)
    a, b = _centre(a, xs), _centre(b, ys)
    first_x, second_x = variance_parts(p, xs, a)
    first_y, second_y = variance_parts(p, ys, b)
    nx = tuple_norms(xs - a, "cstar")
    ny = tuple_norms(ys - b, "cstar")
    lhs = operator_norm(_gruss(p, xs, ys)) ** 2
    middle = operator_norm(first_x - second_x) * operator_norm(first_y - second_y)
    last = float(np.dot(p, nx**2) * np.dot(p, ny**2))
    return BoundCertificate.evaluate("3.1", lhs, (middle, last), slack_scale=slack_scale)


def check_gruss_radius(p, xs, ys, a, b, r=None, s=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``||G_p(xs, ys)|| <= r s`` whenever ``||x_i - a|| <= r`` and ``||y_i - b|| <= s``."""
    p, xs, ys = _prepare(p, xs, ys)
    a, b = _centre(a, xs), _centre(b, ys)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    s = resolve_radius(ys - b, s, "cstar", "y", slack_scale)
    lhs = operator_norm(_gruss(p, xs, ys))
    return BoundCertificate.evaluate("3.8", lhs, (r * s,), slack_scale=slack_scale, radii=(r, s))


def check_classical_gruss(p, xs, ys, x_lo, x_hi, y_lo, y_hi, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Classical Grüss bound ``1/4 ||X - x|| ||Y - y||`` under the ball condition.

    The hypothesis is taken in its ball form: every ``x_i`` lies within
    ``||X - x|| / 2`` of the midpoint ``(x + X) / 2``.
    """
    x_lo, x_hi, y_lo, y_hi = map(as_vector, (x_lo, x_hi, y_lo, y_hi))
    r = 0.5 * module_norm(x_hi - x_lo)
    s = 0.5 * module_norm(y_hi - y_lo)
    cert = check_gruss_radius(
        p, xs, ys, 0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi), r, s, slack_scale=slack_scale
    )
    return dataclasses.replace(cert, name="1.1")


def sharpness_witness_c(a, b, r: float, s: float, e, *, flavor: str = "cstar"):
    """Two-point instance attaining ``||G|| = r s``.

    Returns ``(p, xs, ys)`` with ``p = (1/2, 1/2)``, ``xs = (a + r e, a - r e)``
    and ``ys = (b + s e, b - s e)``.  ``e`` must have unit norm for ``flavor``
    (``||<e,e>|| = 1`` for C*, ``tr<e,e> = 1`` for H*); then
    ``G = r s <e, e>``.
    """
    a, b, e = as_vector(a), as_vector(b), as_vector(e)
    same_shape(a, b, "centres")
    same_shape(a, e, "centre and direction")
    nrm = vector_norm(e, flavor)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise NotUnit(f"direction has {flavor} norm {nrm:.17g}, expected 1")
    p = np.array([0.5, 0.5])
    xs = np.stack([a + r * e, a - r * e])
    ys = np.stack([b + s * e, b - s * e])
    return p, xs, ys


def check_weighted_mean(p, alphas, xs, a, r=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``||sum p_i alpha_i x_i - sum p_i alpha_i sum p_i x_i||
    <= r sum p_i |alpha_i - mean(alpha)| <= r (sum p_i |alpha_i|^2 - |mean(alpha)|^2)^(1/2)``.
    """
    p, xs, _ = _prepare(p, xs)
    alphas = as_weights(alphas, xs.shape[0])
    a = _centre(a, xs)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    mean_alpha = np.dot(p, alphas)
    diff = np.tensordot(p * alphas, xs, axes=1) - mean_alpha * np.tensordot(p, xs, axes=1)
    first = r * float(np.dot(p, np.abs(alphas - mean_alpha)))
    # sum p|alpha|^2 - |mean|^2 evaluated as the centred second moment (no cancellation).
    second = r * math.sqrt(float(np.dot(p, np.abs(alphas - mean_alpha) ** 2)))
    return BoundCertificate.evaluate(
        "3.10", module_norm(diff), (first, second), slack_scale=slack_scale, radii=(r,)
    )


def check_classical_weighted_mean(p, alphas, xs, x_lo, x_hi, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Weighted-mean bound with constant 1/2 under the ball condition on ``[x, X]``."""
    x_lo, x_hi = as_vector(x_lo), as_vector(x_hi)
    r = 0.5 * module_norm(x_hi - x_lo)
    cert = check_weighted_mean(p, alphas, xs, 0.5 * (x_lo + x_hi), r, slack_scale=slack_scale)
    return dataclasses.replace(cert, name="1.2")


def _as_elements(items) -> np.ndarray:
    arr = as_tuple(items)
    if arr.shape[1] != 1:
        raise ShapeMismatch(f"expected algebra elements (rank-one vectors), got rank {arr.shape[1]}")
    return arr[:, 0]


def check_algebra_gruss(p, as_, bs, a, b, r=None, s=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``||sum p_i a_i b_i - sum p_i a_i sum p_i b_i|| <= r s`` in the algebra itself.

    Here ``A`` is a module over itself with ``<a, b> = a* b``; applying the
    module bound to ``a_i*`` (which satisfy ``||a_i* - a*|| <= r``) removes the
    adjoint.  The adjoint form is recorded in ``details["adjoint_form"]``.
    """
    A, B = _as_elements(as_), _as_elements(bs)
    same_shape(A, B, "element tuples")
    p = as_probability(p, A.shape[0])
    a, b = as_vector(a)[0], as_vector(b)[0]
    if a.shape != A.shape[1:] or b.shape != B.shape[1:]:
        raise ShapeMismatch("centres do not match the element size")
    r = resolve_radius((A - a)[:, None], r, "cstar", "a", slack_scale)
    s = resolve_radius((B - b)[:, None], s, "cstar", "b", slack_scale)
    mean_a = np.tensordot(p, A, axes=1)
    mean_b = np.tensordot(p, B, axes=1)
    plain = np.einsum("n,nij,njk->ik", p, A, B) - mean_a @ mean_b
    adj = np.einsum("n,nji,njk->ik", p, A.conj(), B) - mean_a.conj().T @ mean_b
    return BoundCertificate.evaluate(
        "3.1i",
        operator_norm(plain),
        (r * s,),
        slack_scale=slack_scale,
        radii=(r, s),
        details={"adjoint_form": operator_norm(adj)},
    )


# -- H*-module bounds --------------------------------------------------------


def check_trace_gruss(p, xs, ys, a, b, r=None, s=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``tau(G_p(xs, ys)) <= r s`` under ``|||x_i - a||| <= r``, ``|||y_i - b||| <= s``.

    ``details["strong_schwarz"]`` holds ``(tr G_p(xs) tr G_p(ys))^(1/2)``, the strong
    Schwarz bound sitting between the two sides.
    """
    p, xs, ys = _prepare(p, xs, ys)
    a, b = _centre(a, xs), _centre(b, ys)
    r = resolve_radius(xs - a, r, "hstar", "x", slack_scale)
    s = resolve_radius(ys - b, s, "hstar", "y", slack_scale)
    lhs = trace_norm(_gruss(p, xs, ys))
    tr_x = max(np.trace(_gruss(p, xs, xs)).real, 0.0)
    tr_y = max(np.trace(_gruss(p, ys, ys)).real, 0.0)
    return BoundCertificate.evaluate(
        "5.2", lhs, (r * s,), slack_scale=slack_scale, radii=(r, s), details={"strong_schwarz": math.sqrt(tr_x * tr_y)}
    )


def elementary_gap(m: float, n: float, p: float, q: float) -> float:
    """``(mp - nq)^2 - (m^2 - n^2)(p^2 - q^2)``, which is never negative."""
    return (m * p - n * q) ** 2 - (m * m - n * n) * (p * p - q * q)


def check_trace_gruss_refined(p, xs, ys, a, b, r=None, s=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """Companion bound ``tau(G) <= r s - |||sum p_i (x_i-a)||| |||sum p_i (y_i-b)||| <= r s``.

    ``details`` records both sides of the intermediate square-root estimate
    (keys ``"5.10_schwarz"`` and ``"5.10_radii"``).
    """
    p, xs, ys = _prepare(p, xs, ys)
    a, b = _centre(a, xs), _centre(b, ys)
    dx, dy = xs - a, ys - b
    r = resolve_radius(dx, r, "hstar", "x", slack_scale)
    s = resolve_radius(dy, s, "hstar", "y", slack_scale)
    nx = hs_seminorm(np.tensordot(p, dx, axes=1))
    ny = hs_seminorm(np.tensordot(p, dy, axes=1))
    tr_x = float(np.dot(p, _hs_seminorms(dx) ** 2)) - nx * nx
    tr_y = float(np.dot(p, _hs_seminorms(dy) ** 2)) - ny * ny
    lhs = trace_norm(_gruss(p, xs, ys))
    details = {
        "5.10_schwarz": math.sqrt(max(tr_x, 0.0) * max(tr_y, 0.0)),
        "5.10_radii": math.sqrt(max(r * r - nx * nx, 0.0) * max(s * s - ny * ny, 0.0)),
        "5.11_gap": elementary_gap(r, nx, s, ny),
    }
    return BoundCertificate.evaluate(
        "5.7", lhs, (r * s - nx * ny, r * s), slack_scale=slack_scale, radii=(r, s), details=details
    )


def _trace_spread(p, ys, b=None) -> float:
    """``sum p_i |||y_i - b|||^2 - |||sum p_i (y_i - b)|||^2``.

    With ``b=None`` the same quantity is evaluated as the centred second moment
    ``sum p_i |||y_i - mean|||^2``, which avoids cancellation.
    """
    if b is None:
        return float(np.dot(p, _hs_seminorms(ys - np.tensordot(p, ys, axes=1)) ** 2))
    d = ys - b
    m = hs_seminorm(np.tensordot(p, d, axes=1))
    return max(float(np.dot(p, _hs_seminorms(d) ** 2)) - m * m, 0.0)


def check_trace_gruss_spread(p, xs, ys, a, r=None, b=None, *, slack_scale: float = 1.0) -> BoundCertificate:
    """``tau(G) <= r (sum p_i |||y_i|||^2 - |||sum p_i y_i|||^2)^(1/2)``.

    Only ``xs`` needs a ball condition.  ``details["translated_bound"]`` evaluates the same
    bound with ``y`` translated by ``b`` (zero by default); ``details["trace_gruss_x"]``
    is ``tr G_p(xs)``, which never exceeds ``r^2``.
    """
    p, xs, ys = _prepare(p, xs, ys)
    a = _centre(a, xs)
    b = _centre(b, ys)
    r = resolve_radius(xs - a, r, "hstar", "x", slack_scale)
    lhs = trace_norm(_gruss(p, xs, ys))
    rhs = r * math.sqrt(_trace_spread(p, ys))
    details = {
        "translated_bound": r * math.sqrt(_trace_spread(p, ys, b)),
        "trace_gruss_x": float(np.trace(_gruss(p, xs, xs)).real),
    }
    return BoundCertificate.evaluate("5.13", lhs, (rhs,), slack_scale=slack_scale, radii=(r,), details=details)
