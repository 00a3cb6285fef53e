"""Discrete Fourier and Mellin transforms of vector tuples and their error bounds.

For a tuple ``x_1, ..., x_n`` and ``m`` in ``1..n``:

    F_w(x)(m) = sum_k exp(2 w i m k) x_k        M(x)(m) = sum_k k^(m-1) x_k

and the paired versions replace ``x_k`` by ``<x_k, y_k>``.  Index ``k`` runs
from 1.  Every bound here comes from the weighted Grüss estimates in
:mod:`gruss.core`, applied to phased or power-weighted tuples with uniform
probabilities.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .certificate import BoundCertificate, TransformCertificate
from .core import _gruss_definition, resolve_radius
from .errors import BadIndex, Singular
from .kernel import operator_norm
from .module import _ip, _ips, as_tuple, as_vector, module_norm, same_shape

TOL_SING = 1e-12
TWO_PI = 2.0 * math.pi


def _check_index(m: int, n: int) -> int:
    if int(m) != m or not 1 <= m <= n:
        raise BadIndex(f"transform index m={m} outside 1..{n}")
    return int(m)


def phases(omega: float, m: int, n: int) -> np.ndarray:
    """``exp(2 i omega m k)`` for ``k = 1..n``.

    ``omega m`` is first reduced modulo pi, so each angle ``2 k (omega m)`` is
    formed from a small residue rather than a large product.
    """
    delta = math.remainder(omega * m, math.pi)
    k = np.arange(1, n + 1)
    return np.exp(1j * np.remainder(2.0 * delta * k, TWO_PI))


def mellin_weights(m: int, n: int) -> np.ndarray:
    """``k^(m-1)`` for ``k = 1..n`` (exact as integers, returned as floats)."""
    return np.array([float(k ** (m - 1)) for k in range(1, n + 1)])


def fourier(xs, omega: float, m: int) -> np.ndarray:
    xs = as_tuple(xs)
    m = _check_index(m, xs.shape[0])
    return np.tensordot(phases(omega, m, xs.shape[0]), xs, axes=1)


def fourier_pair(xs, ys, omega: float, m: int) -> np.ndarray:
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys, "tuples")
    m = _check_index(m, xs.shape[0])
    return np.tensordot(phases(omega, m, xs.shape[0]), _ips(xs, ys), axes=1)


def mellin(xs, m: int) -> np.ndarray:
    xs = as_tuple(xs)
    m = _check_index(m, xs.shape[0])
    return np.tensordot(mellin_weights(m, xs.shape[0]), xs, axes=1)


def mellin_pair(xs, ys, m: int) -> np.ndarray:
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys, "tuples")
    m = _check_index(m, xs.shape[0])
    return np.tensordot(mellin_weights(m, xs.shape[0]), _ips(xs, ys), axes=1)


# -- power sums --------------------------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli(j: int) -> Fraction:
    """Bernoulli numbers with ``B_1 = -1/2``."""
    if j == 0:
        return Fraction(1)
    return -sum(math.comb(j + 1, i) * _bernoulli(i) for i in range(j)) / (j + 1)


@lru_cache(maxsize=None)
def _faulhaber(p: int) -> tuple[tuple[int, ...], int]:
    """Integer coefficients ``c`` and denominator ``D`` with
    ``S_p(n) = sum_j c_j n^(p+1-j) / D``."""
    # B_1 enters with a plus sign so that the sum runs over k = 1..n.
    bern = [-_bernoulli(j) if j == 1 else _bernoulli(j) for j in range(p + 1)]
    coeffs = [Fraction(math.comb(p + 1, j)) * bern[j] / (p + 1) for j in range(p + 1)]
    den = math.lcm(*(c.denominator for c in coeffs))
    return tuple(int(c * den) for c in coeffs), den


def power_sum(p: int, n: int) -> int:
    """``S_p(n) = 1^p + 2^p + ... + n^p`` exactly, by Faulhaber's formula."""
    if p < 0 or int(p) != p:
        raise ValueError(f"power must be a nonnegative integer, got {p}")
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    coeffs, den = _faulhaber(int(p))
    n = int(n)
    num = 0
    for c in coeffs:  # Horner in n, highest power first
        num = num * n + c
    num *= n
    q, rem = divmod(num, den)
    assert rem == 0
    return q


def geometric_phase_sum(omega: float, m: int, n: int, *, tol_sing: float = TOL_SING) -> complex:
    """Closed form of ``sum_k exp(2 i omega m k)``:
    ``sin(omega m n) / sin(omega m) * exp(i omega (n + 1) m)``.

    The sum depends on ``omega m`` only modulo pi, so it is evaluated at the
    residue ``delta`` of ``omega m``; the sign changes of the two factors cancel.
    """
    delta = math.remainder(omega * m, math.pi)
    if abs(math.sin(delta)) <= tol_sing:
        raise Singular(f"sin(omega m) vanishes for omega={omega!r}, m={m}")
    ratio = math.sin(n * delta) / math.sin(delta)
    angle = math.remainder((n + 1) * delta, TWO_PI)
    return ratio * complex(math.cos(angle), math.sin(angle))


# -- radii for the transform pair bounds ---------------------------------------


def _phased_radius(base: np.ndarray, centre: np.ndarray, weight_rows, r, label: str, slack_scale: float) -> float:
    """Radius over one or several weightings ``w_k * base_k`` (strict mode uses all m)."""
    radii = [resolve_radius(w[:, None, None, None] * base - centre, r, "cstar", label, slack_scale) for w in weight_rows]
    return max(radii)


def _centres(a, b, xs):
    a = np.zeros(xs.shape[1:], complex) if a is None else as_vector(a)
    b = np.zeros(xs.shape[1:], complex) if b is None else as_vector(b)
    if a.shape != xs.shape[1:] or b.shape != xs.shape[1:]:
        raise ValueError("centres do not match the tuple shape")
    return a, b


def check_fourier_pair_bound(xs, ys, omega, m, a, b, r=None, s=None, *, strict=False, slack_scale=1.0) -> BoundCertificate:
    """``||F_w(x,y)(m) - <(1/n) sum x_k, F_w(y)(m)>|| <= n r s``.

    Requires ``||x_k - a|| <= r`` and ``||exp(2 i w m k) y_k - b|| <= s``; the
    latter is checked for the given ``m`` only unless ``strict`` is set, in which
    case every ``m`` in ``1..n`` must satisfy it.
    ``details["reduction"]`` is ``n ||G_u(x, phased y)||`` with uniform weights.
    """
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys, "tuples")
    n = xs.shape[0]
    m = _check_index(m, n)
    a, b = _centres(a, b, xs)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    ms = range(1, n + 1) if strict else (m,)
    s = _phased_radius(ys, b, [phases(omega, j, n) for j in ms], s, "phased y", slack_scale)
    mean_x = xs.mean(axis=0)
    diff = fourier_pair(xs, ys, omega, m) - _ip(mean_x, fourier(ys, omega, m))
    ph = phases(omega, m, n)
    reduction = n * operator_norm(_gruss_definition(np.full(n, 1.0 / n), xs, ph[:, None, None, None] * ys))
    return BoundCertificate.evaluate(
        "4.4", operator_norm(diff), (n * r * s,), slack_scale=slack_scale, radii=(r, s),
        details={"reduction": reduction},
    )


def check_mellin_pair_bound(xs, ys, m, a, b, r=None, s=None, *, strict=False, slack_scale=1.0) -> BoundCertificate:
    """``||M(x,y)(m) - <(1/n) sum x_k, M(y)(m)>|| <= n r s`` under
    ``||x_k - a|| <= r`` and ``||k^(m-1) y_k - b|| <= s``."""
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys, "tuples")
    n = xs.shape[0]
    m = _check_index(m, n)
    a, b = _centres(a, b, xs)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    ms = range(1, n + 1) if strict else (m,)
    s = _phased_radius(ys, b, [mellin_weights(j, n) for j in ms], s, "weighted y", slack_scale)
    mean_x = xs.mean(axis=0)
    diff = mellin_pair(xs, ys, m) - _ip(mean_x, mellin(ys, m))
    w = mellin_weights(m, n)
    reduction = n * operator_norm(_gruss_definition(np.full(n, 1.0 / n), xs, w[:, None, None, None] * ys))
    return BoundCertificate.evaluate(
        "4.8", operator_norm(diff), (n * r * s,), slack_scale=slack_scale, radii=(r, s),
        details={"reduction": reduction},
    )


def check_two_frequency_bound(xs, ys, omega1, omega2, m, a, b, r=None, s=None, *, strict=False, slack_scale=1.0) -> BoundCertificate:
    """``||(1/n) F_{w2-w1}(x,y)(m) - <(1/n) F_{w1}(x)(m), (1/n) F_{w2}(y)(m)>|| <= r s``
    under ``||exp(2 i w1 m k) x_k - a|| <= r`` and ``||exp(2 i w2 m k) y_k - b|| <= s``."""
    xs, ys = as_tuple(xs), as_tuple(ys)
    same_shape(xs, ys, "tuples")
    n = xs.shape[0]
    m = _check_index(m, n)
    a, b = _centres(a, b, xs)
    ms = range(1, n + 1) if strict else (m,)
    r = _phased_radius(xs, a, [phases(omega1, j, n) for j in ms], r, "phased x", slack_scale)
    s = _phased_radius(ys, b, [phases(omega2, j, n) for j in ms], s, "phased y", slack_scale)
    lhs = fourier_pair(xs, ys, omega2 - omega1, m) / n - _ip(fourier(xs, omega1, m) / n, fourier(ys, omega2, m) / n)
    px = phases(omega1, m, n)[:, None, None, None] * xs
    py = phases(omega2, m, n)[:, None, None, None] * ys
    reduction = operator_norm(_gruss_definition(np.full(n, 1.0 / n), px, py))
    return BoundCertificate.evaluate(
        "4.10", operator_norm(lhs), (r * s,), slack_scale=slack_scale, radii=(r, s),
        details={"reduction": reduction},
    )


# -- mean-based approximations ----------------------------------------------


def fourier_bound_factor(omega: float, m: int, n: int) -> float:
    """``(n^2 - sin^2(w m n) / sin^2(w m))^(1/2)``.

    Uses ``n^2 - |sum_k z^k|^2 = 4 sum_{d<n} (n - d) sin^2(d w m)`` for unit ``z``,
    a sum of nonnegative terms, so the result has no cancellation (it is 0 for n = 1).
    """
    delta = math.remainder(omega * m, math.pi)
    return 2.0 * math.sqrt(math.fsum((n - d) * math.sin(d * delta) ** 2 for d in range(1, n)))


def fourier_mean_approx(xs, omega: float, m: int, a, r=None, *, tol_sing=TOL_SING, slack_scale=1.0) -> TransformCertificate:
    """Approximate ``F_w(x)(m)`` by ``sum_k exp(2 i w m k) * mean(x)``.

    The error is bounded by ``r (n^2 - sin^2(w m n) / sin^2(w m))^(1/2)`` when
    ``||x_k - a|| <= r``; ``w m`` must not be a multiple of pi.
    """
    xs = as_tuple(xs)
    n = xs.shape[0]
    m = _check_index(m, n)
    a = as_vector(a)
    geo = geometric_phase_sum(omega, m, n, tol_sing=tol_sing)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    exact = fourier(xs, omega, m)
    approx = geo * xs.mean(axis=0)
    bound = r * fourier_bound_factor(omega, m, n)
    return TransformCertificate.evaluate(
        "4.12", exact, approx, module_norm(exact - approx), bound, slack_scale=slack_scale, radius=r
    )


def mellin_bound_factor(m: int, n: int) -> float:
    """``(n S_{2m-2}(n) - S_{m-1}(n)^2)^(1/2)``, computed in exact integers before the root."""
    return math.sqrt(n * power_sum(2 * m - 2, n) - power_sum(m - 1, n) ** 2)


def mellin_mean_approx(xs, m: int, a, r=None, *, slack_scale=1.0) -> TransformCertificate:
    """Approximate ``M(x)(m)`` by ``S_{m-1}(n) * mean(x)`` with error at most
    ``r (n S_{2m-2}(n) - S_{m-1}(n)^2)^(1/2)``."""
    xs = as_tuple(xs)
    n = xs.shape[0]
    m = _check_index(m, n)
    a = as_vector(a)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    exact = mellin(xs, m)
    approx = float(power_sum(m - 1, n)) * xs.mean(axis=0)
    return TransformCertificate.evaluate(
        "4.15", exact, approx, module_norm(exact - approx), r * mellin_bound_factor(m, n),
        slack_scale=slack_scale, radius=r,
    )


def mu_bounds(n: int, r: float) -> tuple[float, float]:
    """Closed-form right-hand sides for the first and second Mellin moments."""
    first = (r * n / 2.0) * math.sqrt((n - 1) * (n + 1) / 3.0)
    second = (r * n / (6.0 * math.sqrt(5.0))) * math.sqrt((n - 1) * (n + 1) * (2 * n + 1) * (8 * n + 11))
    return first, second


def mu_certificates(xs, a, r=None, *, slack_scale=1.0) -> tuple[BoundCertificate, BoundCertificate]:
    """Certificates for ``mu_1(x) = sum k x_k`` and ``mu_2(x) = sum k^2 x_k``.

    ``||mu_1(x) - (n+1)/2 sum x_k|| <= (r n / 2) ((n-1)(n+1)/3)^(1/2)`` and
    ``||mu_2(x) - (n+1)(2n+1)/6 sum x_k|| <= r n / (6 sqrt 5) ((n-1)(n+1)(2n+1)(8n+11))^(1/2)``.
    ``details["power_sum_bound"]`` is the generic power-sum bound at ``m = 2, 3``.
    """
    xs = as_tuple(xs)
    n = xs.shape[0]
    a = as_vector(a)
    r = resolve_radius(xs - a, r, "cstar", "x", slack_scale)
    k = np.arange(1, n + 1, dtype=float)
    total = xs.sum(axis=0)
    mu1 = np.tensordot(k, xs, axes=1)
    mu2 = np.tensordot(k * k, xs, axes=1)
    b1, b2 = mu_bounds(n, r)
    c1 = BoundCertificate.evaluate(
        "4.16", module_norm(mu1 - (n + 1) / 2.0 * total), (b1,), slack_scale=slack_scale, radii=(r,),
        details={"power_sum_bound": r * mellin_bound_factor(2, n)},
    )
    c2 = BoundCertificate.evaluate(
        "4.17", module_norm(mu2 - (n + 1) * (2 * n + 1) / 6.0 * total), (b2,), slack_scale=slack_scale, radii=(r,),
        details={"power_sum_bound": r * mellin_bound_factor(3, n)},
    )
    return c1, c2
