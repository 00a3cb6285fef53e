import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gruss.certificate import BoundCertificate
from gruss.core import (
    check_gruss_radius,
    check_trace_gruss_spread,
    check_algebra_gruss,
    check_weighted_mean,
    check_gruss_schwarz,
    check_classical_gruss,
    check_classical_weighted_mean,
    check_gruss_mean_square,
    check_trace_gruss,
    check_trace_gruss_refined,
    elementary_gap,
    gruss,
    gruss_double_sum,
    mean_deviation_residual,
    translation_residual,
    variance_parts,
    double_sum_residual,
    residual_scale,
    sharpness_witness_c,
)
from gruss.errors import NotUnit, RadiusViolated, ShapeMismatch
from gruss.kernel import is_positive, operator_norm, trace_norm
from gruss.module import hs_seminorm, module_norm, normalize, unit_vector

from conftest import SCALES, cnormal, instances, seeds


def loop_gruss(p, xs, ys):
    """Literal definition with explicit loops over indices and parts."""
    n, d, k, _ = xs.shape
    mixed = np.zeros((k, k), dtype=complex)
    mx = np.zeros((d, k, k), dtype=complex)
    my = np.zeros((d, k, k), dtype=complex)
    for i in range(n):
        for j in range(d):
            mixed += p[i] * xs[i, j].conj().T @ ys[i, j]
        mx += p[i] * xs[i]
        my += p[i] * ys[i]
    return mixed - sum(mx[j].conj().T @ my[j] for j in range(d))


def scale_of(xs, ys):
    return (1 + np.abs(xs).sum()) * (1 + np.abs(ys).sum())


# -- the functional ----------------------------------------------------------------


def test_gruss_examples(rng):
    x = cnormal(rng, 2, 3, 3)
    np.testing.assert_allclose(gruss(np.full(4, 0.25), np.stack([x] * 4)), 0, atol=1e-14)
    np.testing.assert_allclose(gruss([1.0], cnormal(rng, 1, 2, 3, 3), cnormal(rng, 1, 2, 3, 3)), 0, atol=1e-14)
    assert gruss([0.5, 0.5], [0.0, 2.0], [0.0, 2.0])[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_gruss_shape_mismatch(rng):
    with pytest.raises(ShapeMismatch):
        gruss([0.5, 0.5], cnormal(rng, 2, 1, 2, 2), cnormal(rng, 2, 2, 2, 2))
    with pytest.raises(ShapeMismatch):
        gruss([1.0], cnormal(rng, 2, 1, 2, 2))


@given(instances())
def test_gruss_matches_loop_definition(inst):
    p, xs, ys, _, _ = inst
    np.testing.assert_allclose(gruss(p, xs, ys), loop_gruss(p, xs, ys), atol=1e-12 * scale_of(xs, ys))


@given(instances())
def test_translation_invariance(inst):
    p, xs, ys, a, b = inst
    np.testing.assert_allclose(
        gruss(p, xs - a, ys - b), gruss(p, xs, ys), atol=1e-11 * residual_scale(xs, ys, a, b)
    )


@given(instances())
def test_gruss_of_a_tuple_with_itself_is_positive(inst):
    p, xs, _, _, _ = inst
    assert is_positive(gruss(p, xs))


@given(instances())
def test_product_module_schwarz(inst):
    p, xs, ys, _, _ = inst
    assert check_gruss_schwarz(p, xs, ys).passed


def test_scalar_chebyshev_difference(rng):
    x, y = rng.uniform(-2, 3, 7), rng.uniform(0, 1, 7)
    classical = np.mean(x * y) - np.mean(x) * np.mean(y)
    assert gruss(np.full(7, 1 / 7), x, y)[0, 0] == pytest.approx(classical, abs=1e-12)


# -- identities ------------------------------------------------------------------------


def test_mean_deviation_examples(rng):
    xs = cnormal(rng, 4, 2, 3, 3)
    assert mean_deviation_residual(np.full(4, 0.25), np.full(4, 2 - 1j), xs, None) <= 1e-14


@given(instances(), seeds)
def test_mean_deviation_for_any_centre(inst, seed):
    p, xs, _, a, _ = inst
    alphas = cnormal(np.random.default_rng(seed), len(p))
    assert mean_deviation_residual(p, alphas, xs, a, normalized=True) <= 1e-11
    assert mean_deviation_residual(p, alphas, xs, 1e3 * a, normalized=True) <= 1e-11


def test_translation_zero_centres(rng):
    p = np.full(3, 1 / 3)
    xs, ys = cnormal(rng, 3, 2, 2, 2), cnormal(rng, 3, 2, 2, 2)
    assert translation_residual(p, xs, ys, None, None) <= 1e-14


@given(instances())
def test_translation(inst):
    p, xs, ys, a, b = inst
    assert translation_residual(p, xs, ys, a, b, normalized=True) <= 1e-11


@given(instances())
def test_variance(inst):
    p, xs, _, a, _ = inst
    first, second = variance_parts(p, xs, a)
    assert is_positive(second)
    np.testing.assert_allclose(first - second, loop_gruss(p, xs, xs), atol=1e-11 * residual_scale(xs, a=a))


def test_double_sum_two_points(rng):
    p = np.array([0.3, 0.7])
    xs, ys = cnormal(rng, 2, 2, 3, 3), cnormal(rng, 2, 2, 3, 3)
    dx, dy = xs[0] - xs[1], ys[0] - ys[1]
    expanded = p[0] * p[1] * sum(dx[j].conj().T @ dy[j] for j in range(2))
    np.testing.assert_allclose(gruss_double_sum(p, xs, ys), expanded, atol=1e-14)
    assert double_sum_residual(p, xs, ys) <= 1e-14


def test_double_sum_constant_tuple(rng):
    x = cnormal(rng, 2, 2, 2)
    xs = np.stack([x] * 3)
    np.testing.assert_allclose(gruss_double_sum(np.full(3, 1 / 3), xs), 0, atol=1e-15)


@given(instances(n_max=8))
def test_double_sum(inst):
    p, xs, ys, _, _ = inst
    assert double_sum_residual(p, xs, ys, normalized=True) <= 1e-11
    # Independent oracle: explicit double loop.
    n = len(p)
    dbl = sum(
        0.5 * p[i] * p[j] * sum((xs[i, t] - xs[j, t]).conj().T @ (ys[i, t] - ys[j, t]) for t in range(xs.shape[1]))
        for i in range(n)
        for j in range(n)
    )
    np.testing.assert_allclose(gruss(p, xs, ys), dbl, atol=1e-11 * residual_scale(xs, ys))


# -- C*-module bounds ------------------------------------------------------------------


def test_gruss_mean_square_constant_tuples(rng):
    x, y = cnormal(rng, 2, 2, 2), cnormal(rng, 2, 2, 2)
    cert = check_gruss_mean_square(np.full(3, 1 / 3), np.stack([x] * 3), np.stack([y] * 3), x, y)
    assert cert.passed and cert.tightness == 0 and cert.lhs <= 1e-28


@pytest.mark.parametrize("r", SCALES)
@pytest.mark.parametrize("s", SCALES)
def test_gruss_mean_square_witness_is_tight(r, s, rng):
    a, b = cnormal(rng, 2, 3, 3), cnormal(rng, 2, 3, 3)
    e = normalize(cnormal(rng, 2, 3, 3))
    p, xs, ys = sharpness_witness_c(a, b, r, s, e)
    cert = check_gruss_mean_square(p, xs, ys, a, b)
    assert cert.passed
    assert cert.tightness == pytest.approx(1.0, abs=1e-10)


@given(instances())
def test_gruss_mean_square_random(inst):
    p, xs, ys, a, b = inst
    cert = check_gruss_mean_square(p, xs, ys, a, b)
    assert cert.passed and cert.monotone
    # Recompute each norm independently.
    g = loop_gruss(p, xs, ys)
    gx = loop_gruss(p, xs - a, xs - a)
    gy = loop_gruss(p, ys - b, ys - b)
    assert cert.lhs == pytest.approx(np.linalg.norm(g, 2) ** 2, rel=1e-9, abs=1e-12 * scale_of(xs, ys) ** 2)
    assert cert.rhs_chain[0] == pytest.approx(
        np.linalg.norm(gx, 2) * np.linalg.norm(gy, 2), rel=1e-8, abs=1e-12 * scale_of(xs, ys) ** 2
    )
    last = sum(p[i] * np.linalg.norm((xs[i] - a).reshape(-1, xs.shape[-1]), 2) ** 2 for i in range(len(p)))
    last *= sum(p[i] * np.linalg.norm((ys[i] - b).reshape(-1, ys.shape[-1]), 2) ** 2 for i in range(len(p)))
    assert cert.rhs_chain[1] == pytest.approx(last, rel=1e-10)


def test_gruss_radius_zero_radius(rng):
    a, y = cnormal(rng, 1, 2, 2), cnormal(rng, 3, 1, 2, 2)
    cert = check_gruss_radius(np.full(3, 1 / 3), np.stack([a] * 3), y, a, None, 0.0)
    assert cert.passed and cert.lhs <= 1e-15


def test_gruss_radius_radius_violation(rng):
    xs, ys = cnormal(rng, 3, 1, 2, 2), cnormal(rng, 3, 1, 2, 2)
    with pytest.raises(RadiusViolated) as info:
        check_gruss_radius(np.full(3, 1 / 3), xs, ys, None, None, r=1e-3)
    assert info.value.radius == 1e-3 and info.value.distance > 1e-3


@given(instances())
def test_gruss_radius_random_auto_radii(inst):
    p, xs, ys, a, b = inst
    cert = check_gruss_radius(p, xs, ys, a, b)
    assert cert.passed
    r = max(module_norm(x - a) for x in xs)
    assert cert.radii[0] == pytest.approx(r, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 4])
@pytest.mark.parametrize("d", [1, 3])
def test_gruss_radius_witness(k, d, rng):
    a, b = cnormal(rng, d, k, k), cnormal(rng, d, k, k)
    r, s = 0.7, 1.9
    p, xs, ys = sharpness_witness_c(a, b, r, s, unit_vector(k, d))
    cert = check_gruss_radius(p, xs, ys, a, b, r, s)
    assert cert.lhs == pytest.approx(r * s, abs=1e-10)
    assert cert.passed and cert.radii == (r, s)


def test_witness_examples(rng):
    a, b = cnormal(rng, 2, 2, 2), cnormal(rng, 2, 2, 2)
    p, xs, ys = sharpness_witness_c(a, b, 0.0, 0.0, unit_vector(2, 2))
    np.testing.assert_allclose(gruss(p, xs, ys), 0, atol=1e-15)
    p, xs, ys = sharpness_witness_c(0.3, -1.2, 1.0, 1.0, 1.0)
    assert gruss(p, xs, ys)[0, 0] == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(NotUnit):
        sharpness_witness_c(a, b, 1.0, 1.0, 2 * unit_vector(2, 2))
    with pytest.raises(NotUnit):
        sharpness_witness_c(a, b, 1.0, 1.0, unit_vector(2, 2, "cstar"), flavor="hstar")


@pytest.mark.parametrize("seed", range(10))
def test_classical_scalar_bound(seed):
    rng = np.random.default_rng(seed)
    lo, hi = sorted(rng.uniform(-5, 5, 2))
    blo, bhi = sorted(rng.uniform(-5, 5, 2))
    n = 9
    x, y = rng.uniform(lo, hi, n), rng.uniform(blo, bhi, n)
    cert = check_classical_gruss(np.full(n, 1 / n), x, y, lo, hi, blo, bhi)
    assert cert.passed and cert.name == "1.1"
    assert cert.rhs_chain[0] / (0.25 * (hi - lo) * (bhi - blo)) == pytest.approx(1.0, abs=1e-12)
    assert cert.lhs == pytest.approx(abs(np.mean(x * y) - x.mean() * y.mean()), abs=1e-12)


def test_classical_scalar_bound_is_attained():
    cert = check_classical_gruss([0.5, 0.5], [-1.0, 3.0], [2.0, 4.0], -1.0, 3.0, 2.0, 4.0)
    assert cert.tightness == pytest.approx(1.0, abs=1e-15)


def test_weighted_mean_examples(rng):
    xs = cnormal(rng, 4, 2, 2, 2)
    cert = check_weighted_mean(np.full(4, 0.25), np.full(4, 1 + 2j), xs, None)
    assert cert.lhs <= 1e-14 and cert.rhs_chain[0] <= 1e-14
    a, e, r = cnormal(rng, 2, 3, 3), unit_vector(3, 2), 0.8
    xs = np.stack([a + r * e, a - r * e])
    cert = check_weighted_mean([0.5, 0.5], [1.0, -1.0], xs, a, r)
    direct = module_norm(0.5 * xs[0] - 0.5 * xs[1])
    assert cert.lhs == pytest.approx(direct, rel=1e-14)
    assert cert.rhs_chain == pytest.approx((r, r), rel=1e-14)
    assert cert.tightness == pytest.approx(1.0, rel=1e-12)


@given(instances(), seeds)
def test_weighted_mean_random(inst, seed):
    p, xs, _, a, _ = inst
    alphas = cnormal(np.random.default_rng(seed), len(p))
    cert = check_weighted_mean(p, alphas, xs, a)
    assert cert.passed and cert.monotone
    mean = np.sum(p * alphas)
    r = cert.radii[0]
    assert cert.rhs_chain[0] == pytest.approx(r * np.sum(p * np.abs(alphas - mean)), rel=1e-12)
    spread = np.sum(p * np.abs(alphas - mean) ** 2)
    assert cert.rhs_chain[1] == pytest.approx(r * math.sqrt(spread), rel=1e-9, abs=1e-12 * r)


def test_classical_weighted_mean_scalar(rng):
    x = rng.uniform(1, 4, 6)
    alphas = rng.normal(size=6)
    cert = check_classical_weighted_mean(np.full(6, 1 / 6), alphas, x, 1.0, 4.0)
    assert cert.passed and cert.radii == (1.5,)


def test_algebra_gruss_diagonal(rng):
    n, k = 5, 3
    p = rng.dirichlet(np.ones(n))
    da, db = rng.normal(size=(n, k)), rng.normal(size=(n, k))
    A = np.array([np.diag(v) for v in da])
    B = np.array([np.diag(v) for v in db])
    cert = check_algebra_gruss(p, A, B, np.zeros((k, k)), np.zeros((k, k)))
    per_entry = [abs(np.sum(p * da[:, j] * db[:, j]) - np.sum(p * da[:, j]) * np.sum(p * db[:, j])) for j in range(k)]
    assert cert.lhs == pytest.approx(max(per_entry), rel=1e-12)
    assert cert.passed


def test_algebra_gruss_examples(rng):
    k = 3
    a, b = cnormal(rng, k, k), cnormal(rng, k, k)
    cert = check_algebra_gruss([0.5, 0.5], np.stack([a, a]), cnormal(rng, 2, k, k), a, b)
    assert cert.lhs <= 1e-14
    r, s = 0.5, 3.0
    I = np.eye(k)
    cert = check_algebra_gruss([0.5, 0.5], np.stack([a + r * I, a - r * I]), np.stack([b + s * I, b - s * I]), a, b)
    assert cert.lhs == pytest.approx(r * s, rel=1e-12)
    assert cert.tightness == pytest.approx(1.0, rel=1e-12)


@given(instances())
def test_algebra_gruss_random(inst):
    p, xs, ys, a, b = inst
    cert = check_algebra_gruss(p, xs[:, 0], ys[:, 0], a[0], b[0])
    assert cert.passed
    assert cert.details["adjoint_form"] <= cert.rhs_chain[0] + cert.slack


def test_algebra_gruss_rejects_higher_rank(rng):
    with pytest.raises(ShapeMismatch):
        check_algebra_gruss([0.5, 0.5], cnormal(rng, 2, 2, 2, 2), cnormal(rng, 2, 2, 2, 2), None, None)


# -- H*-module bounds ------------------------------------------------------------------


def test_trace_gruss_constant(rng):
    x, y = cnormal(rng, 2, 2, 2), cnormal(rng, 2, 2, 2)
    cert = check_trace_gruss(np.full(2, 0.5), np.stack([x, x]), np.stack([y, y]), x, y, 1.0, 1.0)
    assert cert.passed and cert.lhs <= 1e-14


@pytest.mark.parametrize("k", [1, 2, 4])
def test_trace_gruss_witness(k, rng):
    a, b = cnormal(rng, 2, k, k), cnormal(rng, 2, k, k)
    e = normalize(cnormal(rng, 2, k, k), "hstar")
    r, s = 2.5, 0.01
    p, xs, ys = sharpness_witness_c(a, b, r, s, e, flavor="hstar")
    cert = check_trace_gruss(p, xs, ys, a, b, r, s)
    assert cert.lhs == pytest.approx(r * s, rel=1e-9)


@given(instances())
def test_trace_gruss_random(inst):
    p, xs, ys, a, b = inst
    cert = check_trace_gruss(p, xs, ys, a, b)
    assert cert.passed
    g = loop_gruss(p, xs, ys)
    assert cert.lhs == pytest.approx(np.linalg.svd(g, compute_uv=False).sum(), rel=1e-9, abs=1e-12 * scale_of(xs, ys))
    # Strong Schwarz in the product module sits between the two sides.
    tx = np.trace(loop_gruss(p, xs, xs)).real
    ty = np.trace(loop_gruss(p, ys, ys)).real
    assert cert.lhs**2 <= tx * ty + 1e-9 * (1 + scale_of(xs, ys) ** 2)
    assert cert.details["strong_schwarz"] <= cert.rhs_chain[0] + cert.slack


def test_trace_gruss_refined_centred_witness(rng):
    a, b = cnormal(rng, 1, 3, 3), cnormal(rng, 1, 3, 3)
    p, xs, ys = sharpness_witness_c(a, b, 2.0, 3.0, unit_vector(3, 1, "hstar"), flavor="hstar")
    cert = check_trace_gruss_refined(p, xs, ys, a, b)
    assert cert.rhs_chain == pytest.approx((6.0, 6.0), rel=1e-14)
    assert cert.tightness == pytest.approx(1.0, rel=1e-12)


@given(instances())
def test_trace_gruss_refined_random(inst):
    p, xs, ys, a, b = inst
    cert = check_trace_gruss_refined(p, xs, ys, a, b)
    assert cert.passed and cert.monotone
    d = cert.details
    assert d["5.11_gap"] >= -1e-9 * (1 + cert.rhs_chain[-1] ** 2)
    assert d["5.10_schwarz"] <= d["5.10_radii"] + cert.slack
    r, s = cert.radii
    nx = hs_seminorm(np.tensordot(p, xs - a, axes=1))
    ny = hs_seminorm(np.tensordot(p, ys - b, axes=1))
    assert cert.rhs_chain[0] == pytest.approx(r * s - nx * ny, rel=1e-9, abs=1e-12 * r * s)


def test_trace_gruss_refined_scalar():
    p = np.array([0.2, 0.5, 0.3])
    x, y = np.array([1.0, -2.0, 0.5]), np.array([3.0, 1.0, -1.0])
    cheb = abs(np.sum(p * x * y) - np.sum(p * x) * np.sum(p * y))
    cert = check_trace_gruss_refined(p, x, y, 0.0, 0.0)
    assert cert.lhs == pytest.approx(cheb, rel=1e-14)
    r, s = 2.0, 3.0
    assert cert.radii == (r, s)
    assert cert.rhs_chain[0] == pytest.approx(r * s - abs(np.sum(p * x)) * abs(np.sum(p * y)), rel=1e-14)


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3))
def test_elementary_inequality(m, n, p, q):
    gap = elementary_gap(m, n, p, q)
    # Every term of the expansion is bounded by (m^2 + n^2)(p^2 + q^2).
    scale = 1 + (m * m + n * n) * (p * p + q * q)
    assert gap >= -1e-13 * scale
    assert gap == pytest.approx((m * q - n * p) ** 2, abs=1e-13 * scale)


def test_trace_gruss_spread_examples(rng):
    xs = cnormal(rng, 3, 2, 2, 2)
    y = cnormal(rng, 2, 2, 2)
    cert = check_trace_gruss_spread(np.full(3, 1 / 3), xs, np.stack([y] * 3), None)
    assert cert.rhs_chain[0] <= 1e-7 * cert.radii[0] and cert.lhs <= 1e-14
    x = cnormal(rng, 2, 2, 2)
    cert = check_trace_gruss_spread(np.full(3, 1 / 3), np.stack([x] * 3), cnormal(rng, 3, 2, 2, 2), x, 0.0)
    assert cert.lhs <= 1e-14 and cert.passed


@given(instances())
def test_trace_gruss_spread_random(inst):
    p, xs, ys, a, b = inst
    cert = check_trace_gruss_spread(p, xs, ys, a, b=b)
    assert cert.passed
    r = cert.radii[0]
    assert cert.details["trace_gruss_x"] <= r * r * (1 + 1e-9) + 1e-12
    # The translated form is the same number: G is invariant under y -> y - b.
    # It is evaluated as a difference of second moments, so its rounding error is
    # about eps * S with S = sum p |||y - b|||^2, i.e. r * sqrt(eps * S) after the root.
    spread = float(np.dot(p, [np.sum(np.abs(y - b) ** 2) for y in ys]))
    assert cert.details["translated_bound"] == pytest.approx(
        cert.rhs_chain[0], rel=1e-6, abs=r * math.sqrt(1e-14 * spread) + 1e-300
    )
    # Oracle: strong Schwarz in the product module plus tr G(x) <= r^2.
    ty = np.trace(loop_gruss(p, ys, ys)).real
    assert cert.rhs_chain[0] == pytest.approx(r * math.sqrt(max(ty, 0)), rel=1e-6, abs=1e-9 * (1 + r * scale_of(ys, ys)))


@given(instances())
def test_certificate_chains_are_monotone(inst):
    p, xs, ys, a, b = inst
    for cert in (
        check_gruss_mean_square(p, xs, ys, a, b),
        check_weighted_mean(p, np.arange(len(p)) * 1j, xs, a),
        check_trace_gruss_refined(p, xs, ys, a, b),
    ):
        assert cert.monotone


# -- certificates ------------------------------------------------------------------------


def test_certificate_degenerate_tightness():
    assert BoundCertificate.evaluate("t", 0.0, [0.0]).tightness == 0.0
    bad = BoundCertificate.evaluate("t", 1.0, [0.0])
    assert not bad.passed and bad.tightness == math.inf
    tiny = BoundCertificate.evaluate("t", 1e-12, [1e-12])
    assert tiny.tightness == 1.0


def test_certificate_is_immutable_and_serializable():
    cert = BoundCertificate.evaluate("t", 1.0, [2.0, 3.0])
    with pytest.raises(dataclasses.FrozenInstanceError):
        cert.lhs = 0.0
    d = cert.to_dict()
    assert d["pass"] and d["rhs_chain"] == [2.0, 3.0] and d["tightness"] == pytest.approx(1 / 3)


def test_certificate_slack_rule():
    assert BoundCertificate.evaluate("t", 1.0 + 1e-9, [1.0]).passed
    assert not BoundCertificate.evaluate("t", 1.0 + 1e-8, [1.0]).passed
    assert not BoundCertificate.evaluate("t", 1.0, [3.0, 2.0]).passed
