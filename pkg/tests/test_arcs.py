import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusnodal.arcs import (MIN_STEPS, RegularArc, calipers_width, chord_frame_height, large_width_partition,
                             sagitta_estimate, segment_profile, segment_regular_arcs, width, width_scaling_fit)
from torusnodal.eigenfunction import Eigenfunction, random_eigenfunction
from torusnodal.errors import PreconditionError
from torusnodal.fields import CallableField, CircleField
from torusnodal.nodal import curvature_at, extract_nodal_set, total_nodal_length


def arcs_of(field, cpw=16):
    curves = extract_nodal_set(field, cpw)
    arcs = [a for i, c in enumerate(curves) for a in segment_regular_arcs(c, field, i)]
    return curves, arcs


@pytest.fixture(scope="module")
def suite_arcs():
    out = []
    for E, seed in [(25, 0), (65, 1), (325, 2)]:
        phi = random_eigenfunction(E, seed)
        curves, arcs = arcs_of(phi, 32)
        out.append((phi, curves, arcs))
    return out


def test_circular_width_matches_sagitta():
    arc = RegularArc.circular(1.0, 0.2)
    rep = width(arc)
    assert rep.width == pytest.approx(1 - math.cos(0.1), abs=1e-6)
    assert abs(rep.width - (1 - math.cos(0.1))) < 1e-12
    assert rep.sagitta_prediction == pytest.approx(0.04)
    assert rep.ratio == pytest.approx(0.125, rel=2e-3)
    assert rep.methods_agree


@pytest.mark.parametrize("R,theta", [(0.05, 0.3), (2.0, 0.1), (1.0, 0.45)])
def test_circular_widths_other_sizes(R, theta):
    rep = width(RegularArc.circular(R, theta, center=(0.3, -1.0), start=1.1))
    assert rep.width == pytest.approx(R * (1 - math.cos(theta / 2)), rel=1e-9)


def test_sagitta_estimate():
    assert sagitta_estimate(0.2, 1.0) == pytest.approx(0.04)
    assert sagitta_estimate(0.0, 5.0) == 0.0


def test_straight_segment_rejected():
    s = np.linspace(0, 0.1, 20)
    line = RegularArc.from_curvature(s, np.zeros_like(s))
    assert line.violations()
    with pytest.raises(PreconditionError):
        width(line)


def test_straight_nodal_lines_have_no_arcs():
    phi = Eigenfunction.from_sincos([("sin", 1.0, (3, 0))], convention="unit")
    curves, arcs = arcs_of(phi)
    assert curves and arcs == []


def test_circle_arcs_short_and_regular():
    R = 0.2
    f = CircleField((0.5, 0.5), R)
    curves, arcs = arcs_of(f, 64)
    assert arcs
    for a in arcs:
        assert a.ell < R / 2
        assert a.violations() == []
        assert np.allclose(np.abs(a.curvature), 1 / R, rtol=1e-6)
    total = sum(a.ell for a in arcs)
    # consecutive greedy arcs share endpoints, and the wrap remainder is short
    assert total == pytest.approx(2 * math.pi * R, rel=0.1)


def test_ramp_profile_splits_at_factor_two():
    L = 0.2
    s = np.linspace(0, L, 2001)
    k = 1 + 2 * s / L
    ranges = segment_profile(s, k, min_length=0.0)
    assert len(ranges) == 2
    (a0, b0), (a1, b1) = ranges
    assert a0 == 0 and b0 == a1 and b1 == len(s) - 1
    # the first arc stops where the ratio to its start reaches 2
    assert k[b0] < 2 <= k[b0 + 1]
    for a, b in ranges:
        arc = RegularArc.from_curvature(s[a:b + 1], k[a:b + 1])
        assert arc.violations() == []


def test_profile_splits_on_sign_and_length():
    s = np.linspace(0, 1, 1001)
    k = np.where(s < 0.5, 1.0, -1.0)
    for a, b in segment_profile(s, k, 0.0):
        assert len(set(np.sign(k[a:b + 1]))) == 1
        assert 2 * np.abs(k[a:b + 1]).min() * (s[b] - s[a]) < 1
    assert segment_profile(s, np.zeros_like(s), 0.0) == []


def test_wavy_field_dual_method():
    tau = 2 * math.pi

    def f(x):
        return np.sin(tau * x[..., 0]) + 0.1 * np.sin(tau * x[..., 1])

    def g(x):
        return tau * np.stack([np.cos(tau * x[..., 0]), 0.1 * np.cos(tau * x[..., 1])], axis=-1)

    def h(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = -tau**2 * np.sin(tau * x[..., 0])
        out[..., 1, 1] = -0.1 * tau**2 * np.sin(tau * x[..., 1])
        return out

    field = CallableField(f, g, h, amplitude=1.1, resolution=1.0)
    curves, arcs = arcs_of(field, 64)
    assert arcs
    for a in arcs:
        rep = width(a)
        assert rep.methods_agree
        assert 1 / 16 <= rep.ratio <= 1


def test_suite_arcs_invariants(suite_arcs):
    n = 0
    for phi, curves, arcs in suite_arcs:
        assert arcs, f"no regular arcs at E={phi.E}"
        for a in arcs:
            assert a.violations() == []
            rep = width(a)
            assert abs(rep.chord_frame_height - rep.calipers_width) <= 1e-3 * rep.calipers_width
            assert 1 / 16 <= rep.ratio <= 1
            assert rep.max_slope < 2
            n += 1
    assert n > 20


def test_segmentation_soundness_from_raw_curvature(suite_arcs):
    phi, curves, arcs = suite_arcs[1]
    for a in arcs:
        assert np.abs(phi.evaluate(a.points)).max() <= 1e-10 * phi.amplitude
        k = np.array([curvature_at(phi, p) for p in a.points])
        assert np.allclose(k, np.abs(a.curvature), rtol=1e-9)
        assert k.max() < 2 * k.min() and 2 * k.min() * a.ell < 1
        assert a.ell >= MIN_STEPS * curves[a.curve_id].step * 0.99


def test_truncation_never_increases_width(suite_arcs):
    rng = np.random.default_rng(5)
    for _, _, arcs in suite_arcs:
        for a in arcs[:10]:
            w = width(a).width
            for _ in range(3):
                lo, hi = np.sort(rng.uniform(0, a.ell, 2))
                if hi - lo < 1e-3 * a.ell:
                    continue
                sub = a.truncated(lo, hi)
                assert width(sub).width <= w * (1 + 1e-9)


@given(st.floats(0.05, 5.0), st.floats(0.02, 0.45), st.floats(0.0, 0.95), st.floats(0.05, 1.0))
@settings(max_examples=40, deadline=None)
def test_truncated_circle_width_monotone(R, theta, u, v):
    arc = RegularArc.circular(R, theta)
    lo = u * arc.ell
    hi = lo + v * (arc.ell - lo)
    if hi - lo < 1e-6 * arc.ell:
        return
    w_sub = width(arc.truncated(lo, hi)).width
    assert w_sub <= width(arc).width * (1 + 1e-9)
    assert w_sub == pytest.approx(R * (1 - math.cos((hi - lo) / R / 2)), rel=1e-6)


def test_calipers_on_rectangle():
    pts = [(0, 0), (3, 0), (3, 1), (0, 1), (1.5, 0.5)]
    assert calipers_width(pts) == pytest.approx(1.0)


def test_chord_frame_rejects_non_graph():
    arc = RegularArc.circular(1.0, 4.0)
    with pytest.raises(PreconditionError):
        chord_frame_height(arc)


def test_scaling_fit_exact_and_noisy():
    lam = np.array([5.0, 10, 20, 40, 80])
    fit = width_scaling_fit(list(zip(lam, 1 / lam)))
    assert fit.exponent == pytest.approx(-1.0) and fit.residual < 1e-12
    fit = width_scaling_fit(list(zip(lam, lam ** (-1 / 3))))
    assert fit.exponent == pytest.approx(-1 / 3)
    rng = np.random.default_rng(0)
    lam = np.geomspace(5, 200, 12)
    for truth in (-1.0, -1 / 3):
        w = 0.2 * lam**truth * (1 + rng.uniform(-0.1, 0.1, lam.size))
        assert abs(width_scaling_fit(list(zip(lam, w))).exponent - truth) <= 0.05
    with pytest.raises(PreconditionError):
        width_scaling_fit([(5, 0.1), (5, 0.2), (6, 0.1)])


def test_large_width_partition_trivial_cases(suite_arcs):
    phi, curves, arcs = suite_arcs[1]
    total = total_nodal_length(curves)
    none = large_width_partition(curves, arcs, phi.lam, -10.0)
    assert none.selected == [] and none.remainder_length == pytest.approx(total)
    allp = large_width_partition(curves, arcs, phi.lam, None)
    assert len(allp.selected) == len(arcs)
    assert allp.selected_length + allp.remainder_length == pytest.approx(total)
    eps = 0.1
    for expo in (0.5 - eps, 1 - eps):
        p = large_width_partition(curves, arcs, phi.lam, expo)
        assert 0 <= p.selected_length <= total


def test_overlapping_arcs_detected(suite_arcs):
    phi, curves, arcs = suite_arcs[1]
    a = arcs[0]
    b = RegularArc(a.s, a.points, a.tangents, a.curvature, a.curve_id, (a.span[0], a.span[1] + 1))
    with pytest.raises(AssertionError):
        large_width_partition(curves, [a, b], phi.lam, None)
