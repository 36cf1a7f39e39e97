import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l1lab.errors import DomainViolation
from l1lab.families import dominated_family, spike_family
from l1lab.grid_space import FunctionFamily, GridFunction, Partition, l1_norm
from l1lab.integrability import (
    LADDER_CAP,
    OrliczFunction,
    absolute_continuity_delta,
    build_orlicz,
    family_difference,
    family_scale,
    layer_cake_bound,
    orlicz_integral,
    tail_profile,
    tail_threshold,
    ui_certificate,
)

EXACT = 1e-12


def _singleton(values, measures=None):
    arr = np.asarray(values, dtype=float)
    if measures is None:
        p = Partition.uniform(arr.size)
    else:
        p = Partition.single_window(measures)
    return FunctionFamily((GridFunction(p, arr),), "probe")


# -- gauge construction and evaluation ------------------------------------


def test_orlicz_rejects_bad_breakpoints():
    with pytest.raises(DomainViolation):
        OrliczFunction(())
    with pytest.raises(DomainViolation):
        OrliczFunction((0.0, 1.0))
    with pytest.raises(DomainViolation):
        OrliczFunction((1.0, 1.0))
    with pytest.raises(DomainViolation):
        OrliczFunction((2.0, 1.0))


def test_orlicz_slopes_ladder():
    phi = OrliczFunction((1.0, 2.0, 4.0))
    assert phi.slopes == (1, 1, 2, 3)


def test_orlicz_evaluate_linear_region():
    phi = OrliczFunction((2.0,))
    assert float(phi.evaluate(0.0)) == 0.0
    assert float(phi.evaluate(1.0)) == pytest.approx(1.0, abs=EXACT)


def test_orlicz_evaluate_past_breakpoints():
    one = OrliczFunction((2.0,))
    two = OrliczFunction((2.0, 2.5))
    assert float(one.evaluate(3.0)) == pytest.approx(3.0, abs=EXACT)
    assert float(two.evaluate(3.0)) == pytest.approx(3.5, abs=EXACT)


def test_orlicz_evaluate_is_convex_increasing():
    phi = OrliczFunction((0.5, 1.0, 3.0))
    ts = np.linspace(0.0, 6.0, 241)
    ys = phi.evaluate(ts)
    diffs = np.diff(ys)
    assert np.all(diffs >= -EXACT)
    assert np.all(np.diff(diffs) >= -1e-9)


# -- tail profile ---------------------------------------------------------


def test_tail_profile_indicator():
    fam = _singleton(np.ones(4))
    assert tail_profile(fam, 0.5) == pytest.approx(1.0, abs=EXACT)
    assert tail_profile(fam, 0.999) == pytest.approx(1.0, abs=EXACT)
    assert tail_profile(fam, 1.0) == 0.0


def test_tail_profile_spike_family_closed_form():
    fam = spike_family(64)
    for t in (0.0, 0.5, 1.0, 1.5, 3.0, 7.5, 40.0, 63.5):
        assert tail_profile(fam, t) == pytest.approx(1.0 / (int(t) + 1), abs=EXACT)
    assert tail_profile(fam, 64.0) == 0.0


def test_tail_profile_vanishes_above_max():
    fam = _singleton([3.0, -1.0, 2.0])
    assert tail_profile(fam, 3.0) == 0.0


@given(st.sampled_from([0.25, 0.5, 2.0, 4.0]), st.floats(min_value=0.0, max_value=5.0))
def test_tail_profile_scale_identity(a, t):
    # dyadic scale factors keep a*value exact, so the identity is exact
    fam = _singleton([0.5, 1.5, -2.5, 3.5])
    assert tail_profile(family_scale(fam, a), a * t) == tail_profile(fam, t)


def test_tail_profile_nonincreasing():
    fam = dominated_family(5, cells=32, count=6)
    ts = np.linspace(0, 2.5, 50)
    vals = [tail_profile(fam, t) for t in ts]
    assert all(b <= a + EXACT for a, b in zip(vals, vals[1:]))


# -- clause i: equi-absolute continuity ----------------------------------


def test_delta_for_zero_family_is_total_measure():
    fam = _singleton(np.zeros(5))
    assert absolute_continuity_delta(fam, 0.3) == pytest.approx(1.0, abs=EXACT)


def test_delta_for_constant_member_closed_form():
    # f = M constant: concentration over measure delta is M*delta, so the
    # answer is the largest achievable measure strictly below eps/M
    fam = _singleton(np.full(10, 4.0))
    # achievable measures are multiples of 0.1; eps/M = 0.125
    assert absolute_continuity_delta(fam, 0.5) == pytest.approx(0.1, abs=EXACT)
    assert absolute_continuity_delta(fam, 0.9) == pytest.approx(0.2, abs=EXACT)
    assert absolute_continuity_delta(fam, 0.05) is None


def test_delta_spike_family_fails_at_half():
    # the tallest spike puts mass 1 on [0, 1/64]; every achievable delta
    # admits that cell, so no delta survives eps = 0.5
    assert absolute_continuity_delta(spike_family(64), 0.5) is None


def test_delta_rejects_bad_eps():
    with pytest.raises(DomainViolation):
        absolute_continuity_delta(_singleton([1.0]), 0.0)


# -- clause ii: uniform tails --------------------------------------------


def test_threshold_bounded_family_succeeds():
    fam = _singleton([1.0, -2.0, 0.5, 2.0])
    m = tail_threshold(fam, 0.25)
    assert m is not None
    assert m <= 2.0


def test_threshold_spike_family_uncapped():
    fam = spike_family(64)
    assert tail_threshold(fam, 0.5) == pytest.approx(64.0, abs=EXACT)


def test_threshold_spike_family_capped_fails():
    fam = spike_family(64)
    assert tail_threshold(fam, 0.5, cap=63.0) is None


def test_threshold_zero_family_returns_smallest_candidate():
    fam = _singleton(np.zeros(3))
    assert tail_threshold(fam, 0.1) == 0.0


def test_threshold_rejects_bad_eps():
    with pytest.raises(DomainViolation):
        tail_threshold(_singleton([1.0]), -0.5)


# -- gauge builder --------------------------------------------------------


def test_build_orlicz_small_values_terminates_fast():
    fam = _singleton([0.1, 0.2, 0.3, 0.4])
    phi = build_orlicz(fam)
    assert len(phi.breakpoints) <= 3
    assert tail_profile(fam, phi.breakpoints[-1]) == 0.0


def test_build_orlicz_unit_indicator():
    fam = _singleton(np.ones(4))
    phi = build_orlicz(fam)
    # the profile drops to zero at the first sampled value, so the ladder
    # stops after a single rung at that value
    assert phi.breakpoints == (1.0,)
    assert phi.slopes == (1, 1)


def test_build_orlicz_empty_family_rejected():
    with pytest.raises(DomainViolation):
        build_orlicz(FunctionFamily((), "empty"))


@pytest.mark.parametrize("seed", [0, 3, 9])
def test_build_orlicz_postconditions(seed):
    fam = dominated_family(seed, cells=64, count=8, bound=3.0)
    phi = build_orlicz(fam)
    bps = phi.breakpoints
    assert all(b > a for a, b in zip(bps, bps[1:]))
    assert len(bps) <= LADDER_CAP
    for k, s in enumerate(bps, start=1):
        assert tail_profile(fam, s) <= 2.0 ** (-k) + EXACT
    slopes = phi.slopes
    assert all(b >= a for a, b in zip(slopes, slopes[1:]))


def test_layer_cake_dominates_integrals_on_random_families():
    for seed in (1, 4, 7, 12):
        fam = dominated_family(seed, cells=128, count=10, bound=2.5)
        phi = build_orlicz(fam)
        bound = layer_cake_bound(phi, fam)
        worst = max(orlicz_integral(phi, f) for f in fam)
        assert worst <= bound + 1e-9


# -- the layer-cake bound -------------------------------------------------


def test_orlicz_integral_zero_function():
    phi = OrliczFunction((1.0,))
    f = GridFunction(Partition.uniform(4), np.zeros(4))
    assert orlicz_integral(phi, f) == 0.0


def test_orlicz_integral_linear_region():
    phi = OrliczFunction((2.0,))
    f = GridFunction(Partition.single_window([1.0]), np.array([1.0]))
    assert orlicz_integral(phi, f) == pytest.approx(1.0, abs=EXACT)


def test_layer_cake_single_rung_is_max_norm():
    fam = _singleton(np.ones(4))
    phi = build_orlicz(fam)
    assert layer_cake_bound(phi, fam) == pytest.approx(1.0, abs=EXACT)


def test_layer_cake_ladder_terms():
    # rung gaps 0.25 then 0.0625 weighted by k * 2^{-k}
    fam = _singleton(np.ones(4))
    phi = OrliczFunction((1.0, 1.25, 1.3125))
    expected = 1.0 + 1 * 0.25 * 0.5 + 2 * 0.0625 * 0.25
    assert layer_cake_bound(phi, fam) == pytest.approx(expected, abs=EXACT)
    assert expected == pytest.approx(1.15625)


def test_layer_cake_zero_family():
    fam = _singleton(np.zeros(3))
    phi = build_orlicz(fam)
    assert layer_cake_bound(phi, fam) == pytest.approx(0.0, abs=EXACT)


# -- family transforms ----------------------------------------------------


def test_family_scale_identity_and_errors():
    fam = _singleton([1.0, -2.0])
    same = family_scale(fam, 1.0)
    assert np.array_equal(same[0].values, fam[0].values)
    with pytest.raises(DomainViolation):
        family_scale(fam, 0.0)
    with pytest.raises(DomainViolation):
        family_scale(fam, -2.0)


def test_family_difference_singleton_is_zero():
    fam = _singleton([1.0, -2.0])
    diff = family_difference(fam)
    assert len(diff) == 1
    assert np.array_equal(diff[0].values, np.zeros(2))


def test_family_difference_three_members_capped_at_seven():
    p = Partition.uniform(2)
    fam = FunctionFamily(
        (
            GridFunction(p, np.array([0.0, 0.0])),
            GridFunction(p, np.array([1.0, 0.0])),
            GridFunction(p, np.array([0.0, 1.0])),
        ),
        "halves",
    )
    diff = family_difference(fam)
    assert len(diff) <= 7
    zero_members = [g for g in diff if not g.values.any()]
    assert len(zero_members) == 1


def test_family_difference_dedupes_repeated_values():
    p = Partition.uniform(2)
    f = GridFunction(p, np.array([1.0, 0.0]))
    fam = FunctionFamily((f, f.with_values(f.values.copy())), "twice")
    diff = family_difference(fam)
    # both orderings of the identical pair give zero; one copy survives
    assert len(diff) == 1


# -- the assembled certificate -------------------------------------------


def test_certificate_dominated_family_passes():
    fam = dominated_family(7, cells=256, count=12, bound=2.0)
    cert = ui_certificate(fam, [0.5, 0.1, 0.02])
    assert cert.verdict == "UI_AT_TESTED_SCALES"
    assert cert.passed
    assert cert.failures == ()
    assert all(d is not None for d in cert.delta_of_eps)
    assert all(m is not None for m in cert.M_of_eps)


def test_certificate_monotonic_witnesses():
    fam = dominated_family(7, cells=256, count=12, bound=2.0)
    cert = ui_certificate(fam, [0.02, 0.1, 0.5])
    deltas = list(cert.delta_of_eps)
    thresholds = list(cert.M_of_eps)
    assert deltas == sorted(deltas)
    assert thresholds == sorted(thresholds, reverse=True)


def test_certificate_spike_family_fails_clause_ii():
    cert = ui_certificate(spike_family(64), [0.5], m_cap=63.0)
    assert cert.verdict.startswith("FAILED")
    assert not cert.passed
    assert (0.5, "clause ii") in cert.failures


def test_certificate_zero_family():
    fam = _singleton(np.zeros(6))
    cert = ui_certificate(fam, [1.0, 0.25, 0.01])
    assert cert.verdict == "UI_AT_TESTED_SCALES"
    for d in cert.delta_of_eps:
        assert d == pytest.approx(1.0, abs=EXACT)


def test_certificate_difference_family_stays_ui():
    fam = dominated_family(7, cells=256, count=12, bound=2.0)
    cert = ui_certificate(family_difference(fam), [0.5, 0.1, 0.02])
    assert cert.verdict == "UI_AT_TESTED_SCALES"


@given(st.integers(min_value=0, max_value=40), st.floats(min_value=0.1, max_value=4.0))
def test_difference_tail_bound(seed, m):
    # pointwise, |u-v| > m forces max(|u|,|v|) > m/2 and |u-v| <= 2 max,
    # so the difference tail is controlled by the member tails at m/2
    rng = np.random.default_rng(seed)
    p = Partition.uniform(16)
    u = rng.uniform(-3, 3, size=16)
    v = rng.uniform(-3, 3, size=16)
    w = p.cell_measures
    d = np.abs(u - v)
    lhs = float(np.sum(d * (d > m) * w))
    rhs_u = float(np.sum(np.abs(u) * (np.abs(u) > m / 2) * w))
    rhs_v = float(np.sum(np.abs(v) * (np.abs(v) > m / 2) * w))
    assert lhs <= 2.0 * (rhs_u + rhs_v) + EXACT
