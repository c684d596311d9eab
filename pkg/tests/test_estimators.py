import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icvcdf.estimators import (GridSpec, InvariantError, fit, fit_ecdf, fit_fsd, fit_icv, fit_icx,
                               fit_icx_direct, group, group_xy, integrated_estimate,
                               two_sample_closed_form)
from icvcdf.model import (FittedModel, Order, StepCdf, lower_integrals, order_violation,
                          upper_integrals)
from icvcdf.monotone import Direction, minmax_fit
from oracles import ecdf, hull_slopes, icv_ordered, integrated_ecdf, step_integral_below

POOLED = [0.5, 1.0]


def two_singletons(reverse=False):
    return group([(1, 0), (2, 2)] if reverse else [(1, 2), (2, 0)])


def test_group_example():
    s = group([(2, 1), (1, 0), (2, 3)])
    assert s.design_points.tolist() == [1, 2]
    assert [g.tolist() for g in s.groups] == [[0], [1, 3]]
    assert s.weights.tolist() == [1, 2]
    assert s.responses.tolist() == [0, 1, 3]


def test_group_degenerate_cases():
    s = group_xy([3, 1, 2], [0, 0, 0])
    assert s.d == 3 and s.weights.tolist() == [1, 1, 1]
    s = group_xy([5, 5, 5, 5], [1, 2, 3, 4])
    assert s.d == 1 and s.weights.tolist() == [4]
    with pytest.raises(ValueError):
        group([])
    with pytest.raises(ValueError):
        group_xy([1.0], [np.nan])


def test_icv_two_singletons():
    m = fit_icv(two_singletons())
    assert m.grid.tolist() == [0, 2]
    assert m.cum.tolist() == [POOLED, POOLED]


def test_icx_two_singletons():
    # Y = 2 at x = 1 and Y = 0 at x = 2 violates the icx order as well
    m = fit_icx(two_singletons())
    assert m.cum.tolist() == [POOLED, POOLED]


def test_icx_already_ordered_singletons_unchanged():
    # Y = 0 at x = 1 and Y = 2 at x = 2 is already icx-increasing, so the
    # two Dirac CDFs come back unchanged
    m = fit_icx(two_singletons(reverse=True))
    assert m.cum.tolist() == [[1.0, 1.0], [0.0, 1.0]]


def test_fsd_and_closed_form_two_singletons():
    assert fit_fsd(two_singletons()).cum.tolist() == [POOLED, POOLED]
    assert two_sample_closed_form(two_singletons()).cum.tolist() == [POOLED, POOLED]


@pytest.mark.parametrize("order", list(Order))
def test_single_group_is_ecdf(order):
    ys = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0])
    m = fit(group_xy(np.zeros_like(ys), ys), order)
    assert np.allclose(m.cum[0], ecdf(ys, m.grid), atol=1e-15)


def test_fsd_ordered_unchanged():
    s = group_xy([1, 1, 2, 2, 3, 3], [0, 1, 1, 2, 2, 5])
    assert np.array_equal(fit_fsd(s).cum, fit_ecdf(s).cum)


def random_sample(gen, n_max=60, d_max=8, lattice=None):
    n = int(gen.integers(1, n_max + 1))
    d = int(gen.integers(1, d_max + 1))
    x = gen.integers(0, d, size=n).astype(float) * 0.7 + 1.0
    y = gen.gamma(2.0, 1.0, size=n) * (1 + 0.2 * x)
    if lattice is not None:
        y = np.round(y / lattice) * lattice
    return group_xy(x, y)


def icv_by_oracle(sample, grid):
    """icv estimate through direct integrated ECDFs, the min-max formula
    and lower convex hulls."""
    h = np.array([integrated_ecdf(g, grid) for g in sample.groups])
    mt = np.column_stack([minmax_fit(h[:, j], sample.weights, Direction.DECREASING)
                          for j in range(grid.size)])
    cum = np.ones_like(mt)
    if grid.size > 1:
        cum[:, :-1] = np.clip([hull_slopes(grid, row) for row in mt], 0.0, 1.0)
    return mt, cum


def test_icv_matches_oracle_route(backend):
    gen = np.random.default_rng(21)
    worst = 0.0
    for case in range(80):
        s = random_sample(gen, n_max=40)
        grid = GridSpec.observed()
        if case % 3 == 1:
            s = random_sample(gen, n_max=40, lattice=1.0)
            grid = GridSpec.integer()
        elif case % 3 == 2:
            r = s.responses
            grid = GridSpec.explicit(np.union1d(r[[0, -1]], np.linspace(r[0], r[-1], 7)))
        model = fit_icv(s, grid)
        mt, cum = icv_by_oracle(s, model.grid)
        worst = max(worst, np.max(np.abs(integrated_estimate(s, model.grid) - mt)),
                    np.max(np.abs(model.cum - cum)))
    assert worst <= 1e-10


def test_fsd_matches_oracle_route():
    gen = np.random.default_rng(22)
    for _ in range(40):
        s = random_sample(gen)
        model = fit_fsd(s)
        ind = np.array([ecdf(g, model.grid) for g in s.groups])
        expect = np.column_stack([minmax_fit(ind[:, j], s.weights, Direction.DECREASING)
                                  for j in range(model.grid.size)])
        expect[:, -1] = 1.0
        assert np.allclose(model.cum, expect, atol=1e-12)


def assert_valid_icv(model, sample):
    t, cum = model.grid, model.cum
    assert np.all(np.diff(cum, axis=1) >= 0) and np.all(cum >= 0)
    assert np.all(cum[:, -1] == 1.0) and t[-1] == sample.responses[-1]
    mt = integrated_estimate(sample, t)
    scale = 1.0 + np.max(np.abs(t))
    assert np.all(np.diff(mt, axis=0) <= 1e-12 * scale)
    if t.size > 1:
        inc = np.diff(mt, axis=1)
        width = np.diff(t)
        assert np.all(inc >= -1e-12 * scale) and np.all(inc <= width + 1e-12 * scale)
    integ = np.array([step_integral_below(t, row) for row in cum])
    assert np.all(np.diff(integ, axis=0) <= 1e-10 * scale)


datasets = st.tuples(
    st.integers(1, 200), st.integers(1, 10), st.sampled_from(["observed", "integer", "explicit"]),
    st.integers(0, 2**32 - 1))


@settings(max_examples=120, deadline=None)
@given(datasets)
def test_structural_properties(params):
    n, d, mode, seed = params
    gen = np.random.default_rng(seed)
    x = gen.integers(0, d, size=n).astype(float)
    y = gen.normal(size=n) * (1 + x) + x
    if mode == "integer":
        y = np.round(y * 3)
    s = group_xy(x, y)
    if mode == "observed":
        grid = GridSpec.observed()
    elif mode == "integer":
        grid = GridSpec.integer()
    else:
        r = s.responses
        grid = GridSpec.explicit(np.union1d(r[[0, -1]], gen.uniform(r[0], r[-1], size=5)))
    model = fit_icv(s, grid)
    assert_valid_icv(model, s)
    assert order_violation(model) <= 1e-10 * (1 + np.max(np.abs(model.grid)))
    icx = fit_icx(s, grid)
    assert np.all(np.diff(icx.cum, axis=1) >= 0) and np.all(icx.cum[:, -1] == 1.0)
    assert order_violation(icx) <= 1e-10 * (1 + np.max(np.abs(model.grid)))
    fsd = fit_fsd(s, grid)
    assert order_violation(fsd) == 0.0


def ordered_groups(gen):
    """Groups on a 0.01 lattice, shifted upward with x and randomly widened,
    so they are often (not always) icv-ordered."""
    d = int(gen.integers(2, 6))
    groups = []
    for i in range(d):
        size = int(gen.integers(1, 15))
        cents = gen.integers(0, 200, size=size) + 50 * i
        groups.append(cents / 100.0)
    return groups


def test_ecdf_recovery_when_ordered(backend):
    gen = np.random.default_rng(31)
    checked = 0
    for _ in range(400):
        groups = ordered_groups(gen)
        if not icv_ordered(groups):
            continue
        checked += 1
        x = np.concatenate([np.full(g.size, float(i)) for i, g in enumerate(groups)])
        s = group_xy(x, np.concatenate(groups))
        m = fit_icv(s)
        expect = np.array([ecdf(g, m.grid) for g in groups])
        assert np.max(np.abs(m.cum - expect)) <= 1e-12
    assert checked >= 50


def test_two_sample_closed_form_matches(backend):
    gen = np.random.default_rng(41)
    for _ in range(100):
        n1, n2 = gen.integers(1, 40, size=2)
        y = np.concatenate((gen.gamma(2, 1, size=n1), gen.gamma(1.5, 1.3, size=n2)))
        s = group_xy(np.repeat([1.0, 2.0], [n1, n2]), y)
        assert np.max(np.abs(two_sample_closed_form(s).cum - fit_icv(s).cum)) <= 1e-10
    with pytest.raises(ValueError):
        two_sample_closed_form(group_xy([1, 2, 3], [0, 1, 2]))


def test_icx_reflection_matches_direct(backend):
    gen = np.random.default_rng(51)
    for case in range(100):
        s = random_sample(gen)
        grid = GridSpec.observed()
        if case % 2:
            r = s.responses
            grid = GridSpec.explicit(np.union1d(r[[0, -1]], gen.uniform(r[0], r[-1], size=6)))
        a, b = fit_icx(s, grid), fit_icx_direct(s, grid)
        assert np.array_equal(a.grid, b.grid)
        assert np.max(np.abs(a.cum - b.cum)) <= 1e-10


def test_rank_invariance():
    gen = np.random.default_rng(61)
    for _ in range(20):
        s = random_sample(gen)
        x = s.design_points[s.index]
        t = group_xy(np.exp(x) + x ** 3, s.y)
        for order in ("icv", "icx", "fsd"):
            assert np.array_equal(fit(s, order).cum, fit(t, order).cum)


def test_grid_refinement():
    gen = np.random.default_rng(71)
    for _ in range(30):
        s = random_sample(gen)
        r = s.responses
        if r.size < 2:
            continue
        coarse = np.union1d(r[[0, -1]], np.linspace(r[0], r[-1], 9))
        fine = np.union1d(coarse, 0.5 * (coarse[1:] + coarse[:-1]))
        mc = integrated_estimate(s, coarse)
        mf = integrated_estimate(s, fine)
        mesh = np.max(np.diff(coarse))
        keep = np.isin(fine, coarse)
        assert np.max(np.abs(mf[:, keep] - mc)) <= min(mesh, 1e-12 * (1 + np.abs(r).max()))
        assert_valid_icv(fit_icv(s, GridSpec.explicit(fine)), s)


def test_grid_errors():
    s = group_xy([1, 2], [0.0, 2.0])
    with pytest.raises(InvariantError):
        fit_icv(s, GridSpec.explicit([0.5, 2.0]))
    with pytest.raises(InvariantError):
        fit_icv(s, GridSpec.explicit([0.0, 1.5]))
    with pytest.raises(InvariantError):
        fit_icv(s, GridSpec.explicit([0.0, 1.0, 1.0, 2.0]))
    with pytest.raises(InvariantError):
        fit_icv(group_xy([1, 2], [0.0, 2.5]), GridSpec.integer())
    assert fit_icv(s, GridSpec.integer()).grid.tolist() == [0, 1, 2]


def test_integer_grid_on_counts():
    s = group_xy([1, 1, 2, 2], [0, 3, 1, 4])
    m = fit_icv(s, GridSpec.integer())
    assert m.grid.tolist() == [0, 1, 2, 3, 4]
    assert_valid_icv(m, s)


# prediction

def test_predict_interpolation_and_clamping():
    m = FittedModel(Order.ICV, [1.0, 3.0], [0.0, 1.0, 2.0], [[0.5, 0.5, 1.0], [0.0, 0.2, 1.0]])
    assert m.predict_cdf(1.0, 0.0) == 0.5
    assert m.predict_cdf(0.0, 0.0) == 0.5
    assert m.predict_cdf(9.0, 1.5) == 0.2
    assert m.predict_cdf(2.0, 1.0) == pytest.approx(0.35)
    assert m.predict_cdf(2.0, -0.1) == 0.0
    assert m.predict_cdf(3.0, 2.0) == 1.0
    with pytest.raises(ValueError):
        m.predict_cdf(np.nan, 0.0)


def test_predict_quantile_examples():
    m = FittedModel(Order.ICV, [1.0], [0.0, 2.0], [[0.5, 1.0]])
    assert m.predict_quantile(1.0, 0.5) == 0.0
    assert m.predict_quantile(1.0, 0.6) == 2.0
    dirac = StepCdf.dirac(3.5)
    assert dirac.quantile(np.array([0.01, 0.5, 0.99])).tolist() == [3.5] * 3
    for bad in (0.0, 1.0, -0.1, np.nan):
        with pytest.raises(ValueError):
            m.predict_quantile(1.0, bad)


def test_step_cdf_contract():
    f = StepCdf([0.0, 1.0, 2.0], [0.25, 0.25, 1.0])
    assert f(-1e-300).tolist() == 0.0
    assert f(np.array([0.0, 0.5, 1.0, 2.0])).tolist() == [0.25, 0.25, 0.25, 1.0]
    assert f.compressed() == StepCdf([0.0, 2.0], [0.25, 1.0])
    for jumps, cum in [([0, 1], [0.5, 0.9]), ([1, 0], [0.5, 1]), ([0, 1], [0.6, 0.5]),
                       ([0], [1, 1]), ([], [])]:
        with pytest.raises(ValueError):
            StepCdf(jumps, cum)


def test_integrals_match_loop():
    gen = np.random.default_rng(81)
    grid = np.sort(gen.uniform(0, 5, size=12))
    cum = np.append(np.sort(gen.uniform(size=11)), 1.0)
    assert np.allclose(lower_integrals(grid, cum), step_integral_below(grid, cum))
    tail = [np.sum((1 - cum[j:-1]) * np.diff(grid)[j:]) for j in range(12)]
    assert np.allclose(upper_integrals(grid, cum), tail)


def test_order_violation_detects():
    bad = FittedModel(Order.ICV, [1.0, 2.0], [0.0, 2.0], [[0.0, 1.0], [1.0, 1.0]])
    assert order_violation(bad) == pytest.approx(2.0)
    assert order_violation(FittedModel(Order.ECDF, bad.design_points, bad.grid, bad.cum)) == 0.0
