import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osckit import (
    Arc,
    BudgetExceeded,
    CoordSplit,
    EnumMode,
    GridFunction,
    PeriodicRect,
    arcs_for_axis,
    bmo_m_norm,
    bmo_norm,
    build_sat,
    lmo_inv_norm,
    lmo_m_norm,
    lmo_norm,
    mean_log_ratio,
    osc_l1,
    partial_mean,
    slice_bmo_norm,
    star_norm,
)

import naive


def rect1(start, length):
    return PeriodicRect((Arc(0, start, length),))


def gf(values):
    values = np.asarray(values, dtype=np.float64)
    return GridFunction(values.shape, values)


def random_gf(rng, dims):
    return gf(rng.normal(size=dims))


EVALUATORS_1D = [("bmo", bmo_norm, naive.bmo), ("star", star_norm, naive.star),
                 ("lmo", lmo_norm, naive.lmo)]


class TestEnumerations:
    def test_exact_count_is_n_squared(self):
        for n in (2, 4, 7, 16):
            assert len(arcs_for_axis(n, EnumMode.EXACT)) == n * n

    def test_dyadic_count_is_2n_minus_1(self):
        for n in (2, 4, 8, 16):
            arcs = arcs_for_axis(n, EnumMode.DYADIC)
            assert len(arcs) == 2 * n - 1
            for s, l in arcs:
                assert l & (l - 1) == 0 and s % l == 0  # aligned, no wrap

    def test_dyadic_needs_power_of_two(self):
        with pytest.raises(ValueError):
            arcs_for_axis(6, EnumMode.DYADIC)

    def test_mode_parse(self):
        assert EnumMode.parse("EXACT") is EnumMode.EXACT
        with pytest.raises(ValueError):
            EnumMode.parse("all")


class TestOscL1:
    def test_constant_zero(self):
        f = gf(np.full(8, 3.0))
        sat = build_sat(f)
        assert osc_l1(f, sat, rect1(2, 5)) == 0.0

    def test_forced_values(self):
        f = gf([1.0, 1.0, 0.0, 0.0])
        sat = build_sat(f)
        assert osc_l1(f, sat, rect1(0, 4)) == pytest.approx(0.5)
        assert osc_l1(f, sat, rect1(1, 3)) == pytest.approx(4.0 / 9.0)


class TestBmoNorm:
    def test_constant(self):
        assert bmo_norm(gf(np.full((4, 4), 7.0))).value == 0.0

    def test_step_1d(self):
        rep = bmo_norm(gf([1.0, 1.0, 0.0, 0.0]))
        assert rep.value == pytest.approx(0.5)
        assert rep.argmax_rect.arcs[0] == Arc(0, 0, 4)  # first maximizer in arc order
        assert rep.rect_count == 16

    def test_dyadic_below_exact_100_random(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            f = random_gf(rng, (16, 16))
            dy = bmo_norm(f, EnumMode.DYADIC).value
            ex = bmo_norm(f, EnumMode.EXACT).value
            assert dy <= ex + 1e-12

    def test_budget_exceeded(self):
        f = gf(np.zeros((8, 8)))
        with pytest.raises(BudgetExceeded) as err:
            bmo_norm(f, budget=100)
        assert err.value.required == 8 ** 4
        assert err.value.cap == 100
        assert "dyadic" in str(err.value)


class TestStarNorm:
    def test_step_full_circle(self):
        rep = star_norm(gf([1.0, 1.0, 0.0, 0.0]))
        assert rep.value == pytest.approx(0.5)

    def test_median_scan_agrees(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            f = random_gf(rng, (6,))
            assert star_norm(f).value == pytest.approx(naive.star(f.values), rel=1e-10)

    def test_sandwich_with_bmo(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            f = random_gf(rng, (8,))
            s = star_norm(f).value
            b = bmo_norm(f).value
            assert s <= b + 1e-12 and b <= 2 * s + 1e-12


class TestLmoNorm:
    def test_constant(self):
        assert lmo_norm(gf(np.zeros((4, 4)))).value == 0.0

    def test_full_torus_lower_bound(self):
        rng = np.random.default_rng(13)
        f = random_gf(rng, (8, 8))
        sat = build_sat(f)
        full = PeriodicRect((Arc(0, 0, 8), Arc(1, 0, 8)))
        assert lmo_norm(f).value >= 4.0 * osc_l1(f, sat, full) - 1e-12

    def test_cos_cos_grows_with_resolution(self):
        vals = []
        for n in (8, 16, 32):
            c = np.cos(2 * np.pi * (np.arange(n) + 0.5) / n)
            vals.append(lmo_norm(gf(np.outer(c, c))).value)
        assert vals[0] < vals[1] < vals[2]


class TestMNorms:
    def test_constant(self):
        assert bmo_m_norm(gf(np.zeros((4, 4)))).value == 0.0
        assert lmo_m_norm(gf(np.zeros((4, 4)))).value == 0.0

    def test_needs_two_axes(self):
        with pytest.raises(ValueError):
            bmo_m_norm(gf(np.zeros(8)))

    def test_separable_sum_reduces_to_1d_norms(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            g = rng.normal(size=16)
            h = rng.normal(size=16)
            f = gf(g[:, None] + h[None, :])
            want = max(naive.bmo(g), naive.bmo(h))
            assert bmo_m_norm(f).value == pytest.approx(want, rel=1e-10)

    def test_embedding_inequality(self):
        rng = np.random.default_rng(15)
        for _ in range(30):
            f = random_gf(rng, (8, 8))
            for mode in (EnumMode.EXACT, EnumMode.DYADIC):
                bm = bmo_m_norm(f, mode).value
                b = bmo_norm(f, mode).value
                assert bm <= b + 1e-10 * max(1.0, b)

    def test_lmo_m_full_torus_partial_mean_bound(self):
        rng = np.random.default_rng(16)
        f = random_gf(rng, (8, 8))
        val = lmo_m_norm(f).value
        for axes in ((0,), (1,)):
            split = CoordSplit.of(2, axes)
            full = PeriodicRect(tuple(Arc(a, 0, 8) for a in axes))
            pm = partial_mean(f, split, full)
            osc = float(np.mean(np.abs(pm.values - pm.values.mean())))
            assert val >= 2.0 * osc - 1e-12

    def test_argmax_reproduces_value(self):
        rng = np.random.default_rng(17)
        f = random_gf(rng, (6, 6))
        rep = bmo_m_norm(f)
        pm = partial_mean(f, rep.argmax_split, rep.argmax_rect)
        again = bmo_norm(pm).value
        assert again == pytest.approx(rep.value, rel=1e-10)

    def test_rect_count_sums_over_splits(self):
        f = gf(np.zeros((4, 4)))
        rep = bmo_m_norm(f)
        assert rep.rect_count == 2 * (16 * 16)


class TestArgmaxReevaluation:
    def test_plain_norms_reproduce_value(self):
        rng = np.random.default_rng(27)
        f = random_gf(rng, (8, 8))
        sat = build_sat(f)
        rep = bmo_norm(f)
        assert osc_l1(f, sat, rep.argmax_rect) == pytest.approx(rep.value, rel=1e-10)
        rep = lmo_norm(f)
        w = sum(np.log2(4.0 / (a.len / 8)) for a in rep.argmax_rect.arcs)
        assert w * osc_l1(f, sat, rep.argmax_rect) == pytest.approx(rep.value, rel=1e-10)
        rep = star_norm(f)
        cells = f.values[np.ix_(*[a.cells(8) for a in rep.argmax_rect.arcs])].ravel()
        med = np.sort(cells)[(cells.size - 1) // 2]
        assert np.mean(np.abs(cells - med)) == pytest.approx(rep.value, rel=1e-10)


class TestLmoInv:
    def test_constant(self):
        assert lmo_inv_norm(gf(np.zeros((4, 4)))).value == 0.0

    def test_cos_cos_plateaus_with_resolution(self):
        vals = []
        for n in (16, 32, 64):
            c = np.cos(2 * np.pi * (np.arange(n) + 0.5) / n)
            vals.append(lmo_inv_norm(gf(np.outer(c, c))).value)
        assert max(vals) <= 1.10 * min(vals)  # Lipschitz slices keep it flat

    def test_function_of_one_variable(self):
        rng = np.random.default_rng(18)
        g = rng.normal(size=8)
        f = gf(np.broadcast_to(g[:, None], (8, 8)).copy())
        want = lmo_norm(gf(g)).value
        rep = lmo_inv_norm(f)
        assert rep.value == pytest.approx(want, rel=1e-10)

    def test_argmax_reproduces_value(self):
        rng = np.random.default_rng(19)
        f = random_gf(rng, (6, 6))
        rep = lmo_inv_norm(f)
        free = rep.argmax_split.averaged_axes[0]
        cell_arc = [a for a in rep.argmax_rect.arcs if a.axis != free][0]
        line = f.values[:, cell_arc.start] if free == 0 else f.values[cell_arc.start, :]
        again = lmo_norm(gf(line)).value
        assert again == pytest.approx(rep.value, rel=1e-10)

    def test_needs_2d(self):
        with pytest.raises(ValueError):
            lmo_inv_norm(gf(np.zeros((4, 4, 4))))


class TestSliceNorm:
    def test_below_bmo_and_sandwich(self):
        rng = np.random.default_rng(20)
        for _ in range(25):
            f = random_gf(rng, (8, 8))
            b = bmo_norm(f).value
            ms = max(slice_bmo_norm(f, CoordSplit.of(2, (0,))),
                     slice_bmo_norm(f, CoordSplit.of(2, (1,))))
            assert ms <= b + 1e-12
            assert b <= 2 * ms + 1e-12


class TestMeanLogRatio:
    def test_constant(self):
        assert mean_log_ratio(gf(np.full((4, 4), 2.0))) == 0.0

    def test_matches_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            f = random_gf(rng, (5, 4))
            assert mean_log_ratio(f) == pytest.approx(naive.mean_log_ratio(f.values), rel=1e-10)


class TestDeterminismAndParallel:
    @pytest.mark.parametrize("threads", [2, 4])
    def test_thread_count_invariance(self, threads):
        rng = np.random.default_rng(22)
        f = random_gf(rng, (16, 16))
        base = bmo_norm(f, threads=1)
        multi = bmo_norm(f, threads=threads)
        assert multi.value == base.value
        assert multi.argmax_rect == base.argmax_rect
        base_m = bmo_m_norm(f, threads=1)
        multi_m = bmo_m_norm(f, threads=threads)
        assert multi_m.value == base_m.value
        assert multi_m.argmax_rect == base_m.argmax_rect
        assert multi_m.argmax_split == base_m.argmax_split

    def test_tie_break_lexicographic(self):
        # two-cell oscillations tie all over this symmetric function
        f = gf([1.0, 0.0, 1.0, 0.0])
        rep = bmo_norm(f)
        assert rep.argmax_rect.arcs[0] == Arc(0, 0, 2)


class TestNormReportJson:
    def test_schema_keys(self):
        rng = np.random.default_rng(23)
        rep = bmo_m_norm(random_gf(rng, (4, 4)))
        d = rep.to_json_dict()
        assert set(d) == {"value", "mode", "rect_count", "argmax"}
        assert d["mode"] == "exact"
        assert set(d["argmax"]) == {"arcs", "split"}
        assert all(set(a) == {"axis", "start", "len"} for a in d["argmax"]["arcs"])
        d2 = bmo_norm(random_gf(rng, (4,))).to_json_dict()
        assert set(d2["argmax"]) == {"arcs"}


finite_arrays = st.integers(min_value=0, max_value=2 ** 31 - 1)


@st.composite
def small_functions(draw):
    ndim = draw(st.integers(1, 2))
    dims = tuple(draw(st.sampled_from([2, 4])) for _ in range(ndim))
    seed = draw(finite_arrays)
    rng = np.random.default_rng(seed)
    return gf(rng.uniform(-2.0, 2.0, size=dims))


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(small_functions(), st.floats(-8.0, 8.0).filter(lambda c: abs(c) > 1e-3))
    def test_absolute_homogeneity(self, f, c):
        for norm in (bmo_norm, star_norm, lmo_norm):
            base = norm(f).value
            scaled = norm(c * f).value
            assert scaled == pytest.approx(abs(c) * base, rel=1e-10, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(small_functions(), st.floats(-5.0, 5.0))
    def test_constant_shift_invariance(self, f, c):
        for norm in (bmo_norm, star_norm, lmo_norm):
            base = norm(f).value
            shifted = norm(f + c).value
            assert shifted == pytest.approx(base, rel=1e-9, abs=1e-11)

    @settings(max_examples=15, deadline=None)
    @given(small_functions())
    def test_m_norm_invariances(self, f):
        if f.ndim != 2:
            return
        assert bmo_m_norm(3.0 * f).value == pytest.approx(3.0 * bmo_m_norm(f).value,
                                                          rel=1e-10, abs=1e-12)
        assert lmo_m_norm(f + 1.5).value == pytest.approx(lmo_m_norm(f).value,
                                                          rel=1e-9, abs=1e-11)

    @settings(max_examples=15, deadline=None)
    @given(small_functions())
    def test_mode_monotonicity(self, f):
        for norm in (bmo_norm, star_norm, lmo_norm):
            assert norm(f, EnumMode.DYADIC).value <= norm(f, EnumMode.EXACT).value + 1e-12


class TestOracleSpot:
    """Small-scale oracle agreement; the full 200-function run lives in the
    acceptance suite."""

    @pytest.mark.parametrize("dims", [(5,), (8,), (2, 4), (4, 4), (3, 3)])
    def test_all_evaluators(self, dims):
        rng = np.random.default_rng(sum(dims))
        f = random_gf(rng, dims)
        v = f.values
        assert bmo_norm(f).value == pytest.approx(naive.bmo(v), rel=1e-10)
        assert star_norm(f).value == pytest.approx(naive.star(v), rel=1e-10)
        assert lmo_norm(f).value == pytest.approx(naive.lmo(v), rel=1e-10)
        if len(dims) == 2:
            assert bmo_m_norm(f).value == pytest.approx(naive.bmo_m(v), rel=1e-10)
            assert lmo_m_norm(f).value == pytest.approx(naive.lmo_m(v), rel=1e-10)
            assert lmo_inv_norm(f).value == pytest.approx(naive.lmo_inv(v), rel=1e-10)
            for axes in ((0,), (1,)):
                got = slice_bmo_norm(f, CoordSplit.of(2, axes))
                assert got == pytest.approx(naive.slice_bmo(v, axes), rel=1e-10)
