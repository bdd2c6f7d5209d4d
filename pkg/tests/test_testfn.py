import numpy as np
import pytest

from osckit import (
    Arc,
    GridFunction,
    LogArcSpec,
    PeriodicRect,
    bmo_norm,
    from_spec,
    make_log_arc,
    make_log_rect,
    make_random_dyadic,
    make_separable,
)

import naive


class TestLogArc:
    def test_quarter_circle_example(self):
        f = make_log_arc(16, Arc(0, 0, 4))
        spec = LogArcSpec(16, Arc(0, 0, 4))
        assert spec.levels == 2
        v = f.values
        assert np.all(v[[0, 1, 2, 3]] == 4.0)        # base arc, log2(4 / (1/4))
        assert np.all(v[[14, 15, 4, 5]] == 3.0)      # first shell
        assert np.all(v[6:14] == 2.0)                # outermost shell
        assert v[[0, 1, 2, 3]].mean() == pytest.approx(4.0)

    def test_full_circle_is_constant_two(self):
        f = make_log_arc(8, Arc(0, 3, 8))
        assert np.all(f.values == 2.0)

    @pytest.mark.parametrize("n,start,length", [
        (16, 0, 1), (16, 5, 3), (16, 13, 6), (64, 60, 5), (256, 100, 7), (1024, 1000, 48),
    ])
    def test_value_chain(self, n, start, length):
        spec = LogArcSpec(n, Arc(0, start, length))
        f = make_log_arc(n, Arc(0, start, length))
        got = sorted(set(f.values.tolist()))
        assert got == [float(k) for k in range(2, spec.levels + 3)]

    @pytest.mark.parametrize("n,start,length", [(16, 3, 2), (32, 30, 3), (64, 10, 9)])
    def test_shell_lengths_and_centering(self, n, start, length):
        spec = LogArcSpec(n, Arc(0, start, length))
        shells = spec.shell_arcs()
        assert shells[0] == Arc(0, start, length)
        assert shells[-1].len == n
        for k, arc in enumerate(shells):
            assert arc.len == min(length << k, n)
            # concentric within one cell: the two overhangs differ by <= 1
            low = (start - arc.start) % n
            high = arc.len - length - low
            assert abs(low - high) <= 1

    def test_levels_bracket_log_weight(self):
        for n in (16, 64, 256):
            for length in (1, 2, 3, 5, n // 2, n):
                spec = LogArcSpec(n, Arc(0, 0, length))
                w = np.log2(4.0 * n / length)
                assert spec.levels <= w + 1e-12
                assert w <= spec.levels + 2 + 1e-12


class TestLogRect:
    def test_full_arcs_constant(self):
        rect = PeriodicRect((Arc(0, 0, 8), Arc(1, 0, 8)))
        f = make_log_rect((8, 8), rect)
        assert np.all(f.values == 4.0)

    def test_restriction_to_rect_is_constant_with_level_sum(self):
        rect = PeriodicRect((Arc(0, 2, 4), Arc(1, 10, 2)))
        f = make_log_rect((16, 16), rect)
        lv0 = LogArcSpec(16, Arc(0, 2, 4)).levels
        lv1 = LogArcSpec(16, Arc(0, 10, 2)).levels
        block = f.values[np.ix_(rect.arcs[0].cells(16), rect.arcs[1].cells(16))]
        assert np.all(block == float(lv0 + 2 + lv1 + 2))

    def test_bmo_subadditive_in_factors(self):
        rect = PeriodicRect((Arc(0, 3, 2), Arc(1, 7, 4)))
        f = make_log_rect((16, 16), rect)
        total = bmo_norm(f).value
        parts = sum(bmo_norm(make_log_arc(16, Arc(0, a.start, a.len))).value
                    for a in rect.arcs)
        assert total <= parts + 1e-10


class TestSeparable:
    def test_product_of_constants(self):
        f = make_separable((4, 4), [lambda t: np.ones_like(t)] * 2, "product")
        assert np.all(f.values == 1.0)

    def test_cos_cos_bounded(self):
        f = make_separable((64, 64), ["cos", "cos"], "product")
        assert np.max(np.abs(f.values)) <= 1.0

    def test_step_step_matches_brute_force(self):
        f = make_separable((8, 8), ["step", "step"], "product")
        assert bmo_norm(f).value == pytest.approx(naive.bmo(f.values, "exact"), rel=1e-10)

    def test_sawtooth_continuous_on_torus(self):
        f = make_separable((64,), ["sawtooth"])
        jumps = np.abs(np.diff(np.concatenate([f.values, f.values[:1]])))
        assert jumps.max() <= 4.5 / 64  # Lipschitz constant 4 plus slack

    def test_sum_combine(self):
        f = make_separable((4, 4), ["step", "step"], "sum")
        assert f.values[0, 0] == 2.0 and f.values[3, 3] == 0.0

    def test_factor_count_checked(self):
        with pytest.raises(ValueError):
            make_separable((4, 4), ["cos"])


class TestRandomDyadic:
    def test_depth_zero_is_constant_zero(self):
        f = make_random_dyadic((8, 8), 0, seed=1)
        assert np.all(f.values == 0.0)

    def test_same_seed_bit_exact(self):
        a = make_random_dyadic((16, 16), 3, 1.5, seed=42)
        b = make_random_dyadic((16, 16), 3, 1.5, seed=42)
        assert np.array_equal(a.values, b.values)

    def test_different_seeds_differ(self):
        a = make_random_dyadic((16, 16), 3, seed=1)
        b = make_random_dyadic((16, 16), 3, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_blocks_have_dyadic_structure(self):
        f = make_random_dyadic((8, 8), 1, seed=3)
        # depth 1: constant on 4x4 quadrants, values +-1
        for bs, bt in [(0, 0), (0, 4), (4, 0), (4, 4)]:
            block = f.values[bs:bs + 4, bt:bt + 4]
            assert np.ptp(block) == 0.0
            assert abs(block[0, 0]) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            make_random_dyadic((6, 8), 1, seed=0)
        with pytest.raises(ValueError):
            make_random_dyadic((8, 8), 4, seed=0)

    def test_norms_finite_positive_across_100_seeds(self):
        vals = [bmo_norm(make_random_dyadic((16, 16), 2, seed=s)).value for s in range(100)]
        assert all(np.isfinite(v) and v > 0 for v in vals)


class TestFromSpec:
    def test_kinds(self):
        assert np.all(from_spec((4, 4), {"kind": "constant", "value": 2.0}).values == 2.0)
        f = from_spec((16,), {"kind": "log_arc", "start": 0, "len": 4})
        assert np.array_equal(f.values, make_log_arc(16, Arc(0, 0, 4)).values)
        g = from_spec((8, 8), {"kind": "log_rect", "sides": [2, 4]})
        rect = PeriodicRect((Arc(0, 0, 2), Arc(1, 0, 4)))
        assert np.array_equal(g.values, make_log_rect((8, 8), rect).values)
        h = from_spec((8, 8), {"kind": "separable", "factors": ["cos", "step"]})
        assert isinstance(h, GridFunction)
        r = from_spec((8, 8), {"kind": "random", "depth": 2}, default_seed=5)
        assert np.array_equal(r.values, make_random_dyadic((8, 8), 2, seed=5).values)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown generator kind"):
            from_spec((4,), {"kind": "nope"})
