"""Level-norm, shift, and embedding-gap tests for the cylinder scale spaces.

Derived expected values were computed with an independent high-precision
quadrature oracle (mpmath, 30 digits); the closed forms and frozen numbers
are recorded next to each test.
"""

import numpy as np
import pytest

from sclab.errors import (DomainError, GridMismatch, LevelOutOfRange,
                          MarginExceeded, OverflowGuard)
from sclab.scale_space import (CylinderGrid, ScaleFunction, WeightSequence,
                               from_json_record, level_embedding_gap,
                               norm_at_level, random_smooth_function,
                               shift_action, to_json_record)

GRID = CylinderGrid(s_max=30.0, n_s=769, n_t=32)
W = WeightSequence.default()


def make_pair(grid, plus_dev, minus_dev, c):
    """ScaleFunction with the given deviations from the constant c."""
    s_p = grid.s_plus()[None, :, None]
    s_m = grid.s_minus()[None, :, None]
    t = grid.t()[None, None, :]
    shape = (1, grid.n_s, grid.n_t)
    plus = np.broadcast_to(plus_dev(s_p, t), shape).astype(complex)
    minus = np.broadcast_to(minus_dev(s_m, t), shape).astype(complex)
    return ScaleFunction(grid, plus, minus, np.array([c], dtype=complex))


class TestWeightSequence:
    def test_default_inside_gap(self):
        assert W.deltas[0] == pytest.approx(np.pi)
        assert W.deltas[1] == pytest.approx(4 * np.pi / 3)
        assert all(0 < d < 2 * np.pi for d in W.deltas)

    def test_rejects_decreasing(self):
        with pytest.raises(DomainError):
            WeightSequence((1.0, 0.5, 2.0, 3.0))

    def test_rejects_out_of_gap(self):
        with pytest.raises(DomainError):
            WeightSequence((0.5, 1.0, 2.0, 7.0))

    def test_level0_zero_allowed(self):
        w = WeightSequence((0.0, 1.0, 2.0, 3.0))
        assert w.delta(0) == 0.0


class TestNormAtLevel:
    def test_constant_pair_gives_modulus_of_c(self):
        # all derivatives and the decaying part vanish identically
        u = ScaleFunction.constant(GRID, 0.7 - 0.4j)
        for m in range(4):
            rep = norm_at_level(u, m, W)
            assert rep.value == pytest.approx(abs(0.7 - 0.4j), rel=1e-13)

    def test_exponential_mode_matches_quadrature_oracle(self):
        # u+ - c = e^{-2 pi s} cos(2 pi t), u- = c, m=0, delta_0 = pi.
        # Oracle (mpmath, 30 digits):
        #   value^2 = c^2 + (1/2)(1 - e^{-2 pi s_max})/(2 pi)
        #           = 0.569577471545947667884441881686  (c=0.7, s_max=30)
        frozen = 0.5695774715459477
        u = make_pair(GRID,
                      lambda s, t: np.exp(-2 * np.pi * s) * np.cos(2 * np.pi * t),
                      lambda s, t: 0.0 * s * t, 0.7)
        rep = norm_at_level(u, 0, W)
        # trapezoid-limited: 2nd-order quadrature in s
        assert rep.value ** 2 == pytest.approx(frozen, rel=2e-2)
        fine = CylinderGrid(s_max=30.0, n_s=1537, n_t=32)
        u2 = make_pair(fine,
                       lambda s, t: np.exp(-2 * np.pi * s) * np.cos(2 * np.pi * t),
                       lambda s, t: 0.0 * s * t, 0.7)
        err1 = abs(norm_at_level(u, 0, W).value ** 2 - frozen)
        err2 = abs(norm_at_level(u2, 0, W).value ** 2 - frozen)
        assert err2 < err1 / 3.0  # ~4x per doubling confirms quadrature-limited

    def test_slow_tail_grows_with_smax_and_is_flagged(self):
        # decay e^{-0.3 s} is slower than e^{-delta_0 s}: weighted norm is
        # s_max-dominated; evaluating at two truncation lengths shows growth
        vals = []
        for smax, ns in ((30.0, 769), (40.0, 1025)):
            grid = CylinderGrid(s_max=smax, n_s=ns, n_t=16)
            u = make_pair(grid, lambda s, t: np.exp(-0.3 * s),
                          lambda s, t: 0.0 * s * t, 0.0)
            rep = norm_at_level(u, 0, W)
            vals.append(rep.value)
            assert rep.tail_dominated
        assert vals[1] / vals[0] > 10.0

    def test_homogeneity(self):
        rng = np.random.default_rng(7)
        u = random_smooth_function(GRID, rng)
        lam = 0.37 - 1.2j
        for m in range(4):
            a = norm_at_level(lam * u, m, W).value
            b = abs(lam) * norm_at_level(u, m, W).value
            assert a == pytest.approx(b, rel=1e-12)

    def test_monotone_in_level(self):
        rng = np.random.default_rng(8)
        u = random_smooth_function(GRID, rng)
        vals = [norm_at_level(u, m, W).value for m in range(4)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            u = random_smooth_function(GRID, rng)
            v = random_smooth_function(GRID, rng)
            for m in range(4):
                lhs = norm_at_level(u + v, m, W).value
                rhs = norm_at_level(u, m, W).value + norm_at_level(v, m, W).value
                assert lhs <= rhs * (1 + 1e-12)

    def test_level_out_of_range(self):
        u = ScaleFunction.constant(GRID, 1.0)
        with pytest.raises(LevelOutOfRange):
            norm_at_level(u, 4, W)

    def test_overflow_guard(self):
        grid = CylinderGrid(s_max=130.0, n_s=1025, n_t=16)
        u = ScaleFunction.constant(grid, 1.0)
        with pytest.raises(OverflowGuard):
            norm_at_level(u, 3, W)  # delta_3 * 130 = 653 >= 600

    def test_csv_rows(self):
        u = ScaleFunction.constant(GRID, 1.0)
        rows = norm_at_level(u, 1, W).csv_rows()
        assert {"level", "value", "order", "contribution"} == set(rows[0])


class TestShiftAction:
    def test_zero_shift_is_identity(self):
        rng = np.random.default_rng(10)
        u = random_smooth_function(GRID, rng)
        v = shift_action(0.0, u)
        assert np.array_equal(v.plus, u.plus)
        assert np.array_equal(v.minus, u.minus)

    def test_constant_unchanged(self):
        u = ScaleFunction.constant(GRID, 2.0 + 1.0j)
        v = shift_action(1.3, u)
        assert np.allclose(v.plus, u.plus, atol=1e-12)
        assert np.allclose(v.minus, u.minus, atol=1e-12)

    def test_margin(self):
        u = ScaleFunction.constant(GRID, 1.0)
        with pytest.raises(MarginExceeded):
            shift_action(GRID.s_max / 3.0, u)

    def test_composition_law(self):
        # shift(a, shift(b, u)) ~ shift(a+b, u), relative 1e-6 at level 0
        rng = np.random.default_rng(11)
        u = random_smooth_function(GRID, rng, windowed=True,
                                   decay_range=(3.3, 3.6), smax_freq=0.4)
        a, b = 0.73, -0.41
        lhs = shift_action(a, shift_action(b, u))
        rhs = shift_action(a + b, u)
        num = norm_at_level(lhs - rhs, 0, W).value
        den = norm_at_level(u, 0, W).value
        assert num / den < 1e-6

    def test_unweighted_l2_invariance(self):
        # delta_0 = 0: translation preserves the level-0 norm up to
        # interpolation error
        w0 = WeightSequence((0.0, 1.0, 2.0, 3.0))
        rng = np.random.default_rng(12)
        u = random_smooth_function(GRID, rng, windowed=True,
                                   decay_range=(3.3, 3.6), smax_freq=0.4)
        v = shift_action(0.9, u)
        a = norm_at_level(u, 0, w0).value
        b = norm_at_level(v, 0, w0).value
        assert abs(a - b) / a < 1e-6

    def test_weighted_norm_bounded_by_exponential_factor(self):
        t0 = 0.8
        rng = np.random.default_rng(13)
        u = random_smooth_function(GRID, rng, windowed=True,
                                   decay_range=(3.4, 3.8), smax_freq=0.4)
        v = shift_action(t0, u)
        a = norm_at_level(u, 0, W).value
        b = norm_at_level(v, 0, W).value
        assert b <= a * np.exp(W.delta(0) * abs(t0)) * (1 + 1e-9)


class TestEmbeddingGap:
    W_SOFT = WeightSequence((0.5, 1.0, 1.5, 2.0))

    def family(self, K):
        grid = CylinderGrid(s_max=20.0, n_s=513, n_t=32)
        out = []
        for k in range(1, K + 1):
            u = make_pair(grid,
                          lambda s, t, k=k: np.exp(-3.0 * s) * np.sin(2 * np.pi * k * t),
                          lambda s, t: 0.0 * s * t, 0.0)
            nrm = norm_at_level(u, 2, self.W_SOFT).value
            out.append(u * (1.0 / nrm))
        return out

    def test_single_element_gap_zero(self):
        fam = self.family(1)
        assert level_embedding_gap(fam, 1, self.W_SOFT) == 0.0

    def test_gap_decays_with_family_size(self):
        gaps = [level_embedding_gap(self.family(K), 1, self.W_SOFT, net_size=6)
                for K in (7, 10, 14)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_unbounded_family_rejected(self):
        fam = self.family(3)
        big = [u * 50.0 for u in fam]
        with pytest.raises(DomainError):
            level_embedding_gap(big, 1, self.W_SOFT)


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(14)
        grid = CylinderGrid(s_max=10.0, n_s=33, n_t=8)
        u = random_smooth_function(grid, rng, n_components=2)
        rec = to_json_record(u)
        assert rec["N"] == 2
        v = from_json_record(rec)
        assert np.allclose(u.plus, v.plus)
        assert np.allclose(u.minus, v.minus)
        assert np.allclose(u.c, v.c)

    def test_shape_mismatch_rejected(self):
        grid = CylinderGrid(s_max=10.0, n_s=33, n_t=8)
        with pytest.raises(GridMismatch):
            ScaleFunction(grid, np.zeros((1, 5, 8)), np.zeros((1, 33, 8)),
                          np.zeros(1))
