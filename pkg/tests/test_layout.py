import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dlia import layout as L
from dlia.errors import InvalidParam, InvalidPosition, NonPositiveDistance, OutOfRange


def brute_wrap_distances(sites, shifts, point):
    """Minimum image over the full super-lattice span, not just 7 images."""
    t1, t2 = shifts[1], shifts[2]
    best = np.full(len(sites), np.inf)
    for i in range(-2, 3):
        for j in range(-2, 3):
            img = sites + i * t1 + j * t2
            best = np.minimum(best, np.linalg.norm(img - point, axis=1))
    return best


class TestPathLoss:
    def test_one_km(self):
        assert L.path_loss_db(1.0, 2000.0) == pytest.approx(49 + 30 * math.log10(2000), abs=1e-12)
        assert L.path_loss_db(1.0) == pytest.approx(148.03, abs=0.005)

    def test_doubling(self):
        assert L.path_loss_db(2.0) - L.path_loss_db(1.0) == pytest.approx(40 * math.log10(2), abs=1e-12)
        assert L.path_loss_db(0.6) - L.path_loss_db(0.3) == pytest.approx(12.04, abs=0.005)

    def test_relative_gain_frequency_free(self):
        for f in (900.0, 2000.0, 3500.0):
            diff = L.path_loss_db(0.7, f) - L.path_loss_db(0.2, f)
            assert 10 ** (-diff / 10) == pytest.approx((0.7 / 0.2) ** -4, rel=1e-12)

    @pytest.mark.parametrize("d", [0.0, -1.0])
    def test_nonpositive(self, d):
        with pytest.raises(NonPositiveDistance):
            L.path_loss_db(d)


class TestBuildLayout:
    def test_two_cell(self):
        lay = L.build_layout("two_cell")
        assert lay.n_bs == 2
        assert np.linalg.norm(lay.bs_positions[1] - lay.bs_positions[0]) == pytest.approx(2.0)
        assert lay.bs_tx_power_dbm[0] == lay.bs_tx_power_dbm[1]

    def test_hex_sites(self):
        lay = L.build_layout("hex19_wraparound")
        assert lay.n_bs == 19
        assert len(lay.wrap_shifts) == 7
        np.testing.assert_array_equal(lay.bs_positions[0], [0, 0])
        assert L.build_layout("hex19").kind == "hex19_wraparound"

    def test_hex_tiling_covers_lattice_once(self):
        # every lattice site near the origin is exactly one (site + shift)
        lay = L.build_layout("hex19_wraparound")
        a1 = np.array([2.0, 0.0])
        a2 = np.array([1.0, math.sqrt(3)])
        all_images = (lay.bs_positions[:, None, :] + lay.wrap_shifts[None]).reshape(-1, 2)
        hits = 0
        for q in range(-6, 7):
            for r in range(-6, 7):
                pt = q * a1 + r * a2
                if np.linalg.norm(pt) > 7.0:
                    continue
                n = np.sum(np.linalg.norm(all_images - pt, axis=1) < 1e-9)
                assert n == 1, pt
                hits += 1
        assert hits > 19

    def test_hex_wrap_matches_brute_force(self):
        lay = L.build_layout("hex19_wraparound")
        rng = np.random.default_rng(3)
        for _ in range(50):
            pt = rng.uniform(-4, 4, 2)
            np.testing.assert_allclose(lay.distances(pt), brute_wrap_distances(lay.bs_positions, lay.wrap_shifts, pt), atol=1e-12)

    def test_hex_symmetry_across_cells(self):
        lay = L.build_layout("hex19_wraparound")
        ref = np.sort(lay.distances(lay.bs_positions[0] + np.array([1.0, 0.0])))
        for c in range(19):
            d = np.sort(lay.distances(lay.bs_positions[c] + np.array([1.0, 0.0])))
            np.testing.assert_allclose(d, ref, atol=1e-9)

    def test_linear(self):
        lay = L.build_layout("linear")
        assert lay.n_bs == 20
        xs = np.sort(lay.bs_positions[:, 0])
        np.testing.assert_allclose(np.diff(xs), 2.0)
        assert np.all(lay.bs_positions[:, 1] == 0)

    def test_macro_pico(self):
        lay = L.build_layout("macro_pico", d_over_r=0.5)
        assert lay.n_bs == 20
        assert lay.serving_bs == 19
        assert list(lay.bs_tx_power_dbm[:19]) == [46.0] * 19
        assert lay.bs_tx_power_dbm[19] == 30.0
        dist = lay.distances(lay.reference_position)
        assert dist[0] / dist[19] == pytest.approx(10 ** (16 / 40), rel=1e-12)
        assert dist[0] / dist[19] == pytest.approx(2.512, abs=5e-4)
        rx = L.received_power_dbm(lay, lay.reference_position)
        assert abs(rx[0] - rx[19]) < 1e-9

    @pytest.mark.parametrize("d", [0.25, 1.0, 1.5, 2.0])
    def test_macro_pico_equal_power(self, d):
        lay = L.build_layout("macro_pico", d_over_r=d)
        rx = L.received_power_dbm(lay, lay.reference_position)
        assert abs(rx[0] - rx[19]) < 1e-9

    @pytest.mark.parametrize(
        "kind,kw",
        [("macro_pico", {}), ("macro_pico", {"d_over_r": 0.0}), ("macro_pico", {"d_over_r": 2.5}),
         ("two_cell", {"d_over_r": 0.5}), ("octagon", {}), ("linear", {"n_linear_cells": -1})],
    )
    def test_invalid(self, kind, kw):
        with pytest.raises(InvalidParam):
            L.build_layout(kind, **kw)


class TestLinkBudget:
    def test_two_cell_midpoint(self):
        b = L.link_budget(L.build_layout("two_cell"), snr_ref=100.0)
        assert b.snr == 100.0
        assert b.inr_dom == pytest.approx(100.0, rel=1e-12)
        assert b.inr_rem == 0.0 and b.gamma == 0.0

    def test_hex_gamma_oracle(self):
        lay = L.build_layout("hex19_wraparound")
        d = brute_wrap_distances(lay.bs_positions, lay.wrap_shifts, np.array([1.0, 0.0]))
        rel = np.sort((d[0] / d[1:]) ** 4)[::-1]
        want = rel[1:].sum() / rel[0]
        b = L.link_budget(lay)
        assert b.gamma == pytest.approx(want, rel=1e-12)
        assert 0.3 < b.gamma < 0.45

    def test_linear_gamma_oracle(self):
        # serving at 0, mobile at 1, BSs at 2i for i = -9..10
        rel = {i: (1.0 / abs(2 * i - 1)) ** 4 for i in range(-9, 11) if i != 0}
        dom = rel.pop(1)
        want = sum(rel.values()) / dom
        b = L.link_budget(L.build_layout("linear"))
        assert b.gamma == pytest.approx(want, rel=1e-12)
        assert b.gamma == pytest.approx(0.03, abs=0.005)

    def test_macro_pico_dominant_is_macro(self):
        lay = L.build_layout("macro_pico", d_over_r=0.5)
        b = L.link_budget(lay, snr_ref=10.0)
        assert b.inr_dom == pytest.approx(10.0, rel=1e-9)

    def test_two_dominants(self):
        lay = L.build_layout("hex19_wraparound")
        one = L.link_budget(lay, dominant_count=1)
        two = L.link_budget(lay, dominant_count=2)
        assert two.inr_dom + two.inr_rem == pytest.approx(one.inr_dom + one.inr_rem, rel=1e-12)
        assert two.inr_dom > one.inr_dom

    def test_position_outside(self):
        with pytest.raises(InvalidPosition):
            L.link_budget(L.build_layout("two_cell"), mobile_position=[100.0, 0.0])

    def test_position_on_bs(self):
        with pytest.raises(InvalidPosition):
            L.link_budget(L.build_layout("two_cell"), mobile_position=[0.0, 0.0])

    def test_bad_serving(self):
        with pytest.raises(InvalidParam):
            L.link_budget(L.build_layout("two_cell"), serving_bs=5)

    @settings(max_examples=40, deadline=None)
    @given(c=st.floats(1e-3, 1e6), kind=st.sampled_from(["two_cell", "linear", "hex19_wraparound"]))
    def test_scaling(self, c, kind):
        lay = L.build_layout(kind)
        base = L.link_budget(lay, snr_ref=1.0)
        scaled = L.link_budget(lay, snr_ref=c)
        assert scaled.snr == pytest.approx(c * base.snr, rel=1e-12)
        assert scaled.inr_dom == pytest.approx(c * base.inr_dom, rel=1e-12)
        assert scaled.inr_rem == pytest.approx(c * base.inr_rem, rel=1e-12, abs=1e-300)
        assert scaled.gamma == base.gamma

    def test_negative_rejected(self):
        with pytest.raises(InvalidParam):
            L.LinkBudget(-1.0, 0.0, 0.0, 0.0)
        with pytest.raises(InvalidParam):
            L.LinkBudget(1.0, 1.0, 0.5, 0.2)


class TestFromGamma:
    def test_examples(self):
        b = L.link_budget_from_gamma(100.0, 0.0, 1.0)
        assert (b.inr_dom, b.inr_rem) == (100.0, 0.0)
        b = L.link_budget_from_gamma(100.0, 0.4, 1.0)
        assert b.inr_dom == 100.0 and b.inr_rem == pytest.approx(40.0)

    @settings(max_examples=50, deadline=None)
    @given(snr=st.floats(0, 1e8), gamma=st.floats(0, 10), ratio=st.floats(1e-3, 10))
    def test_round_trip(self, snr, gamma, ratio):
        assert L.link_budget_from_gamma(snr, gamma, ratio).gamma == gamma

    def test_bad_ratio(self):
        with pytest.raises(InvalidParam):
            L.link_budget_from_gamma(1.0, 0.1, 0.0)


class TestKappa:
    def test_examples(self):
        assert L.kappa_policy(0.0) == 0.0
        assert L.kappa_policy(0.4) == pytest.approx(0.6325, abs=1e-4)
        assert abs(L.kappa_policy(0.4) - 0.64) < 0.01
        assert L.kappa_policy(4.0) == 1.0
        assert L.kappa_policy(0.4, "fixed:0.3") == 0.3
        assert L.kappa_policy(0.4, 0.5) == 0.5

    @pytest.mark.parametrize("args", [(-0.1, "auto"), (0.1, "fixed:1.5"), (0.1, "fixed:x"), (0.1, "sometimes")])
    def test_errors(self, args):
        with pytest.raises(OutOfRange):
            L.kappa_policy(*args)

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(0, 100), b=st.floats(0, 100))
    def test_monotone_clipped(self, a, b):
        lo, hi = sorted((a, b))
        ka, kb = L.kappa_policy(lo), L.kappa_policy(hi)
        assert 0 <= ka <= kb <= 1
