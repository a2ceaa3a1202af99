import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdintensity.core import DiagramSample, OmegaBox, PersistenceDiagram
from pdintensity.errors import EmptyDiagramInSample, GridMismatch, PDError
from pdintensity.generators import SyntheticMeasureSpec, gen_synthetic_sample
from pdintensity.kde import (
    GridSpec,
    KernelSpec,
    ScalarField,
    _quadrature_mass,
    density_with_skipped,
    estimate_density,
    estimate_intensity,
    kernel_eval,
    kernel_sum,
    smoothed,
    weighted_sup_error,
)

BOX = OmegaBox(1.0)
GRID = GridSpec.over_box(1.0, 128)


def one(rows, box=BOX):
    return PersistenceDiagram.from_pairs([(b, d, 1) for b, d in rows], box)


def sample_of(*diagrams):
    return DiagramSample(tuple(diagrams), diagrams[0].box)


def node(i, j, grid=GRID):
    return (grid.xs[i], grid.ys[j])


class TestKernel:
    def test_values(self):
        epan = KernelSpec("epanechnikov", 1.0)
        assert kernel_eval(epan, (0.0, 0.0)) == pytest.approx(2 / math.pi, abs=1e-15)
        for fam in ("epanechnikov2d", "quartic2d"):
            k = KernelSpec(fam, 1.0)
            assert kernel_eval(k, (1.5, 0.0)) == 0.0
            assert kernel_eval(k, (0.6, 0.8)) == 0.0
        assert kernel_eval(KernelSpec("quartic", 1.0), (0.0, 0.0)) == pytest.approx(3 / math.pi)

    @pytest.mark.parametrize("fam", ["epanechnikov2d", "quartic2d"])
    def test_normalised(self, fam):
        assert _quadrature_mass(fam) == pytest.approx(1.0, abs=1e-6)

    def test_scaled(self):
        k = KernelSpec("epanechnikov", 0.1)
        assert k.scaled(np.zeros(2)) == pytest.approx((2 / math.pi) / 0.01)

    @pytest.mark.parametrize("kw", [dict(family="gauss"), dict(h=0.0), dict(h=-1.0)])
    def test_validation(self, kw):
        with pytest.raises(PDError):
            KernelSpec(**kw)


class TestIntensity:
    def test_single_point_peak(self):
        p = node(20, 90)
        f = estimate_intensity(sample_of(one([p])), KernelSpec("epanechnikov", 0.1), GRID)
        assert f.values[90, 20] == pytest.approx(63.6619772, abs=1e-6)

    def test_compact_support(self):
        rng = np.random.default_rng(1)
        sample = gen_synthetic_sample(SyntheticMeasureSpec(seed=1), 20)
        h = 0.05
        f = estimate_intensity(sample, KernelSpec("epanechnikov", h), GRID)
        pts, _ = sample.pooled()
        nodes = GRID.nodes().reshape(-1, 2)
        dmin = np.min(np.hypot(nodes[:, None, 0] - pts[None, :, 0], nodes[:, None, 1] - pts[None, :, 1]), axis=1)
        assert np.all(f.values.reshape(-1)[dmin > h] == 0.0)

    def test_duplicate_sample_same_field(self):
        dg = one([(0.2, 0.6), (0.3, 0.5)])
        k = KernelSpec("quartic", 0.07)
        a = estimate_intensity(sample_of(dg), k, GRID)
        b = estimate_intensity(sample_of(dg, dg), k, GRID)
        np.testing.assert_allclose(a.values, b.values, rtol=1e-14, atol=0)

    def test_matches_direct_summation(self):
        sample = gen_synthetic_sample(SyntheticMeasureSpec(seed=5), 4)
        k = KernelSpec("epanechnikov", 0.06)
        grid = GridSpec.over_box(1.0, 32)
        f = estimate_intensity(sample, k, grid)
        pts, _ = sample.pooled()
        nodes = grid.nodes()
        direct = sum(k.scaled(nodes - p) for p in pts) / sample.n
        np.testing.assert_allclose(f.values, direct, rtol=1e-12, atol=1e-12)

    def test_empty_diagrams_count_in_n(self):
        dg = one([node(40, 80)])
        k = KernelSpec("epanechnikov", 0.05)
        a = estimate_intensity(sample_of(dg), k, GRID)
        b = estimate_intensity(sample_of(dg, PersistenceDiagram.empty(BOX)), k, GRID)
        np.testing.assert_allclose(b.values, a.values / 2, rtol=1e-15)

    def test_linearity(self):
        k = KernelSpec("epanechnikov", 0.05)
        s1 = gen_synthetic_sample(SyntheticMeasureSpec(seed=1), 7)
        s2 = gen_synthetic_sample(SyntheticMeasureSpec(seed=2), 13)
        f1, f2 = estimate_intensity(s1, k, GRID), estimate_intensity(s2, k, GRID)
        f12 = estimate_intensity(s1.concat(s2), k, GRID)
        np.testing.assert_allclose(f12.values, (7 * f1.values + 13 * f2.values) / 20, rtol=1e-12, atol=1e-12)

    def test_halving_h_quadruples_peak(self):
        p = node(60, 100)
        peaks = [estimate_intensity(sample_of(one([p])), KernelSpec("quartic", h), GRID).values[100, 60]
                 for h in (0.1, 0.05)]
        assert peaks[1] / peaks[0] == pytest.approx(4.0, rel=1e-9)


class TestDensity:
    def test_single_point_equals_intensity(self):
        k = KernelSpec("epanechnikov", 0.05)
        s = sample_of(one([(0.3, 0.7)]))
        np.testing.assert_array_equal(estimate_density(s, k, GRID).values, estimate_intensity(s, k, GRID).values)

    def test_two_far_points_half_peak(self):
        k = KernelSpec("epanechnikov", 0.02)
        p, q = node(10, 100), node(60, 120)
        f = estimate_density(sample_of(one([p, q])), k, GRID)
        assert f.values[100, 10] == pytest.approx(0.5 * (2 / math.pi) / 0.02**2, rel=1e-12)

    def test_mass_interior(self):
        spec = SyntheticMeasureSpec(seed=4)
        sample = gen_synthetic_sample(spec, 200)
        h = 0.05
        assert spec.support_margin() >= h + 2 * GRID.cell
        f, skipped = density_with_skipped(sample, KernelSpec("epanechnikov", h), GRID, skip_empty=True)
        assert 0.98 <= f.integral() <= 1.02

    def test_empty_diagram_policy(self):
        s = sample_of(one([(0.3, 0.7)]), PersistenceDiagram.empty(BOX))
        k = KernelSpec("epanechnikov", 0.05)
        with pytest.raises(EmptyDiagramInSample, match="diagram 1"):
            estimate_density(s, k, GRID)
        f, skipped = density_with_skipped(s, k, GRID, skip_empty=True)
        assert skipped == 1
        np.testing.assert_array_equal(f.values, estimate_density(sample_of(one([(0.3, 0.7)])), k, GRID).values)


class TestSupError:
    def test_zero_and_plain(self):
        f = GRID.field(np.random.default_rng(0).uniform(size=GRID.shape))
        assert weighted_sup_error(f, f, domain="full").value == 0.0
        g = f.with_values(f.values * 0)
        assert weighted_sup_error(f, g, q=0, domain="full").value == f.values.max()

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            weighted_sup_error(GRID.field(), GridSpec.over_box(1.0, 64).field())

    def test_error_shrinks_with_n(self):
        # wide bump so that the error against the unsmoothed truth is variance-dominated at h = 0.05
        from pdintensity.harness import support_grid

        base = SyntheticMeasureSpec(density_id="bump", L=20.0)
        grid = support_grid(base, 0.05, cells=200)
        k = KernelSpec("epanechnikov", 0.05)
        wins = 0
        for batch in range(10):
            errs = []
            for n in (10, 1000):
                s = gen_synthetic_sample(SyntheticMeasureSpec(density_id="bump", L=20.0, seed=100 + batch), n)
                est = estimate_intensity(s, k, grid)
                errs.append(weighted_sup_error(est, base.intensity, q=1, h=0.05, box=base.box).value)
            wins += errs[1] < errs[0]
        assert wins >= 9

    def test_omega_2h_domain(self):
        truth = GRID.field()
        est = truth.with_values(np.ones(GRID.shape))
        res = weighted_sup_error(est, truth, q=1.0, h=0.1)
        dmax = max((d - b) / math.sqrt(2) for b in GRID.xs for d in GRID.ys if d > b)
        assert res.value == pytest.approx(dmax - 0.1)
        assert weighted_sup_error(est, truth, q=1.0, h=1.0).empty


class TestSmoothed:
    @pytest.mark.parametrize("fam,moment", [("epanechnikov2d", 1 / 3), ("quartic2d", 1 / 4)])
    def test_quadratic_exact(self, fam, moment):
        # K_h * |x|^2 = |x|^2 + h^2 * int |u|^2 K(u) du
        h = 0.2
        grid = GridSpec((-1.0, -1.0), 0.25, 8, 8)
        f = smoothed(lambda p: (p**2).sum(axis=-1), KernelSpec(fam, h), grid)
        exact = (grid.nodes() ** 2).sum(axis=-1) + h**2 * moment
        np.testing.assert_allclose(f.values, exact, rtol=1e-12)

    def test_bias_order_two(self):
        spec = SyntheticMeasureSpec(density_id="bump", L=20.0)
        hs = [0.2, 0.1, 0.05, 0.025]
        from pdintensity.harness import fit_rate, support_grid

        grid = support_grid(spec, max(hs))
        truth = grid.field(spec.density(grid.nodes()))
        support = [(b.center, b.radius) for _, b in spec.components]
        errs = [weighted_sup_error(smoothed(spec.density, KernelSpec("epanechnikov", h), grid, support=support),
                                   truth, domain="full").value for h in hs]
        slope, _, _ = fit_rate(list(zip(hs, errs)))
        assert 1.5 <= slope <= 2.5


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.floats(0.02, 0.2), st.integers(0, 2**31))
def test_intensity_mass_preserved_inside(n_pts, h, seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0.3, 0.4, n_pts)
    d = rng.uniform(0.6, 0.7, n_pts)
    s = sample_of(one(list(zip(b, d))))
    f = estimate_intensity(s, KernelSpec("epanechnikov", h), GridSpec.over_box(1.0, 256))
    # each bump integrates to ~1 on a fine grid; the error is second order in cell / h
    assert f.integral() == pytest.approx(n_pts, rel=0.02)
