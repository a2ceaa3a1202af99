import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from pdintensity.core import (
    DiagramSample,
    OmegaBox,
    PersistenceDiagram,
    diag_distance,
    diag_projection,
    mass_above,
    omega_weighted_volume,
    total_persistence,
)
from pdintensity.errors import InvalidDiagram, InvalidQ, PDError

from conftest import diagrams, random_diagram

SQ2 = math.sqrt(2.0)


def _numeric_projection(p):
    res = optimize.minimize_scalar(lambda t: (p[0] - t) ** 2 + (p[1] - t) ** 2)
    return res.x, math.sqrt(res.fun)


def _quad_volume(q, L):
    val, _ = integrate.dblquad(
        lambda d, b: ((d - b) / SQ2) ** q, 0.0, L, lambda b: b, lambda b: L,
        epsabs=0.0, epsrel=1e-11,
    )
    return val


class TestDiagDistance:
    @pytest.mark.parametrize("p,expected", [((1.0, 1.0), 0.0), ((0.0, 2.0), SQ2)])
    def test_trivial(self, p, expected):
        assert diag_distance(p) == pytest.approx(expected, abs=1e-15)

    def test_against_minimisation(self):
        t, dist = _numeric_projection((0.1, 0.5))
        assert diag_distance((0.1, 0.5)) == pytest.approx(dist, rel=1e-7)
        assert diag_distance((0.1, 0.5)) == pytest.approx(0.28284271, abs=1e-8)

    def test_vectorised(self):
        pts = np.array([[0.0, 2.0], [0.1, 0.5]])
        np.testing.assert_allclose(diag_distance(pts), [SQ2, 0.4 / SQ2])


class TestProjection:
    @pytest.mark.parametrize("p,expected", [((0.0, 2.0), (1.0, 1.0)), ((0.3, 0.3), (0.3, 0.3))])
    def test_trivial(self, p, expected):
        assert tuple(diag_projection(p)) == pytest.approx(expected)

    def test_against_minimisation(self):
        t, _ = _numeric_projection((0.1, 0.5))
        assert tuple(diag_projection((0.1, 0.5))) == pytest.approx((t, t), abs=1e-7)

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_idempotent(self, b, d):
        p = diag_projection((b, d))
        assert tuple(diag_projection(p)) == tuple(p)


class TestDiagramConstruction:
    def test_drops_zero_persistence_and_essential(self, box1):
        dg = PersistenceDiagram.from_pairs([(0.1, 0.1, 0), (0.0, math.inf, 0), (0.2, 0.4, 1)], box1)
        assert len(dg) == 1
        assert list(dg)[0] == (0.2, 0.4, 1)

    def test_cap_essential(self, box1):
        dg = PersistenceDiagram.from_pairs([(0.0, math.inf, 0)], box1, cap_essential=True)
        assert dg.sorted_rows() == [(0.0, 1.0, 0)]

    @pytest.mark.parametrize("row", [(0.5, 0.2, 1), (-0.1, 0.5, 1), (0.1, 1.5, 1)])
    def test_rejects_outside_omega(self, box1, row):
        with pytest.raises(InvalidDiagram):
            PersistenceDiagram.from_pairs([row], box1)

    def test_box_validation(self):
        with pytest.raises(PDError):
            OmegaBox(0.0)

    def test_sample_needs_matching_box(self, box1):
        other = PersistenceDiagram.empty(OmegaBox(2.0))
        with pytest.raises(InvalidDiagram):
            DiagramSample((PersistenceDiagram.empty(box1), other), box1)

    def test_drop_empty(self, box1):
        full = PersistenceDiagram.from_pairs([(0.1, 0.5, 1)], box1)
        s = DiagramSample((full, PersistenceDiagram.empty(box1), full), box1)
        kept, dropped = s.drop_empty()
        assert (kept.n, dropped) == (2, 1)


class TestTotalPersistence:
    def test_examples(self, box1):
        big = PersistenceDiagram.from_pairs([(0.0, 2.0, 1)], OmegaBox(2.0))
        assert total_persistence(big, 2) == pytest.approx(2.0, rel=1e-15)
        assert total_persistence(PersistenceDiagram.empty(box1), 1) == 0.0
        dg = PersistenceDiagram.from_pairs([(0.1, 0.5, 1), (0.2, 0.9, 1)], box1)
        assert total_persistence(dg, 1) == pytest.approx(0.77781746, abs=1e-8)

    def test_rejects_nonpositive_q(self, box1):
        with pytest.raises(InvalidQ):
            total_persistence(PersistenceDiagram.empty(box1), 0.0)

    @settings(max_examples=60, deadline=None)
    @given(diagrams(), diagrams(), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
    def test_additive(self, a, b, q):
        both = total_persistence(a.concat(b), q)
        assert both == pytest.approx(total_persistence(a, q) + total_persistence(b, q), rel=1e-12, abs=1e-300)

    @settings(max_examples=60, deadline=None)
    @given(diagrams(), st.floats(0.1, 10.0), st.sampled_from([1.0, 2.0]))
    def test_homogeneous(self, dg, c, q):
        scaled = PersistenceDiagram.from_pairs(
            [(b * c, d * c, k) for b, d, k in dg], OmegaBox(c)
        )
        assert total_persistence(scaled, q) == pytest.approx(c**q * total_persistence(dg, q), rel=1e-9, abs=1e-300)


class TestMassAbove:
    def test_examples(self, box1):
        assert mass_above(PersistenceDiagram.from_pairs([(0.0, 2.0, 1)], OmegaBox(2.0)), 1.0) == 1
        dg = PersistenceDiagram.from_pairs([(0.1, 0.5, 1), (0.2, 0.9, 1)], box1)
        assert mass_above(dg, 0.3) == 1
        assert mass_above(PersistenceDiagram.empty(box1), 0.1) == 0

    def test_markov_bound_ladder(self):
        rng = np.random.default_rng(3)
        ells = np.arange(0.05, 1 / SQ2 - 1e-9, 0.05)
        for _ in range(200):
            dg = random_diagram(rng, int(rng.integers(0, 12)))
            for q in (1.0, 2.0):
                M = total_persistence(dg, q)
                for ell in ells:
                    assert mass_above(dg, ell) <= M * ell ** (-q) * (1 + 1e-12)


class TestOmegaVolume:
    @pytest.mark.parametrize("q,L,expected", [(0.0, 1.0, 0.5), (1.0, SQ2, 1 / 3), (2.0, 2.0, 2 / 3)])
    def test_examples(self, q, L, expected):
        assert omega_weighted_volume(q, L) == pytest.approx(expected, rel=1e-12)

    def test_small_q_limit(self):
        assert omega_weighted_volume(1e-9, 1.0) == pytest.approx(0.5, rel=1e-8)

    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 3.0])
    @pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
    def test_against_quadrature(self, q, L):
        assert omega_weighted_volume(q, L) == pytest.approx(_quad_volume(q, L), rel=1e-6)
