"""State embedding, fidelity, priors, and the random-guess baseline."""

from __future__ import annotations

import math

import numpy as np
import pytest

from blochest.core import (
    CONSTRUCTION_TOL,
    EmbeddedBloch,
    PriorKind,
    build_prior,
    clamp_fidelity,
    embed,
    fidelity,
    random_guess_fidelity,
    sample_states,
)
from blochest.quadrature import adaptive_quad

RANDOM_GUESS_FULL = 0.5 + 8.0 / (9.0 * math.pi**2)


class TestEmbedding:
    def test_unit_four_norm(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            v = rng.normal(size=3)
            v *= rng.uniform(0.0, 1.0) / np.linalg.norm(v)
            e = embed(v)
            norm2 = e.time_component**2 + float(e.spatial @ e.spatial)
            assert abs(norm2 - 1.0) <= 1e-12
            assert e.time_component >= 0.0

    def test_clamps_tiny_overshoot(self):
        e = embed((1.0 + 0.5 * CONSTRUCTION_TOL, 0.0, 0.0))
        assert e.time_component == 0.0
        assert np.linalg.norm(e.spatial) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_clear_overshoot(self):
        with pytest.raises(ValueError):
            embed((1.0 + 1e-6, 0.0, 0.0))

    def test_vec4_layout(self):
        e = embed((0.6, 0.0, 0.0))
        assert e.vec4 == pytest.approx([0.8, 0.6, 0.0, 0.0], abs=1e-15)


class TestFidelity:
    def test_identity_case(self):
        a = embed((0.3, -0.2, 0.5))
        assert fidelity(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_antipodal_pure_states(self):
        a = embed((1.0, 0.0, 0.0))
        b = embed((-1.0, 0.0, 0.0))
        assert fidelity(a, b) == pytest.approx(0.0, abs=1e-15)

    def test_mixed_antipodal_direct_substitution(self):
        a = embed((0.6, 0.0, 0.0))
        b = embed((-0.6, 0.0, 0.0))
        # (1 - 0.36 + 0.8 * 0.8) / 2
        assert fidelity(a, b) == pytest.approx(0.64, abs=1e-15)

    def test_symmetric_exactly_and_self_unity(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            va = rng.normal(size=3)
            vb = rng.normal(size=3)
            va *= rng.uniform(0, 1) / np.linalg.norm(va)
            vb *= rng.uniform(0, 1) / np.linalg.norm(vb)
            a, b = embed(va), embed(vb)
            assert fidelity(a, b) == fidelity(b, a)
            assert abs(fidelity(a, a) - 1.0) <= 1e-12

    def test_clamp(self):
        assert clamp_fidelity(1.0 + 1e-16) == 1.0
        assert clamp_fidelity(-1e-17) == 0.0
        assert clamp_fidelity(0.25) == 0.25


def _radial_moment_oracle(kind: PriorKind, power: int) -> float:
    """<r^power> via adaptive integration in s = 1 - r^2 (independent of the
    sin-substituted Gauss rule the priors use)."""
    base = 2 if kind is PriorKind.FULL_BURES else 1

    def weight(s, extra):
        r2 = 1.0 - s
        return r2 ** (0.5 * (base + extra - 1)) / (2.0 * np.sqrt(s))

    num = adaptive_quad(lambda s: weight(s, power), 0.0, 1.0, abs_tol=1e-12).value
    den = adaptive_quad(lambda s: weight(s, 0), 0.0, 1.0, abs_tol=1e-12).value
    return num / den


class TestPriors:
    @pytest.mark.parametrize("kind", list(PriorKind))
    @pytest.mark.parametrize("orders", [(2, 2), (8, 16), (64, 64), (128, 256)])
    def test_total_weight_normalized(self, kind, orders):
        p = build_prior(kind, *orders)
        assert p.total_weight() == pytest.approx(1.0, abs=1e-10)

    def test_equatorial_r_squared_moment(self):
        # ∫ r^2 dρ over the equatorial ensemble; closed form 2/3, checked
        # against the adaptive oracle as well.
        p = build_prior(PriorKind.EQUATORIAL_BURES, 64, 64)
        grid = float(p.radial_w @ p.radial_r**2)
        oracle = _radial_moment_oracle(PriorKind.EQUATORIAL_BURES, 2)
        assert oracle == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert grid == pytest.approx(oracle, abs=1e-8)

    @pytest.mark.parametrize("kind,power,closed", [
        (PriorKind.FULL_BURES, 1, 8.0 / (3.0 * math.pi)),
        (PriorKind.FULL_BURES, 2, 0.75),
        (PriorKind.EQUATORIAL_BURES, 1, math.pi / 4.0),
        (PriorKind.EQUATORIAL_BURES, 2, 2.0 / 3.0),
    ])
    def test_radial_moments_vs_adaptive_oracle(self, kind, power, closed):
        p = build_prior(kind, 64, 32)
        grid = float(p.radial_w @ p.radial_r**power)
        oracle = _radial_moment_oracle(kind, power)
        assert oracle == pytest.approx(closed, abs=1e-10)
        assert grid == pytest.approx(oracle, abs=1e-8)

    def test_radial_time_components_match(self):
        p = build_prior(PriorKind.FULL_BURES, 32, 16)
        assert np.allclose(p.radial_t**2 + p.radial_r**2, 1.0, atol=1e-14)

    def test_directions_unit(self):
        for kind in PriorKind:
            p = build_prior(kind, 8, 12)
            norms = np.linalg.norm(p.directions, axis=1)
            assert np.allclose(norms, 1.0, atol=1e-14)
        eq = build_prior(PriorKind.EQUATORIAL_BURES, 8, 12)
        assert np.all(eq.directions[:, 2] == 0.0)

    def test_orders_validated(self):
        with pytest.raises(ValueError):
            build_prior(PriorKind.FULL_BURES, 1, 8)
        with pytest.raises(ValueError):
            build_prior(PriorKind.FULL_BURES, 8, 1)


class TestRandomGuessFidelity:
    def test_full_value_high_order(self):
        p = build_prior(PriorKind.FULL_BURES, 64, 64)
        assert random_guess_fidelity(p) == pytest.approx(RANDOM_GUESS_FULL, abs=1e-6)

    def test_full_value_default_orders(self, full_prior):
        assert random_guess_fidelity(full_prior) == pytest.approx(RANDOM_GUESS_FULL, abs=1e-9)

    def test_low_order_ballpark(self):
        # The coarsest admissible grid already lands close (1.34e-2 off);
        # one more node brings it under 1e-3.
        p2 = build_prior(PriorKind.FULL_BURES, 2, 2)
        assert random_guess_fidelity(p2) == pytest.approx(RANDOM_GUESS_FULL, abs=2e-2)
        p3 = build_prior(PriorKind.FULL_BURES, 3, 3)
        assert random_guess_fidelity(p3) == pytest.approx(RANDOM_GUESS_FULL, abs=1e-3)

    def test_monotone_convergence_under_doubling(self):
        errs = []
        for order in (2, 4, 8, 16, 32, 64):
            p = build_prior(PriorKind.FULL_BURES, order, order)
            errs.append(abs(random_guess_fidelity(p) - RANDOM_GUESS_FULL))
        for coarse, fine in zip(errs, errs[1:]):
            assert fine <= coarse + 1e-15

    def test_equatorial_analogue(self, eq_prior):
        # (1 + <r>^2)/2 with <r> = pi/4 for the planar ensemble: 0.625.
        assert random_guess_fidelity(eq_prior) == pytest.approx(0.625, abs=1e-9)

    def test_equals_double_average_identity(self, full_prior):
        # The baseline is the prior-averaged fidelity of the prior-mean guess:
        # F_rand = (1 + |<𝐫>|^2) / 2.
        m = full_prior.mean_embedding()
        assert random_guess_fidelity(full_prior) == pytest.approx(
            0.5 * (1.0 + float(m @ m)), abs=1e-12
        )


class TestSampleStates:
    @pytest.mark.parametrize("kind", list(PriorKind))
    def test_shapes_and_embedding(self, kind):
        rng = np.random.default_rng(5)
        t, vecs = sample_states(kind, 500, rng)
        assert t.shape == (500,)
        assert vecs.shape == (500, 3)
        assert np.allclose(t**2 + np.einsum("ij,ij->i", vecs, vecs), 1.0, atol=1e-12)
        assert np.all(t >= 0.0)

    def test_equatorial_confined_to_plane(self):
        rng = np.random.default_rng(6)
        _, vecs = sample_states(PriorKind.EQUATORIAL_BURES, 200, rng)
        assert np.all(vecs[:, 2] == 0.0)

    def test_full_leaves_plane(self):
        rng = np.random.default_rng(7)
        _, vecs = sample_states(PriorKind.FULL_BURES, 200, rng)
        assert np.any(np.abs(vecs[:, 2]) > 0.1)

    @pytest.mark.parametrize("kind,second_moment", [
        (PriorKind.FULL_BURES, 0.75),
        (PriorKind.EQUATORIAL_BURES, 2.0 / 3.0),
    ])
    def test_radial_second_moment(self, kind, second_moment):
        rng = np.random.default_rng(8)
        t, vecs = sample_states(kind, 40_000, rng)
        r2 = np.einsum("ij,ij->i", vecs, vecs)
        stderr = r2.std(ddof=1) / math.sqrt(r2.size)
        assert abs(r2.mean() - second_moment) <= 4.0 * stderr

    def test_reproducible_for_fixed_seed(self):
        a = sample_states(PriorKind.FULL_BURES, 50, np.random.default_rng(42))
        b = sample_states(PriorKind.FULL_BURES, 50, np.random.default_rng(42))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestEmbeddedBlochValidation:
    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            EmbeddedBloch(-0.5, np.array([math.sqrt(0.75), 0.0, 0.0]))

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError):
            EmbeddedBloch(0.5, np.array([0.5, 0.0, 0.0]))
