import numpy as np
import pytest

from efgeo import identity
from efgeo.errors import ConfigError, VerificationFailure
from efgeo.grid import Grid1D

# independent oracle: closed-form metric integrated against the gaussian
# density with a 2^18-point rectangle rule
T_GEO_AT_ZERO = 1.6715843808924357e-10


class TestGeometricEnergySeries:
    def test_regression_against_fine_quadrature(self, params, grid4096):
        value = identity.t_geo_series(params, grid4096, [0.0])[0]
        assert value == pytest.approx(T_GEO_AT_ZERO, rel=5e-8)

    def test_positive_along_trajectory(self, params, grid4096):
        series = identity.t_geo_series(params, grid4096, np.linspace(0.0, 10.0, 21))
        assert np.all(series > 0.0)


class TestLhsRate:
    def test_constant_series(self):
        assert np.max(np.abs(identity.lhs_rate(np.full(9, 3.3), 0.1))) <= 1e-12

    def test_linear_ramp_exact(self):
        t = 0.05 * np.arange(12)
        rate = identity.lhs_rate(2.5 * t, 0.05)
        assert np.max(np.abs(rate - 2.5)) <= 1e-11

    def test_quartic_exact(self):
        # 4th-order stencils differentiate polynomials up to degree 4 exactly
        t = 0.1 * np.arange(15)
        rate = identity.lhs_rate(t ** 4, 0.1)
        assert np.max(np.abs(rate - 4.0 * t ** 3)) <= 1e-10

    def test_too_few_points(self):
        with pytest.raises(ConfigError):
            identity.lhs_rate(np.ones(4), 0.1)

    @pytest.mark.parametrize("t", [0.5, 1.5])
    def test_step_size_self_consistency(self, params, grid4096, t):
        coarse = identity._rate_local(params, grid4096, t, 1e-3)
        fine = identity._rate_local(params, grid4096, t, 1e-4)
        assert abs(coarse - fine) <= 1e-8 * max(1.0, abs(fine))


class TestRhsTerms:
    @pytest.mark.parametrize("t", [0.3, 2.1])
    def test_flux_term_is_negligible(self, params, grid4096, t):
        terms = identity.rhs_terms(params, grid4096, t, "B")
        assert abs(terms.t3) <= 1e-10

    def test_reading_b_matches_rate(self, params, grid4096):
        t = 1.6
        lhs = identity._rate_local(params, grid4096, t, 1e-4)
        total_b = identity.rhs_terms(params, grid4096, t, "B").total
        total_a = identity.rhs_terms(params, grid4096, t, "A").total
        assert abs(lhs - total_b) <= 1e-9 * max(1.0, abs(lhs))
        assert abs(lhs - total_a) > 1e3 * abs(lhs - total_b)

    def test_unknown_reading_and_mutation(self, params, grid4096):
        with pytest.raises(ConfigError):
            identity.rhs_terms(params, grid4096, 0.5, "C")
        with pytest.raises(ConfigError):
            identity.rhs_terms(params, grid4096, 0.5, "B", mutation="flip_t9")

    @pytest.mark.parametrize("t", [0.4, 1.0, 3.0])
    def test_general_form_agrees_with_model_form(self, params, grid4096, t):
        terms = identity.rhs_terms(params, grid4096, t, "B")
        gen = identity.rhs_general(params, grid4096, t)
        scale = max(1.0, abs(gen.force), abs(gen.transport))
        assert gen.curvature == 0.0
        assert abs(gen.force - (terms.t1 + terms.t2)) <= 1e-12 * scale
        assert abs(gen.transport - terms.t4) <= 1e-12 * scale


class TestPointwiseBalance:
    def test_model_residual_small(self, params, grid4096):
        rep = identity.pointwise_check(params, grid4096, 0.5)
        assert rep.rel_residual <= 1e-4

    def test_refinement_reduces_residual(self, params):
        coarse = identity.pointwise_check(params, Grid1D(-4.0, 6.0, 1024), 0.5, delta_t=2e-2)
        fine = identity.pointwise_check(params, Grid1D(-4.0, 6.0, 2048), 0.5, delta_t=5e-3)
        assert coarse.rel_residual / fine.rel_residual >= 8.0


class TestVerify:
    def test_short_range_passes_with_reading_b(self, params):
        grid = Grid1D(-4.0, 6.0, 2048)
        report = identity.verify(params, grid, 0.0, 1.0, samples=6, delta_t=2e-4)
        assert report.passed
        assert report.winner == "B"
        assert report.rel_residual("A") > report.rel_residual("B")

    def test_single_point_range_rejected(self, params, grid4096):
        with pytest.raises(ConfigError):
            identity.verify(params, grid4096, 1.0, 1.0, samples=1)

    def test_sign_flip_mutation_fails(self, params):
        grid = Grid1D(-4.0, 6.0, 2048)
        with pytest.raises(VerificationFailure) as err:
            identity.verify(params, grid, 0.0, 1.0, samples=4, delta_t=2e-4, mutation="flip_t2")
        assert err.value.report is not None
        assert not err.value.report.passed

    def test_wrong_reading_plateaus_under_refinement(self, params):
        # the adjudication signature: the consistent reading converges while
        # the unweighted one stalls at a finite offset
        rels = {}
        for n in (1024, 2048):
            grid = Grid1D(-4.0, 6.0, n)
            rep = identity.verify(params, grid, 0.0, 2.0, samples=5,
                                  delta_t=2e-4, rel_tol=1.0)
            rels[n] = (rep.rel_residual("A"), rep.rel_residual("B"))
        assert rels[1024][1] / rels[2048][1] >= 10.0
        assert 0.5 <= rels[1024][0] / rels[2048][0] <= 2.0

    def test_report_round_trip(self, params, tmp_path):
        grid = Grid1D(-4.0, 6.0, 1024)
        report = identity.verify(params, grid, 0.0, 0.5, samples=5, delta_t=4e-4, rel_tol=1e-2)
        report.write_csv(tmp_path / "series.csv")
        report.write_json(tmp_path / "report.json")
        lines = (tmp_path / "series.csv").read_text().splitlines()
        assert lines[0] == "t,lhs,rhs_a,rhs_b,residual_a,residual_b"
        assert len(lines) == 6
        import json

        data = json.loads((tmp_path / "report.json").read_text())
        assert data["winner"] == "B"
        assert data["passed"] is True


class TestTrivialFamily:
    def test_static_single_surface_balance_is_zero(self, grid1024):
        # static gaussian with a position-independent spinor under zero
        # potential: every term of the pointwise balance vanishes
        from efgeo import ef

        grid = grid1024
        chi = np.exp(-((grid.x - 0.5) ** 2) / (2.0 * 0.49))
        chi = chi / np.sqrt(grid.integrate(chi ** 2))
        psi = ef.TwoComponentWavefunction(
            grid=grid, psi1=(0.8 * chi).astype(complex), psi2=(0.6 * chi).astype(complex)
        )
        dec = ef.decompose(psi, inertia=0.1)
        m = dec.mask
        assert np.max(np.abs(dec.metric[m])) <= 1e-13
        assert np.max(np.abs(dec.c_tensor[m])) <= 1e-13
        assert abs(ef.energies(dec).geometric) <= 1e-15
