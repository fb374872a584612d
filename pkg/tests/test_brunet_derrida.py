import math

import numpy as np
import pytest
from scipy.integrate import quad

from frontlab.brunet_derrida import (
    INF_THRESHOLD,
    BDReport,
    bd_lhs,
    bd_report,
    bd_rhs,
    r0_of,
    speed_from_r0,
)
from frontlab.errors import DomainError
from frontlab.initial_conditions import (
    BetaWave,
    ExpMixture,
    Heaviside,
    PowerExpTail,
    Tabulated,
    Wave,
)
from frontlab.solver import FrontTrace, Grid, solve_obstacle
from frontlab.waves import SQRT2, Pi_beta_min, Pi_c


class TestLeftSide:
    def test_minimal_wave_closed_form(self):
        want = (2.0 * SQRT2 - 1.0) / (1.0 - SQRT2) ** 2
        assert bd_lhs(Wave(SQRT2), 1.0) == pytest.approx(want, abs=1e-10)

    def test_step_data_vanishes(self):
        assert bd_lhs(Heaviside(), -1.0) == 0.0
        assert bd_lhs(Heaviside(), 1.3) == 0.0

    def test_unit_exponential(self):
        assert bd_lhs(PowerExpTail(1.0, 0.0, 1.0), 0.5) == pytest.approx(2.0, rel=1e-9)

    def test_quadrature_oracle(self):
        cases = [
            (Wave(1.7), 0.4),
            (BetaWave(2.0), -0.5),
            (PowerExpTail(1.0, -3.0, SQRT2), 1.0),
            (ExpMixture(rates=(2.0, 3.0), amps=(3.0, -2.0)), 0.7),
        ]
        for ic, r in cases:
            want, _ = quad(
                lambda x: float(ic(np.asarray(x))) * math.exp(r * x),
                ic.L0, ic.L0 + 120.0, limit=400,
            )
            assert bd_lhs(ic, r) == pytest.approx(want, rel=1e-7)

    def test_divergence_flag(self):
        assert math.isinf(bd_lhs(PowerExpTail(1.0, 0.0, 1.0), 1.2))
        assert math.isinf(bd_lhs(Wave(1.5), 1.0))  # r equals the tail rate

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            bd_lhs(Heaviside(), 0.0)
        with pytest.raises(DomainError):
            bd_lhs(Heaviside(), SQRT2)
        with pytest.raises(DomainError):
            bd_lhs(Heaviside(), 2.0)


class TestRightSide:
    def test_exact_linear_front(self):
        front = FrontTrace.linear(SQRT2, 60.0, 5e-4)
        rep = bd_rhs(front, 0.0, 1.0, tail_speed=SQRT2)
        want = (2.0 * SQRT2 - 1.0) / (1.0 - SQRT2) ** 2
        assert rep.rhs == pytest.approx(want, abs=1e-8)
        assert rep.tail_fraction < 0.05

    def test_constant_front_calculus(self):
        # quadrature-path check only; a flat boundary is not a real front
        ts = np.arange(0.0, 30.0005, 0.001)
        front = FrontTrace(ts, np.zeros(len(ts)))
        rep = bd_rhs(front, 0.0, -1.0, tail_speed=0.0)
        assert rep.rhs == pytest.approx(1.0 / 3.0, abs=1e-6)

    def test_divergent_tail_flag(self):
        front = FrontTrace.linear(1.5, 40.0, 0.01)
        rep = bd_rhs(front, 0.0, 1.2)  # 1.2 * 1.5 = 1.8 >= 1 + 0.72
        assert math.isinf(rep.rhs)

    def test_refinement_within_error_estimate(self):
        fine = FrontTrace.linear(SQRT2, 60.0, 0.025)
        coarse = FrontTrace.linear(SQRT2, 60.0, 0.05)
        rf = bd_rhs(fine, 0.0, 0.5, tail_speed=SQRT2)
        rc = bd_rhs(coarse, 0.0, 0.5, tail_speed=SQRT2)
        assert abs(rf.rhs - rc.rhs) <= rc.quad_err + 1e-12

    def test_infinite_value_convention(self):
        assert INF_THRESHOLD == 1e12


class TestIdentity:
    @pytest.fixture(scope="class")
    def powexp_run(self):
        ic = PowerExpTail(1.0, 0.0, 1.0)
        grid = Grid.around_interface(ic, 0.05, 60.0)
        return ic, solve_obstacle(ic, grid, 30.0, dt_out=0.05)

    def test_relative_identity(self, powexp_run):
        ic, res = powexp_run
        for r in (-1.0, 0.5):
            rep = bd_report(ic, res.front, r)
            assert rep.verdict
            assert rep.rel_err <= 0.02
            assert rep.tail_fraction <= 0.05

    def test_degenerate_zero_side(self, powexp_run):
        _, res = powexp_run
        ic = Heaviside()
        grid = Grid.around_interface(ic, 0.05, 44.0)
        resH = solve_obstacle(ic, grid, 30.0, dt_out=0.05)
        rep = bd_report(ic, resH.front, -1.0)
        assert rep.lhs == 0.0
        assert abs(rep.rhs) <= 0.03  # grid staircase bounds the defect
        assert rep.verdict

    def test_finiteness_dichotomy(self, powexp_run):
        ic, res = powexp_run
        rep = bd_report(ic, res.front, 1.2)
        assert math.isinf(rep.lhs) and math.isinf(rep.rhs)
        assert rep.verdict  # both sides flagged together

    def test_report_row_format(self):
        rep = BDReport(0.5, 1.0, 1.01, 0.01, 0.001, True)
        row = rep.row()
        assert row.split(",")[-1] == "pass"
        assert len(row.split(",")) == 6


class TestCriticalRate:
    def test_parametric_families(self):
        assert r0_of(Heaviside()) == SQRT2
        assert r0_of(PowerExpTail(1.0, 0.0, 1.0)) == 1.0
        assert r0_of(Wave(1.5)) == pytest.approx(1.0, abs=1e-14)

    def test_tabulated_bisection(self):
        xs = np.linspace(-2.0, 30.0, 500)
        us = np.clip(np.exp(-0.8 * np.clip(xs, 0.0, None)), 0.0, 1.0)
        with pytest.warns(UserWarning):
            ic = Tabulated(tuple(xs), tuple(us))
            r0 = r0_of(ic)
        assert r0 == pytest.approx(0.8, abs=0.02)

    def test_speed_law(self):
        assert speed_from_r0(SQRT2) == pytest.approx(SQRT2, abs=1e-14)
        assert speed_from_r0(1.0) == 1.5
        assert math.isinf(speed_from_r0(0.0))
        with pytest.raises(DomainError):
            speed_from_r0(2.0)
        with pytest.raises(DomainError):
            speed_from_r0(-0.1)
