import math

import numpy as np
import pytest

from frontlab.errors import DomainError
from frontlab.initial_conditions import (
    BetaWave,
    ExpMixture,
    Heaviside,
    PowerExpTail,
    Tabulated,
    Wave,
    exp_tail,
    finite_initial_mass,
    parse_ic,
)
from frontlab.waves import SQRT2, Pi_beta_min, Pi_c


def admissible(ic, lo=-10.0, hi=60.0):
    xs = np.linspace(lo, hi, 4000)
    v = np.asarray(ic(xs))
    assert np.all((v >= -1e-12) & (v <= 1.0 + 1e-12))
    assert np.all(np.diff(v) <= 1e-12)
    assert ic(np.asarray(lo)) >= 1.0 - 1e-9
    assert ic(np.asarray(hi)) <= 1e-3


class TestHeaviside:
    def test_values(self):
        ic = Heaviside()
        assert ic(np.asarray(-0.001)) == 1.0
        assert ic(np.asarray(0.0)) == 0.0
        assert ic.L0 == 0.0
        assert ic.r0() == SQRT2
        admissible(ic)

    def test_sampler_is_the_atom(self):
        rng = np.random.default_rng(0)
        assert np.all(Heaviside().sample(rng, 100) == 0.0)


class TestPowerExpTail:
    def test_interface_pure_exponential(self):
        ic = PowerExpTail(1.0, 0.0, 1.0)
        assert ic.x_star == 0.0
        assert ic(np.asarray(2.0)) == pytest.approx(math.exp(-2.0), abs=1e-15)
        admissible(ic)

    def test_interface_negative_power(self):
        ic = PowerExpTail(1.0, -2.0, SQRT2)
        # largest root of x^-2 e^{-sqrt2 x} = 1
        assert ic.x_star == pytest.approx(0.63724536, abs=1e-6)
        assert ic(np.asarray(ic.x_star - 0.01)) == 1.0
        admissible(ic)

    def test_shifted_amplitude(self):
        ic = PowerExpTail(math.e, 0.0, 1.0)  # interface moves to 1
        assert ic.x_star == pytest.approx(1.0, abs=1e-12)
        assert exp_tail(2.0, x0=0.5).x_star == pytest.approx(0.5, abs=1e-12)

    def test_small_amplitude_jump(self):
        ic = PowerExpTail(0.5, 0.0, 1.0)  # jumps from 1 to 1/2 at the origin
        assert ic.x_star == 0.0
        assert ic(np.asarray(0.5)) == pytest.approx(0.5 * math.exp(-0.5), abs=1e-15)
        admissible(ic)

    def test_nonmonotone_hump_rejected(self):
        with pytest.raises(DomainError):
            PowerExpTail(0.1, 2.0, 1.0)

    def test_log_value_no_overflow(self):
        ic = PowerExpTail(1.0, -2.0, SQRT2)
        lv = ic.log_value(np.array([1.0, 100.0, 2000.0]))
        assert np.all(np.isfinite(lv))
        assert lv[2] == pytest.approx(-2.0 * math.log(2000.0) - SQRT2 * 2000.0, rel=1e-12)

    def test_r0(self):
        assert PowerExpTail(1.0, 0.0, 1.0).r0() == 1.0
        assert PowerExpTail(1.0, -3.0, SQRT2).r0() == SQRT2
        assert PowerExpTail(1.0, 0.0, 9.0).r0() == SQRT2


class TestWaveIC:
    def test_matches_shape(self):
        ic = Wave(1.5)
        xs = np.linspace(-1.0, 10.0, 200)
        assert np.max(np.abs(ic(xs) - Pi_c(1.5, xs))) == 0.0
        assert ic.L0 == 0.0
        assert ic.r0() == pytest.approx(1.0, abs=1e-14)

    def test_log_value(self):
        ic = Wave(SQRT2)
        assert ic.log_value(np.asarray(500.0)) == pytest.approx(
            math.log1p(SQRT2 * 500.0) - SQRT2 * 500.0, rel=1e-13
        )

    def test_minimal_wave_sampler_distribution(self):
        rng = np.random.default_rng(42)
        xs = Wave(SQRT2).sample(rng, 200000)
        # empirical tail probability vs the exact shape at a few points
        for q in (0.5, 1.0, 2.5):
            emp = float(np.mean(xs >= q))
            assert emp == pytest.approx(float(Pi_c(SQRT2, q)), abs=4e-3)

    def test_generic_sampler_distribution(self):
        rng = np.random.default_rng(7)
        xs = Wave(1.5).sample(rng, 100000)
        for q in (0.5, 2.0):
            emp = float(np.mean(xs >= q))
            assert emp == pytest.approx(float(Pi_c(1.5, q)), abs=5e-3)


class TestBetaWave:
    @pytest.mark.parametrize("beta", [0.7, SQRT2, 2.5])
    def test_matches_shape(self, beta):
        ic = BetaWave(beta)
        xs = np.linspace(-1.0, 12.0, 300)
        assert np.max(np.abs(ic(xs) - Pi_beta_min(beta, xs))) < 1e-14
        admissible(ic)

    def test_log_value_pushed(self):
        ic = BetaWave(3.0)
        x = 30.0
        assert ic.log_value(np.asarray(x)) == pytest.approx(
            math.log(float(Pi_beta_min(3.0, 20.0))) - 3.0 * (x - 20.0), rel=1e-9
        )

    def test_r0_capped(self):
        assert BetaWave(3.0).r0() == SQRT2
        assert BetaWave(0.5).r0() == SQRT2


class TestExpMixture:
    def test_matches_formula(self):
        m = ExpMixture(rates=(2.0, 3.0), amps=(3.0, -2.0))
        x = np.array([0.0, 0.5, 2.0])
        want = 3.0 * np.exp(-2.0 * x) - 2.0 * np.exp(-3.0 * x)
        assert np.max(np.abs(m(x) - want)) < 1e-14
        admissible(m)

    def test_log_value_stable_far_out(self):
        m = ExpMixture(rates=(2.0, 3.0), amps=(3.0, -2.0))
        lv = float(m.log_value(np.asarray(200.0)))
        assert lv == pytest.approx(math.log(3.0) - 400.0, rel=1e-12)

    def test_invalid(self):
        with pytest.raises(DomainError):
            ExpMixture(rates=(1.0,), amps=(2.0,))  # mass above 1
        with pytest.raises(DomainError):
            ExpMixture(rates=(1.0, 2.0), amps=(-2.0, 3.0))  # dips negative


class TestTabulated:
    def make(self):
        xs = np.linspace(-2.0, 25.0, 400)
        us = np.clip(np.exp(-np.clip(xs, 0, None)), 0.0, 1.0)
        return Tabulated(tuple(xs), tuple(us))

    def test_interpolation_and_tail(self):
        ic = self.make()
        assert ic(np.asarray(-3.0)) == 1.0
        assert ic(np.asarray(1.0)) == pytest.approx(math.exp(-1.0), abs=1e-3)
        with pytest.warns(UserWarning):
            t = ic.tail
        assert t.rate == pytest.approx(1.0, abs=1e-2)
        assert not t.exact

    def test_validation(self):
        with pytest.raises(DomainError):
            Tabulated((0.0, 1.0, 2.0, 3.0), (0.2, 0.4, 0.1, 0.0))  # not monotone
        with pytest.raises(DomainError):
            Tabulated((0.0, 1.0), (1.0, 0.0))  # too short


class TestMassClassifier:
    def test_cases(self):
        assert finite_initial_mass(Heaviside())
        assert finite_initial_mass(PowerExpTail(1.0, 0.0, 2.0))
        assert finite_initial_mass(PowerExpTail(1.0, -3.0, SQRT2))
        assert not finite_initial_mass(PowerExpTail(1.0, -2.0, SQRT2))
        assert not finite_initial_mass(PowerExpTail(1.0, 0.0, 1.0))
        assert not finite_initial_mass(Wave(SQRT2))
        assert not finite_initial_mass(Wave(1.5))
        assert finite_initial_mass(BetaWave(2.0))
        assert not finite_initial_mass(BetaWave(1.0))


class TestSpecStrings:
    @pytest.mark.parametrize(
        "spec",
        ["heaviside", "powexp:1,0,1", "powexp:1,-3,1.41421", "wave:1.5",
         "wave:min", f"wave:{SQRT2!r}", "betawave:2"],
    )
    def test_round_trip(self, spec):
        ic = parse_ic(spec)
        again = parse_ic(ic.to_spec())
        xs = np.linspace(-1.0, 20.0, 100)
        assert np.max(np.abs(ic(xs) - again(xs))) < 1e-12

    def test_unknown(self):
        with pytest.raises(DomainError):
            parse_ic("mystery:1,2")
