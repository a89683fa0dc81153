"""Tests for the realizability solver and verdict verification."""

from fractions import Fraction as F
from itertools import product

import pytest

from moment_realizer.config_space import Configuration, KSpec, SiteSpace, enumerate_configurations
from moment_realizer.exceptions import (
    CapExceededError,
    DimensionError,
    InstanceFormatError,
    PivotLimitError,
)
from moment_realizer.generators import (
    Lcg64,
    bernoulli_field,
    instance_from_measure,
    random_kspec,
    random_measure,
    sample_instances,
)
from moment_realizer.moments import FiniteMeasure, power_moments, weighted_third_moment
from moment_realizer.polynomial import (
    Polynomial,
    RestrictedCubic,
    apply_functional,
    evaluate,
)
from moment_realizer.realizer import (
    KPositive,
    MinimalThirdMoment,
    NotKPositive,
    PositivityCertificate,
    Realizer,
    RepresentingMeasure,
    check_k_positivity,
    find_representing_measure,
    moment_column,
    verify_verdict,
)


def random_measure_instance(seed, with_gamma=False):
    rng = Lcg64(seed)
    n = rng.between(1, 3)
    space = SiteSpace.on_line([f"s{i}" for i in range(n)])
    kspec = random_kspec(rng, space)
    gamma = tuple(rng.rational(1, 2) for _ in range(n)) if with_gamma else None
    mu = random_measure(space, kspec, seed)
    return mu, instance_from_measure(mu, space, kspec, gamma)


@pytest.fixture
def forced_instance(build_instance):
    """One site, at most two particles; the moments force mass 1/2 at k = 0 and k = 2."""
    return build_instance(["a"], KSpec.at_most(2), 1, [1], [[2]], gamma=(1,))


class TestRealizabilityInstance:
    """Test cases for instance validation."""

    def test_site_mismatch(self, build_instance):
        """Moment data must live on the instance sites."""
        with pytest.raises(DimensionError):
            build_instance(["a", "b"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]])

    def test_gamma_positive(self, build_instance):
        """Gamma entries are positive."""
        with pytest.raises(DimensionError):
            build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]], gamma=(0,))

    def test_r_max_positive(self, build_instance):
        """r_max is positive."""
        with pytest.raises(DimensionError):
            build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]], gamma=(1,), r_max=0)

    def test_with_kspec(self, coin_instance):
        """with_kspec swaps K and keeps the data."""
        other = coin_instance.with_kspec(KSpec.at_most(3))
        assert other.kspec.Q == 3
        assert other.L == coin_instance.L


class TestMomentColumn:
    """Test cases for LP columns."""

    def test_layout(self):
        """Columns follow the order of L.vector()."""
        assert moment_column(Configuration((1, 2)), 2) == [1, 1, 2, 1, 2, 2, 4]


class TestFindRepresentingMeasure:
    """Test cases for find_representing_measure."""

    def test_fair_coin(self, realizer, coin_instance):
        """Mean and second moment 1/2 on {0, 1} is a fair coin."""
        verdict = realizer.find_representing_measure(coin_instance)
        assert isinstance(verdict, RepresentingMeasure)
        assert verdict.measure.support == (
            (Configuration((0,)), F(1, 2)), (Configuration((1,)), F(1, 2)))

    def test_variance_certificate(self, realizer, bad_variance_instance):
        """E[k^2] != E[k] on {0, 1} is certified by a polynomial vanishing on K."""
        verdict = realizer.find_representing_measure(bad_variance_instance)
        assert isinstance(verdict, PositivityCertificate)
        q = verdict.q
        assert evaluate(q, Configuration((0,))) >= 0
        assert evaluate(q, Configuration((1,))) >= 0
        assert apply_functional(bad_variance_instance.L, q) < 0
        assert q.coefficient(2)[0, 0] > 0
        assert q.max_abs_coefficient() == 1

    def test_hard_core_separation(self, realizer, build_instance, pair_moments):
        """The same moments are realizable on AtMost(2) but not on a hard core."""
        free = build_instance(["a", "b"], KSpec.at_most(2), spacing=1, **pair_moments)
        verdict = realizer.find_representing_measure(free)
        assert verdict.is_measure

        blocked = free.with_kspec(KSpec.hard_core(2, 2))
        verdict = realizer.find_representing_measure(blocked)
        assert not verdict.is_measure
        assert realizer.verify_verdict(blocked, verdict).passed

    def test_negative_mass(self, realizer, build_instance):
        """ell0 = -1 is certified with a positive constant term."""
        instance = build_instance(["a"], KSpec.at_most(1), -1, [0], [[0]])
        verdict = realizer.find_representing_measure(instance)
        assert not verdict.is_measure
        assert verdict.q.coefficient(0)[()] > 0

    def test_zero_functional(self, realizer, build_instance):
        """The zero functional is realized by the empty measure."""
        instance = build_instance(["a", "b"], KSpec.at_most(1), 0, [0, 0], [[0, 0], [0, 0]])
        verdict = realizer.find_representing_measure(instance)
        assert verdict.is_measure
        assert len(verdict.measure) == 0

    def test_sub_probability(self, realizer, build_instance):
        """Total mass below one is allowed."""
        instance = build_instance(["a"], KSpec.at_most(1), "1/2", ["1/4"], [["1/4"]])
        verdict = realizer.find_representing_measure(instance)
        assert verdict.measure.total_weight == F(1, 2)

    def test_third_order_data(self, realizer, build_instance):
        """Degree-3 data is matched, and a wrong ell3 is certified."""
        good = build_instance(["a"], KSpec.at_most(2), 1, [1], [[2]], ell3=[[[4]]])
        verdict = realizer.find_representing_measure(good)
        assert verdict.measure.support == (
            (Configuration((0,)), F(1, 2)), (Configuration((2,)), F(1, 2)))

        bad = build_instance(["a"], KSpec.at_most(2), 1, [1], [[2]], ell3=[[[5]]])
        verdict = realizer.find_representing_measure(bad)
        assert not verdict.is_measure
        assert verdict.q.degree == 3
        assert realizer.verify_verdict(bad, verdict).passed

    def test_realized_r_with_gamma(self, realizer, forced_instance):
        """Measures report their weighted third moment when gamma is set."""
        verdict = realizer.find_representing_measure(forced_instance)
        assert verdict.realized_R == 4

    def test_enumeration_cap(self, build_instance, pair_moments):
        """K larger than the enumeration cap is refused."""
        instance = build_instance(["a", "b"], KSpec.at_most(2), **pair_moments)
        with pytest.raises(CapExceededError):
            Realizer(enumeration_cap=2).find_representing_measure(instance)

    def test_lp_size_cap(self, coin_instance):
        """LPs larger than the size cap are refused."""
        with pytest.raises(CapExceededError):
            Realizer(lp_size_cap=10).find_representing_measure(coin_instance)

    def test_pivot_limit(self, coin_instance):
        """The pivot ceiling surfaces as PivotLimitError."""
        with pytest.raises(PivotLimitError):
            Realizer(max_pivots=0).find_representing_measure(coin_instance)

    def test_module_level_wrapper(self, coin_instance):
        """The module-level function uses a default Realizer."""
        assert find_representing_measure(coin_instance).is_measure

    def test_round_trip(self, realizer):
        """Moments of a generated measure are realized with identical moments."""
        for seed in range(500):
            mu, instance = random_measure_instance(seed)
            verdict = realizer.find_representing_measure(instance)
            assert verdict.is_measure, f"seed {seed}"
            assert power_moments(verdict.measure, 2, instance.space.size) == instance.L.tensors

    def test_monotone_in_k(self, realizer):
        """Realizable on a hard core implies realizable on AtMost with the same Q."""
        rng = Lcg64(5)
        for seed in range(100):
            n = rng.between(2, 3)
            space = SiteSpace.on_line([f"s{i}" for i in range(n)])
            kspec = KSpec.hard_core(F(rng.between(1, 3), 2), rng.between(1, 2))
            mu = random_measure(space, kspec, seed)
            instance = instance_from_measure(mu, space, kspec)
            assert realizer.find_representing_measure(instance).is_measure
            wider = instance.with_kspec(KSpec.at_most(kspec.Q))
            assert realizer.find_representing_measure(wider).is_measure


class TestDichotomy:
    """Every instance gets exactly one verified verdict."""

    def _check(self, realizer, instances):
        measures = certificates = 0
        for instance in instances:
            verdict = realizer.find_representing_measure(instance)
            report = realizer.verify_verdict(instance, verdict)
            assert report.passed, report.summary()
            if verdict.is_measure:
                measures += 1
            else:
                certificates += 1
        return measures, certificates

    def test_sampled_instances(self, realizer):
        """Sampled instances yield a verified measure or certificate."""
        measures, certificates = self._check(realizer, sample_instances(seed=1, count=300))
        assert measures + certificates == 300
        assert certificates > 0

    @pytest.mark.slow
    def test_many_sampled_instances(self, realizer):
        """The dichotomy holds on a larger sample."""
        measures, certificates = self._check(realizer, sample_instances(seed=42, count=1000))
        assert measures + certificates == 1000

    def test_no_certificate_beside_a_measure(self, realizer):
        """When a measure exists no polynomial on a small grid certifies the opposite."""
        grid = [Polynomial([f0, [f1], [[f2]]])
                for f0, f1, f2 in product((-1, 0, 1), repeat=3)]
        for seed in range(40):
            mu, instance = random_measure_instance(seed * 7 + 3)
            if instance.space.size != 1:
                continue
            configs = enumerate_configurations(instance.space, instance.kspec)
            for q in grid:
                if all(evaluate(q, eta) >= 0 for eta in configs):
                    assert apply_functional(instance.L, q) >= 0


class TestCheckKPositivity:
    """Test cases for check_k_positivity."""

    def test_positive(self, coin_instance):
        """A realizable functional is K-positive with its measure as witness."""
        result = check_k_positivity(coin_instance)
        assert isinstance(result, KPositive)
        assert result.witness.measure.total_weight == 1

    def test_not_positive(self, bad_variance_instance):
        """A non-realizable functional comes with a certificate."""
        result = check_k_positivity(bad_variance_instance)
        assert isinstance(result, NotKPositive)
        assert verify_verdict(bad_variance_instance, result).passed


class TestExtendWithCubic:
    """Test cases for extend_with_cubic."""

    def test_extension_exists(self, realizer, build_instance):
        """The fair coin has weighted third moment 1/2."""
        instance = build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]], gamma=(1,))
        verdict = realizer.extend_with_cubic(instance, F(1, 2))
        assert verdict.is_measure
        assert verdict.realized_R == F(1, 2)
        assert verdict.r_max == F(1, 2)

    def test_cap_too_small(self, realizer, forced_instance):
        """The forced measure has R = 4, so R_max = 1 is certified."""
        verdict = realizer.extend_with_cubic(forced_instance, 1)
        assert isinstance(verdict, PositivityCertificate)
        assert verdict.is_cubic
        assert verdict.q.f3 > 0
        assert verdict.r_max == 1
        assert realizer.verify_verdict(forced_instance, verdict).passed

    def test_inactive_cap(self, realizer, forced_instance):
        """A cap above every configuration's cube reproduces the plain measure."""
        verdict = realizer.extend_with_cubic(forced_instance, 8)
        plain = realizer.find_representing_measure(forced_instance)
        assert verdict.measure == plain.measure

    def test_r_max_from_instance(self, realizer, build_instance):
        """Without an argument r_max comes from the instance."""
        instance = build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]],
                                  gamma=(1,), r_max="1/4")
        verdict = realizer.extend_with_cubic(instance)
        assert not verdict.is_measure
        assert verdict.r_max == F(1, 4)

    def test_needs_gamma(self, realizer, coin_instance):
        """gamma is required."""
        with pytest.raises(InstanceFormatError):
            realizer.extend_with_cubic(coin_instance, 1)

    def test_needs_r_max(self, realizer, forced_instance):
        """r_max is required."""
        with pytest.raises(InstanceFormatError):
            realizer.extend_with_cubic(forced_instance)

    def test_degree_two_only(self, realizer, build_instance):
        """Third-order data is not accepted."""
        instance = build_instance(["a"], KSpec.at_most(2), 1, [1], [[2]], ell3=[[[4]]], gamma=(1,))
        with pytest.raises(DimensionError):
            realizer.extend_with_cubic(instance, 8)


class TestMinimalThirdMoment:
    """Test cases for minimal_third_moment."""

    def test_fair_coin(self, realizer, build_instance):
        """R* of the fair coin is 1/2."""
        instance = build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/2"]], gamma=(1,))
        result = realizer.minimal_third_moment(instance)
        assert isinstance(result, MinimalThirdMoment)
        assert result.value == F(1, 2)

    def test_forced_measure(self, realizer, forced_instance):
        """A unique representing measure fixes R*."""
        assert realizer.minimal_third_moment(forced_instance).value == 4

    def test_bernoulli_pair(self, realizer):
        """Two independent fair coins have R* = 5/2 on simple configurations."""
        space = SiteSpace.on_line(["a", "b"])
        mu = bernoulli_field(space, ["1/2", "1/2"])
        instance = instance_from_measure(mu, space, KSpec.simple(2), gamma=(1, 1))
        result = realizer.minimal_third_moment(instance)
        assert result.value == F(5, 2)
        assert result.value <= weighted_third_moment(mu, (1, 1))

    def test_infeasible(self, realizer, build_instance):
        """Non-realizable data gives a degree-2 certificate."""
        instance = build_instance(["a"], KSpec.at_most(1), 1, ["1/2"], [["1/4"]], gamma=(1,))
        result = realizer.minimal_third_moment(instance)
        assert isinstance(result, PositivityCertificate)
        assert not result.is_cubic

    def test_cubic_equivalence(self, realizer):
        """extend_with_cubic succeeds exactly for R_max >= R*."""
        for seed in range(200):
            mu, instance = random_measure_instance(seed, with_gamma=True)
            result = realizer.minimal_third_moment(instance)
            r_star = result.value
            assert r_star <= weighted_third_moment(mu, instance.gamma)

            assert realizer.extend_with_cubic(instance, r_star + 1).is_measure
            if r_star == 0:
                continue
            at_cap = realizer.extend_with_cubic(instance, r_star)
            assert at_cap.is_measure
            assert at_cap.realized_R == r_star
            below = realizer.extend_with_cubic(instance, r_star / 2)
            assert not below.is_measure
            assert below.is_cubic
            assert realizer.verify_verdict(instance, below).passed


class TestSweepQ:
    """Test cases for sweep_q."""

    def test_forced_measure_needs_two_particles(self, realizer, forced_instance):
        """E[k^2] = 2 E[k] needs room for two particles."""
        points = realizer.sweep_q(forced_instance, [1, 2, 3])
        assert [p.Q for p in points] == [1, 2, 3]
        assert [p.n_configurations for p in points] == [2, 3, 4]
        assert [p.verdict.is_measure for p in points] == [False, True, True]


class TestVerifyVerdict:
    """Test cases for verify_verdict."""

    def test_tampered_weight(self, realizer, coin_instance):
        """Changing a weight breaks the moment checks."""
        verdict = realizer.find_representing_measure(coin_instance)
        tampered = RepresentingMeasure(FiniteMeasure(
            ((Configuration((0,)), F(1, 2)), (Configuration((1,)), F(1, 4)))))
        assert realizer.verify_verdict(coin_instance, verdict).passed
        report = realizer.verify_verdict(coin_instance, tampered)
        assert not report.passed
        names = [c.name for c in report.failures]
        assert "ell0" in names
        assert "ell1[a]" in names

    def test_support_outside_k(self, realizer, coin_instance):
        """Atoms outside K are reported."""
        verdict = RepresentingMeasure(FiniteMeasure(((Configuration((2,)), F(1, 4)),)))
        report = realizer.verify_verdict(coin_instance, verdict)
        assert "support-in-K" in [c.name for c in report.failures]

    def test_tampered_certificate(self, realizer, bad_variance_instance):
        """A certificate pushed below zero is reported with the offending configuration."""
        q = realizer.find_representing_measure(bad_variance_instance).q
        tampered = Polynomial([q.coefficient(0)[()] - 2, q.coefficient(1), q.coefficient(2)])
        report = realizer.verify_verdict(bad_variance_instance, PositivityCertificate(tampered))
        failed = {c.name: c.detail for c in report.failures}
        assert "nonnegative-on-K" in failed
        assert "q(0)" in failed["nonnegative-on-K"]

    def test_nonnegative_pairing(self, realizer, coin_instance):
        """The constant 1 is nonnegative but pairs positively."""
        report = realizer.verify_verdict(coin_instance, PositivityCertificate(Polynomial.constant(1)))
        assert [c.name for c in report.failures] == ["pairing-negative"]

    def test_cubic_gamma_mismatch(self, realizer, forced_instance):
        """A restricted cubic must use the instance gamma."""
        q = RestrictedCubic(0, (0,), ((0,),), 1, (2,))
        report = realizer.verify_verdict(forced_instance, PositivityCertificate(q, 1))
        assert "gamma-matches" in [c.name for c in report.failures]

    def test_wrong_minimal_value(self, realizer, forced_instance):
        """The reported R* must be the witness's third moment."""
        result = realizer.minimal_third_moment(forced_instance)
        wrong = MinimalThirdMoment(result.value - 1, result.witness)
        assert realizer.verify_verdict(forced_instance, result).passed
        assert "minimal-R" in [c.name for c in realizer.verify_verdict(forced_instance, wrong).failures]

    def test_malformed_certificate(self, realizer, coin_instance):
        """A polynomial on the wrong sites is reported, not raised."""
        report = realizer.verify_verdict(coin_instance, PositivityCertificate(Polynomial([0, [1, 1]])))
        assert [c.name for c in report.failures] == ["well-formed"]

    def test_unknown_verdict(self, realizer, coin_instance):
        """Anything else is reported as the wrong verdict type."""
        report = realizer.verify_verdict(coin_instance, "measure")
        assert not report
        assert report.failures[0].name == "verdict-type"
