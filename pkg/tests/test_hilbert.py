import math

import mpmath
import numpy as np
import pytest

from stochfock import distributions as dist
from stochfock import hilbert
from stochfock.errors import DomainError
from stochfock.hilbert import StochasticState

# mpmath (50 digits) oracle for ||sqrt(Bin(n, lam/n)) - sqrt(Pois(lam))||_2
L2_ORACLE = {
    1.0: {10: 0.0383308134797089, 100: 0.0035623287686616, 1000: 0.000353818830399984, 10000: 3.53579909841681e-5},
    4.0: {10: 0.18693390468814, 100: 0.014469522119273, 1000: 0.00141740446878896, 10000: 0.000141453184943028},
}


def mp_entropy_poisson(lam, terms=200):
    mpmath.mp.dps = 40
    lam = mpmath.mpf(lam)
    total = mpmath.mpf(0)
    for n in range(terms):
        p = mpmath.e ** (-lam) * lam**n / mpmath.factorial(n)
        if p > 0:
            total -= p * mpmath.log(p)
    return float(total)


class TestState:
    def test_build_normalized(self):
        st = hilbert.build_state(dist.poisson(4))
        assert st.tail_mass <= 1e-12
        assert abs(math.fsum(st.probabilities) + st.tail_mass - 1) <= 1e-12
        assert np.all(st.amplitudes >= 0)

    def test_rejects_unnormalized(self):
        with pytest.raises(DomainError):
            StochasticState([0.5, 0.5])
        with pytest.raises(DomainError):
            StochasticState([-1.0])

    def test_tolerance_domain(self):
        with pytest.raises(DomainError):
            hilbert.build_state(dist.poisson(4), 1e-3)

    def test_immutable(self):
        st = hilbert.build_state(dist.binomial(4, 0.5))
        with pytest.raises(ValueError):
            st.amplitudes[0] = 1.0

    def test_point_mass(self):
        st = StochasticState.point_mass(3, 5)
        assert st.dimension == 5 and st.amplitudes[3] == 1.0
        assert hilbert.shannon_entropy(st) == 0.0


class TestEntropy:
    def test_binomial_against_exact_sum(self):
        st = hilbert.build_state(dist.binomial(10, 0.3))
        assert hilbert.shannon_entropy(st) == pytest.approx(1.77907878409006, abs=1e-12)

    def test_poisson_against_mpmath(self):
        st = hilbert.build_state(dist.poisson(4), 1e-14)
        value, half = hilbert.shannon_entropy(st, return_bound=True)
        oracle = mp_entropy_poisson(4)
        assert oracle == pytest.approx(2.08667269988096, abs=1e-13)
        assert abs(value - oracle) <= half + 1e-12

    def test_bits(self):
        st = hilbert.build_state(dist.binomial(10, 0.3))
        assert hilbert.shannon_entropy(st, 2) == pytest.approx(1.77907878409006 / math.log(2), abs=1e-12)

    def test_uniform_maximal(self):
        st = StochasticState(np.full(8, math.sqrt(1 / 8)))
        assert hilbert.shannon_entropy(st, 2) == pytest.approx(3.0, abs=1e-14)

    def test_bad_base(self):
        with pytest.raises(DomainError):
            hilbert.shannon_entropy(hilbert.build_state(dist.poisson(1)), 1.0)


class TestFisher:
    @pytest.mark.parametrize(
        "spec,param,closed",
        [
            (dist.binomial(10, 0.3), "p", 10 / (0.3 * 0.7)),
            (dist.poisson(4), "lambda", 0.25),
            (dist.geometric(0.5), "p", 8.0),
            (dist.negative_binomial(3, 0.4), "p", 3 / (0.4 * 0.36)),
            (dist.negative_binomial(4, 1 / 6, "swapped"), "p", 4 / ((1 / 6) ** 2 * (5 / 6))),
        ],
        ids=str,
    )
    def test_analytic_matches_closed_form(self, spec, param, closed):
        assert hilbert.fisher_information(spec, param) == pytest.approx(closed, rel=1e-10)
        assert hilbert.classical_fisher(spec, param) == pytest.approx(closed, rel=1e-14)

    @pytest.mark.parametrize(
        "spec",
        [dist.binomial(10, 0.3), dist.poisson(4), dist.geometric(0.3), dist.negative_binomial(5, 0.6)],
        ids=str,
    )
    def test_finite_difference_route_agrees(self, spec):
        a = hilbert.fisher_information(spec)
        fd = hilbert.fisher_information(spec, method="finite_difference")
        assert fd == pytest.approx(a, rel=1e-6)

    def test_mpmath_derivative_oracle(self):
        # 4 * sum (d sqrt(P)/dp)^2 with mpmath numerical differentiation
        mpmath.mp.dps = 30

        def amp(k, p):
            return mpmath.sqrt(mpmath.binomial(10, k) * p**k * (1 - p) ** (10 - k))

        oracle = 4 * sum(mpmath.diff(lambda p: amp(k, p), mpmath.mpf("0.3")) ** 2 for k in range(11))
        assert hilbert.fisher_information(dist.binomial(10, 0.3)) == pytest.approx(float(oracle), rel=1e-12)

    def test_boundary_and_discrete_rejected(self):
        with pytest.raises(DomainError):
            hilbert.fisher_information(dist.binomial(10, 0.0))
        with pytest.raises(DomainError):
            hilbert.fisher_information(dist.binomial(10, 0.3), "n")
        with pytest.raises(DomainError):
            hilbert.fisher_information(dist.hypergeometric(10, 4, 5))


class TestMoments:
    @pytest.mark.parametrize(
        "spec",
        [dist.poisson(4), dist.geometric(0.999), dist.negative_binomial(3, 0.4), dist.binomial(10, 0.3)],
        ids=str,
    )
    def test_mean_within_certified_interval(self, spec):
        value, half = hilbert.moment(hilbert.build_state(spec), 1, return_bound=True)
        mean = dist.closed_moments(spec)[0]
        assert value <= mean + 1e-12
        assert mean - value <= half * (1 + 1e-6) + 1e-12

    def test_second_moment(self):
        st = hilbert.build_state(dist.poisson(4))
        value, half = hilbert.moment(st, 2, return_bound=True)
        assert abs(value - 20.0) <= half + 1e-11

    def test_order_domain(self):
        st = hilbert.build_state(dist.poisson(1))
        with pytest.raises(DomainError):
            hilbert.moment(st, 0)
        with pytest.raises(DomainError):
            hilbert.moment(st, 9)


class TestConvergence:
    @pytest.mark.parametrize("lam", [1.0, 4.0])
    def test_l2_distance_against_oracle(self, lam):
        ref = hilbert.build_state(dist.poisson(lam), 1e-14)
        gaps = []
        for n, oracle in L2_ORACLE[lam].items():
            got = hilbert.l2_distance(hilbert.build_state(dist.binomial(n, lam / n)), ref)
            # reference tail of 1e-14 shifts d^2 by at most that much
            assert abs(got - oracle) <= 1e-14 / (2 * oracle) + 1e-13
            gaps.append(got)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_overlap_oracle(self):
        a = hilbert.build_state(dist.binomial(100, 0.04))
        b = hilbert.build_state(dist.poisson(4))
        value, bound = hilbert.overlap(a, b, return_bound=True)
        assert value == pytest.approx(0.99989531646482, abs=1e-11)
        assert bound == 0.0

    def test_overlap_self_and_disjoint(self):
        a = hilbert.build_state(dist.poisson(3))
        assert hilbert.overlap(a, a) == pytest.approx(1.0, abs=1e-12)
        assert hilbert.overlap(StochasticState.point_mass(0, 3), StochasticState.point_mass(2)) == 0.0

    def test_l2_and_overlap_relation(self):
        a = hilbert.build_state(dist.binomial(30, 0.2))
        b = hilbert.build_state(dist.poisson(6))
        d = hilbert.l2_distance(a, b)
        assert d * d == pytest.approx(2 - 2 * hilbert.overlap(a, b), abs=1e-11)

    @pytest.mark.parametrize("p", [0.1, 1 / 6, 0.5, 0.9, 0.999])
    def test_nb_hierarchy(self, p):
        assert hilbert.nb_hierarchy_check(p)
