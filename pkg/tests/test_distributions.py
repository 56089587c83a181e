import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochfock import distributions as dist
from stochfock.errors import DomainError, ResourceError


def pascal_row(a):
    row = [1]
    for _ in range(a):
        row = [1] + [x + y for x, y in zip(row, row[1:])] + [1]
    return row


def exact_binomial_pmf(n, p, k):
    return math.comb(n, k) * p**k * (1 - p) ** (n - k)


PARAM_GRID = [
    dist.binomial(0, 0.3),
    dist.binomial(10, 0.3),
    dist.binomial(12, 1 / 6),
    dist.binomial(500, 0.5),
    dist.binomial(10_000, 4e-4),
    dist.poisson(0.01),
    dist.poisson(1),
    dist.poisson(4),
    dist.poisson(37.5),
    dist.poisson(800),
    dist.geometric(1 / 6),
    dist.geometric(0.5),
    dist.geometric(0.99),
    dist.negative_binomial(1, 0.3),
    dist.negative_binomial(3, 0.4),
    dist.negative_binomial(4, 1 / 6, "swapped"),
    dist.negative_binomial(25, 0.7),
    dist.hypergeometric(10, 4, 5),
    dist.hypergeometric(50, 45, 10),
    dist.hypergeometric(1000, 300, 400),
    dist.hypergeometric(7, 0, 3),
]


class TestSpec:
    @pytest.mark.parametrize(
        "maker",
        [
            lambda: dist.binomial(-1, 0.5),
            lambda: dist.binomial(3, 1.5),
            lambda: dist.binomial(2.5, 0.5),
            lambda: dist.negative_binomial(0, 0.5),
            lambda: dist.negative_binomial(2, 1.0),
            lambda: dist.negative_binomial(2, 0.5, "other"),
            lambda: dist.geometric(0.0),
            lambda: dist.poisson(0.0),
            lambda: dist.poisson(float("nan")),
            lambda: dist.hypergeometric(10, 11, 3),
            lambda: dist.hypergeometric(10, 3, 11),
        ],
    )
    def test_invalid_parameters_rejected(self, maker):
        with pytest.raises(DomainError):
            maker()

    def test_parse_spec(self):
        assert dist.parse_spec("binomial:n=10,p=0.3") == dist.binomial(10, 0.3)
        assert dist.parse_spec("nb:r=4,p=1/6,convention=swapped") == dist.negative_binomial(
            4, 1 / 6, "swapped"
        )
        assert dist.parse_spec("poisson:lambda=4") == dist.poisson(4)
        assert dist.parse_spec("hyper:N=10,K=4,draws=5")["K"] == 4
        with pytest.raises(DomainError):
            dist.parse_spec("cauchy:x=1")
        with pytest.raises(DomainError):
            dist.parse_spec("poisson:lambda")

    def test_hashable_and_str_roundtrip(self):
        spec = dist.negative_binomial(3, 0.25)
        assert hash(spec) == hash(dist.parse_spec(str(spec)))


class TestLogChoose:
    def test_trivial(self):
        assert dist.log_choose(10, 0) == 0.0

    def test_small_against_pascal(self):
        assert dist.log_choose(10, 5) == pytest.approx(math.log(pascal_row(10)[5]), rel=1e-15)
        assert pascal_row(10)[5] == 252

    def test_large_against_big_integer_pascal(self):
        exact = pascal_row(500)[250]
        got = dist.log_choose(500, 250)
        assert math.isfinite(got)
        rel = abs(math.exp(got - math.log(exact)) - 1.0)
        assert rel <= 1e-12

    @pytest.mark.parametrize("a", [0, 1, 7, 64, 333, 1000])
    def test_relative_error_envelope(self, a):
        row = pascal_row(a)
        for b in range(0, a + 1, max(1, a // 25)):
            got = dist.log_choose(a, b)
            assert abs(math.expm1(got - math.log(row[b]))) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            dist.log_choose(3, 4)

    def test_array_form(self):
        got = dist.log_choose(np.array([10, 20]), np.array([3, 10]))
        np.testing.assert_allclose(got, [math.log(120), math.log(184756)], rtol=1e-13)


class TestPmf:
    def test_fair_two_trials(self):
        assert dist.pmf(dist.binomial(2, 0.5), 1) == pytest.approx(0.5, abs=1e-15)

    def test_poisson_zero_against_pgf_series(self):
        # e^-4 as the reciprocal of sum 4^n / n!
        series = sum(Fraction(4**n, math.factorial(n)) for n in range(80))
        assert dist.pmf(dist.poisson(4), 0) == pytest.approx(float(1 / series), rel=1e-14)
        assert dist.pmf(dist.poisson(4), 0) == pytest.approx(0.0183156, abs=1e-7)

    @pytest.mark.parametrize("p", [0.01, 0.1, 1 / 6, 0.5, 0.9, 0.999])
    def test_geometric_is_nb_r1_bitwise(self, p):
        n = np.arange(0, 5000)
        np.testing.assert_array_equal(
            dist.pmf(dist.negative_binomial(1, p), n), dist.pmf(dist.geometric(p), n)
        )

    def test_out_of_support_is_zero(self):
        assert dist.pmf(dist.binomial(5, 0.3), 6) == 0.0
        assert dist.pmf(dist.binomial(5, 0.3), -1) == 0.0
        # hypergeometric window starts at draws - (N - K) = 2
        assert dist.pmf(dist.hypergeometric(10, 7, 5), 1) == 0.0
        assert dist.pmf(dist.hypergeometric(10, 7, 5), 2) > 0.0

    def test_degenerate_binomial(self):
        assert dist.pmf(dist.binomial(5, 0.0), 0) == 1.0
        assert dist.pmf(dist.binomial(5, 1.0), 5) == 1.0
        assert dist.pmf(dist.binomial(5, 1.0), 4) == 0.0

    @pytest.mark.parametrize("n,p", [(10, 0.3), (37, 0.61), (200, 0.02)])
    def test_binomial_against_exact_rational(self, n, p):
        fp = Fraction(p)
        for k in range(n + 1):
            exact = float(math.comb(n, k) * fp**k * (1 - fp) ** (n - k))
            assert dist.pmf(dist.binomial(n, p), k) == pytest.approx(exact, rel=1e-12, abs=1e-300)

    def test_hypergeometric_against_exact_rational(self):
        N, K, m = 30, 12, 9
        for k in range(0, 10):
            exact = Fraction(math.comb(K, k) * math.comb(N - K, m - k), math.comb(N, m))
            assert dist.pmf(dist.hypergeometric(N, K, m), k) == pytest.approx(float(exact), rel=1e-12)

    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_normalization_to_cutoff(self, spec):
        d, _ = dist.cutoff(spec, 1e-13)
        total = math.fsum(dist.pmf_vector(spec, d))
        assert 1 - 1e-10 <= total <= 1 + 1e-13


class TestCutoff:
    @pytest.mark.parametrize("spec", [s for s in PARAM_GRID if not s.finite_support], ids=str)
    def test_tail_is_certified(self, spec):
        d, majorant = dist.cutoff(spec, 1e-12)
        assert majorant <= 1e-12
        assert dist.survival(spec, d) <= majorant * (1 + 1e-9)

    def test_finite_support_length(self):
        assert dist.cutoff(dist.binomial(10, 0.3), 1e-12) == (11, 0.0)
        assert dist.cutoff(dist.binomial(5, 0.0), 1e-12) == (6, 0.0)
        assert dist.cutoff(dist.hypergeometric(10, 4, 5), 1e-12) == (5, 0.0)

    def test_cap(self):
        with pytest.raises(ResourceError) as err:
            dist.cutoff(dist.geometric(0.9999), 1e-12, cap=1000)
        assert err.value.achieved > 1e-12


class TestTransforms:
    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_cf_at_zero(self, spec):
        assert dist.cf(spec, 0.0) == pytest.approx(1.0, abs=1e-13)

    def test_poisson_cf_magnitude(self):
        for w in np.linspace(-3, 3, 13):
            assert abs(dist.cf(dist.poisson(2.5), w)) == pytest.approx(
                math.exp(2.5 * (math.cos(w) - 1)), rel=1e-13
            )

    def test_fair_binomial_vanishes_at_pi(self):
        assert abs(dist.cf(dist.binomial(7, 0.5), math.pi)) < 1e-15

    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_cf_bounded(self, spec):
        w = np.random.default_rng(7).uniform(-50, 50, 1000)
        assert np.all(np.abs(dist.cf(spec, w)) <= 1 + 1e-12)

    def test_cf_magnitude_below_one_off_lattice(self):
        w = np.random.default_rng(3).uniform(0.05, 2 * np.pi - 0.05, 1000)
        for spec in (dist.poisson(3), dist.geometric(0.4), dist.negative_binomial(2, 0.3)):
            assert np.all(np.abs(dist.cf(spec, w)) < 1.0)

    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_cf_matches_direct_summation(self, spec):
        d, _ = dist.cutoff(spec, 1e-14)
        probs = dist.pmf_vector(spec, d)
        n = np.arange(d)
        for w in (0.3, 1.1, math.pi / 2, 2.9, -1.7):
            direct = math.fsum(probs * np.cos(w * n)) + 1j * math.fsum(probs * np.sin(w * n))
            assert abs(dist.cf(spec, w) - direct) <= 1e-10

    def test_pgf_normalization_and_zero(self):
        for spec in PARAM_GRID:
            assert dist.pgf(spec, 1.0) == pytest.approx(1.0, abs=1e-13)
        assert dist.pgf(dist.poisson(4), 0.0) == pytest.approx(math.exp(-4), rel=1e-15)

    def test_pgf_binomial_against_term_sum(self):
        oracle = sum(exact_binomial_pmf(10, 0.3, k) * 0.5**k for k in range(11))
        assert dist.pgf(dist.binomial(10, 0.3), 0.5) == pytest.approx(oracle, rel=1e-13)
        assert dist.pgf(dist.binomial(10, 0.3), 0.5) == pytest.approx(0.85**10, rel=1e-13)

    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_cf_is_pgf_on_unit_circle(self, spec):
        for w in (0.4, 2.0, -2.5):
            assert abs(dist.cf(spec, w) - dist.pgf(spec, cmath.exp(1j * w))) <= 1e-12

    def test_pgf_radius(self):
        with pytest.raises(DomainError):
            dist.pgf(dist.geometric(0.5), 2.5)
        # inside the radius 1/p but outside the unit disc is still defined
        assert dist.pgf(dist.geometric(0.5), 1.5) == pytest.approx(0.5 / (1 - 0.75))


class TestMoments:
    def test_closed_forms(self):
        assert dist.closed_moments(dist.poisson(4)) == (4, 4)
        mean, var = dist.closed_moments(dist.binomial(10, 0.3))
        assert mean == pytest.approx(3.0)
        assert var == pytest.approx(2.1)

    def test_hypergeometric_mean_against_finite_sum(self):
        N, K, m = 10, 4, 5
        oracle = sum(
            Fraction(k * math.comb(K, k) * math.comb(N - K, m - k), math.comb(N, m)) for k in range(5)
        )
        assert oracle == 2
        assert dist.closed_moments(dist.hypergeometric(N, K, m))[0] == pytest.approx(2.0)

    @pytest.mark.parametrize("spec", PARAM_GRID, ids=str)
    def test_closed_forms_match_summation(self, spec):
        d, _ = dist.cutoff(spec, 1e-15)
        probs = dist.pmf_vector(spec, d)
        n = np.arange(d, dtype=float)
        mean = math.fsum(n * probs)
        var = math.fsum((n - mean) ** 2 * probs)
        m, v = dist.closed_moments(spec)
        assert mean == pytest.approx(m, rel=1e-9, abs=1e-12)
        assert var == pytest.approx(v, rel=1e-8, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(0.001, 0.99),
    r=st.integers(1, 30),
    swapped=st.booleans(),
    w=st.floats(-10, 10),
)
def test_nb_cf_closed_form_matches_series(p, r, swapped, w):
    spec = dist.negative_binomial(r, p, "swapped" if swapped else "pmf")
    d, _ = dist.cutoff(spec, 1e-14)
    probs = dist.pmf_vector(spec, d)
    series = np.sum(probs * np.exp(1j * w * np.arange(d)))
    assert abs(dist.cf(spec, w) - series) <= 1e-10
