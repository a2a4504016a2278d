import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from swcopt.complexity import binomial_violation_bound, min_samples_exact, sample_complexity

# the published sample-size column for beta = 0.1%, four design variables
TABLE_SIZES = {
    0.3: 63,
    0.2: 95,
    0.1: 189,
    0.05: 377,
    0.01: 1884,
    0.005: 3768,
    0.001: 18838,
    0.0005: 37676,
    0.00025: 75352,
}


@pytest.mark.parametrize("eps,expected", sorted(TABLE_SIZES.items()))
def test_sample_complexity_reproduces_published_column(eps, expected):
    assert sample_complexity(eps, 0.001, 4) == expected


def test_sample_complexity_domain_checks():
    for bad in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            sample_complexity(bad, 0.5, 3)
        with pytest.raises(ValueError):
            sample_complexity(0.5, bad, 3)
    with pytest.raises(ValueError):
        sample_complexity(0.5, 0.5, 0)


def test_sample_complexity_monotone():
    for eps_small, eps_big in ((0.01, 0.1), (0.1, 0.3)):
        assert sample_complexity(eps_small, 0.01, 4) >= sample_complexity(eps_big, 0.01, 4)
    assert sample_complexity(0.1, 0.001, 4) >= sample_complexity(0.1, 0.01, 4)
    assert sample_complexity(0.1, 0.01, 6) > sample_complexity(0.1, 0.01, 4)


def test_binomial_bound_zero_epsilon_is_one():
    assert binomial_violation_bound(100, 0.0, 5) == 1.0


def test_binomial_bound_single_design_variable():
    # sum truncates at k=0: (1-eps)^N
    assert binomial_violation_bound(10, 0.1, 1) == pytest.approx(0.3486784401, abs=1e-12)


def test_binomial_bound_full_support_is_one():
    # d-1 = N covers the entire support
    assert binomial_violation_bound(5, 0.5, 6) == pytest.approx(1.0, abs=1e-12)


def test_binomial_bound_undersized_sample_rejected():
    with pytest.raises(ValueError, match="undersized"):
        binomial_violation_bound(4, 0.5, 6)


def test_binomial_bound_matches_scipy_cdf():
    for N, eps, d in ((10, 0.1, 3), (63, 0.3, 4), (1884, 0.01, 5), (75352, 0.00025, 5)):
        ours = binomial_violation_bound(N, eps, d)
        ref = float(binom.cdf(d - 1, N, eps))
        assert ours == pytest.approx(ref, rel=1e-10)


@given(
    st.integers(1, 6),
    st.floats(0.01, 0.99),
    st.integers(8, 200),
)
@settings(max_examples=60, deadline=None)
def test_binomial_bound_shape_properties(d, eps, N):
    val = binomial_violation_bound(N, eps, d)
    assert 0.0 <= val <= 1.0
    if d < 6:
        assert val <= binomial_violation_bound(N, eps, d + 1) + 1e-12
    assert val >= binomial_violation_bound(N + 25, eps, d) - 1e-12


def test_min_samples_exact_hand_values():
    # 0.9^7 ~ 0.478 <= 0.5 < 0.9^6
    assert min_samples_exact(0.1, 0.5, 1) == 7
    # 0.5^10 ~ 0.000977 <= 0.001
    assert min_samples_exact(0.5, 0.001, 1) == 10


def test_min_samples_exact_boundary_is_sharp():
    for eps, beta, d in ((0.1, 0.5, 1), (0.5, 0.001, 1), (0.3, 0.001, 5), (0.05, 0.01, 3)):
        N = min_samples_exact(eps, beta, d)
        assert binomial_violation_bound(N, eps, d) <= beta
        if N > d:
            assert binomial_violation_bound(N - 1, eps, d) > beta


@pytest.mark.parametrize("eps", [0.3, 0.1, 0.05, 0.01])
@pytest.mark.parametrize("beta", [0.1, 0.001])
@pytest.mark.parametrize("d", [2, 5, 8])
def test_explicit_formula_upper_bounds_exact_search(eps, beta, d):
    assert min_samples_exact(eps, beta, d) <= sample_complexity(eps, beta, d - 1)
