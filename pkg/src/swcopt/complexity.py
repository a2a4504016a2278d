"""Sample-size calculators and the binomial violation-probability bound."""
from __future__ import annotations

import math

# e/(e-1), the constant in the explicit sample-size bound
_EULER_FACTOR = math.e / (math.e - 1.0)


def _check_unit_open(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly in (0,1), got {value}")


def sample_complexity(epsilon: float, beta: float, n0: int) -> int:
    """Explicit sample size ceil((1/eps) * e/(e-1) * (ln(1/beta) + n0 + 1)).

    n0 counts the design variables (first-stage decisions plus the cost
    budget); the returned N guarantees, with confidence 1-beta, violation
    probability at most epsilon for the sampled solution.
    """
    _check_unit_open("epsilon", epsilon)
    _check_unit_open("beta", beta)
    if n0 < 1:
        raise ValueError(f"n0 must be a positive integer, got {n0}")
    bound = (1.0 / epsilon) * _EULER_FACTOR * (math.log(1.0 / beta) + n0 + 1.0)
    return math.ceil(bound)


def binomial_violation_bound(N: int, epsilon: float, d: int) -> float:
    """Binomial tail sum_{k=0}^{d-1} C(N,k) eps^k (1-eps)^(N-k).

    Upper-bounds the probability that the sampled solution's violation
    probability exceeds epsilon, for d design variables.  Accumulated in
    the log domain via lgamma so it stays finite for N ~ 1e5.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if N < d - 1:
        raise ValueError(f"undersized sample: N={N} supports at most d={N + 1}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0,1], got {epsilon}")
    if d - 1 >= N:
        return 1.0  # the sum covers the entire support
    if epsilon == 0.0:
        return 1.0
    if epsilon == 1.0:
        return 0.0
    log_eps = math.log(epsilon)
    log_1m = math.log1p(-epsilon)
    log_terms = [
        math.lgamma(N + 1) - math.lgamma(k + 1) - math.lgamma(N - k + 1)
        + k * log_eps + (N - k) * log_1m
        for k in range(d)
    ]
    peak = max(log_terms)
    total = peak + math.log(sum(math.exp(lt - peak) for lt in log_terms))
    return min(1.0, math.exp(total))


def min_samples_exact(epsilon: float, beta: float, d: int) -> int:
    """Smallest N with binomial_violation_bound(N, eps, d) <= beta.

    Doubles an upper bracket from N = d, then binary-searches; the bound is
    nonincreasing in N for fixed eps > 0.
    """
    _check_unit_open("epsilon", epsilon)
    _check_unit_open("beta", beta)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    lo = d
    if binomial_violation_bound(lo, epsilon, d) <= beta:
        return lo
    hi = 2 * lo
    while binomial_violation_bound(hi, epsilon, d) > beta:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if binomial_violation_bound(mid, epsilon, d) <= beta:
            hi = mid
        else:
            lo = mid
    return hi
