from dataclasses import dataclass
from fractions import Fraction
import math

from scipy.integrate import quad
from scipy.special import expi

from sandpairs.digitsum import Base, as_base
from sandpairs.primes import base_primes

# (3/4) x / log^2 x, the decimal SanD prime prediction that theta measures against
DECIMAL_CONSTANT = 0.75


@dataclass(frozen=True)
class EstimatorRow:
    x: int
    T: int
    pi_x: int

    @property
    def est_pi(self) -> float:
        return self.x * self.T / self.pi_x**2

    @property
    def est_log(self) -> float:
        return self.T * math.log(self.x) ** 2 / self.x

    @property
    def est_li2(self) -> float:
        return self.T / li2(self.x)

    @property
    def theta(self) -> float:
        return self.est_log / DECIMAL_CONSTANT - 1


def sand_prime_constant(base: int | Base) -> Fraction:
    """c_b = prod over primes q | b-1 of (1 - 1/(q-1)^2); zero for odd b."""
    base = as_base(base)

    constant = Fraction(1)
    for q in base.prime_factors:
        constant *= 1 - Fraction(1, (q - 1) ** 2)
    return constant


def twin_prime_constant(limit: int = 10**6) -> float:
    constant = 1.0
    for p in base_primes(limit)[1:]:
        p = float(p)
        constant *= 1 - 1 / (p - 1) ** 2
    return constant


def _li2_integrand(s: float) -> float:
    return math.exp(s) / (s * s)


def li2(x: float) -> float:
    """Integral of 1/log^2 t from 2 to x, by adaptive quadrature in s = log t."""
    if x <= 2:
        raise ValueError(f"Li2 needs x > 2, got {x}")

    upper = math.log(x)
    # unit-width pieces keep each piece's integrand within a factor e
    edges = [math.log(2), *range(1, math.ceil(upper)), upper]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        if hi > lo:
            value, _ = quad(_li2_integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
            total += value
    return total


def li2_closed_form(x: float) -> float:
    if x <= 2:
        raise ValueError(f"Li2 needs x > 2, got {x}")
    log_x = math.log(x)
    return expi(log_x) - expi(math.log(2)) - x / log_x + 2 / math.log(2)


def li2_asymptotic(x: float) -> float:
    # third coefficient kept on 1/log^3; the exact series reads 1 + 2/L + 6/L^2 + 24/L^3 + ...
    log_x = math.log(x)
    return x / log_x**2 * (1 + 2 / log_x + 6 / log_x**3)


def pi_squared_asymptotic(x: float) -> float:
    """Expansion of pi(x)^2 / x; differs from li2_asymptotic only in the last coefficient."""
    log_x = math.log(x)
    return x / log_x**2 * (1 + 2 / log_x + 5 / log_x**3)


def estimator_row(x: int, T: int, pi_x: int) -> EstimatorRow:
    if x < 3 or T < 1 or pi_x < 1:
        raise ValueError(f"Estimators need x > 2 and positive counts, got x={x}, T={T}, pi={pi_x}")
    return EstimatorRow(x=x, T=T, pi_x=pi_x)


def theta(x: int, T: int, constant: float = DECIMAL_CONSTANT) -> float:
    if x < 10:
        raise ValueError(f"theta needs x >= 10, got {x}")
    if constant <= 0:
        raise ValueError(f"theta needs a positive constant, got {constant}")
    return T * math.log(x) ** 2 / (constant * x) - 1
