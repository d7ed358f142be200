"""Gaussian surrogate for the digit sum of a product and the fluctuations it predicts.

The digit sum of u = a*b is modelled as a normal variable with mean
M = (9/2) log10 u and variance V = (33/4) log10 u. Restricting b - a to the
lattice 18j - 4 gives the population density W(u), computed here directly,
through Poisson summation, and truncated to the j = 0, +-1 terms.
"""

from dataclasses import dataclass
from math import isqrt
from typing import Iterable
import math

import numpy as np

from sandpairs.asymptotics import DECIMAL_CONSTANT, theta
from sandpairs.digitsum import max_digit_sum_below, product_digit_sums

DIGIT_MEAN = 9 / 2
DIGIT_VARIANCE = 33 / 4
LATTICE = 18
LATTICE_OFFSET = 4
RESIDUE = LATTICE - LATTICE_OFFSET

# u^-a envelope of the first Poisson harmonic
EXPONENT_A = 11 * math.pi**2 / (216 * math.log(10))

BOUNDS = ("larger", "product")


@dataclass(frozen=True)
class GaussianModel:
    u: float

    def __post_init__(self):
        if self.u <= 1:
            raise ValueError(f"Product magnitude must exceed 1, got {self.u}")

    @property
    def log10u(self) -> float:
        return math.log10(self.u)

    @property
    def M(self) -> float:
        return DIGIT_MEAN * self.log10u

    @property
    def V(self) -> float:
        return DIGIT_VARIANCE * self.log10u


@dataclass(frozen=True)
class FluctuationRow:
    n: int
    u: float
    d_n: int
    d_prime: float
    D_fluc_scaled: float
    P_fluc_scaled: float


def pair_probability(a: int, b: int) -> float:
    if a >= b:
        raise ValueError(f"Pair must satisfy a < b, got ({a}, {b})")

    model = GaussianModel(a * b)
    return math.exp(-((b - a - model.M) ** 2) / (2 * model.V)) / math.sqrt(
        2 * math.pi * model.V
    )


def _auto_j_max(model: GaussianModel) -> int:
    centre = (LATTICE_OFFSET + model.M) / LATTICE
    return math.ceil(centre + 10 * math.sqrt(model.V) / LATTICE) + 1


def w_direct(u: float, j_max: int | None = None) -> float:
    model = GaussianModel(u)
    if j_max is None:
        j_max = _auto_j_max(model)
    if j_max < 1:
        raise ValueError(f"j_max must be at least 1, got {j_max}")

    centre = (LATTICE_OFFSET + model.M) / LATTICE
    j = np.arange(-j_max, j_max + 1, dtype=np.float64)
    terms = np.exp(-LATTICE * LATTICE / 2 * (j - centre) ** 2 / model.V)
    # The lattice spacing of 18 turns the unit-density Gaussian into density 1.
    return float(LATTICE * terms.sum() / math.sqrt(2 * math.pi * model.V))


def w_poisson(u: float, j_max: int = 8) -> float:
    model = GaussianModel(u)
    if j_max < 0:
        raise ValueError(f"j_max must be nonnegative, got {j_max}")

    j = np.arange(1, j_max + 1, dtype=np.float64)
    damping = np.exp(-model.V * math.pi**2 * j**2 / (LATTICE * LATTICE / 2))
    phase = np.cos(math.pi * j * (LATTICE_OFFSET + model.M) / (LATTICE / 2))
    return float(1 + 2 * (damping * phase).sum())


def w_truncated(u: float) -> float:
    log10u = GaussianModel(u).log10u
    return 1 + 2 * u ** (-EXPONENT_A) * math.cos(math.pi / 2 * (log10u + 8 / 9))


def density_p(u: float) -> float:
    return w_truncated(u) / (12 * math.sqrt(u))


def _iroot(n: int, k: int) -> int:
    # largest r with r^k <= n
    if n < 0:
        raise ValueError(f"Root of negative number {n}")
    r = int(round(n ** (1 / k))) if n < 1 << 1000 else 1 << (n.bit_length() // k)
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def _count_restricted(larger_max: int, product_max: int) -> int:
    """Pairs a < b with b <= larger_max, a*b <= product_max, b - a = 14 mod 18, s10(ab) = b - a."""
    if larger_max < 2 or product_max < 2:
        return 0

    total = 0
    delta_max = max_digit_sum_below(product_max + 1, 10)
    for delta in range(RESIDUE, delta_max + 1, LATTICE):
        # a (a + delta) <= product_max
        a_product = (isqrt(delta * delta + 4 * product_max) - delta) // 2
        a_max = min(larger_max - delta, a_product)
        if a_max < 1:
            continue
        smaller = np.arange(1, a_max + 1, dtype=np.uint64)
        larger = smaller + np.uint64(delta)
        total += int(np.count_nonzero(product_digit_sums(smaller, larger, 10) == delta))
    return total


def _check_bound(bound: str) -> None:
    if bound not in BOUNDS:
        raise ValueError(f"Bound must be one of {BOUNDS}, got {bound!r}")


def count_by_product(u: float, bound: str = "larger") -> int:
    _check_bound(bound)
    if u < 1:
        raise ValueError(f"u must be at least 1, got {u}")

    # largest integer product strictly below u
    product_max = math.ceil(u) - 1
    if bound == "product":
        return _count_restricted(product_max, product_max)

    larger_max = isqrt(math.floor(u))
    if larger_max * larger_max >= u:
        larger_max -= 1
    return _count_restricted(larger_max, larger_max * larger_max)


def d_count(n: int, bound: str = "larger") -> int:
    """Restricted count at u = 10^(n/5), compared exactly as integer powers."""
    _check_bound(bound)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")

    if bound == "product":
        # (ab)^5 < 10^n
        product_max = _iroot(10**n - 1, 5)
        return _count_restricted(product_max, product_max)

    # b^10 < 10^n
    larger_max = _iroot(10**n - 1, 10)
    return _count_restricted(larger_max, larger_max * larger_max)


def _u(n: int) -> float:
    return 10 ** (n / 5)


def fluctuation_series(n_min: int, n_max: int, bound: str = "larger") -> list[FluctuationRow]:
    if not 12 <= n_min < n_max:
        raise ValueError(f"Need 12 <= n_min < n_max, got n_min={n_min}, n_max={n_max}")

    d = {n: d_count(n, bound) for n in range(n_min - 1, n_max + 2)}

    rows = []
    for n in range(n_min, n_max + 1):
        u = _u(n)
        scale = 12 * math.sqrt(u)
        d_prime = (d[n + 1] - d[n - 1]) / (_u(n + 1) - _u(n - 1))
        rows.append(
            FluctuationRow(
                n=n,
                u=u,
                d_n=d[n],
                d_prime=d_prime,
                D_fluc_scaled=(d_prime - 1 / scale) * scale,
                P_fluc_scaled=(density_p(u) - 1 / scale) * scale,
            )
        )
    return rows


def theta_series(
    totals: Iterable[tuple[int, int]], constant: float = DECIMAL_CONSTANT
) -> list[tuple[int, int, float]]:
    return [(x, T, theta(x, T, constant)) for x, T in totals]
