from dataclasses import dataclass
from functools import cached_property, lru_cache
import math

import numpy as np

X_CAP = 10**12

_TABLE_LIMIT = 1 << 16


@dataclass(frozen=True)
class Base:
    b: int

    def __post_init__(self):
        if isinstance(self.b, bool) or not isinstance(self.b, int):
            raise TypeError(f"Base must be an integer, got {self.b!r}")
        if self.b < 2:
            raise ValueError(f"Base must be at least 2, got {self.b}")

    @property
    def modulus(self) -> int:
        return self.b - 1

    @cached_property
    def prime_factors(self) -> tuple[int, ...]:
        return prime_factors(self.modulus)

    @cached_property
    def limb(self) -> int:
        # smallest b^k with b^(2k) > X_CAP, so a, b <= X_CAP split into two limbs
        limb = self.b
        while limb * limb <= X_CAP:
            limb *= self.b
        return limb

    def __int__(self) -> int:
        return self.b


def as_base(base: int | Base) -> Base:
    return base if isinstance(base, Base) else Base(base)


def prime_factors(n: int) -> tuple[int, ...]:
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return tuple(factors)


def digit_count(n: int, base: int | Base) -> int:
    b = as_base(base).b
    if n < 0:
        raise ValueError(f"Cannot count digits of negative number {n}")

    count = 1
    while n >= b:
        n //= b
        count += 1
    return count


def digit_sum(n: int, base: int | Base = 10) -> int:
    b = as_base(base).b
    if n < 0:
        raise ValueError(f"Digit sum needs a nonnegative integer, got {n}")

    total = 0
    while n:
        n, digit = divmod(n, b)
        total += digit
    return total


def digit_sum_legendre(n: int, base: int | Base = 10) -> int:
    """Legendre's identity s_b(n) = n - (b-1) * sum_{j>=1} floor(n / b^j)."""
    base = as_base(base)
    if n < 0:
        raise ValueError(f"Digit sum needs a nonnegative integer, got {n}")

    carried = 0
    power = base.b
    while power <= n:
        carried += n // power
        power *= base.b
    return n - base.modulus * carried


def _divide_by_one_minus_power(series: np.ndarray, k: int) -> None:
    # in place multiplication by 1 / (1 - z^k)
    for start in range(k, len(series), k):
        stop = min(start + k, len(series))
        series[start:stop] += series[start - k : stop - k]


def ogf_digit_sums(base: int | Base, N: int) -> list[int]:
    """First N coefficients of the ordinary generating function of s_b(n).

    sum_n s_b(n) z^n = 1/(1-z) * sum_m (z^{b^m} - b z^{b^{m+1}} + (b-1) z^{(b+1) b^m})
                                      / ((1 - z^{b^m}) (1 - z^{b^{m+1}}))

    The m-sum is truncated once b^m >= N, and every rational term is expanded
    as a power series, so the result is exact.
    """
    base = as_base(base)
    if N <= 0:
        raise ValueError(f"Number of coefficients must be positive, got {N}")

    b = base.b
    total = np.zeros(N, dtype=np.int64)
    power = 1
    while power < N:
        term = np.zeros(N, dtype=np.int64)
        for exponent, coefficient in (
            (power, 1),
            (b * power, -b),
            ((b + 1) * power, b - 1),
        ):
            if exponent < N:
                term[exponent] += coefficient
        _divide_by_one_minus_power(term, power)
        if b * power < N:
            _divide_by_one_minus_power(term, b * power)
        total += term
        power *= b
    _divide_by_one_minus_power(total, 1)

    coefficients = [int(c) for c in total]
    for k, coefficient in enumerate(coefficients):
        expected = digit_sum(k, base)
        if coefficient != expected:
            raise ArithmeticError(
                f"Generating function coefficient {k} is {coefficient}, "
                f"but the digit sum in base {b} is {expected}"
            )
    return coefficients


def max_digit_sum_below(x: int, base: int | Base = 10) -> int:
    base = as_base(base)
    if x < 1:
        raise ValueError(f"Bound must be positive, got {x}")

    return base.modulus * digit_count(x - 1, base)


@lru_cache(maxsize=None)
def _digit_sum_table(b: int) -> tuple[np.ndarray, int]:
    width = b
    while width * b <= _TABLE_LIMIT:
        width *= b

    table = np.zeros(width, dtype=np.int64)
    values = np.arange(width, dtype=np.int64)
    while values.any():
        table += values % b
        values //= b
    table.setflags(write=False)
    return table, width


def digit_sums(values: np.ndarray, base: int | Base = 10) -> np.ndarray:
    b = as_base(base).b
    values = np.asarray(values, dtype=np.uint64)

    if b == 2:
        return np.bitwise_count(values).astype(np.int64)

    if b > _TABLE_LIMIT:
        totals = np.zeros(values.shape, dtype=np.int64)
        radix = np.uint64(b)
        while values.any():
            totals += (values % radix).astype(np.int64)
            values = values // radix
        return totals

    table, width = _digit_sum_table(b)
    radix = np.uint64(width)
    totals = np.zeros(values.shape, dtype=np.int64)
    while values.any():
        totals += table[values % radix]
        values = values // radix
    return totals


def product_digit_sums(
    a: np.ndarray, b: np.ndarray, base: int | Base = 10
) -> np.ndarray:
    """Exact digit sums of a * b for factors up to X_CAP.

    Factors are split into two base^k limbs; no partial product exceeds
    2 * limb^2, so the whole computation stays inside uint64.
    """
    base = as_base(base)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    if a.size == 0 or b.size == 0:
        return np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)

    largest = max(int(a.max()), int(b.max()))
    if largest < 1 << 32:
        return digit_sums(a * b, base)
    if largest >= base.limb * base.limb or 2 * base.limb * base.limb >= 1 << 64:
        raise ValueError(f"Factor {largest} exceeds the two-limb range of base {base.b}")

    limb = np.uint64(base.limb)
    a_high, a_low = np.divmod(a, limb)
    b_high, b_low = np.divmod(b, limb)

    low = a_low * b_low
    middle = a_low * b_high + a_high * b_low + low // limb
    high = a_high * b_high + middle // limb

    return (
        digit_sums(low % limb, base)
        + digit_sums(middle % limb, base)
        + digit_sums(high, base)
    )
