from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Iterator
import logging

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_SEGMENT_SIZE = 10_000_000

# Miller-Rabin with the first twelve prime bases is exact below 3.3 * 10^24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_LIMIT = 1 << 64


@dataclass(frozen=True)
class PrimeCount:
    x: int
    pi_x: int


@dataclass(frozen=True, eq=False)
class Segment:
    lo: int
    hi: int
    flags: np.ndarray

    @property
    def first_odd(self) -> int:
        return self.lo | 1

    @property
    def has_two(self) -> bool:
        return self.lo <= 2 < self.hi

    def primes(self) -> np.ndarray:
        odd = np.flatnonzero(self.flags).astype(np.uint64) * np.uint64(2)
        odd += np.uint64(self.first_odd)
        if self.has_two:
            return np.concatenate((np.array([2], dtype=np.uint64), odd))
        return odd

    def count(self) -> int:
        return int(np.count_nonzero(self.flags)) + int(self.has_two)

    def is_prime(self, n: int) -> bool:
        if not self.lo <= n < self.hi:
            raise ValueError(f"{n} is outside segment [{self.lo}, {self.hi})")
        if n % 2 == 0:
            return n == 2
        return bool(self.flags[(n - self.first_odd) // 2])

    def mask(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.uint64)
        if values.size and (int(values.min()) < self.lo or int(values.max()) >= self.hi):
            raise ValueError(f"Values fall outside segment [{self.lo}, {self.hi})")

        odd = (values & np.uint64(1)).astype(bool)
        result = values == np.uint64(2)
        index = (values[odd] - np.uint64(self.first_odd)) // np.uint64(2)
        result[odd] = self.flags[index.astype(np.intp)]
        return result


def _round_up_power_of_two(n: int) -> int:
    return 1 << max(n - 1, 1).bit_length()


@lru_cache(maxsize=4)
def _sieve_up_to(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return primes


def base_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    primes = _sieve_up_to(_round_up_power_of_two(limit))
    return primes[: np.searchsorted(primes, limit, side="right")]


def sieve_segment(lo: int, hi: int, primes: np.ndarray | None = None) -> Segment:
    if hi <= lo:
        raise ValueError(f"Empty segment: hi ({hi}) must exceed lo ({lo})")
    if lo < 2:
        raise ValueError(f"Segment must start at 2 or above, got {lo}")
    if hi > _LIMIT:
        raise ValueError(f"Segment end {hi} exceeds 2^64")

    if primes is None:
        primes = base_primes(isqrt(hi - 1))

    first_odd = lo | 1
    size = max(0, (hi - first_odd + 1) // 2)
    flags = np.ones(size, dtype=bool)

    for p in primes:
        p = int(p)
        if p == 2:
            continue
        square = p * p
        if square >= hi:
            break
        start = max(square, -(-first_odd // p) * p)
        if start % 2 == 0:
            start += p
        flags[(start - first_odd) // 2 :: p] = False

    return Segment(lo=lo, hi=hi, flags=flags)


def iter_segments(
    lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE
) -> Iterator[Segment]:
    if segment_size < 1:
        raise ValueError(f"Segment size must be positive, got {segment_size}")

    lo = max(lo, 2)
    if hi <= lo:
        return

    primes = base_primes(isqrt(hi - 1))
    for start in range(lo, hi, segment_size):
        yield sieve_segment(start, min(start + segment_size, hi), primes)


def count_primes_between(
    lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE
) -> int:
    return sum(segment.count() for segment in iter_segments(lo, hi, segment_size))


def prime_count(x: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> PrimeCount:
    if x < 2:
        raise ValueError(f"Prime count needs x >= 2, got {x}")

    pi_x = count_primes_between(2, x + 1, segment_size)
    logger.debug("pi(%d) = %d", x, pi_x)
    return PrimeCount(x=x, pi_x=pi_x)


def _miller_rabin_round(n: int, d: int, r: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    if n < 0 or n >= _LIMIT:
        raise ValueError(f"Primality test covers 0 <= n < 2^64, got {n}")

    if n <= _MR_BASES[-1]:
        return n in _MR_BASES

    for p in _MR_BASES:
        if n % p == 0:
            return False

    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1

    return all(_miller_rabin_round(n, d, r, a) for a in _MR_BASES)
