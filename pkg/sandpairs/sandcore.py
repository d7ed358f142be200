from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, lcm
from multiprocessing import Pool
from typing import Callable, Iterable, Iterator, Mapping
import logging

import numpy as np
from tqdm import tqdm

from sandpairs.config import check_cap
from sandpairs.digitsum import (
    Base,
    as_base,
    digit_count,
    digit_sum,
    max_digit_sum_below,
    product_digit_sums,
)
from sandpairs.primes import DEFAULT_SEGMENT_SIZE, is_prime, sieve_segment

logger = logging.getLogger(__name__)

KINDS = ("numbers", "primes")

FIRST_DELTA_SEARCH = 100_000
SAMPLE_RATE = 0.01

_CHUNK = 1 << 20

# delta -> (constant term, coefficient of 10^r) of S = c + k * 10^r + 10^s
WITNESS_FAMILIES = {14: (3, 1), 32: (3, 1), 50: (7, 3)}


@dataclass(frozen=True, order=True)
class SandPair:
    a: int
    b: int
    base: int = field(default=10, compare=False)

    def __post_init__(self):
        if self.a >= self.b:
            raise ValueError(f"Pair must satisfy a < b, got ({self.a}, {self.b})")

    @property
    def delta(self) -> int:
        return self.b - self.a

    @property
    def product(self) -> int:
        return self.a * self.b

    @property
    def dsum(self) -> int:
        return digit_sum(self.product, self.base)


@dataclass(frozen=True)
class DeltaRule:
    base: Base
    kind: str
    period: int
    residues: tuple[int, ...]
    sporadic: tuple[SandPair, ...] = ()
    first_deltas: dict[int, int] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not self.residues and not self.sporadic

    def admits(self, delta: int) -> bool:
        if delta <= 0:
            return False
        if delta % self.period in self.residues:
            return True
        return any(pair.delta == delta for pair in self.sporadic)

    def deltas(self, limit: int) -> list[int]:
        found = [
            delta
            for residue in self.residues
            for delta in range(residue or self.period, limit + 1, self.period)
        ]
        return sorted(found)

    def describe(self) -> str:
        if self.is_empty:
            return "none"

        parts = [f"{residue} mod {self.period}" for residue in self.residues]
        parts += [f"sporadic ({pair.a}, {pair.b})" for pair in self.sporadic]
        return ", ".join(parts)


@dataclass
class DeltaHistogram:
    x: int
    base: Base
    counts: dict[int, int] = field(default_factory=dict)
    sporadic: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.sporadic

    def merge(self, other: "DeltaHistogram") -> "DeltaHistogram":
        if other.base != self.base:
            raise ValueError(f"Cannot merge base {other.base.b} into base {self.base.b}")

        counts = dict(self.counts)
        for delta, count in other.counts.items():
            counts[delta] = counts.get(delta, 0) + count

        return DeltaHistogram(
            x=max(self.x, other.x),
            base=self.base,
            counts=dict(sorted(counts.items())),
            sporadic=self.sporadic + other.sporadic,
        )

    def row(self, deltas: Iterable[int]) -> list[int]:
        return [self.counts.get(delta, 0) for delta in deltas]


@dataclass(frozen=True, order=True)
class WorkUnit:
    lo: int
    hi: int


def _residue_classes(modulus: int, coprime: bool) -> list[int]:
    classes = []
    for delta in range(modulus):
        for n in range(modulus):
            if coprime and (gcd(n, modulus) != 1 or gcd(n + delta, modulus) != 1):
                continue
            if (n * (n + delta) - delta) % modulus == 0:
                classes.append(delta)
                break
    return classes


def _sporadic_prime_pairs(base: Base, period: int, residues: tuple[int, ...]) -> list[SandPair]:
    # Outside the residue family a pair must contain 2 or a prime factor of b - 1;
    # the digit-sum ceiling bounds the partner.
    pairs = []
    largest = max((2, *base.prime_factors))
    for p in range(2, largest + 1):
        if not is_prime(p):
            continue
        q = p + 1
        while base.modulus * digit_count(p * q, base) >= q - p:
            delta = q - p
            if (
                delta % period not in residues
                and is_prime(q)
                and digit_sum(p * q, base) == delta
            ):
                pairs.append(SandPair(p, q, base.b))
            q += 1
    return sorted(pairs)


def _first_deltas(base: Base, kind: str, period: int, residues: tuple[int, ...]) -> dict[int, int]:
    ceiling = max_digit_sum_below(FIRST_DELTA_SEARCH**2, base)
    segment = sieve_segment(2, FIRST_DELTA_SEARCH + ceiling + 1)
    if kind == "primes":
        smaller = segment.primes()
        smaller = smaller[smaller < FIRST_DELTA_SEARCH]
    else:
        smaller = np.arange(1, FIRST_DELTA_SEARCH, dtype=np.uint64)

    first = {}
    for residue in residues:
        for delta in range(residue or period, ceiling + 1, period):
            larger = smaller + np.uint64(delta)
            hit = product_digit_sums(smaller, larger, base) == delta
            if kind == "primes":
                hit &= segment.mask(larger)
            if hit.any():
                first[residue] = delta
                break
    return first


@lru_cache(maxsize=None)
def _delta_rule(base: Base, kind: str) -> DeltaRule:
    modulus = base.modulus
    if kind == "numbers":
        period = modulus
        residues = tuple(_residue_classes(modulus, coprime=False))
        sporadic = ()
    else:
        period = lcm(2, modulus)
        classes = set(_residue_classes(modulus, coprime=True))
        residues = tuple(
            residue
            for residue in range(0, period, 2)
            if residue % modulus in classes
        )
        sporadic = tuple(_sporadic_prime_pairs(base, period, residues))

    rule = DeltaRule(
        base=base,
        kind=kind,
        period=period,
        residues=residues,
        sporadic=sporadic,
        first_deltas=_first_deltas(base, kind, period, residues),
    )
    logger.debug("Base %d %s rule: %s", base.b, kind, rule.describe())
    return rule


def admissible_delta_rule(base: int | Base, kind: str = "primes") -> DeltaRule:
    if kind not in KINDS:
        raise ValueError(f"Kind must be one of {KINDS}, got {kind!r}")
    return _delta_rule(as_base(base), kind)


def is_sand_number_pair(a: int, b: int, base: int | Base = 10) -> bool:
    if a < 1 or a >= b:
        raise ValueError(f"Pair must satisfy 1 <= a < b, got ({a}, {b})")
    return digit_sum(a * b, base) == b - a


def is_sand_prime_pair(a: int, b: int, base: int | Base = 10) -> bool:
    return is_sand_number_pair(a, b, base) and is_prime(a) and is_prime(b)


def _number_hits(x: int, base: Base) -> Iterator[tuple[int, np.ndarray]]:
    rule = admissible_delta_rule(base, "numbers")
    for delta in rule.deltas(min(x - 1, max_digit_sum_below(x * x, base))):
        for start in range(1, x - delta + 1, _CHUNK):
            smaller = np.arange(start, min(start + _CHUNK, x - delta + 1), dtype=np.uint64)
            hit = product_digit_sums(smaller, smaller + np.uint64(delta), base) == delta
            yield delta, smaller[hit]


def count_sand_numbers(x: int, base: int | Base = 10) -> int:
    base = as_base(base)
    if x < 2:
        raise ValueError(f"SanD number count needs x >= 2, got {x}")
    check_cap(x)

    return sum(len(smaller) for _, smaller in _number_hits(x, base))


def iter_sand_numbers(x: int, base: int | Base = 10) -> Iterator[SandPair]:
    base = as_base(base)
    if x < 2:
        raise ValueError(f"SanD number listing needs x >= 2, got {x}")
    check_cap(x)

    pairs = [
        SandPair(int(a), int(a) + delta, base.b)
        for delta, smaller in _number_hits(x, base)
        for a in smaller
    ]
    yield from sorted(pairs)


def delta_bound(x: int, base: int | Base = 10) -> int:
    base = as_base(base)
    rule = admissible_delta_rule(base, "primes")
    return max_digit_sum_below(x * x, base) + rule.period


def sand_prime_deltas(x: int, base: int | Base = 10) -> list[int]:
    rule = admissible_delta_rule(base, "primes")
    return rule.deltas(min(delta_bound(x, base), max(x - 2, 0)))


def _verify_sample(smaller: np.ndarray, larger: np.ndarray, base: Base, rng: np.random.Generator) -> None:
    chosen = rng.random(len(smaller)) < SAMPLE_RATE
    for a, b in zip(smaller[chosen], larger[chosen]):
        a, b = int(a), int(b)
        if not (is_prime(a) and is_prime(b) and digit_sum(a * b, base) == b - a):
            raise RuntimeError(f"Enumerated pair ({a}, {b}) is not a SanD prime pair in base {base.b}")


def _prime_hits(lo: int, hi: int, base: Base, deltas: tuple[int, ...]) -> Iterator[tuple[int, np.ndarray]]:
    lo = max(lo, 2)
    if hi <= lo or not deltas:
        return

    segment = sieve_segment(max(2, lo - max(deltas)), hi)
    larger_all = segment.primes()
    larger_all = larger_all[larger_all >= np.uint64(lo)]
    rng = np.random.default_rng(lo)

    for delta in deltas:
        larger = larger_all[larger_all >= np.uint64(delta + 2)]
        smaller = larger - np.uint64(delta)
        hit = product_digit_sums(smaller, larger, base) == delta
        smaller = smaller[hit]
        prime = segment.mask(smaller)
        smaller = smaller[prime]
        _verify_sample(smaller, smaller + np.uint64(delta), base, rng)
        yield delta, smaller


def count_sand_primes_range(
    lo: int, hi: int, base: int | Base, deltas: Iterable[int]
) -> DeltaHistogram:
    base = as_base(base)
    deltas = tuple(deltas)
    counts = {delta: 0 for delta in deltas}
    for delta, smaller in _prime_hits(lo, hi, base, deltas):
        counts[delta] = len(smaller)

    rule = admissible_delta_rule(base, "primes")
    sporadic = sum(1 for pair in rule.sporadic if lo <= pair.b < hi)
    return DeltaHistogram(x=hi - 1, base=base, counts=counts, sporadic=sporadic)


def plan_units(thresholds: Iterable[int], segment_size: int = DEFAULT_SEGMENT_SIZE) -> list[WorkUnit]:
    if segment_size < 1:
        raise ValueError(f"Segment size must be positive, got {segment_size}")

    units = []
    lo = 2
    for threshold in sorted(set(thresholds)):
        hi = threshold + 1
        for start in range(lo, hi, segment_size):
            units.append(WorkUnit(start, min(start + segment_size, hi)))
        lo = max(lo, hi)
    return units


def _run_unit(job: tuple[int, int, Base, tuple[int, ...]]) -> DeltaHistogram:
    lo, hi, base, deltas = job
    return count_sand_primes_range(lo, hi, base, deltas)


def iter_unit_histograms(
    units: list[WorkUnit],
    base: int | Base,
    deltas: Iterable[int],
    threads: int = 1,
    progress: bool = False,
) -> Iterator[tuple[WorkUnit, DeltaHistogram]]:
    if threads < 1:
        raise ValueError(f"Thread count must be at least 1, got {threads}")

    base = as_base(base)
    jobs = [(unit.lo, unit.hi, base, tuple(deltas)) for unit in units]
    bar = tqdm(total=len(jobs), unit="range", disable=not progress)

    if threads == 1 or len(jobs) < 2:
        for unit, job in zip(units, jobs):
            yield unit, _run_unit(job)
            bar.update()
    else:
        with Pool(processes=threads) as pool:
            for unit, histogram in zip(units, pool.imap(_run_unit, jobs)):
                yield unit, histogram
                bar.update()
    bar.close()


def count_sand_primes_at(
    thresholds: Iterable[int],
    base: int | Base = 10,
    *,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    completed: Mapping[WorkUnit, DeltaHistogram] | None = None,
    on_unit: Callable[[WorkUnit, DeltaHistogram], None] | None = None,
    progress: bool = False,
) -> list[DeltaHistogram]:
    base = as_base(base)
    thresholds = sorted(set(thresholds))
    if not thresholds:
        raise ValueError("At least one threshold is required")
    if thresholds[0] < 2:
        raise ValueError(f"Thresholds must be at least 2, got {thresholds[0]}")
    check_cap(thresholds[-1])

    deltas = sand_prime_deltas(thresholds[-1], base)
    completed = dict(completed or {})
    units = plan_units(thresholds, segment_size)
    pending = [unit for unit in units if unit not in completed]
    if completed:
        logger.info("Resuming: %d of %d ranges already done", len(units) - len(pending), len(units))

    parts = dict(completed)
    for unit, histogram in iter_unit_histograms(pending, base, deltas, threads, progress):
        parts[unit] = histogram
        if on_unit is not None:
            on_unit(unit, histogram)

    rows = []
    running = DeltaHistogram(x=2, base=base, counts={delta: 0 for delta in deltas})
    remaining = iter(units)
    for threshold in thresholds:
        for unit in remaining:
            running = running.merge(parts[unit])
            if unit.hi == threshold + 1:
                break
        rows.append(
            DeltaHistogram(
                x=threshold,
                base=base,
                counts=dict(running.counts),
                sporadic=running.sporadic,
            )
        )
    return rows


def count_sand_primes(
    x: int,
    base: int | Base = 10,
    *,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
) -> DeltaHistogram:
    if x < 2:
        raise ValueError(f"SanD prime count needs x >= 2, got {x}")
    return count_sand_primes_at([x], base, threads=threads, segment_size=segment_size)[0]


def iter_sand_primes(
    x: int, base: int | Base = 10, segment_size: int = DEFAULT_SEGMENT_SIZE
) -> Iterator[SandPair]:
    base = as_base(base)
    if x < 2:
        raise ValueError(f"SanD prime listing needs x >= 2, got {x}")
    check_cap(x)

    rule = admissible_delta_rule(base, "primes")
    deltas = tuple(sand_prime_deltas(x, base))
    for unit in plan_units([x], segment_size):
        pairs = [pair for pair in rule.sporadic if unit.lo <= pair.b < unit.hi]
        for delta, smaller in _prime_hits(unit.lo, unit.hi, base, deltas):
            pairs.extend(SandPair(int(a), int(a) + delta, base.b) for a in smaller)
        yield from sorted(pairs, key=lambda pair: (pair.b, pair.a))


def list_sand_primes(
    delta: int, k: int, base: int | Base = 10, limit: int = 10**9
) -> list[SandPair]:
    base = as_base(base)
    if k < 1:
        raise ValueError(f"Number of pairs must be positive, got {k}")
    check_cap(limit)

    rule = admissible_delta_rule(base, "primes")
    if not rule.admits(delta):
        raise ValueError(
            f"Delta {delta} is not admissible for base {base.b} SanD primes; "
            f"admissible classes: {rule.describe()}"
        )

    sporadic = [pair for pair in rule.sporadic if pair.delta == delta]
    if sporadic:
        return sporadic[:k]

    found: list[SandPair] = []
    lo, size = 2, 1 << 16
    while len(found) < k and lo <= limit:
        hi = min(lo + size, limit + 1)
        segment = sieve_segment(lo, hi + delta)
        smaller = segment.primes()
        smaller = smaller[smaller < np.uint64(hi)]
        larger = smaller + np.uint64(delta)
        hit = segment.mask(larger) & (product_digit_sums(smaller, larger, base) == delta)
        found.extend(SandPair(int(a), int(a) + delta, base.b) for a in smaller[hit])
        lo, size = hi, min(size * 2, DEFAULT_SEGMENT_SIZE)

    if len(found) < k:
        logger.warning("Only %d pairs with delta %d below %d", len(found), delta, limit)
    return found[:k]


def _witness_terms(constant: int, coefficient: int, delta: int, r: int, s: int) -> list[tuple[int, int]]:
    cross = 2 * constant + delta
    return [
        (constant * (constant + delta), 0),
        (cross * coefficient, r),
        (cross, s),
        (coefficient * coefficient, 2 * r),
        (1, 2 * s),
        (2 * coefficient, r + s),
    ]


def _colliding_exponents(terms: list[tuple[int, int]]) -> list[tuple[int, int]]:
    spans = [(exponent, exponent + len(str(value)) - 1) for value, exponent in terms]
    return [
        (first[0], second[0])
        for i, first in enumerate(spans)
        for second in spans[i + 1 :]
        if first[0] <= second[1] and second[0] <= first[1]
    ]


def witness(delta: int, r: int, s: int) -> SandPair:
    if delta not in WITNESS_FAMILIES:
        raise ValueError(f"No witness family for delta {delta}; known: {sorted(WITNESS_FAMILIES)}")
    if r <= 0 or s <= 0 or r == s:
        raise ValueError(f"Exponents must be positive and distinct, got r={r}, s={s}")

    constant, coefficient = WITNESS_FAMILIES[delta]
    candidate = constant + coefficient * 10**r + 10**s
    dsum = digit_sum(candidate * (candidate + delta), 10)
    if dsum != delta:
        collisions = _colliding_exponents(_witness_terms(constant, coefficient, delta, r, s))
        detail = f"exponent collision at {collisions}" if collisions else "carry-free terms miss the target"
        raise ValueError(
            f"S={candidate} gives digit sum {dsum}, not {delta}: {detail}"
        )
    return SandPair(candidate, candidate + delta, 10)

