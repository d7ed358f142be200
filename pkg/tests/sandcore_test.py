import numpy as np
import pytest
from sandpairs import sandcore
from sandpairs.config import CapExceededError
from sandpairs.digitsum import Base, digit_sum, max_digit_sum_below
from sandpairs.primes import is_prime
from sandpairs.sandcore import (
    DeltaHistogram,
    SandPair,
    WorkUnit,
    admissible_delta_rule,
    count_sand_numbers,
    count_sand_primes,
    count_sand_primes_at,
    count_sand_primes_range,
    is_sand_number_pair,
    is_sand_prime_pair,
    iter_sand_numbers,
    iter_sand_primes,
    list_sand_primes,
    plan_units,
    sand_prime_deltas,
    witness,
)

DECIMAL_THRESHOLDS = [100, 300, 1000, 3000, 10**4, 3 * 10**4, 10**5]
# Counted by larger prime <= x. The printed 3*10^2 row has 14, counting (281, 313).
DECIMAL_TOTALS = [8, 13, 22, 45, 106, 264, 713]


def brute_force_numbers(x, base=10):
    return [
        (a, b)
        for b in range(2, x + 1)
        for a in range(1, b)
        if digit_sum(a * b, base) == b - a
    ]


def brute_force_primes(x, base=10):
    primes = [p for p in range(2, x + 1) if is_prime(p)]
    return [
        (a, b)
        for i, b in enumerate(primes)
        for a in primes[:i]
        if digit_sum(a * b, base) == b - a
    ]


def decimal_digit_sums(values):
    values = values.copy()
    total = np.zeros_like(values)
    while values.any():
        total += values % 10
        values //= 10
    return total


def all_pairs_number_count(x):
    count = 0
    for b in range(2, x + 1):
        a = np.arange(1, b, dtype=np.int64)
        count += int(np.count_nonzero(decimal_digit_sums(a * b) == b - a))
    return count


def all_pairs_prime_count(x):
    flags = np.ones(x + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(x**0.5) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.int64)

    count = 0
    for i, q in enumerate(primes):
        p = primes[:i]
        count += int(np.count_nonzero(decimal_digit_sums(p * q) == q - p))
    return count


class TestPairs:
    def test_sand_number_pair(self):
        assert is_sand_number_pair(5, 19)
        assert is_sand_number_pair(2, 7)
        assert not is_sand_number_pair(3, 7)

    def test_sand_prime_pair(self):
        assert is_sand_prime_pair(5, 19)
        assert is_sand_prime_pair(1103, 1117)
        assert is_sand_number_pair(3, 12)
        assert not is_sand_prime_pair(3, 12)

    def test_pair_ordering(self):
        with pytest.raises(ValueError):
            SandPair(19, 5)
        with pytest.raises(ValueError):
            is_sand_number_pair(0, 5)

    def test_pair_properties(self):
        pair = SandPair(5, 19)
        assert pair.delta == 14
        assert pair.product == 95
        assert pair.dsum == 14


class TestDeltaRule:
    def test_decimal_primes(self):
        rule = admissible_delta_rule(10, "primes")
        assert rule.period == 18
        assert rule.residues == (14,)
        assert rule.sporadic == (SandPair(2, 7),)
        assert rule.first_deltas == {14: 14}

    def test_decimal_numbers(self):
        rule = admissible_delta_rule(10, "numbers")
        assert rule.period == 9
        assert rule.residues == (0, 5)
        assert rule.sporadic == ()

    def test_admits(self):
        rule = admissible_delta_rule(10)
        assert rule.admits(14)
        assert rule.admits(32)
        assert rule.admits(5)
        assert not rule.admits(16)
        assert not rule.admits(0)

    def test_describe(self):
        assert admissible_delta_rule(10).describe() == "14 mod 18, sporadic (2, 7)"

    def test_octal_primes(self):
        rule = admissible_delta_rule(8, "primes")
        assert rule.period == 14
        assert rule.residues == (4, 6, 10)
        assert rule.first_deltas == {4: 18, 6: 20, 10: 10}

    def test_binary_admits_every_even_delta(self):
        rule = admissible_delta_rule(2, "primes")
        assert rule.period == 2
        assert rule.residues == (0,)
        assert rule.deltas(8) == [2, 4, 6, 8]

    def test_small_even_bases(self):
        assert admissible_delta_rule(2).first_deltas == {0: 4}
        assert admissible_delta_rule(4).residues == (2,)
        assert admissible_delta_rule(4).first_deltas == {2: 8}
        senary = admissible_delta_rule(6)
        assert senary.period == 10
        assert senary.residues == (6, 8)

    def test_odd_base_has_no_residue_family(self):
        assert admissible_delta_rule(3, "primes").residues == ()

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            admissible_delta_rule(10, "composites")

    def test_deltas_up_to_limit(self):
        assert sand_prime_deltas(10**4) == [14, 32, 50, 68, 86]
        assert sand_prime_deltas(10) == []


class TestSandNumbers:
    def test_count_matches_brute_force(self):
        for base in (10, 4):
            assert count_sand_numbers(300, base) == len(brute_force_numbers(300, base))

    def test_listing_matches_brute_force(self):
        pairs = [(pair.a, pair.b) for pair in iter_sand_numbers(200)]
        assert pairs == sorted(brute_force_numbers(200))

    def test_count_matches_all_pairs(self):
        assert count_sand_numbers(3000) == all_pairs_number_count(3000)

    def test_density_band(self):
        assert 0.55 <= count_sand_numbers(10**6) / 10**6 <= 0.80

    def test_smallest_range(self):
        assert count_sand_numbers(7) == 1
        assert not is_sand_number_pair(1, 2)

    def test_rejects_small_x(self):
        with pytest.raises(ValueError):
            count_sand_numbers(1)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            count_sand_numbers(10**13)


class TestSandPrimes:
    def test_decimal_totals(self):
        rows = count_sand_primes_at(DECIMAL_THRESHOLDS, 10, segment_size=997)
        assert [row.x for row in rows] == DECIMAL_THRESHOLDS
        assert [row.total for row in rows] == DECIMAL_TOTALS

    def test_decimal_columns(self):
        rows = count_sand_primes_at([100, 300, 10**4, 10**5], 10)
        deltas = [14, 32, 50, 68, 86]
        assert rows[0].row(deltas) == [7, 0, 0, 0, 0]
        assert rows[1].row(deltas) == [9, 3, 0, 0, 0]
        assert rows[2].row(deltas) == [15, 69, 21, 0, 0]
        assert rows[3].row(deltas) == [16, 218, 464, 14, 0]
        assert all(row.sporadic == 1 for row in rows)

    def test_listing_matches_brute_force(self):
        listed = sorted((pair.a, pair.b) for pair in iter_sand_primes(2000))
        assert listed == sorted(brute_force_primes(2000))

    def test_count_matches_all_pairs(self):
        assert count_sand_primes(10**5).total == all_pairs_prime_count(10**5) == 713

    def test_sampled_pairs_are_verified(self, monkeypatch):
        monkeypatch.setattr(sandcore, "SAMPLE_RATE", 1.0)
        rng = np.random.default_rng(0)
        good = np.array([5, 17], dtype=np.uint64)

        sandcore._verify_sample(good, good + np.uint64(14), Base(10), rng)

        with pytest.raises(RuntimeError, match=r"\(3, 7\)"):
            sandcore._verify_sample(
                np.array([3], dtype=np.uint64), np.array([7], dtype=np.uint64), Base(10), rng
            )

    def test_enumeration_stops_on_bad_sample(self, monkeypatch):
        monkeypatch.setattr(sandcore, "SAMPLE_RATE", 1.0)
        monkeypatch.setattr(sandcore, "is_prime", lambda n: False)

        with pytest.raises(RuntimeError):
            count_sand_primes_range(2, 200, 10, [14])

    def test_binary_totals(self):
        rows = count_sand_primes_at([10, 100, 1000, 10**4, 10**5], 2)
        assert [row.total for row in rows] == [0, 6, 32, 172, 922]

    def test_octal_matches_brute_force(self):
        assert count_sand_primes(1500, 8).total == len(brute_force_primes(1500, 8))

    def test_segment_size_does_not_change_counts(self):
        coarse = count_sand_primes(3 * 10**4, 10)
        fine = count_sand_primes(3 * 10**4, 10, segment_size=1234)
        assert coarse.counts == fine.counts
        assert coarse.total == fine.total == 264

    def test_worker_pool_matches_serial(self):
        serial = count_sand_primes_at([10**4, 3 * 10**4], 10, segment_size=5000)
        pooled = count_sand_primes_at([10**4, 3 * 10**4], 10, segment_size=5000, threads=2)
        assert [row.counts for row in pooled] == [row.counts for row in serial]

    def test_resume_skips_completed_units(self):
        units = plan_units([10**4], 2500)
        done = {units[0]: count_sand_primes_range(units[0].lo, units[0].hi, 10, sand_prime_deltas(10**4))}
        seen = []

        rows = count_sand_primes_at(
            [10**4], 10, segment_size=2500, completed=done, on_unit=lambda unit, _: seen.append(unit)
        )

        assert rows[0].total == 106
        assert seen == units[1:]

    def test_rejects_bad_thresholds(self):
        with pytest.raises(ValueError):
            count_sand_primes_at([])
        with pytest.raises(ValueError):
            count_sand_primes(1)
        with pytest.raises(CapExceededError):
            count_sand_primes_at([10**13])

    @pytest.mark.slow
    def test_decimal_million(self):
        row = count_sand_primes(10**6, 10)
        assert row.row([14, 32, 50, 68, 86]) == [18, 451, 3579, 954, 8]
        assert row.total == 5011

    @pytest.mark.slow
    def test_binary_hundred_million(self):
        rows = count_sand_primes_at([10**6, 10**7, 10**8], 2, threads=4)
        assert [row.total for row in rows] == [5632, 41421, 335551]

    @pytest.mark.slow
    def test_decimal_hundred_million(self):
        row = count_sand_primes(10**8, 10, threads=4)
        # printed as 139196 and 238188; the printed est_pi of 0.7085 needs 235188
        assert row.row([14, 32, 50, 68, 86, 104, 122]) == [19, 944, 47206, 136196, 48831, 1985, 6]
        assert row.total == 235188


class TestResidueStructure:
    def test_prime_pairs_mod_three(self):
        pairs = [pair for pair in iter_sand_primes(10**5) if pair.a > 2]
        assert len(pairs) == 712
        assert all((pair.a % 3, pair.b % 3) == (2, 1) for pair in pairs)

    def test_number_pairs_mod_three(self):
        classes = {(pair.a % 3, pair.b % 3) for pair in iter_sand_numbers(3000)}
        assert classes <= {(0, 0), (2, 1)}

    def test_prime_zero_diagonal(self):
        for row in count_sand_primes_at(DECIMAL_THRESHOLDS, 10):
            ceiling = max_digit_sum_below(row.x * row.x)
            assert all(count == 0 for delta, count in row.counts.items() if delta > ceiling)

    def test_number_zero_diagonal(self):
        ceiling = max_digit_sum_below(3000 * 3000)
        assert all(pair.delta <= ceiling for pair in iter_sand_numbers(3000))


class TestUnits:
    def test_units_stop_at_thresholds(self):
        assert plan_units([100, 250], 100) == [
            WorkUnit(2, 101),
            WorkUnit(101, 201),
            WorkUnit(201, 251),
        ]

    def test_histogram_merge(self):
        first = DeltaHistogram(x=100, base=Base(10), counts={14: 7}, sporadic=1)
        second = DeltaHistogram(x=300, base=Base(10), counts={14: 2, 32: 4})
        merged = first.merge(second)
        assert merged.x == 300
        assert merged.counts == {14: 9, 32: 4}
        assert merged.total == 14

    def test_histogram_merge_rejects_mixed_bases(self):
        with pytest.raises(ValueError):
            DeltaHistogram(x=10, base=Base(10)).merge(DeltaHistogram(x=10, base=Base(2)))


class TestListing:
    FIRST_PRIMES = {
        14: [5, 17, 23, 29, 53, 59, 83, 113, 167, 383, 443, 1103, 1409, 2003, 3203, 11483, 100043, 200003, 1001003],
        32: [149, 179, 239, 281, 389, 431, 491, 509, 569, 659, 1019, 1031, 1061, 1259, 1289, 1427, 1439, 1901, 2081],
        50: [2543, 3137, 3407, 4973, 5147, 5693, 7193, 7523, 7649, 7673, 8243, 8513, 8573, 8627, 9293, 9461, 9497, 9767, 9833],
        68: [19961, 28211, 43541, 44111, 62861, 66821, 69941, 83621, 86561, 88721, 89261, 92111, 94781, 99191, 120671, 125261, 129461, 129959, 130211],
        86: [412253, 547661, 871163, 937661, 982703, 989381, 992363, 996551, 999917, 999953, 1296101, 1297601, 1329863, 1336253, 1337813, 1378253, 1410203, 1608611, 1642211],
    }

    @pytest.mark.parametrize("delta", sorted(FIRST_PRIMES))
    def test_first_nineteen(self, delta):
        pairs = list_sand_primes(delta, 19)
        assert [pair.a for pair in pairs] == self.FIRST_PRIMES[delta]
        assert all(pair.delta == delta for pair in pairs)

    def test_sporadic_delta(self):
        assert list_sand_primes(5, 3) == [SandPair(2, 7)]

    def test_inadmissible_delta_names_classes(self):
        with pytest.raises(ValueError, match="14 mod 18"):
            list_sand_primes(16, 5)

    def test_limit_truncates(self):
        assert [pair.a for pair in list_sand_primes(14, 19, limit=100)] == [5, 17, 23, 29, 53, 59, 83]

    def test_rejects_empty_request(self):
        with pytest.raises(ValueError):
            list_sand_primes(14, 0)


class TestWitness:
    @pytest.mark.parametrize(
        "delta, r, s, expected",
        [
            (14, 2, 3, 1103),
            (14, 15, 16, 11000000000000003),
            (32, 2, 4, 10103),
            (50, 3, 6, 1003007),
        ],
    )
    def test_witness_digit_sum(self, delta, r, s, expected):
        pair = witness(delta, r, s)
        assert pair.a == expected
        assert pair.delta == delta
        assert digit_sum(pair.product) == delta

    def test_carry_reports_failure(self):
        with pytest.raises(ValueError, match="137"):
            witness(50, 1, 2)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            witness(20, 2, 3)

    def test_exponents_must_differ(self):
        with pytest.raises(ValueError):
            witness(14, 3, 3)
