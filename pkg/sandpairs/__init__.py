from sandpairs.digitsum import Base, digit_sum, digit_sums, ogf_digit_sums, product_digit_sums
from sandpairs.primes import is_prime, prime_count, sieve_segment
from sandpairs.sandcore import (
    DeltaHistogram,
    DeltaRule,
    SandPair,
    admissible_delta_rule,
    count_sand_numbers,
    count_sand_primes,
    count_sand_primes_at,
    is_sand_number_pair,
    is_sand_prime_pair,
    iter_sand_numbers,
    iter_sand_primes,
    list_sand_primes,
    witness,
)
from sandpairs.asymptotics import estimator_row, li2, sand_prime_constant, theta, twin_prime_constant
from sandpairs.fluct import d_count, density_p, fluctuation_series, w_direct, w_poisson, w_truncated
from sandpairs.config import CapExceededError, RunConfig
from sandpairs.checkpoint import CheckpointError, merge_checkpoints

__all__ = [
    "Base",
    "digit_sum",
    "digit_sums",
    "ogf_digit_sums",
    "product_digit_sums",
    "is_prime",
    "prime_count",
    "sieve_segment",
    "DeltaHistogram",
    "DeltaRule",
    "SandPair",
    "admissible_delta_rule",
    "count_sand_numbers",
    "count_sand_primes",
    "count_sand_primes_at",
    "is_sand_number_pair",
    "is_sand_prime_pair",
    "iter_sand_numbers",
    "iter_sand_primes",
    "list_sand_primes",
    "witness",
    "estimator_row",
    "li2",
    "sand_prime_constant",
    "theta",
    "twin_prime_constant",
    "d_count",
    "density_p",
    "fluctuation_series",
    "w_direct",
    "w_poisson",
    "w_truncated",
    "CapExceededError",
    "RunConfig",
    "CheckpointError",
    "merge_checkpoints",
]
