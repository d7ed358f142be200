from dataclasses import dataclass
from pathlib import Path
from typing import Mapping
import os
import re

from sandpairs.digitsum import X_CAP, Base, as_base
from sandpairs.primes import DEFAULT_SEGMENT_SIZE

THREADS_ENV = "SAND_THREADS"
OUTPUT_FORMATS = ("csv", "json")
MIN_SEGMENT_SIZE = 1000

_POWER = re.compile(r"^(?:(\d+)\s*[*·x]\s*)?(\d+)\s*\^\s*(\d+)$")


class CapExceededError(ValueError):
    pass


def check_cap(x: int) -> None:
    if x > X_CAP:
        raise CapExceededError(f"x = {x} exceeds the supported cap of {X_CAP}")


def parse_count(text: str) -> int:
    text = text.strip().replace("_", "")

    match = _POWER.match(text)
    if match:
        factor, radix, exponent = match.groups()
        return int(factor or 1) * int(radix) ** int(exponent)

    if re.fullmatch(r"\d+", text):
        return int(text)

    try:
        value = float(text)
    except ValueError as e:
        raise ValueError(f"Invalid count '{text}': {e}") from e

    if not value.is_integer():
        raise ValueError(f"Count must be a whole number, got '{text}'")
    return int(value)


def default_thresholds(x_max: int, base: int | Base = 10) -> tuple[int, ...]:
    base = as_base(base)
    multipliers = (1,) if base.b == 2 else (1, 3)

    thresholds = []
    power = 100
    while power <= x_max:
        thresholds.extend(m * power for m in multipliers if m * power <= x_max)
        power *= 10

    if not thresholds or thresholds[-1] != x_max:
        thresholds.append(x_max)
    return tuple(thresholds)


@dataclass(frozen=True)
class RunConfig:
    base: Base = Base(10)
    x_max: int = 10**4
    thresholds: tuple[int, ...] = ()
    threads: int = 1
    segment_size: int = DEFAULT_SEGMENT_SIZE
    checkpoint_path: Path | None = None
    resume: bool = False
    output_format: str = "csv"
    progress: bool = False

    def __post_init__(self):
        object.__setattr__(self, "base", as_base(self.base))

        if self.x_max < 2:
            raise ValueError(f"x_max must be at least 2, got {self.x_max}")
        check_cap(self.x_max)

        if not self.thresholds:
            object.__setattr__(self, "thresholds", default_thresholds(self.x_max, self.base))
        thresholds = tuple(self.thresholds)
        object.__setattr__(self, "thresholds", thresholds)

        if list(thresholds) != sorted(set(thresholds)):
            raise ValueError(f"Thresholds must be strictly ascending, got {thresholds}")
        if thresholds[0] < 2 or thresholds[-1] > self.x_max:
            raise ValueError(f"Thresholds must lie in [2, {self.x_max}], got {thresholds}")

        if self.threads < 1:
            raise ValueError(f"Thread count must be at least 1, got {self.threads}")
        if self.segment_size < MIN_SEGMENT_SIZE:
            raise ValueError(
                f"Segment size must be at least {MIN_SEGMENT_SIZE}, got {self.segment_size}"
            )
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(
                f"Output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}"
            )
        if self.resume and self.checkpoint_path is None:
            raise ValueError("Resuming needs a checkpoint path")

    @classmethod
    def from_args(cls, args, environ: Mapping[str, str] | None = None) -> "RunConfig":
        environ = os.environ if environ is None else environ

        threads = getattr(args, "threads", None)
        if threads is None:
            threads = resolve_threads(environ)

        x_max = parse_count(args.max) if isinstance(args.max, str) else args.max
        thresholds = getattr(args, "thresholds", None)
        if isinstance(thresholds, str):
            thresholds = tuple(parse_count(part) for part in thresholds.split(","))

        checkpoint = getattr(args, "checkpoint", None)
        return cls(
            base=Base(args.base),
            x_max=x_max,
            thresholds=tuple(thresholds or ()),
            threads=threads,
            segment_size=getattr(args, "segment_size", DEFAULT_SEGMENT_SIZE),
            checkpoint_path=Path(checkpoint) if checkpoint else None,
            resume=getattr(args, "resume", False),
            output_format=getattr(args, "format", "csv"),
            progress=getattr(args, "progress", False),
        )


def resolve_threads(environ: Mapping[str, str]) -> int:
    raw = environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1

    try:
        threads = int(raw)
    except ValueError as e:
        raise ValueError(f"{THREADS_ENV} must be an integer, got '{raw}'") from e

    if threads < 1:
        raise ValueError(f"{THREADS_ENV} must be at least 1, got {threads}")
    return threads
