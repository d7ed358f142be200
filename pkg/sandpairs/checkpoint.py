from pathlib import Path
from typing import Iterable
import json
import logging
import shutil
import tempfile

from sandpairs.digitsum import Base, as_base
from sandpairs.sandcore import DeltaHistogram, WorkUnit

logger = logging.getLogger(__name__)

WILDCARD_CHARS = {"*", "?", "["}


class CheckpointError(ValueError):
    pass


def to_record(unit: WorkUnit, histogram: DeltaHistogram) -> dict:
    return {
        "base": histogram.base.b,
        "range_lo": unit.lo,
        "range_hi": unit.hi,
        "counts": {str(delta): count for delta, count in sorted(histogram.counts.items())},
        "sporadic": histogram.sporadic,
    }


def from_record(record: dict) -> tuple[WorkUnit, DeltaHistogram]:
    try:
        unit = WorkUnit(int(record["range_lo"]), int(record["range_hi"]))
        histogram = DeltaHistogram(
            x=unit.hi - 1,
            base=Base(int(record["base"])),
            counts={int(delta): int(count) for delta, count in record["counts"].items()},
            sporadic=int(record.get("sporadic", 0)),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise CheckpointError(f"Malformed checkpoint record {record!r}: {e}") from e

    if unit.hi <= unit.lo:
        raise CheckpointError(f"Empty range [{unit.lo}, {unit.hi}) in checkpoint")
    return unit, histogram


def append_record(path: str | Path, unit: WorkUnit, histogram: DeltaHistogram) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with path.open("a", encoding="utf-8") as f:
        f.write(json.dumps(to_record(unit, histogram), sort_keys=True) + "\n")
        f.flush()


def _check_disjoint(units: Iterable[WorkUnit], source: str) -> None:
    previous = None
    for unit in sorted(units):
        if previous is not None and unit.lo < previous.hi:
            raise CheckpointError(
                f"Overlapping ranges [{previous.lo}, {previous.hi}) and "
                f"[{unit.lo}, {unit.hi}) in {source}"
            )
        previous = unit


def load_records(
    path: str | Path, base: int | Base | None = None
) -> dict[WorkUnit, DeltaHistogram]:
    path = Path(path)

    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")

    records: dict[WorkUnit, DeltaHistogram] = {}
    with path.open(encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                # only the last line can lack its newline: a write cut short by a kill
                if not line.endswith("\n"):
                    logger.warning(
                        "Dropping unfinished record on line %d of %s; its range will be recomputed",
                        line_number,
                        path,
                    )
                    continue
                raise CheckpointError(f"Corrupt line {line_number} in {path}: {e}") from e

            unit, histogram = from_record(record)
            if base is not None and histogram.base != as_base(base):
                raise CheckpointError(
                    f"Line {line_number} of {path} is for base {histogram.base.b}, "
                    f"expected {as_base(base).b}"
                )
            if unit in records:
                raise CheckpointError(f"Range [{unit.lo}, {unit.hi}) repeated in {path}")
            records[unit] = histogram

    _check_disjoint(records, str(path))
    logger.debug("Loaded %d ranges from %s", len(records), path)
    return records


def repair_tail(path: str | Path) -> bool:
    """Make the checkpoint end on a newline before more records are appended.

    An unterminated last line that parses gets its newline; one that does not
    is cut off. Returns True when the file was changed.
    """
    path = Path(path)
    data = path.read_bytes()
    if not data or data.endswith(b"\n"):
        return False

    cut = data.rfind(b"\n") + 1
    try:
        json.loads(data[cut:])
    except ValueError:
        logger.warning("Truncating unfinished record at byte %d of %s", cut, path)
        with path.open("r+b") as f:
            f.truncate(cut)
    else:
        with path.open("ab") as f:
            f.write(b"\n")
    return True


def _split_pattern(path: Path) -> tuple[Path, str | None]:
    for i, part in enumerate(path.parts):
        if any(c in part for c in WILDCARD_CHARS):
            base_dir = Path(*path.parts[:i]) if i > 0 else Path(".")
            return base_dir, str(Path(*path.parts[i:]))
    return path, None


def find_checkpoints(*patterns: str | Path) -> list[Path]:
    shards: set[Path] = set()
    for pattern in patterns:
        base_dir, glob = _split_pattern(Path(pattern))

        if glob is None:
            if not base_dir.is_file():
                raise FileNotFoundError(f"Checkpoint not found: {base_dir}")
            shards.add(base_dir)
            continue

        if not base_dir.is_dir():
            raise NotADirectoryError(f"Shard directory does not exist: {base_dir}")

        matches = [f for f in base_dir.glob(glob) if f.is_file()]
        if not matches:
            raise FileNotFoundError(f"No checkpoints found matching pattern: {pattern}")
        shards.update(matches)

    return sorted(shards)


def merge_checkpoints(sources: Iterable[str | Path], destination: str | Path) -> Path:
    destination = Path(destination)

    merged: dict[WorkUnit, DeltaHistogram] = {}
    bases = set()
    for source in sources:
        for unit, histogram in load_records(source).items():
            if unit in merged:
                raise CheckpointError(f"Range [{unit.lo}, {unit.hi}) appears in more than one shard")
            merged[unit] = histogram
            bases.add(histogram.base.b)

    if not merged:
        raise CheckpointError("No checkpoint records to merge")
    if len(bases) > 1:
        raise CheckpointError(f"Shards mix bases {sorted(bases)}")
    _check_disjoint(merged, "merged shards")

    if destination.is_dir():
        destination = destination / "merged.jsonl"

    destination.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", encoding="utf-8", dir=destination.parent, suffix=".tmp", delete=False
    ) as f:
        for unit in sorted(merged):
            f.write(json.dumps(to_record(unit, merged[unit]), sort_keys=True) + "\n")
        staged = Path(f.name)

    shutil.move(src=staged, dst=destination)
    logger.info("Merged %d ranges into %s", len(merged), destination)
    return destination
