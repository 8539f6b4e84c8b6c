import csv
import hashlib
import io
from typing import Dict, Iterable, List, TextIO, Union

import numpy as np

from .analysis import OUTCOME_LABELS, setting_label
from .errors import InvalidInputError
from .schemas import SettingOutcome

GENERATOR = "numpy.random.PCG64"
COUNTS_HEADER = ("setting", "outcome", "count")


def derive_seed(seed: int, label: Union[str, int]) -> int:
    # Stable across processes and platforms, unlike hash()
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def parse_grid(spec: str) -> List[float]:
    """Parse "start:stop[:step]" (inclusive) or a comma separated list"""
    text = spec.strip()
    separator = ":" if ":" in text else ","
    try:
        parts = [float(p) for p in text.split(separator) if p.strip()]
    except ValueError:
        raise InvalidInputError(f"Grid values must be numbers, got {spec!r}") from None
    if not parts:
        raise InvalidInputError("Grid is empty")
    if separator == ",":
        return parts

    if len(parts) not in (2, 3):
        raise InvalidInputError(f"Grid range must be start:stop[:step], got {spec!r}")
    start, stop = parts[0], parts[1]
    step = parts[2] if len(parts) == 3 else 1.0
    if step <= 0:
        raise InvalidInputError(f"Grid step must be positive, got {step}")
    if stop < start:
        raise InvalidInputError(f"Grid range is empty: {spec!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def read_counts_csv(source: Union[str, TextIO]) -> List[SettingOutcome]:
    """Read a `setting,outcome,count` file into one SettingOutcome per setting"""
    if isinstance(source, str):
        with open(source, newline="") as fh:
            return read_counts_csv(io.StringIO(fh.read()))

    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(h.strip().lower() for h in header) != COUNTS_HEADER:
        raise InvalidInputError(
            f"Row 1: header must be {','.join(COUNTS_HEADER)}, got {header!r}"
        )

    table: Dict[str, Dict[str, int]] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise InvalidInputError(f"Row {row_number}: expected 3 columns, got {len(row)}")
        setting, outcome, count = (cell.strip() for cell in row)
        try:
            setting = setting_label(setting)
        except ValueError:
            raise InvalidInputError(
                f"Row {row_number}, column setting: invalid setting {setting!r}"
            ) from None
        outcome = outcome.lower()
        if outcome not in OUTCOME_LABELS:
            raise InvalidInputError(
                f"Row {row_number}, column outcome: {outcome!r} is not one of "
                f"{', '.join(OUTCOME_LABELS)}"
            )
        try:
            value = int(count)
        except ValueError:
            raise InvalidInputError(
                f"Row {row_number}, column count: {count!r} is not an integer"
            ) from None
        if value < 0:
            raise InvalidInputError(f"Row {row_number}, column count: negative count {value}")
        outcomes = table.setdefault(setting, {})
        if outcome in outcomes:
            raise InvalidInputError(
                f"Row {row_number}: duplicate entry for {setting} {outcome}"
            )
        outcomes[outcome] = value

    records = []
    for setting, outcomes in table.items():
        missing = [o for o in OUTCOME_LABELS if o not in outcomes]
        if missing:
            raise InvalidInputError(f"Setting {setting} is missing outcomes: {', '.join(missing)}")
        records.append(
            SettingOutcome(setting=setting, counts=[outcomes[o] for o in OUTCOME_LABELS])
        )
    if not records:
        raise InvalidInputError("Counts file has no data rows")
    return records


def write_counts_csv(records: Iterable[SettingOutcome], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(COUNTS_HEADER)
    for record in records:
        if record.counts is None:
            raise InvalidInputError(
                f"Setting {record.setting} has no sampled counts (analytic run)"
            )
        for outcome, count in zip(OUTCOME_LABELS, record.counts):
            writer.writerow([record.setting, outcome, count])
