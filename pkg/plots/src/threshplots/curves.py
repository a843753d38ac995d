"""CSV parsing for regret traces, with errors that name the bad cell."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

EXPECTED_HEADER = "round,mean_regret,ci_low,ci_high"
COLUMNS = tuple(EXPECTED_HEADER.split(","))

__all__ = ["COLUMNS", "EXPECTED_HEADER", "Curve", "load_curve"]


@dataclass(frozen=True)
class Curve:
    """One trace: rounds, the mean, and its confidence band."""

    label: str
    rounds: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray

    def __len__(self) -> int:
        return int(self.rounds.shape[0])


def load_curve(path, label: str) -> Curve:
    """Read one CSV and validate it against the trace schema.

    Raises ValueError with the file, line, and column of the first problem
    found, so a bad sweep file is identifiable from the message alone.
    """
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"{p}: no such file")
    lines = p.read_text().splitlines()
    if not lines or lines[0] != EXPECTED_HEADER:
        got = lines[0] if lines else "<empty file>"
        raise ValueError(f"{p}: expected header {EXPECTED_HEADER!r}, got {got!r}")

    rows = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ValueError(f"{p} line {n}: expected 4 columns, got {len(fields)}")
        parsed = []
        for name, field in zip(COLUMNS, fields):
            try:
                parsed.append(float(field))
            except ValueError:
                raise ValueError(
                    f"{p} line {n}: column {name!r} is not numeric: {field!r}"
                ) from None
        rows.append((n, parsed))

    if len(rows) < 2:
        raise ValueError(f"{p}: needs at least 2 data rows, found {len(rows)}")

    data = np.array([r for _, r in rows])
    rounds, mean, lo, hi = data.T
    if np.any(rounds != np.round(rounds)) or np.any(np.diff(rounds) <= 0):
        raise ValueError(f"{p}: column 'round' must be strictly increasing integers")
    for n, (_, m, l, h) in zip((n for n, _ in rows), data):
        if not l <= m <= h:
            raise ValueError(
                f"{p} line {n}: columns 'ci_low' <= 'mean_regret' <= 'ci_high' "
                f"violated ({l!r}, {m!r}, {h!r})"
            )
    return Curve(
        label=str(label),
        rounds=rounds.astype(int),
        mean=mean,
        ci_low=lo,
        ci_high=hi,
    )
