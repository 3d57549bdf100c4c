"""Reference spectrum table for the level 4..7 surfaces (depth 0).

Previously computed eigenvalue clusters used to validate this package:
per index range, the cluster mean and multiplicity at each level plus the
exponential extrapolation over levels.  The numbering of the index ranges
follows the level-7 spectrum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

REFERENCE_LEVELS = (4, 5, 6, 7)


@dataclass(frozen=True)
class ReferenceRow:
    start: int
    end: int
    values: dict[int, float]  # level -> cluster mean
    multiplicities: dict[int, int]  # level -> multiplicity
    extrapolated: float

    @property
    def width(self) -> int:
        return self.end - self.start + 1


def load_reference_rows() -> list[ReferenceRow]:
    text = (
        resources.files("fractal_spectra")
        .joinpath("data/reference_spectrum.csv")
        .read_text()
    )
    rows = []
    for rec in csv.DictReader(text.splitlines()):
        rows.append(
            ReferenceRow(
                start=int(rec["start"]),
                end=int(rec["end"]),
                values={m: float(rec[f"l{m}"]) for m in REFERENCE_LEVELS},
                multiplicities={m: int(rec[f"m{m}"]) for m in REFERENCE_LEVELS},
                extrapolated=float(rec["extrap"]),
            )
        )
    return rows


def reference_multiplicities(level: int = 7) -> list[int]:
    """Cluster multiplicity sequence of one level's reference spectrum."""
    return [r.multiplicities[level] for r in load_reference_rows()]


def reference_row(start: int, end: int) -> ReferenceRow:
    for r in load_reference_rows():
        if (r.start, r.end) == (start, end):
            return r
    raise KeyError(f"no reference row {start}-{end}")
