"""Reader for the benchmark's work-precision records CSV.

Leading "# key=value" comment lines carry the resolved run
configuration; the data columns include at least method, control, error
and seconds.  Failure rows have error = nan and a status tag.
"""

import math
from dataclasses import dataclass, field

REQUIRED_COLUMNS = ("method", "control", "error", "seconds")


class SchemaError(ValueError):
    """Records file does not match the harness CSV schema."""


@dataclass
class Series:
    """Work-precision points for one method from one records file."""

    label: str
    seconds: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    failures: list = field(default_factory=list)   # seconds of failed rows


def read(path):
    """Parse one records CSV; returns (metadata dict, list of Series)."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
                continue
            if header is None:
                header = line.split(",")
                missing = [c for c in REQUIRED_COLUMNS if c not in header]
                if missing:
                    raise SchemaError(
                        f"{path}: missing column(s) {', '.join(missing)}")
                continue
            rows.append(dict(zip(header, line.split(","))))
    if header is None:
        raise SchemaError(f"{path}: no column header found")

    by_method = {}
    for row in rows:
        series = by_method.setdefault(row["method"],
                                      Series(label=row["method"]))
        try:
            err = float(row["error"])
            sec = float(row["seconds"])
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric row {row}") from exc
        if math.isnan(err) or err <= 0.0:
            series.failures.append(sec)
        else:
            series.seconds.append(sec)
            series.errors.append(err)
    return meta, list(by_method.values())
