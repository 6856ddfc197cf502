"""Structured verification reports with byte-stable serialization.

A report is a list of check rows; pass/fail is derivable from the rows alone.
Serialization (JSON or CSV) is byte-stable for identical inputs and seed:
keys are sorted, floats use shortest-roundtrip repr, and wall-clock time is
deliberately kept out of the serialized bytes (it is available on the
in-memory object only).
"""

import csv
import dataclasses
import io
import json

ARTIFACT_VERSION = "0.1.0"
SCHEMA_VERSION = 1


@dataclasses.dataclass(frozen=True)
class CheckRow:
    """One verification row: an estimate against a target.

    ``error`` holds the standard error or certified bound, ``z_or_resid`` the
    z-score or residual actually judged, and ``kind`` names the criterion:
    "z" (|z| < 4), "abs" / "rel" (residual below a tolerance), "exact"
    (bitwise), or "trend" (monotone decrease).
    """

    name: str
    estimate: object
    target: object
    error: float
    z_or_resid: float
    passed: bool
    kind: str = "abs"


@dataclasses.dataclass
class VerificationReport:
    experiment: str
    inputs: dict
    seed: int
    checks: list
    schema_version: int = SCHEMA_VERSION
    artifact_version: str = ARTIFACT_VERSION
    wall_clock_s: float = None  # excluded from serialized bytes

    @property
    def passed(self):
        return all(row.passed for row in self.checks)

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "schema_version": self.schema_version,
            "artifact_version": self.artifact_version,
            "seed": self.seed,
            "inputs": {k: _jsonable(v) for k, v in sorted(self.inputs.items())},
            "passed": self.passed,
            "checks": [
                {
                    "name": row.name,
                    "kind": row.kind,
                    "estimate": _jsonable(row.estimate),
                    "target": _jsonable(row.target),
                    "error": _jsonable(row.error),
                    "z_or_resid": _jsonable(row.z_or_resid),
                    "passed": bool(row.passed),
                }
                for row in self.checks
            ],
        }

    def to_json_bytes(self):
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return (text + "\n").encode("utf-8")

    def to_csv_bytes(self):
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in self.checks:
            writer.writerow([
                self.experiment, row.name, row.kind,
                _csv_value(row.estimate), _csv_value(row.target),
                _csv_value(row.error), _csv_value(row.z_or_resid),
                _csv_value(row.passed),
            ])
        return buf.getvalue().encode("utf-8")


CSV_FIELDS = ["experiment", "check", "kind", "estimate", "target",
              "error", "z_or_resid", "passed"]


def _jsonable(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, complex):
        if v.imag == 0.0:
            return v.real
        return {"re": v.real, "im": v.imag}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and v != v:  # NaN is not valid JSON
        return "nan"
    return v


def _csv_value(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        if v.imag == 0.0:
            return repr(v.real)
        return repr(v)
    if isinstance(v, float):
        return repr(v)
    return v


def emit(report, path, fmt="json"):
    """Write the report to ``path`` as json or csv; bytes are seed-stable."""
    if fmt == "json":
        data = report.to_json_bytes()
    elif fmt == "csv":
        data = report.to_csv_bytes()
    else:
        raise ValueError(f"unknown format {fmt!r} (expected csv or json)")
    with open(path, "wb") as fh:
        fh.write(data)
    return path


def read_json(path):
    """Load a JSON report back into plain dict form (schema-checked)."""
    with open(path, "rb") as fh:
        data = json.loads(fh.read().decode("utf-8"))
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {data.get('schema_version')}")
    return data
