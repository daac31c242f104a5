"""Report rows and CSV/JSON emission.

CSV columns are exactly ``experiment,param_json,bound,oracle,oracle_ci,
verdict,ms``.  Exact rationals serialize as "num/den" strings, floats
with 17 significant digits; a positive oracle_ci marks a Monte Carlo
estimate.  JSON rows additionally carry explicit provenance labels and
round-trip losslessly.  Rows are ordered by (experiment, parameter
snapshot), never by completion time, so reports are byte-identical
across parallelism levels; wall times are recorded in memory but written
as 0 unless timing output is requested, keeping the byte-identity
contract (opting into timing waives it).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .distributions import Number, is_exact

PROV_EXACT = "exact-rational"
PROV_FLOAT = "float"
PROV_MC = "mc-estimate"


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    params: dict
    bound: Optional[Number]
    bound_provenance: str
    oracle: Optional[Number]
    oracle_ci: float
    oracle_provenance: str
    verdict: str
    ms: float = 0.0


def format_number(x: Optional[Number]) -> str:
    if x is None:
        return ""
    if is_exact(x):
        return str(Fraction(x))
    return f"{float(x):.17g}"


def params_json(params: dict) -> str:
    def encode(v):
        if isinstance(v, Fraction):
            return str(v)
        if isinstance(v, (list, tuple)):
            return [encode(u) for u in v]
        return v

    return json.dumps({k: encode(v) for k, v in sorted(params.items())}, separators=(",", ":"))


def sort_rows(rows: Sequence[ReportRow]) -> list[ReportRow]:
    return sorted(rows, key=lambda r: (r.experiment, params_json(r.params)))


def rows_to_json(rows: Sequence[ReportRow], include_timing: bool = False) -> list[dict]:
    out = []
    for r in sort_rows(rows):
        out.append(
            {
                "experiment": r.experiment,
                "params": json.loads(params_json(r.params)),
                "bound": format_number(r.bound),
                "bound_provenance": r.bound_provenance,
                "oracle": format_number(r.oracle),
                "oracle_ci": f"{r.oracle_ci:.17g}",
                "oracle_provenance": r.oracle_provenance,
                "verdict": r.verdict,
                "ms": f"{r.ms:.3f}" if include_timing else "0",
            }
        )
    return out


def rows_from_json(objs: Sequence[dict]) -> list[ReportRow]:
    rows = []
    for o in objs:
        rows.append(
            ReportRow(
                experiment=o["experiment"],
                params=o["params"],
                bound=_parse_number(o["bound"]),
                bound_provenance=o["bound_provenance"],
                oracle=_parse_number(o["oracle"]),
                oracle_ci=float(o["oracle_ci"]),
                oracle_provenance=o["oracle_provenance"],
                verdict=o["verdict"],
                ms=float(o["ms"]),
            )
        )
    return rows


def _parse_number(s: str) -> Optional[Number]:
    if s == "":
        return None
    if "/" in s:
        return Fraction(s)
    try:
        return Fraction(s) if "." not in s and "e" not in s.lower() else float(s)
    except ValueError:
        return float(s)


CSV_HEADER = ["experiment", "param_json", "bound", "oracle", "oracle_ci", "verdict", "ms"]


def render_csv(rows: Sequence[ReportRow], include_timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sort_rows(rows):
        writer.writerow(
            [
                r.experiment,
                params_json(r.params),
                format_number(r.bound),
                format_number(r.oracle),
                f"{r.oracle_ci:.17g}",
                r.verdict,
                f"{r.ms:.3f}" if include_timing else "0",
            ]
        )
    return buf.getvalue()


def render_json(rows: Sequence[ReportRow], include_timing: bool = False) -> str:
    return json.dumps(rows_to_json(rows, include_timing), indent=2) + "\n"


def emit_report(
    rows: Sequence[ReportRow],
    fmt: str,
    path: str,
    include_timing: bool = False,
) -> str:
    """Write the report; path "-" returns the text without touching disk."""
    if fmt == "csv":
        text = render_csv(rows, include_timing)
    elif fmt == "json":
        text = render_json(rows, include_timing)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    if path != "-":
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text
