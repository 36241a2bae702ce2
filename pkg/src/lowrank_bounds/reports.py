"""BoundReport: one evaluated instance of an inequality, and its CSV/JSON forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

CSV_COLUMNS = (
    "bound_id",
    "m",
    "n",
    "k",
    "c",
    "p",
    "seed",
    "lhs",
    "rhs_lower",
    "rhs_upper",
    "slack",
    "tolerance",
    "holds",
    "context_json",
)


def _inequality_holds(lhs, upper, tolerance, lower=None):
    ok = lhs <= upper + tolerance
    if lower is not None:
        ok = ok and lower - tolerance <= lhs
    return bool(ok)


def sub_check(lhs, rhs, tolerance, gate=True, lower=None):
    """A secondary inequality ``lower <= lhs <= rhs`` recorded in a report context.

    ``gate=False`` marks an informational record that does not affect ``holds``.
    """
    lhs, rhs = float(lhs), float(rhs)
    entry = {
        "lhs": lhs,
        "rhs": rhs,
        "tolerance": float(tolerance),
        "holds": _inequality_holds(lhs, rhs, tolerance, lower),
        "gate": bool(gate),
    }
    if lower is not None:
        entry["lower"] = float(lower)
    return entry


def _num(x):
    return None if x is None else float(x)


@dataclass(frozen=True)
class BoundReport:
    """Left-hand side, right-hand side(s), tolerance and verdict of one bound.

    ``holds`` is true iff ``lhs <= rhs_upper + tolerance``, and
    ``rhs_lower - tolerance <= lhs`` for two-sided bounds, and every gated
    entry of ``context["checks"]`` holds.
    """

    bound_id: str
    lhs: float
    rhs_upper: float
    tolerance: float
    rhs_lower: float | None = None
    context: dict = field(default_factory=dict)
    m: int | None = None
    n: int | None = None
    k: int | None = None
    c: int | None = None
    p: str | None = None
    seed: int | None = None

    @classmethod
    def one_sided(cls, bound_id, lhs, rhs, tolerance, context=None, **meta):
        return cls(
            bound_id, float(lhs), float(rhs), float(tolerance), None, dict(context or {}), **_meta(meta)
        )

    @classmethod
    def two_sided(cls, bound_id, lhs, lower, upper, tolerance, context=None, **meta):
        return cls(
            bound_id,
            float(lhs),
            float(upper),
            float(tolerance),
            float(lower),
            dict(context or {}),
            **_meta(meta),
        )

    @property
    def slack(self):
        return self.rhs_upper - self.lhs

    @property
    def slack_lower(self):
        return None if self.rhs_lower is None else self.lhs - self.rhs_lower

    @property
    def min_slack(self):
        lo = self.slack_lower
        return self.slack if lo is None else min(self.slack, lo)

    @property
    def main_holds(self):
        return _inequality_holds(self.lhs, self.rhs_upper, self.tolerance, self.rhs_lower)

    @property
    def checks(self):
        return self.context.get("checks", {})

    @property
    def holds(self):
        return self.main_holds and all(c["holds"] for c in self.checks.values() if c["gate"])

    @property
    def violation(self):
        """Largest amount by which any gated inequality misses (0 if all hold)."""
        worst = max(0.0, -self.slack - self.tolerance)
        if self.rhs_lower is not None:
            worst = max(worst, -self.slack_lower - self.tolerance)
        for c in self.checks.values():
            if c["gate"]:
                worst = max(worst, c["lhs"] - c["rhs"] - c["tolerance"])
                if "lower" in c:
                    worst = max(worst, c["lower"] - c["lhs"] - c["tolerance"])
        return worst

    def with_meta(self, **meta):
        from dataclasses import replace

        return replace(self, **_meta(meta))

    def to_row(self):
        """Flat dict keyed by :data:`CSV_COLUMNS` (floats kept as floats)."""
        return {
            "bound_id": self.bound_id,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "c": self.c,
            "p": self.p,
            "seed": self.seed,
            "lhs": self.lhs,
            "rhs_lower": self.rhs_lower,
            "rhs_upper": self.rhs_upper,
            "slack": self.min_slack,
            "tolerance": self.tolerance,
            "holds": self.holds,
            "context_json": json.dumps(self.context, sort_keys=True, separators=(",", ":")),
        }

    def to_json(self):
        row = self.to_row()
        row["context"] = json.loads(row.pop("context_json"))
        return json.dumps(row, sort_keys=True, separators=(",", ":"))

    def __str__(self):
        side = f"{self.rhs_lower!r} <= " if self.rhs_lower is not None else ""
        verdict = "holds" if self.holds else "FAILS"
        return (
            f"[{self.bound_id}] {side}{self.lhs!r} <= {self.rhs_upper!r} "
            f"(tol {self.tolerance:.1e}, slack {self.min_slack:.3e}) {verdict}"
        )


def _meta(meta):
    out = {}
    for key, value in meta.items():
        if key not in ("m", "n", "k", "c", "p", "seed"):
            raise TypeError(f"unknown report field {key!r}")
        if value is None:
            out[key] = None
        elif key == "p":
            out[key] = str(value)
        else:
            out[key] = int(value)
    return out


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(reports, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        row = report.to_row()
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _parse_optional(text, conv):
    return None if text == "" else conv(text)


def report_from_row(row):
    """Rebuild a report from a CSV dict row; returns (report, stored_holds, stored_slack)."""
    context = json.loads(row["context_json"]) if row["context_json"] else {}
    report = BoundReport(
        bound_id=row["bound_id"],
        lhs=float(row["lhs"]),
        rhs_upper=float(row["rhs_upper"]),
        tolerance=float(row["tolerance"]),
        rhs_lower=_parse_optional(row["rhs_lower"], float),
        context=context,
        m=_parse_optional(row["m"], int),
        n=_parse_optional(row["n"], int),
        k=_parse_optional(row["k"], int),
        c=_parse_optional(row["c"], int),
        p=_parse_optional(row["p"], str),
        seed=_parse_optional(row["seed"], int),
    )
    holds_text = row["holds"].strip().lower()
    if holds_text not in ("true", "false"):
        raise ValueError(f"holds column must be true/false, got {row['holds']!r}")
    return report, holds_text == "true", float(row["slack"])


def report_from_json(obj):
    row = dict(obj)
    context = row.pop("context", {})
    report = BoundReport(
        bound_id=row["bound_id"],
        lhs=float(row["lhs"]),
        rhs_upper=float(row["rhs_upper"]),
        tolerance=float(row["tolerance"]),
        rhs_lower=_num(row.get("rhs_lower")),
        context=context,
        m=row.get("m"),
        n=row.get("n"),
        k=row.get("k"),
        c=row.get("c"),
        p=row.get("p"),
        seed=row.get("seed"),
    )
    return report, bool(row["holds"]), float(row["slack"])


def is_finite_report(report):
    return all(math.isfinite(x) for x in (report.lhs, report.rhs_upper, report.tolerance))
