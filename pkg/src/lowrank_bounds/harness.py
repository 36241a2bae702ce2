"""Batch driver: suite configuration, instance generation, reports and verification."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import checkers as chk
from .dense_core import orthonormalize, svd, truncate
from .perturb_gen import (
    PerturbationSpec,
    SpectrumSpec,
    Stream,
    collapse_repeated_columns,
    column_sample_rescale,
    derive_seed,
    haar_basis,
    matrix_with_spectrum,
    perturb_basis,
    perturb_matrix,
    spectrum_template,
)
from .reports import CSV_COLUMNS, rows_to_csv, report_from_json, report_from_row
from .schatten import SchattenIndex
from .subspaces import projector_from_orthonormal

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
WORKERS_ENV = "LOWRANK_BOUNDS_WORKERS"
ALL_CHECKERS = tuple(chk.CHECKERS)

#: Which perturbation kind feeds each checker.
PERTURBATION_KIND = {
    "thm1": "basis_additive",
    "cor1": "basis_additive",
    "thm_lau": "basis_additive",
    "thm_lal1": "basis_additive",
    "thm_lal2": "basis_additive",
    "thm6": "basis_additive",
    "thm2": "matrix_additive",
    "cor2": "matrix_additive",
    "thm3/4/5": "column_sample",
    "thm_lc": "column_sample",
    "thm_lck": "column_sample",
}

DEFAULT_CONFIG = {
    "schema_version": SCHEMA_VERSION,
    "trials": 25,
    "seed": 20160601,
    "dims": [[8, 6], [12, 9], [20, 15]],
    "ks": [1, 2, 3],
    "ps": [1, 2, 4, "inf"],
    "spectra": ["gapped(0.5)"],
    "perturbations": [
        {"kind": "basis_additive", "magnitude": 0.2},
        {"kind": "matrix_additive", "magnitude": 0.1},
        {"kind": "column_sample", "magnitude": 8},
    ],
    "checkers": "all",
    "tolerance_kappa": 1e3,
    "workers": 1,
}


class ConfigError(ValueError):
    """Invalid suite configuration; the message names the offending field."""


@dataclass(frozen=True)
class SuiteConfig:
    trials: int
    seed: int
    dims: tuple
    ks: tuple
    ps: tuple
    spectra: tuple
    perturbations: tuple
    checkers: tuple = ALL_CHECKERS
    tolerance_kappa: float = 1e3
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, raw):
        def need(name):
            if name not in raw:
                raise ConfigError(f"config field '{name}' is missing")
            return raw[name]

        version = raw.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"config field 'schema_version' must be {SCHEMA_VERSION}, got {version!r}")
        try:
            trials = int(need("trials"))
            seed = int(need("seed"))
            dims = tuple((int(m), int(n)) for m, n in need("dims"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config field malformed: {exc}") from exc
        if trials < 1:
            raise ConfigError("config field 'trials' must be >= 1")
        if not dims or any(m < 1 or n < 1 for m, n in dims):
            raise ConfigError("config field 'dims' needs positive (m, n) pairs")
        ks = tuple(int(k) for k in need("ks"))
        if not ks or any(k < 1 for k in ks):
            raise ConfigError("config field 'ks' needs positive ranks")
        for k in ks:
            if not any(k < min(m, n) for m, n in dims):
                raise ConfigError(f"config field 'ks': k={k} is not below min(m, n) for any dims entry")
        try:
            ps = tuple(SchattenIndex.parse(p) for p in need("ps"))
        except ValueError as exc:
            raise ConfigError(f"config field 'ps': {exc}") from exc
        spectra = tuple(str(s) for s in raw.get("spectra", DEFAULT_CONFIG["spectra"]))
        for s in spectra:
            try:
                spectrum_template(s, 4, 1)
            except ValueError as exc:
                raise ConfigError(f"config field 'spectra': {exc}") from exc
        try:
            perts = tuple(
                PerturbationSpec(p["kind"], float(p["magnitude"]), int(p.get("seed", 0)))
                for p in raw.get("perturbations", DEFAULT_CONFIG["perturbations"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config field 'perturbations': {exc}") from exc
        names = raw.get("checkers", "all")
        names = ALL_CHECKERS if names == "all" else tuple(names)
        unknown = [c for c in names if c not in chk.CHECKERS]
        if unknown:
            raise ConfigError(f"config field 'checkers': unknown bound ids {unknown}")
        kappa = float(raw.get("tolerance_kappa", 1e3))
        if kappa <= 0:
            raise ConfigError("config field 'tolerance_kappa' must be positive")
        workers = int(raw.get("workers", 1))
        if workers < 1:
            raise ConfigError("config field 'workers' must be >= 1")
        return cls(trials, seed, dims, ks, ps, spectra, perts, names, kappa, workers, version)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def default(cls, **overrides):
        return cls.from_dict({**DEFAULT_CONFIG, **overrides})


@dataclass
class SuiteSummary:
    total: int = 0
    passed: int = 0
    failed: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    max_violation: float = 0.0

    def to_dict(self):
        return {
            "total": self.total,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "max_violation": self.max_violation,
        }

    @property
    def ok(self):
        return not self.failed


# -- instances -----------------------------------------------------------------------


def _p_key(p):
    return (1, 0) if p in ("inf", None) else (0, int(p))


def _spectrum(name, m, n, k, seed):
    return SpectrumSpec(m, n, spectrum_template(name, min(m, n), k), seed)


def _angle_projector(a, k, magnitude, seed):
    """Projector onto a perturbed copy of ``[U_k, extra]`` with rank k+1 when it fits."""
    m = a.shape[0]
    l = k + 1 if k + 1 < m - k else k
    uk = truncate(svd(a), k).basis.matrix
    cols = uk
    if l > k:
        extra = Stream(seed, "extra").normal((m, l - k))
        cols = np.column_stack([uk, extra - uk @ (uk.T @ extra)])
    w0 = orthonormalize(cols).matrix
    z_hat = perturb_basis(w0, magnitude, seed).z_hat
    return projector_from_orthonormal(orthonormalize(z_hat))


def build_instance(bound_id, seed, m, n, k, spectrum, pert):
    """Arguments (minus ``p`` and ``kappa``) for one checker call."""
    tag = (m, n, k, spectrum, pert.label)
    a = matrix_with_spectrum(_spectrum(spectrum, m, n, k, derive_seed(seed, *tag, "A")))
    s_aux = derive_seed(seed, *tag, "aux")
    mag = pert.magnitude
    if bound_id == "thm1":
        z = haar_basis(m, k, derive_seed(s_aux, "Z"))
        return (a, z, perturb_basis(z, mag, s_aux).z_hat)
    if bound_id == "cor1":
        uk = truncate(svd(a), k).basis
        return (a, k, perturb_basis(uk, mag, s_aux).z_hat)
    if bound_id in ("thm2", "cor2"):
        e = perturb_matrix(a, mag, s_aux).e
        if bound_id == "cor2":
            return (a, e, k)
        return (a, e, projector_from_orthonormal(haar_basis(m, k, derive_seed(s_aux, "P"))))
    if bound_id == "thm3/4/5":
        a_tilde = column_sample_rescale(a, int(mag), s_aux)
        return (a, a_tilde, projector_from_orthonormal(haar_basis(m, k, derive_seed(s_aux, "P"))))
    if bound_id == "thm_lc":
        return (a, collapse_repeated_columns(a, int(mag), s_aux))
    if bound_id == "thm_lck":
        return (a, collapse_repeated_columns(a, int(mag), s_aux), k)
    if bound_id in ("thm_lau", "thm_lal1", "thm_lal2", "thm6"):
        return (a, k, _angle_projector(a, k, mag, s_aux))
    raise KeyError(bound_id)


def _norm_filter(bound_id, p):
    """Reason a (checker, p) pair is outside the checker's norm hypotheses, else None."""
    if bound_id == "cor2" and not p.is_inf:
        return "two-norm only (p = inf)"
    if bound_id == "thm_lal1" and not p.is_inf:
        return "two-norm only (p = inf)"
    if bound_id == "thm_lal2" and p.value != 2:
        return "Frobenius norm only (p = 2)"
    if bound_id == "thm_lau" and not (p.is_inf or p.value == 2):
        return "two-norm or Frobenius norm only"
    if bound_id in ("thm3/4/5", "thm_lc", "thm_lck") and not (p.is_inf or p.is_even):
        return "p even required"
    return None


def _call(bound_id, args, p, kappa):
    fn = chk.CHECKERS[bound_id]
    if bound_id == "cor2":
        return fn(*args, kappa=kappa)
    return fn(*args, p, kappa=kappa)


def _run_task(task):
    """Evaluate one (checker, trial, dims, k, spectrum, perturbation) cell across all p."""
    bound_id, trial, seed, m, n, k, spectrum, pert, ps, kappa = task
    meta = {"trial": trial, "spectrum": spectrum, "perturbation": pert.label}
    reports, skipped = [], []

    def skip(p, reason):
        skipped.append({"bound_id": bound_id, "seed": seed, "m": m, "n": n, "k": k, "p": str(p), **meta, "reason": reason})

    if k >= min(m, n):
        for p in ps:
            skip(p, "k < min(m, n)")
        return reports, skipped
    args = None
    for p in ps:
        reason = _norm_filter(bound_id, p)
        if reason:
            skip(p, reason)
            continue
        try:
            if args is None:
                args = build_instance(bound_id, seed, m, n, k, spectrum, pert)
            report = _call(bound_id, args, p, kappa)
        except chk.HypothesisError as exc:
            skip(p, exc.hypothesis)
            continue
        context = {**report.context, **meta}
        reports.append(replace(report, context=context, seed=seed))
    return reports, skipped


def _tasks(config):
    for bound_id in config.checkers:
        kind = PERTURBATION_KIND[bound_id]
        perts = [pt for pt in config.perturbations if pt.kind == kind]
        for trial in range(config.trials):
            seed = derive_seed(config.seed, trial, bound_id)
            for m, n in config.dims:
                for k in config.ks:
                    for spectrum in config.spectra:
                        for pert in perts:
                            yield (bound_id, trial, seed, m, n, k, spectrum, pert, config.ps, config.tolerance_kappa)


def _sort_key(report):
    ctx = report.context
    return (
        report.bound_id,
        report.seed,
        report.m,
        report.n,
        report.k if report.k is not None else -1,
        report.c if report.c is not None else -1,
        _p_key(report.p),
        ctx.get("spectrum", ""),
        ctx.get("perturbation", ""),
    )


def _skip_key(s):
    return (s["bound_id"], s["seed"], s["m"], s["n"], s["k"], _p_key(s["p"]), s["spectrum"], s["perturbation"])


def evaluate_suite(config, workers=None):
    """Run every combination; returns ``(reports, skipped)`` in deterministic order."""
    workers = int(os.environ.get(WORKERS_ENV, workers or config.workers))
    tasks = list(_tasks(config))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=16))
    else:
        results = [_run_task(t) for t in tasks]
    reports = [r for rs, _ in results for r in rs]
    skipped = [s for _, ss in results for s in ss]
    reports.sort(key=_sort_key)
    skipped.sort(key=_skip_key)
    return reports, skipped


def summarize(reports, skipped):
    summary = SuiteSummary()
    for r in reports:
        if r.holds:
            summary.passed += 1
        else:
            summary.failed.append({"bound_id": r.bound_id, "seed": r.seed, "context": _failure_context(r)})
        summary.max_violation = max(summary.max_violation, r.violation)
    summary.skipped = [{"bound_id": s["bound_id"], "reason": s["reason"]} for s in skipped]
    summary.total = summary.passed + len(summary.failed) + len(summary.skipped)
    return summary


def _failure_context(r):
    return {"m": r.m, "n": r.n, "k": r.k, "c": r.c, "p": r.p, "lhs": r.lhs, "rhs_upper": r.rhs_upper, "rhs_lower": r.rhs_lower}


SKIP_COLUMNS = ("bound_id", "seed", "m", "n", "k", "p", "trial", "spectrum", "perturbation", "reason")


def _skipped_csv(skipped):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SKIP_COLUMNS)
    for s in skipped:
        writer.writerow([s[c] for c in SKIP_COLUMNS])
    return buf.getvalue()


def write_outputs(out_dir, reports, skipped, summary, timestamp=None):
    """Write ``report.csv`` (timestamp header line first), ``report.jsonl``,
    ``skipped.csv`` and ``summary.json``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
        (out / "report.csv").write_text(rows_to_csv(reports, [f"generated {stamp}"]))
        (out / "report.jsonl").write_text("".join(r.to_json() + "\n" for r in reports))
        (out / "skipped.csv").write_text(_skipped_csv(skipped))
        (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write reports to {out}: {exc}") from exc
    return out


def run_suite(config, out_dir=None, workers=None):
    """Evaluate the suite, optionally write report files, and return the summary."""
    if isinstance(config, dict):
        config = SuiteConfig.from_dict(config)
    reports, skipped = evaluate_suite(config, workers)
    summary = summarize(reports, skipped)
    if out_dir is not None:
        write_outputs(out_dir, reports, skipped, summary)
    log.info("suite: %d total, %d passed, %d failed, %d skipped", summary.total, summary.passed, len(summary.failed), len(summary.skipped))
    return summary


# -- verification ------------------------------------------------------------------


class SchemaError(ValueError):
    pass


def _read_csv_reports(path):
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines(keepends=True) if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(lines)))
    missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"report {path} is missing columns: {missing}")
    return [report_from_row(row) for row in reader]


def _read_jsonl_reports(path):
    out = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        missing = [c for c in CSV_COLUMNS if c != "context_json" and c not in obj]
        if missing:
            raise SchemaError(f"report {path} line {line_no} is missing fields: {missing}")
        out.append(report_from_json(obj))
    return out


def _read_skipped(path):
    if not path.exists():
        return []
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    return [{**r, "seed": int(r["seed"]), "m": int(r["m"]), "n": int(r["n"]), "k": int(r["k"])} for r in rows]


def verify_report(path):
    """Re-derive every verdict from the stored numbers.

    A row counts as failed when the recomputed verdict is false, when it
    disagrees with the stored ``holds`` column, or when the stored slack does
    not match ``rhs - lhs`` (tampering or schema drift).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"report not found: {path}")
    entries = _read_jsonl_reports(path) if path.suffix == ".jsonl" else _read_csv_reports(path)
    reports = []
    tampered = set()
    for i, (report, stored_holds, stored_slack) in enumerate(entries):
        consistent = stored_holds == report.holds and np.isclose(
            stored_slack, report.min_slack, rtol=1e-12, atol=1e-300
        )
        if not consistent:
            tampered.add(i)
        reports.append(report)
    skipped = _read_skipped(path.parent / "skipped.csv")
    summary = summarize(reports, skipped)
    for i in sorted(tampered):
        r = reports[i]
        if r.holds:
            summary.passed -= 1
            summary.failed.append({"bound_id": r.bound_id, "seed": r.seed, "context": {**_failure_context(r), "tampered": True}})
    return summary


# -- demo -------------------------------------------------------------------------


def demo(bound_id, seed=0, m=8, n=6, k=2, p=None):
    """One worked instance with its intermediate quantities."""
    if bound_id not in chk.CHECKERS:
        raise KeyError(f"unknown bound id {bound_id!r}; see list-checkers")
    if p is None:
        p = {"cor2": "inf", "thm_lal1": "inf", "thm_lau": "inf"}.get(bound_id, 2)
    p = SchattenIndex.parse(p)
    kind = PERTURBATION_KIND[bound_id]
    magnitude = {"basis_additive": 0.2, "matrix_additive": 0.1, "column_sample": 8}[kind]
    pert = PerturbationSpec(kind, magnitude)
    args = build_instance(bound_id, seed, m, n, k, "gapped(0.5)", pert)
    report = _call(bound_id, args, p, chk.DEFAULT_KAPPA)
    return report, args
