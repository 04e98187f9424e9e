"""Repeated-split benchmark: fit every method, score transductive accuracy.

Each run derives its own generator from ``(master_seed, run)`` through
``numpy.random.SeedSequence``. For presets a fresh dataset of
``n_labelled + n_unlabelled`` rows is drawn per run; for CSV sources the
split is redrawn from the fixed file. The split is computed before any
method is fitted, so methods cannot influence one another.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import synth
from .baselines import LabelPropConfig, fit_label_propagation, fit_supervised_logreg
from .condself import fit_condself
from .data import Dataset, PartitionConfig, load_csv, sample_split, swap_roles
from .errors import CausalSSLError, ConfigError
from .semigen import fit_em, fit_supervised, predict

METHODS = ("supervised", "labelprop", "semigen-sup", "em-soft", "em-hard", "cond-self")
CAUSAL_METHODS = ("semigen-sup", "em-soft", "em-hard", "cond-self")

METHOD_LABELS = {
    "supervised": "Lin. log. reg. (sup.)",
    "labelprop": "RBF label propag.",
    "semigen-sup": "Semi-gen. (sup.)",
    "em-soft": "Semi-gen.+soft EM",
    "em-hard": "Semi-gen.+hard EM",
    "cond-self": "Cond. self-learning",
}

DATASET_LABELS = {"s1": "S1 (linear)", "s2": "S2 (non-linear)", "s3": "S3 (multi-dim.)",
                  "pima": "Pima Diabetes", "heart": "Heart Disease"}


@dataclass(frozen=True)
class Protocol:
    dataset: str = "s1"  # preset name, or "csv"
    n_labelled: int = 10
    n_unlabelled: int = 200
    runs: int = 100
    seed: int = 0
    methods: Tuple[str, ...] = METHODS
    swap_roles: bool = False
    standardize: bool = False
    csv_path: Optional[str] = None
    partition: Optional[PartitionConfig] = None
    name: Optional[str] = None  # dataset label in reports
    ridge_lambda: float = 1.0
    logistic_lambda: float = 1.0
    labelprop: LabelPropConfig = LabelPropConfig()
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.n_labelled < 2:
            raise ConfigError("n_labelled must be at least 2")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
        if self.dataset == "csv":
            if self.csv_path is None or self.partition is None:
                raise ConfigError("csv datasets need csv_path and partition")
        elif self.dataset not in synth.PRESETS:
            raise ConfigError(f"unknown dataset {self.dataset!r}")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        base = Path(self.csv_path).stem if self.dataset == "csv" else self.dataset
        return f"{base}-swapped" if self.swap_roles else base


@dataclass(frozen=True)
class MethodOutcome:
    accuracy: Optional[float]  # None when the fit raised
    converged: bool = True
    error: Optional[str] = None


@dataclass(frozen=True)
class RunRecord:
    run: int
    split_digest: str
    outcomes: Dict[str, MethodOutcome]


@dataclass(frozen=True)
class Cell:
    method: str
    dataset: str
    mean_acc: float
    std_acc: float
    runs: int  # runs that completed
    failures: int
    nonconverged: int = 0
    accuracies: Tuple[float, ...] = ()


@dataclass
class BenchReport:
    cells: List[Cell] = field(default_factory=list)
    records: Dict[str, List[RunRecord]] = field(default_factory=dict)

    def cell(self, method: str, dataset: str) -> Cell:
        for c in self.cells:
            if c.method == method and c.dataset == dataset:
                return c
        raise KeyError((method, dataset))

    def merged(self, other: "BenchReport") -> "BenchReport":
        return BenchReport(self.cells + other.cells, {**self.records, **other.records})

    def split_digests(self, dataset: str) -> List[str]:
        return [r.split_digest for r in self.records.get(dataset, [])]


@dataclass
class SwapAblation:
    normal: BenchReport
    swapped: BenchReport

    def paired_means(self, dataset: str) -> Dict[str, Tuple[float, float]]:
        out = {}
        for c in self.normal.cells:
            if c.dataset == dataset:
                out[c.method] = (c.mean_acc, self.swapped.cell(c.method, dataset).mean_acc)
        return out


# -- methods --------------------------------------------------------------

def _parts(L: Dataset, U: Dataset):
    return (L.causes, L.labels, L.effects), (U.causes, U.effects)


def _m_supervised(L, U, p):
    return fit_supervised_logreg(L.joint, L.labels, p.logistic_lambda).predict(U.joint), True


def _m_labelprop(L, U, p):
    res = fit_label_propagation(L.joint, L.labels, U.joint, p.labelprop)
    return res.labels, res.converged


def _m_semigen_sup(L, U, p):
    params = fit_supervised(L.causes, L.labels, L.effects, p.ridge_lambda, p.logistic_lambda)
    return predict(params, U.causes, U.effects), True


def _em(mode):
    def run(L, U, p):
        lab, unl = _parts(L, U)
        res = fit_em(lab, unl, mode, p.ridge_lambda, p.logistic_lambda)
        return res.labels, res.trace.converged
    return run


def _m_condself(L, U, p):
    lab, unl = _parts(L, U)
    labels, _, _ = fit_condself(lab, unl, p.ridge_lambda)
    return labels, True


METHOD_FUNCS: Dict[str, Callable] = {
    "supervised": _m_supervised,
    "labelprop": _m_labelprop,
    "semigen-sup": _m_semigen_sup,
    "em-soft": _em("soft"),
    "em-hard": _em("hard"),
    "cond-self": _m_condself,
}


# -- protocol ---------------------------------------------------------------

def run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run,)))


def _fixed_dataset(p: Protocol) -> Optional[Dataset]:
    if p.dataset == "csv":
        return load_csv(p.csv_path, p.partition, standardize=p.standardize)
    return None


def draw_run(p: Protocol, run: int, fixed: Optional[Dataset] = None):
    """Dataset and split for one run (roles not yet swapped)."""
    rng = run_rng(p.seed, run)
    if fixed is None:
        ds = synth.generate(synth.preset(p.dataset), p.n_labelled + p.n_unlabelled, rng)
    else:
        ds = fixed
    return ds, sample_split(ds, p.n_labelled, p.n_unlabelled, rng)


def _fit_methods(ds: Dataset, split, p: Protocol, methods) -> Dict[str, MethodOutcome]:
    L = ds.subset(split.labelled_idx)
    U = ds.subset(split.unlabelled_idx)
    out = {}
    for m in methods:
        try:
            labels, converged = METHOD_FUNCS[m](L, U, p)
            acc = float(np.mean(np.asarray(labels) == U.labels)) if U.n else 1.0
            out[m] = MethodOutcome(acc, bool(converged))
        except (CausalSSLError, np.linalg.LinAlgError, FloatingPointError) as exc:
            out[m] = MethodOutcome(None, False, f"{type(exc).__name__}: {exc}")
    return out


def _digest(ds: Dataset, split) -> str:
    h = hashlib.sha256(split.digest().encode())
    h.update(np.ascontiguousarray(ds.causes).tobytes())
    h.update(np.ascontiguousarray(ds.effects).tobytes())
    return h.hexdigest()


def _threads(p: Protocol) -> int:
    if p.threads is not None:
        return max(1, int(p.threads))
    env = os.environ.get("CAUSAL_SSL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CAUSAL_SSL_THREADS must be an integer, got {env!r}") from None
    return 1


def _map_runs(p: Protocol, fn) -> list:
    n = _threads(p)
    if n == 1:
        return [fn(r) for r in range(p.runs)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(p.runs)))  # map keeps run order


def aggregate(dataset: str, methods: Sequence[str], records: Sequence[RunRecord]) -> List[Cell]:
    cells = []
    for m in methods:
        accs = [r.outcomes[m].accuracy for r in records if r.outcomes[m].accuracy is not None]
        failures = sum(r.outcomes[m].accuracy is None for r in records)
        nonconv = sum((not r.outcomes[m].converged) and r.outcomes[m].accuracy is not None for r in records)
        a = np.asarray(accs, dtype=float)
        mean = float(a.mean()) if a.size else float("nan")
        std = float(a.std()) if a.size else float("nan")  # population std
        cells.append(Cell(m, dataset, mean, std, int(a.size), failures, nonconv, tuple(accs)))
    return cells


def run_protocol(p: Protocol) -> BenchReport:
    fixed = _fixed_dataset(p)

    def one(r):
        ds, split = draw_run(p, r, fixed)
        if p.swap_roles:
            ds = swap_roles(ds)
        return RunRecord(r, _digest(ds, split), _fit_methods(ds, split, p, p.methods))

    records = _map_runs(p, one)
    return BenchReport(aggregate(p.label, p.methods, records), {p.label: records})


def ablate_swap_roles(p: Protocol) -> SwapAblation:
    """Fit the causal methods on the same splits with and without swapped roles."""
    methods = tuple(m for m in p.methods if m in CAUSAL_METHODS) or CAUSAL_METHODS
    base = replace(p, swap_roles=False, methods=methods)
    fixed = _fixed_dataset(base)

    def one(r):
        ds, split = draw_run(base, r, fixed)
        digest = split.digest()
        normal = RunRecord(r, digest, _fit_methods(ds, split, base, methods))
        swapped = RunRecord(r, digest, _fit_methods(swap_roles(ds), split, base, methods))
        return normal, swapped

    pairs = _map_runs(base, one)
    normal = [a for a, _ in pairs]
    swapped = [b for _, b in pairs]
    label = base.label
    return SwapAblation(
        BenchReport(aggregate(label, methods, normal), {label: normal}),
        BenchReport(aggregate(label, methods, swapped), {label: swapped}),
    )


# -- rendering ----------------------------------------------------------------

CSV_HEADER = ("method", "dataset", "mean_acc", "std_acc", "runs", "failures")


def _fmt_acc(x: float) -> str:
    if not np.isfinite(x):
        return "nan"
    s = f"{x:.3f}"
    return s[1:] if s.startswith("0.") else s


def load_reference() -> dict:
    text = resources.files("causal_ssl").joinpath("reference_table.json").read_text(encoding="utf-8")
    return json.loads(text)


def render_report(report: BenchReport, fmt: str = "csv", reference: bool = False) -> str:
    """CSV (full float precision) or a markdown table with one row per method and one column per dataset.

    In markdown, a method whose every run failed to converge shows "-".
    With ``reference`` the externally computed T-SVM rows are inserted
    after the supervised baseline from the bundled published values, marked
    as not recomputed.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in report.cells:
            w.writerow([c.method, c.dataset, repr(c.mean_acc), repr(c.std_acc), c.runs, c.failures])
        return buf.getvalue()
    if fmt != "markdown":
        raise ConfigError(f"unknown format {fmt!r}")

    datasets = list(dict.fromkeys(c.dataset for c in report.cells))
    methods = list(dict.fromkeys(c.method for c in report.cells))
    lines = [
        "| Method | " + " | ".join(DATASET_LABELS.get(d, d) for d in datasets) + " |",
        "|---|" + "---|" * len(datasets),
    ]
    ref = load_reference() if reference else None
    ref_rows = []
    if ref:
        for key in ref["external_only"]:
            row = ref["rows"][key]
            vals = [row.get(d) for d in datasets]
            cells = [f"{_fmt_acc(v[0])} ± {_fmt_acc(v[1])}" if v else "n/a" for v in vals]
            ref_rows.append(f"| {row['label']} † | " + " | ".join(cells) + " |")
    order = [m for m in METHODS if m in methods] + [m for m in methods if m not in METHODS]
    for m in order:
        row = []
        for d in datasets:
            try:
                c = report.cell(m, d)
            except KeyError:
                row.append("")
                continue
            if c.runs == 0 or c.nonconverged == c.runs:
                row.append("-")
            else:
                row.append(f"{_fmt_acc(c.mean_acc)} ± {_fmt_acc(c.std_acc)}")
        lines.append(f"| {METHOD_LABELS.get(m, m)} | " + " | ".join(row) + " |")
        if m == "supervised":
            lines.extend(ref_rows)
            ref_rows = []
    lines.extend(ref_rows)
    if ref:
        lines.append("")
        lines.append("† published values for an external solver, not recomputed here.")
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> List[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [
        {
            "method": r["method"],
            "dataset": r["dataset"],
            "mean_acc": float(r["mean_acc"]),
            "std_acc": float(r["std_acc"]),
            "runs": int(r["runs"]),
            "failures": int(r["failures"]),
        }
        for r in rows
    ]
