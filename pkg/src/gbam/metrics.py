"""Fold simulation traces into load series and run summaries; CSV export."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .oracles import MalformedTrace

SUMMARY_FIELDS = (
    "class", "offered", "admitted", "blocked", "blocking_ratio",
    "mean_load_kbps", "peak_load_kbps", "mean_utilization", "link_utilization",
    "mean_htl_borrowed_kbps", "mean_lth_borrowed_kbps",
)


@dataclass
class LoadSeries:
    """Per-class step functions: ``samples[c]`` is a list of ``(time, load)``
    pairs, each value holding until the next sample.  Load is 0 before the
    first sample."""

    samples: list[list[tuple[float, int]]] = field(default_factory=list)

    def value_at(self, cls: int, t: float) -> int:
        value = 0
        for time, load in self.samples[cls]:
            if time > t:
                break
            value = load
        return value


@dataclass
class ClassSummary:
    offered: int = 0
    admitted: int = 0
    blocked: int = 0
    mean_load_kbps: float = 0.0
    peak_load_kbps: int = 0
    mean_htl_borrowed_kbps: float = 0.0
    mean_lth_borrowed_kbps: float = 0.0

    @property
    def blocking_ratio(self) -> float:
        return self.blocked / self.offered if self.offered else 0.0


@dataclass
class RunSummary:
    capacity: int
    classes: list[ClassSummary]
    link_utilization: float = 0.0
    duration: float = 0.0


def config_digest(scenario) -> str:
    """Short stable hash of the link and workload parameters of a run."""
    payload = {
        "capacity": scenario.capacity,
        "bcs": list(scenario.bcs),
        "factory": scenario.factory,
        "htl": list(scenario.htl_caps or ()),
        "lth": list(scenario.lth_caps or ()),
        "privates": list(scenario.privates or ()),
        "workloads": [asdict(w) for w in scenario.workloads],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _integrate(points: Sequence[tuple[float, int]], start: Fraction, end: Fraction) -> Fraction:
    """Exact integral of a right-continuous step function over [start, end]."""
    total = Fraction(0)
    for k, (t, v) in enumerate(points):
        lo = max(Fraction(t), start)
        hi = Fraction(points[k + 1][0]) if k + 1 < len(points) else end
        hi = min(hi, end)
        if hi > lo:
            total += v * (hi - lo)
    return total


def fold_trace(trace, warmup: float = 0.0) -> tuple[LoadSeries, RunSummary]:
    """Build load series and a summary from a :class:`~gbam.sim.SimTrace`.

    Time averages cover ``[warmup, last event time]``.
    """
    n = trace.n_classes
    series = LoadSeries([[] for _ in range(n)])
    borrowed_htl: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    borrowed_lth: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    stats = [ClassSummary() for _ in range(n)]
    last_time = 0.0
    prev = (0,) * n

    for k, rec in enumerate(trace.records):
        if rec.time < last_time:
            raise MalformedTrace(f"record {k}: time goes backwards")
        if len(rec.totals) != n or not 0 <= rec.cls < n:
            raise MalformedTrace(f"record {k}: class data does not match {n} classes")
        last_time = rec.time
        if rec.kind == "arrival":
            stats[rec.cls].offered += 1
            if rec.admitted:
                stats[rec.cls].admitted += 1
            else:
                stats[rec.cls].blocked += 1
        elif rec.kind != "departure":
            raise MalformedTrace(f"record {k}: unknown kind {rec.kind!r}")
        if rec.totals != prev:
            for c in range(n):
                if rec.totals[c] != prev[c]:
                    _append(series.samples[c], rec.time, rec.totals[c])
            prev = rec.totals
        for c in range(n):
            if _last(borrowed_htl[c]) != rec.htl_borrowed[c]:
                _append(borrowed_htl[c], rec.time, rec.htl_borrowed[c])
            if _last(borrowed_lth[c]) != rec.lth_borrowed[c]:
                _append(borrowed_lth[c], rec.time, rec.lth_borrowed[c])

    start, end = Fraction(warmup), Fraction(last_time)
    span = end - start
    link_area = Fraction(0)
    for c in range(n):
        s = stats[c]
        s.peak_load_kbps = max((v for _, v in series.samples[c]), default=0)
        if span > 0:
            area = _integrate(series.samples[c], start, end)
            link_area += area
            s.mean_load_kbps = float(area / span)
            s.mean_htl_borrowed_kbps = float(_integrate(borrowed_htl[c], start, end) / span)
            s.mean_lth_borrowed_kbps = float(_integrate(borrowed_lth[c], start, end) / span)
    summary = RunSummary(trace.capacity, stats, duration=float(span) if span > 0 else 0.0)
    if span > 0 and trace.capacity:
        summary.link_utilization = float(link_area / span / trace.capacity)
    return series, summary


def _last(points: list[tuple[float, int]]) -> int:
    return points[-1][1] if points else 0


def _append(points: list[tuple[float, int]], t: float, v: int) -> None:
    # several events at one instant collapse into the last value
    if points and points[-1][0] == t:
        points[-1] = (t, v)
    else:
        points.append((t, v))


def resample(series: LoadSeries, dt: float = 10.0, end: float | None = None) -> list[list[int]]:
    """Values of every class on the grid 0, dt, 2dt, ... up to ``end``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if end is None:
        end = max((pts[-1][0] for pts in series.samples if pts), default=0.0)
    steps = int(math.floor(end / dt)) + 1
    out = []
    for pts in series.samples:
        row, k, value = [], 0, 0
        for s in range(steps):
            t = s * dt
            while k < len(pts) and pts[k][0] <= t:
                value = pts[k][1]
                k += 1
            row.append(value)
        out.append(row)
    return out


def multi_seed_table(summaries: Sequence[RunSummary]) -> list[dict]:
    """Per-class means of blocking ratio and load across several runs."""
    if not summaries:
        return []
    n = len(summaries[0].classes)
    rows = []
    for c in range(n):
        ratios = [s.classes[c].blocking_ratio for s in summaries]
        loads = [s.classes[c].mean_load_kbps for s in summaries]
        rows.append({
            "class": c,
            "runs": len(summaries),
            "mean_blocking_ratio": sum(ratios) / len(ratios),
            "mean_load_kbps": sum(loads) / len(loads),
        })
    rows.append({
        "class": "link",
        "runs": len(summaries),
        "mean_link_utilization": sum(s.link_utilization for s in summaries) / len(summaries),
    })
    return rows


# -- csv -----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def export_csv(series: LoadSeries, summary: RunSummary, destination, meta: dict | None = None) -> list[Path]:
    """Write ``load.csv``, ``summary.csv`` and ``meta.csv`` into ``destination``.

    Times are written with ``repr`` so they parse back to the same float;
    averages use six decimals.
    """
    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
        paths = [dest / "load.csv", dest / "summary.csv", dest / "meta.csv"]
        with open(paths[0], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "class", "load_kbps"])
            for c, pts in enumerate(series.samples):
                for t, v in pts:
                    w.writerow([repr(float(t)), c, v])
        with open(paths[1], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_FIELDS)
            for c, s in enumerate(summary.classes):
                w.writerow([c, s.offered, s.admitted, s.blocked, _fmt(s.blocking_ratio),
                            _fmt(s.mean_load_kbps), s.peak_load_kbps,
                            _fmt(s.mean_load_kbps / summary.capacity if summary.capacity else 0.0),
                            _fmt(summary.link_utilization),
                            _fmt(s.mean_htl_borrowed_kbps), _fmt(s.mean_lth_borrowed_kbps)])
        with open(paths[2], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["key", "value"])
            for key, value in (meta or {}).items():
                w.writerow([key, value])
    except OSError as exc:
        raise OSError(f"cannot write CSV output to {dest}: {exc}") from exc
    return paths


def trace_meta(trace) -> dict:
    return {
        "scenario": trace.scenario,
        "seed": trace.seed,
        "engine": trace.engine,
        "config_digest": trace.config_digest,
    }


def read_load_csv(path, n_classes: int | None = None) -> LoadSeries:
    rows: dict[int, list[tuple[float, int]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(int(row["class"]), []).append((float(row["time_s"]), int(row["load_kbps"])))
    n = n_classes if n_classes is not None else (max(rows) + 1 if rows else 0)
    return LoadSeries([rows.get(c, []) for c in range(n)])
