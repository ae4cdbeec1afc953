"""Discrete-event LSP arrival/departure simulation on one link.

Random streams come from numpy's PCG64 seeded through ``SeedSequence`` with a
spawn key of ``(class, variate kind)``, so every class draws interarrival,
bandwidth and holding times from its own stream and adding a class leaves the
other classes' draws untouched.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .allocator import Link, LspRequest
from .model import BamConfig, FACTORIES, grdm_config, validate_config
from .oracles import OracleState

REFERENCE_BCS = (248800, 217700, 155500)
REFERENCE_CAPACITY = 622000

INTERARRIVAL, BANDWIDTH, HOLDING = 0, 1, 2

ENGINES = ("gbam", "mam", "rdm", "alloctc")


@dataclass(frozen=True)
class ClassWorkload:
    interarrival_mean: float = 3.0
    start_delay: float = 0.0
    count: int = 1000
    bandwidth_min: int = 5000
    bandwidth_max: int = 10000
    holding_mean: float = 250.0

    def problems(self) -> list[str]:
        out = []
        for name in ("interarrival_mean", "start_delay", "count",
                     "bandwidth_min", "bandwidth_max", "holding_mean"):
            if getattr(self, name) < 0:
                out.append(f"{name} must be >= 0")
        if self.bandwidth_min > self.bandwidth_max:
            out.append("bandwidth_min exceeds bandwidth_max")
        return out


@dataclass(frozen=True)
class Scenario:
    """Workload plus the link it runs on.

    ``factory`` is one of ``mam``, ``rdm``, ``alloctc``, ``grdm`` or
    ``explicit``; for ``explicit`` the caps come from ``htl_caps`` and
    ``lth_caps``, for ``grdm`` from ``privates``.
    """

    name: str
    capacity: int
    bcs: tuple[int, ...]
    workloads: tuple[ClassWorkload, ...]
    seed: int = 0
    factory: str = "explicit"
    htl_caps: tuple[int, ...] | None = None
    lth_caps: tuple[int, ...] | None = None
    privates: tuple[int, ...] | None = None

    def validate(self) -> None:
        if len(self.workloads) != len(self.bcs):
            raise ValueError(f"{len(self.workloads)} workloads for {len(self.bcs)} classes")
        for c, w in enumerate(self.workloads):
            for p in w.problems():
                raise ValueError(f"class {c} workload: {p}")

    def config(self, factory: str | None = None) -> BamConfig:
        factory = factory or self.factory
        if factory in FACTORIES:
            return FACTORIES[factory](self.bcs, self.capacity)
        if factory == "grdm":
            return grdm_config(self.bcs, self.privates or self.bcs, self.capacity)
        if factory == "explicit":
            n = len(self.bcs)
            htl = self.htl_caps or (0,) * n
            lth = self.lth_caps or (0,) * n
            return validate_config(self.capacity, list(zip(self.bcs, htl, lth)))
        raise ValueError(f"unknown factory {factory!r}")


def _reference_scenario(name, delays, counts, seed, factory) -> Scenario:
    if isinstance(counts, int):
        counts = (counts,) * len(delays)
    return Scenario(
        name=name,
        capacity=REFERENCE_CAPACITY,
        bcs=REFERENCE_BCS,
        workloads=tuple(ClassWorkload(start_delay=d, count=c) for d, c in zip(delays, counts)),
        seed=seed,
        factory=factory,
    )


def scenario_01(counts=1000, seed=0, factory="mam") -> Scenario:
    """Lowest class starts first; TC1 joins at 800 s and TC2 at 1400 s."""
    return _reference_scenario("scenario_01", (0.0, 800.0, 1400.0), counts, seed, factory)


def scenario_02(counts=1000, seed=0, factory="mam") -> Scenario:
    """Mirror of scenario 01: TC2 starts first, TC0 joins last."""
    return _reference_scenario("scenario_02", (1400.0, 800.0, 0.0), counts, seed, factory)


# -- workload ------------------------------------------------------------------

@dataclass(frozen=True)
class Arrival:
    time: float
    cls: int
    bandwidth: int
    holding: float
    seq: int  # draw order within the class


def _stream(seed: int, cls: int, kind: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cls, kind))))


def generate_workload(scenario: Scenario, seed: int | None = None) -> list[Arrival]:
    scenario.validate()
    seed = scenario.seed if seed is None else seed
    arrivals = []
    for c, w in enumerate(scenario.workloads):
        if w.count == 0:
            continue
        gaps = _stream(seed, c, INTERARRIVAL).exponential(w.interarrival_mean, w.count)
        times = w.start_delay + np.cumsum(gaps)
        bws = _stream(seed, c, BANDWIDTH).integers(w.bandwidth_min, w.bandwidth_max,
                                                   size=w.count, endpoint=True)
        holds = _stream(seed, c, HOLDING).exponential(w.holding_mean, w.count)
        arrivals += [Arrival(float(t), c, int(b), float(h), k)
                     for k, (t, b, h) in enumerate(zip(times, bws, holds))]
    arrivals.sort(key=lambda a: (a.time, a.cls, a.seq))
    return arrivals


# -- engines -------------------------------------------------------------------

def make_engine(name: str, scenario: Scenario):
    """``gbam`` (the scenario's own config), ``gbam:<factory>``, or an oracle."""
    if name == "gbam":
        return Link(scenario.config())
    if name.startswith("gbam:"):
        return Link(scenario.config(name.split(":", 1)[1]))
    if name in ("mam", "rdm", "alloctc"):
        return OracleState(name, scenario.bcs, scenario.capacity)
    raise ValueError(f"unknown engine {name!r}")


# -- run -----------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    time: float
    kind: str  # "arrival" or "departure"
    lsp_id: int
    cls: int
    bandwidth: int
    admitted: bool
    shortfall: int
    totals: tuple[int, ...]
    htl_borrowed: tuple[int, ...]
    lth_borrowed: tuple[int, ...]


@dataclass
class SimTrace:
    scenario: str
    seed: int
    engine: str
    capacity: int
    n_classes: int
    config_digest: str = ""
    records: list[TraceRecord] = field(default_factory=list)


_DEPARTURE, _ARRIVAL = 0, 1


def run(scenario: Scenario, engine: str = "gbam", seed: int | None = None,
        check: Callable[[object, TraceRecord], None] | None = None,
        loans: bool = True) -> SimTrace:
    """Drive ``engine`` with the scenario's workload.

    Departures sort before arrivals at equal times, then by class.  Blocked
    requests are dropped.  ``check`` is called with the engine and the new
    record after every event.  With ``loans=False`` the per-event borrowing
    breakdown is skipped and recorded as zeros.
    """
    from .metrics import config_digest  # avoid import cycle at module load

    seed = scenario.seed if seed is None else seed
    alloc = make_engine(engine, scenario)
    trace = SimTrace(scenario.name, seed, engine, scenario.capacity, len(scenario.bcs),
                     config_digest(scenario))
    zeros = (0,) * len(scenario.bcs)
    heap: list[tuple] = []
    for lsp_id, a in enumerate(generate_workload(scenario, seed)):
        heapq.heappush(heap, (a.time, _ARRIVAL, a.cls, lsp_id, a))

    while heap:
        time, kind, cls, lsp_id, payload = heapq.heappop(heap)
        if kind == _ARRIVAL:
            decision = alloc.admit(LspRequest(lsp_id, cls, payload.bandwidth))
            if decision.admitted:
                heapq.heappush(heap, (time + payload.holding, _DEPARTURE, cls, lsp_id, None))
            bandwidth, admitted, shortfall = payload.bandwidth, decision.admitted, decision.shortfall
            label = "arrival"
        else:
            rec = alloc.release(lsp_id)
            bandwidth, admitted, shortfall = rec.bandwidth, True, 0
            label = "departure"
        htl, lth = alloc.borrowed() if loans else (zeros, zeros)
        record = TraceRecord(time, label, lsp_id, cls, bandwidth, admitted, shortfall,
                             tuple(alloc.totals), htl, lth)
        trace.records.append(record)
        if check is not None:
            check(alloc, record)
    return trace


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return replace(scenario, seed=seed)
