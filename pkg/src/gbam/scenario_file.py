"""JSON scenario files.

Example::

    {
      "name": "scenario_01",
      "seed": 7,
      "capacity_kbps": 622000,
      "factory": "rdm",
      "classes": [{"bc_percent": 40}, {"bc_percent": 35}, {"bc_percent": 25}],
      "workloads": [{"start_delay_s": 0}, {"start_delay_s": 800}, {"start_delay_s": 1400}]
    }

Percent values are percent of link capacity and must come out as a whole
number of kbps.  Unknown keys are rejected.  Workload fields default to
interarrival 3 s, start delay 0 s, 1000 requests, 5000-10000 kbps and a
250 s mean holding time; ``workloads`` may be omitted entirely.
"""
from __future__ import annotations

import json
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from .sim import ClassWorkload, Scenario

FACTORY_NAMES = ("mam", "rdm", "alloctc", "grdm")
TOP_KEYS = {"name", "seed", "capacity_kbps", "factory", "classes", "workloads"}
WORKLOAD_KEYS = {
    "interarrival_mean_s": "interarrival_mean",
    "start_delay_s": "start_delay",
    "count": "count",
    "bandwidth_min_kbps": "bandwidth_min",
    "bandwidth_max_kbps": "bandwidth_max",
    "holding_mean_s": "holding_mean",
}
INT_WORKLOAD_KEYS = {"count", "bandwidth_min_kbps", "bandwidth_max_kbps"}


class ScenarioFileError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _is_number(v) -> bool:
    return isinstance(v, (int, Decimal)) and not isinstance(v, bool)


def _whole(v) -> bool:
    return _is_number(v) and Fraction(v).denominator == 1


class _Reader:
    def __init__(self, capacity):
        self.capacity = capacity
        self.problems: list[str] = []

    def kbps(self, obj: dict, field: str, where: str, required: bool):
        """Read ``<field>_kbps`` or ``<field>_percent`` from ``obj``."""
        k_key, p_key = f"{field}_kbps", f"{field}_percent"
        has_k, has_p = k_key in obj, p_key in obj
        if has_k and has_p:
            self.problems.append(f"{where}: {k_key} and {p_key} are mutually exclusive")
            return None
        if has_k:
            v = obj[k_key]
            if not _whole(v) or v < 0:
                self.problems.append(f"{where}.{k_key}: expected a non-negative integer, got {v}")
                return None
            return int(v)
        if has_p:
            v = obj[p_key]
            if not _is_number(v) or v < 0:
                self.problems.append(f"{where}.{p_key}: expected a non-negative number, got {v}")
                return None
            if self.capacity is None:
                return None
            exact = Fraction(v) * self.capacity / 100
            if exact.denominator != 1:
                self.problems.append(
                    f"{where}.{p_key}: {v}% of {self.capacity} kbps is not a whole kbps value")
                return None
            return int(exact)
        if required:
            self.problems.append(f"{where}: one of {k_key} or {p_key} is required")
        return None


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    if not isinstance(doc, dict):
        raise ScenarioFileError(["top level must be a JSON object"])

    problems = [f"unknown key {k!r}" for k in sorted(set(doc) - TOP_KEYS)]
    capacity = doc.get("capacity_kbps")
    if capacity is None:
        problems.append("capacity_kbps is required")
    elif not _whole(capacity) or capacity < 0:
        problems.append(f"capacity_kbps: expected a non-negative integer, got {capacity}")
        capacity = None
    else:
        capacity = int(capacity)

    factory = doc.get("factory")
    if factory is not None and factory not in FACTORY_NAMES:
        problems.append(f"factory: expected one of {', '.join(FACTORY_NAMES)}, got {factory!r}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append(f"seed: expected a non-negative integer, got {seed}")
    name = doc.get("name", default_name)
    if not isinstance(name, str):
        problems.append("name: expected a string")

    classes = doc.get("classes")
    if not isinstance(classes, list):
        problems.append("classes: required array of class objects")
        classes = []
    reader = _Reader(capacity)
    allowed = {"bc_kbps", "bc_percent"}
    if factory is None:
        allowed |= {"htl_kbps", "htl_percent", "lth_kbps", "lth_percent"}
    elif factory == "grdm":
        allowed |= {"private_kbps", "private_percent"}
    bcs, htl, lth, privates = [], [], [], []
    for i, c in enumerate(classes):
        where = f"classes[{i}]"
        if not isinstance(c, dict):
            problems.append(f"{where}: expected an object")
            continue
        for k in sorted(set(c) - allowed):
            why = "derived from the factory" if factory and k[:3] in ("htl", "lth") else "unknown key"
            problems.append(f"{where}.{k}: {why}")
        bcs.append(reader.kbps(c, "bc", where, required=True))
        if factory is None:
            htl.append(reader.kbps(c, "htl", where, required=False) or 0)
            lth.append(reader.kbps(c, "lth", where, required=False) or 0)
        elif factory == "grdm":
            privates.append(reader.kbps(c, "private", where, required=True))

    workloads_doc = doc.get("workloads")
    workloads = []
    if workloads_doc is None:
        workloads = [ClassWorkload() for _ in classes]
    elif not isinstance(workloads_doc, list):
        problems.append("workloads: expected an array")
    else:
        if len(workloads_doc) != len(classes):
            problems.append(f"workloads: {len(workloads_doc)} entries for {len(classes)} classes")
        for i, w in enumerate(workloads_doc):
            where = f"workloads[{i}]"
            if not isinstance(w, dict):
                problems.append(f"{where}: expected an object")
                continue
            kwargs = {}
            for k, v in w.items():
                if k not in WORKLOAD_KEYS:
                    problems.append(f"{where}.{k}: unknown key")
                elif not _is_number(v) or v < 0:
                    problems.append(f"{where}.{k}: expected a non-negative number, got {v}")
                elif k in INT_WORKLOAD_KEYS:
                    if not _whole(v):
                        problems.append(f"{where}.{k}: expected an integer, got {v}")
                    else:
                        kwargs[WORKLOAD_KEYS[k]] = int(v)
                else:
                    kwargs[WORKLOAD_KEYS[k]] = float(v)
            wl = ClassWorkload(**kwargs)
            problems += [f"{where}: {p}" for p in wl.problems()]
            workloads.append(wl)

    problems += reader.problems
    if problems:
        raise ScenarioFileError(problems)
    return Scenario(
        name=name,
        capacity=capacity,
        bcs=tuple(bcs),
        workloads=tuple(workloads),
        seed=seed,
        factory=factory or "explicit",
        htl_caps=tuple(htl) if factory is None else None,
        lth_caps=tuple(lth) if factory is None else None,
        privates=tuple(privates) if factory == "grdm" else None,
    )


def load_scenario(path) -> Scenario:
    """Read and parse a scenario file; OSError propagates for I/O failures."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return parse_scenario(text, default_name=path.stem)
    except ScenarioFileError as exc:
        raise ScenarioFileError([f"{path}: {p}" for p in exc.problems]) from None


def scenario_to_json(scenario: Scenario) -> str:
    doc = {
        "name": scenario.name,
        "seed": scenario.seed,
        "capacity_kbps": scenario.capacity,
    }
    if scenario.factory != "explicit":
        doc["factory"] = scenario.factory
    classes = []
    for i, bc in enumerate(scenario.bcs):
        c = {"bc_kbps": bc}
        if scenario.factory == "explicit":
            c["htl_kbps"] = (scenario.htl_caps or (0,) * len(scenario.bcs))[i]
            c["lth_kbps"] = (scenario.lth_caps or (0,) * len(scenario.bcs))[i]
        elif scenario.factory == "grdm":
            c["private_kbps"] = scenario.privates[i]
        classes.append(c)
    doc["classes"] = classes
    doc["workloads"] = [
        {"interarrival_mean_s": w.interarrival_mean, "start_delay_s": w.start_delay,
         "count": w.count, "bandwidth_min_kbps": w.bandwidth_min,
         "bandwidth_max_kbps": w.bandwidth_max, "holding_mean_s": w.holding_mean}
        for w in scenario.workloads
    ]
    return json.dumps(doc, indent=2) + "\n"
