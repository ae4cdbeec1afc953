"""Stand-alone MAM, RDM and AllocTC-Sharing admission.

These engines share no code with :mod:`gbam.allocator`.  Each one tests a
closed-form condition on per-class totals, which makes them usable as ground
truth when checking that a factory-built G-BAM link decides identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .allocator import (
    ClassOutOfRange,
    Decision,
    DuplicateLspId,
    LspRequest,
    ReleaseRecord,
    UnknownLspId,
)

MODELS = ("mam", "rdm", "alloctc")


class MalformedTrace(ValueError):
    pass


@dataclass
class OracleState:
    model: str
    bcs: tuple[int, ...]
    capacity: int
    totals: list[int] = field(init=False)
    lsps: dict[int, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.bcs = tuple(self.bcs)
        self.totals = [0] * len(self.bcs)

    def headroom(self, cls: int) -> int:
        n, bcs = self.totals, self.bcs
        if self.model == "mam":
            return bcs[cls] - n[cls]
        if self.model == "rdm":
            # nested dolls: every suffix starting at or below cls must fit
            best = None
            suffix_bc = suffix_n = 0
            for t in range(len(bcs) - 1, -1, -1):
                suffix_bc += bcs[t]
                suffix_n += n[t]
                if t <= cls:
                    slack = suffix_bc - suffix_n
                    best = slack if best is None else min(best, slack)
            return best
        return self.capacity - sum(n)

    def admit(self, req: LspRequest) -> Decision:
        if not 0 <= req.cls < len(self.bcs):
            raise ClassOutOfRange(req.cls)
        if req.id in self.lsps:
            raise DuplicateLspId(req.id)
        room = self.headroom(req.cls)
        if req.bandwidth > room:
            return Decision(False, req.bandwidth - max(room, 0))
        self.totals[req.cls] += req.bandwidth
        self.lsps[req.id] = (req.cls, req.bandwidth)
        return Decision(True)

    def release(self, lsp_id: int) -> ReleaseRecord:
        if lsp_id not in self.lsps:
            raise UnknownLspId(lsp_id)
        cls, bw = self.lsps.pop(lsp_id)
        self.totals[cls] -= bw
        return ReleaseRecord(lsp_id, cls, bw)

    def borrowed(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Load carried above each class's BC, split by loan direction.

        RDM overflow can only come from above.  AllocTC overflow is assigned
        to the nearest classes with spare BC first, lower index on ties.
        """
        n = len(self.bcs)
        over = [max(0, t - b) for t, b in zip(self.totals, self.bcs)]
        zero = (0,) * n
        if self.model == "mam" or not any(over):
            return zero, zero
        if self.model == "rdm":
            return tuple(over), zero
        spare = [max(0, b - t) for t, b in zip(self.totals, self.bcs)]
        htl, lth = [0] * n, [0] * n
        for _, j, i in sorted((abs(i - j), j, i) for i in range(n) for j in range(n) if i != j):
            x = min(over[i], spare[j])
            if x:
                over[i] -= x
                spare[j] -= x
                if j > i:
                    htl[i] += x
                else:
                    lth[i] += x
        return tuple(htl), tuple(lth)


def mam_state(bcs: Sequence[int], capacity: int) -> OracleState:
    return OracleState("mam", tuple(bcs), capacity)


def rdm_state(bcs: Sequence[int], capacity: int) -> OracleState:
    return OracleState("rdm", tuple(bcs), capacity)


def alloctc_state(bcs: Sequence[int], capacity: int) -> OracleState:
    return OracleState("alloctc", tuple(bcs), capacity)


def mam_admit(state: OracleState, req: LspRequest) -> Decision:
    if state.model != "mam":
        raise ValueError("state is not a MAM oracle")
    return state.admit(req)


def rdm_admit(state: OracleState, req: LspRequest) -> Decision:
    if state.model != "rdm":
        raise ValueError("state is not an RDM oracle")
    return state.admit(req)


def alloctc_admit(state: OracleState, req: LspRequest) -> Decision:
    if state.model != "alloctc":
        raise ValueError("state is not an AllocTC oracle")
    return state.admit(req)


def oracle_release(state: OracleState, lsp_id: int) -> ReleaseRecord:
    return state.release(lsp_id)


# -- traces --------------------------------------------------------------------

@dataclass(frozen=True)
class Admit:
    request: LspRequest


@dataclass(frozen=True)
class Release:
    id: int


Op = Union[Admit, Release]


def replay(trace: Iterable[Op], engine) -> list[Decision | ReleaseRecord]:
    """Feed a trace to a fresh engine and collect one result per operation.

    Releasing an id the engine does not currently hold, or offering an id it
    has already seen, raises :class:`MalformedTrace`.
    """
    out: list[Decision | ReleaseRecord] = []
    seen: set[int] = set()
    for k, op in enumerate(trace):
        if isinstance(op, Admit):
            if op.request.id in seen:
                raise MalformedTrace(f"op {k}: id {op.request.id} offered twice")
            seen.add(op.request.id)
            out.append(engine.admit(op.request))
        elif isinstance(op, Release):
            try:
                out.append(engine.release(op.id))
            except UnknownLspId:
                raise MalformedTrace(f"op {k}: release of id {op.id} not held") from None
        else:
            raise MalformedTrace(f"op {k}: unknown operation {op!r}")
    return out


def first_divergence(a: Sequence, b: Sequence) -> int | None:
    for k, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return k
    if len(a) != len(b):
        return min(len(a), len(b))
    return None
