"""Single-link admission control under a :class:`BamConfig`.

Only per-class totals matter for admission.  A total vector is feasible when
the load each class carries above its own BC can be spread over lender
classes without breaking any direction cap, lender free space or private
floor.  The loan packing reported by snapshots is recomputed from the totals
after every change, so borrowed load moves back into a class's own BC as
soon as that space frees up.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .flow import FlowNetwork
from .model import BamConfig, Direction, dynamic_bound, loanable, static_max_allocation

INF = float("inf")


class DuplicateLspId(KeyError):
    pass


class UnknownLspId(KeyError):
    pass


class ClassOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class LspRequest:
    id: int
    cls: int
    bandwidth: int


@dataclass(frozen=True)
class Decision:
    """Outcome of one admission request.

    ``shortfall`` is zero for admitted requests; for blocked ones it is the
    requested bandwidth minus the largest amount the class could still get.
    """

    admitted: bool
    shortfall: int = 0

    @property
    def blocked(self) -> bool:
        return not self.admitted


ADMITTED = Decision(True)


@dataclass(frozen=True)
class ReleaseRecord:
    id: int
    cls: int
    bandwidth: int


@dataclass(frozen=True)
class Packing:
    """Own-BC usage per class and ``lent[borrower][lender]`` amounts."""

    own: tuple[int, ...]
    lent: tuple[tuple[int, ...], ...]

    def lent_out(self, j: int) -> int:
        return sum(row[j] for row in self.lent)

    def lent_htl(self, j: int) -> int:
        return sum(self.lent[i][j] for i in range(j))

    def lent_lth(self, j: int) -> int:
        return sum(self.lent[i][j] for i in range(j + 1, len(self.lent)))

    def borrowed_htl(self, i: int) -> int:
        return sum(self.lent[i][i + 1:])

    def borrowed_lth(self, i: int) -> int:
        return sum(self.lent[i][:i])


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    packing: Packing | None = None

    def __bool__(self) -> bool:
        return self.feasible


def _pools(cfg: BamConfig, totals: Sequence[int]) -> tuple[list[int], list[int]]:
    """Overflow above own BC and free lendable space, per class."""
    supply, free = [], []
    for c, n in zip(cfg.classes, totals):
        own = n if n < c.bc else c.bc
        supply.append(n - own)
        free.append(c.bc - max(c.private, own))
    return supply, free


def _cut_ok(supply: Sequence[int], free: Sequence[int],
            htl: Sequence[int], lth: Sequence[int]) -> bool:
    """Min-cut test on the loan network.

    A cut keeps a set S of borrowers on the source side; lender j then costs
    min(free_j, htl_j [some i in S below j] + lth_j [some i in S above j]).
    That cost depends on S only through min(S) and max(S), so the binding
    sets are the contiguous runs of borrowers.
    """
    n = len(supply)
    borrowers = [i for i in range(n) if supply[i] > 0]
    for a, lo in enumerate(borrowers):
        demand = 0
        for hi in borrowers[a:]:
            demand += supply[hi]
            cap = 0
            for j in range(n):
                d = (htl[j] if lo < j else 0) + (lth[j] if hi > j else 0)
                cap += free[j] if free[j] < d else d
                if cap >= demand:
                    break
            if cap < demand:
                return False
    return True


def admissible(cfg: BamConfig, totals: Sequence[int]) -> bool:
    """Fast exact feasibility test for a total vector (no packing built)."""
    supply, free = _pools(cfg, totals)
    if not any(supply):
        return True
    return _cut_ok(supply, free, cfg.htl_caps, cfg.lth_caps)


def headroom(cfg: BamConfig, totals: Sequence[int], cls: int) -> int:
    """Largest ``b`` such that ``totals + b`` on ``cls`` is still feasible.

    ``totals`` must itself be feasible.  Two regimes: while the class stays
    within its own BC only its shrinking free pool can break existing loans;
    beyond that it becomes a borrower and competes for the lender pools.
    """
    n = cfg.n_classes
    htl, lth = cfg.htl_caps, cfg.lth_caps
    me = cfg.classes[cls]
    supply, free = _pools(cfg, totals)
    borrowers = [i for i in range(n) if supply[i] > 0]
    room = me.bc - totals[cls]

    if room > 0:
        limit = room
        for a, lo in enumerate(borrowers):
            demand = 0
            for hi in borrowers[a:]:
                demand += supply[hi]
                others = 0
                for j in range(n):
                    if j != cls:
                        d = (htl[j] if lo < j else 0) + (lth[j] if hi > j else 0)
                        others += min(free[j], d)
                need = demand - others
                if need > 0:
                    limit = min(limit, me.bc - need - totals[cls])
        if limit < room:
            return max(limit, 0)

    free[cls] = 0
    supply[cls] = 0
    borrowers = sorted(set(borrowers) | {cls})
    best = None
    for a, lo in enumerate(borrowers):
        if lo > cls:
            break
        demand = 0
        for hi in borrowers[a:]:
            demand += supply[hi]
            if hi < cls:
                continue
            cap = 0
            for j in range(n):
                d = (htl[j] if lo < j else 0) + (lth[j] if hi > j else 0)
                cap += min(free[j], d)
            slack = cap - demand
            best = slack if best is None else min(best, slack)
    return max(0, room + best)


def _flow_feasible(cfg: BamConfig, totals: Sequence[int]) -> bool:
    """Max-flow on source -> borrower -> lender direction -> lender -> sink."""
    n = cfg.n_classes
    supply, free = _pools(cfg, totals)
    need = sum(supply)
    if need == 0:
        return True
    src, sink = 4 * n, 4 * n + 1
    borrower = lambda i: i
    htl_node = lambda j: n + j
    lth_node = lambda j: 2 * n + j
    lender = lambda j: 3 * n + j
    big = need
    net = FlowNetwork(4 * n + 2)
    for i in range(n):
        if supply[i] > 0:
            net.add_edge(src, borrower(i), supply[i])
            for j in range(i + 1, n):
                net.add_edge(borrower(i), htl_node(j), big)
            for j in range(i):
                net.add_edge(borrower(i), lth_node(j), big)
    for j, c in enumerate(cfg.classes):
        net.add_edge(htl_node(j), lender(j), c.htl_cap)
        net.add_edge(lth_node(j), lender(j), c.lth_cap)
        net.add_edge(lender(j), sink, free[j])
    return net.max_flow(src, sink) == need


def canonical_packing(cfg: BamConfig, totals: Sequence[int]) -> Packing:
    """Deterministic loan packing for a feasible total vector.

    Borrower/lender pairs are filled in order of priority distance, then
    lender index, then borrower index; each pair takes the most it can while
    the remaining overflow stays placeable.
    """
    n = cfg.n_classes
    supply, free = _pools(cfg, totals)
    own = tuple(t - s for t, s in zip(totals, supply))
    lent = [[0] * n for _ in range(n)]
    if any(supply):
        htl, lth = list(cfg.htl_caps), list(cfg.lth_caps)
        pairs = sorted(((abs(i - j), j, i) for i in range(n) for j in range(n) if i != j))
        for _, j, i in pairs:
            if supply[i] == 0:
                continue
            caps = htl if j > i else lth
            upper = min(supply[i], free[j], caps[j])
            if upper <= 0:
                continue

            def fits(x: int) -> bool:
                supply[i] -= x
                free[j] -= x
                caps[j] -= x
                ok = _cut_ok(supply, free, htl, lth)
                supply[i] += x
                free[j] += x
                caps[j] += x
                return ok

            if fits(upper):
                x = upper
            else:
                lo, hi = 0, upper
                while lo < hi:
                    mid = (lo + hi + 1) // 2
                    if fits(mid):
                        lo = mid
                    else:
                        hi = mid - 1
                x = lo
            if x:
                lent[i][j] = x
                supply[i] -= x
                free[j] -= x
                caps[j] -= x
        if any(supply):
            raise ValueError(f"totals {list(totals)} are not feasible")
    return Packing(own, tuple(tuple(row) for row in lent))


def feasible(cfg: BamConfig, totals: Sequence[int]) -> FeasibilityResult:
    if len(totals) != cfg.n_classes:
        raise ValueError(f"expected {cfg.n_classes} totals, got {len(totals)}")
    if any(t < 0 for t in totals):
        raise ValueError("totals must be non-negative")
    if not _flow_feasible(cfg, totals):
        return FeasibilityResult(False)
    return FeasibilityResult(True, canonical_packing(cfg, totals))


def state_violations(cfg: BamConfig, totals: Sequence[int], packing: Packing) -> list[str]:
    """Every link-state invariant broken by ``(totals, packing)``."""
    n = cfg.n_classes
    out = []
    if sum(totals) > cfg.capacity:
        out.append(f"total load {sum(totals)} exceeds capacity {cfg.capacity}")
    for i, c in enumerate(cfg.classes):
        if packing.lent[i][i]:
            out.append(f"class {i} lends to itself")
        borrowed = sum(packing.lent[i])
        if totals[i] != packing.own[i] + borrowed:
            out.append(f"class {i}: N={totals[i]} != U={packing.own[i]} + borrowed {borrowed}")
        if packing.own[i] > c.bc:
            out.append(f"class {i}: own usage {packing.own[i]} exceeds bc {c.bc}")
        bound = min(static_max_allocation(cfg, i), cfg.capacity)
        if totals[i] > bound:
            out.append(f"class {i}: N={totals[i]} exceeds static bound {bound}")
        if totals[i] > dynamic_bound(cfg, packing.own, packing.lent, i):
            out.append(f"class {i}: N={totals[i]} exceeds dynamic bound")
        if packing.lent_htl(i) > c.htl_cap:
            out.append(f"class {i}: lends {packing.lent_htl(i)} downward, cap {c.htl_cap}")
        if packing.lent_lth(i) > c.lth_cap:
            out.append(f"class {i}: lends {packing.lent_lth(i)} upward, cap {c.lth_cap}")
        out_total = packing.lent_out(i)
        if out_total + packing.own[i] > c.bc:
            out.append(f"class {i}: own usage plus lent exceeds bc")
        if out_total > c.bc - max(c.private, packing.own[i]):
            out.append(f"class {i}: lends into its private share")
        if any(packing.lent[i][j] < 0 for j in range(n)):
            out.append(f"class {i}: negative loan")
    return out


@dataclass(frozen=True)
class LinkSnapshot:
    totals: tuple[int, ...]
    own: tuple[int, ...]
    lent: tuple[tuple[int, ...], ...]
    htl_available: tuple[int, ...]
    lth_available: tuple[int, ...]
    dynamic_bounds: tuple[int, ...]
    free: int


@dataclass
class Link:
    """Mutable admission state of one link.

    Decisions depend only on the configuration, the current per-class totals
    and the request; the packing is derived lazily from the totals.
    """

    config: BamConfig
    lsps: dict[int, tuple[int, int]] = field(default_factory=dict)
    totals: list[int] = field(init=False)
    _packing: Packing | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.totals = [0] * self.config.n_classes
        for cls, bw in self.lsps.values():
            self.totals[cls] += bw

    def _check_class(self, cls: int) -> None:
        if not 0 <= cls < self.config.n_classes:
            raise ClassOutOfRange(f"class {cls} out of range for {self.config.n_classes} classes")

    def headroom(self, cls: int) -> int:
        self._check_class(cls)
        return headroom(self.config, self.totals, cls)

    def admit(self, req: LspRequest) -> Decision:
        self._check_class(req.cls)
        if req.id in self.lsps:
            raise DuplicateLspId(req.id)
        if req.bandwidth < 0:
            raise ValueError(f"negative bandwidth {req.bandwidth}")
        if req.bandwidth:
            self.totals[req.cls] += req.bandwidth
            ok = admissible(self.config, self.totals)
            self.totals[req.cls] -= req.bandwidth
            if not ok:
                room = headroom(self.config, self.totals, req.cls)
                return Decision(False, req.bandwidth - room)
            self.totals[req.cls] += req.bandwidth
            self._packing = None
        self.lsps[req.id] = (req.cls, req.bandwidth)
        return ADMITTED

    def release(self, lsp_id: int) -> ReleaseRecord:
        try:
            cls, bw = self.lsps.pop(lsp_id)
        except KeyError:
            raise UnknownLspId(lsp_id) from None
        if bw:
            self.totals[cls] -= bw
            self._packing = None
        return ReleaseRecord(lsp_id, cls, bw)

    @property
    def packing(self) -> Packing:
        if self._packing is None:
            self._packing = canonical_packing(self.config, self.totals)
        return self._packing

    def borrowed(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        p = self.packing
        n = self.config.n_classes
        return (tuple(p.borrowed_htl(i) for i in range(n)),
                tuple(p.borrowed_lth(i) for i in range(n)))

    def snapshot(self) -> LinkSnapshot:
        cfg, p = self.config, self.packing
        n = cfg.n_classes
        htl_av = tuple(loanable(cfg, j, p.own[j], p.lent_out(j), Direction.HTL,
                                lent_in_direction=p.lent_htl(j)) for j in range(n))
        lth_av = tuple(loanable(cfg, j, p.own[j], p.lent_out(j), Direction.LTH,
                                lent_in_direction=p.lent_lth(j)) for j in range(n))
        return LinkSnapshot(
            totals=tuple(self.totals),
            own=p.own,
            lent=p.lent,
            htl_available=htl_av,
            lth_available=lth_av,
            dynamic_bounds=tuple(dynamic_bound(cfg, p.own, p.lent, i) for i in range(n)),
            free=cfg.capacity - sum(self.totals),
        )

    def violations(self) -> list[str]:
        out = state_violations(self.config, self.totals, self.packing)
        expected = [0] * self.config.n_classes
        for cls, bw in self.lsps.values():
            expected[cls] += bw
        if expected != self.totals:
            out.append(f"registry sums {expected} differ from totals {self.totals}")
        return out


def new_link(cfg: BamConfig) -> Link:
    return Link(cfg)
