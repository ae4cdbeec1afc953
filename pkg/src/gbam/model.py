"""G-BAM parameter model.

All bandwidth values are integer kbps.  Class index 0 is best effort and
higher indices carry higher priority.  Every function here is pure.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

MAX_CLASSES = 8


class Direction(str, Enum):
    HTL = "htl"
    LTH = "lth"


# -- configuration violations ------------------------------------------------

@dataclass(frozen=True)
class ConfigError:
    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class SumExceedsCapacity(ConfigError):
    total: int
    capacity: int

    def describe(self) -> str:
        return f"sum of bandwidth constraints {self.total} kbps exceeds link capacity {self.capacity} kbps"


@dataclass(frozen=True)
class CapExceedsBc(ConfigError):
    cls: int
    which: Direction
    cap: int
    bc: int

    def describe(self) -> str:
        return f"class {self.cls}: {self.which.value} cap {self.cap} kbps exceeds bc {self.bc} kbps"


@dataclass(frozen=True)
class PrivateExceedsBc(ConfigError):
    cls: int
    private: int
    bc: int

    def describe(self) -> str:
        return f"class {self.cls}: private {self.private} kbps exceeds bc {self.bc} kbps"


@dataclass(frozen=True)
class EmptyClassList(ConfigError):
    def describe(self) -> str:
        return "at least one traffic class is required"


@dataclass(frozen=True)
class TooManyClasses(ConfigError):
    count: int

    def describe(self) -> str:
        return f"{self.count} classes given, at most {MAX_CLASSES} allowed"


@dataclass(frozen=True)
class NegativeBandwidth(ConfigError):
    field: str
    value: int

    def describe(self) -> str:
        return f"{self.field} must be a non-negative integer kbps value, got {self.value!r}"


class InvalidConfig(ValueError):
    """Raised with the complete list of violations found in a raw config."""

    def __init__(self, errors: Sequence[ConfigError]):
        self.errors = list(errors)
        super().__init__("; ".join(e.describe() for e in self.errors))


# -- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class ClassConfig:
    bc: int
    htl_cap: int = 0
    lth_cap: int = 0

    @property
    def private(self) -> int:
        return self.bc - max(self.htl_cap, self.lth_cap)

    def cap(self, direction: Direction) -> int:
        return self.htl_cap if direction is Direction.HTL else self.lth_cap


@dataclass(frozen=True)
class BamConfig:
    """Link capacity plus per-class constraint and loan caps.

    Build instances through :func:`validate_config` or one of the factories;
    the constructor itself does not check anything.
    """

    capacity: int
    classes: tuple[ClassConfig, ...]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def bcs(self) -> tuple[int, ...]:
        return tuple(c.bc for c in self.classes)

    @property
    def htl_caps(self) -> tuple[int, ...]:
        return tuple(c.htl_cap for c in self.classes)

    @property
    def lth_caps(self) -> tuple[int, ...]:
        return tuple(c.lth_cap for c in self.classes)

    @property
    def privates(self) -> tuple[int, ...]:
        return tuple(c.private for c in self.classes)

    def as_raw(self) -> tuple[int, list[tuple[int, int, int]]]:
        return self.capacity, [(c.bc, c.htl_cap, c.lth_cap) for c in self.classes]


def _is_kbps(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def validate_config(capacity: int, classes: Iterable[Sequence[int]]) -> BamConfig:
    """Check BC sums and loan caps on raw ``(bc, htl_cap, lth_cap)`` triples.

    Every violation is collected before raising :class:`InvalidConfig`.
    """
    rows = [tuple(row) for row in classes]
    errors: list[ConfigError] = []

    if not _is_kbps(capacity):
        errors.append(NegativeBandwidth("capacity", capacity))
    if not rows:
        errors.append(EmptyClassList())
    elif len(rows) > MAX_CLASSES:
        errors.append(TooManyClasses(len(rows)))

    well_formed = True
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise ValueError(f"class {i}: expected (bc, htl_cap, lth_cap), got {row!r}")
        for name, value in zip(("bc", "htl_cap", "lth_cap"), row):
            if not _is_kbps(value):
                errors.append(NegativeBandwidth(f"class {i} {name}", value))
                well_formed = False

    if well_formed:
        for i, (bc, htl, lth) in enumerate(rows):
            if htl > bc:
                errors.append(CapExceedsBc(i, Direction.HTL, htl, bc))
            if lth > bc:
                errors.append(CapExceedsBc(i, Direction.LTH, lth, bc))
        total = sum(row[0] for row in rows)
        if _is_kbps(capacity) and total > capacity:
            errors.append(SumExceedsCapacity(total, capacity))

    if errors:
        raise InvalidConfig(errors)
    return BamConfig(capacity, tuple(ClassConfig(*row) for row in rows))


def _check_index(cfg: BamConfig, i: int) -> None:
    if not 0 <= i < cfg.n_classes:
        raise IndexError(f"class index {i} out of range for {cfg.n_classes} classes")


# -- derived quantities --------------------------------------------------------

def private_bandwidth(cfg: BamConfig, i: int) -> int:
    _check_index(cfg, i)
    return cfg.classes[i].private


def static_max_allocation(cfg: BamConfig, i: int) -> int:
    """Design-time upper bound on the total allocated to class ``i``.

    Not clamped to capacity; see :func:`effective_max_allocation`.
    """
    _check_index(cfg, i)
    classes = cfg.classes
    return (classes[i].bc
            + sum(c.htl_cap for c in classes[i + 1:])
            + sum(c.lth_cap for c in classes[:i]))


def effective_max_allocation(cfg: BamConfig, i: int) -> int:
    return min(static_max_allocation(cfg, i), cfg.capacity)


def loanable(cfg: BamConfig, i: int, own_usage: int, already_lent: int,
             direction: Direction, *, lent_in_direction: int | None = None) -> int:
    """Bandwidth class ``i`` can still lend in ``direction``.

    ``own_usage`` is the part of the class's load served from its own BC and
    ``already_lent`` the total it currently lends in both directions.  When
    ``lent_in_direction`` is given the direction cap is charged only with that
    amount while the free-BC pool is charged with ``already_lent``.
    """
    _check_index(cfg, i)
    cls = cfg.classes[i]
    if own_usage > cls.bc:
        raise ValueError(f"class {i}: own usage {own_usage} exceeds bc {cls.bc}")
    if own_usage < 0 or already_lent < 0:
        raise ValueError("usage and lent amounts must be non-negative")
    pool = cls.bc - max(cls.private, own_usage)
    cap = cls.cap(direction)
    if lent_in_direction is None:
        return max(0, min(cap, pool) - already_lent)
    return max(0, min(cap - lent_in_direction, pool - already_lent))


def dynamic_bound(cfg: BamConfig, own_usage: Sequence[int],
                  lent: Sequence[Sequence[int]], i: int) -> int:
    """Run-time bound on the load of class ``i`` given the current packing.

    ``lent[b][l]`` is the amount class ``b`` borrows from class ``l``.  Loans
    already held by ``i`` itself are returned to the lender pools before the
    residuals are evaluated, so the current load of ``i`` always fits.
    """
    _check_index(cfg, i)
    n = cfg.n_classes
    bound = cfg.classes[i].bc
    for j in range(n):
        if j == i:
            continue
        direction = Direction.HTL if j > i else Direction.LTH
        to_others = sum(lent[b][j] for b in range(n) if b != i)
        same_dir = sum(lent[b][j] for b in range(n)
                       if b != i and ((b < j) == (direction is Direction.HTL)) and b != j)
        bound += loanable(cfg, j, own_usage[j], to_others, direction,
                          lent_in_direction=same_dir)
    return bound


# -- factories -----------------------------------------------------------------

def mam_config(bcs: Sequence[int], capacity: int) -> BamConfig:
    """No loans at all: every BC is fully private."""
    return validate_config(capacity, [(bc, 0, 0) for bc in bcs])


def rdm_config(bcs: Sequence[int], capacity: int) -> BamConfig:
    """Every class above 0 lends its whole BC downward."""
    return validate_config(capacity, [(bc, bc if i > 0 else 0, 0) for i, bc in enumerate(bcs)])


def alloctc_config(bcs: Sequence[int], capacity: int) -> BamConfig:
    last = len(bcs) - 1
    return validate_config(capacity, [
        (bc, bc if i > 0 else 0, bc if i < last else 0) for i, bc in enumerate(bcs)
    ])


def grdm_config(bcs: Sequence[int], privates: Sequence[int], capacity: int) -> BamConfig:
    """RDM with a configurable private share per class.

    Class 0 has nobody below it, so its whole BC stays private regardless of
    ``privates[0]``.
    """
    if len(privates) != len(bcs):
        raise ValueError("bcs and privates must have the same length")
    errors: list[ConfigError] = [
        PrivateExceedsBc(i, p, bc) for i, (bc, p) in enumerate(zip(bcs, privates))
        if _is_kbps(p) and _is_kbps(bc) and p > bc
    ]
    errors += [NegativeBandwidth(f"class {i} private", p)
               for i, p in enumerate(privates) if not _is_kbps(p)]
    if errors:
        raise InvalidConfig(errors)
    return validate_config(capacity, [
        (bc, bc - p if i > 0 else 0, 0) for i, (bc, p) in enumerate(zip(bcs, privates))
    ])


FACTORIES = {
    "mam": mam_config,
    "rdm": rdm_config,
    "alloctc": alloctc_config,
}
