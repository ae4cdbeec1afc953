import random

import pytest
from hypothesis import given, settings, strategies as st

from gbam.allocator import (
    ClassOutOfRange,
    Decision,
    DuplicateLspId,
    Link,
    LspRequest,
    UnknownLspId,
    admissible,
    canonical_packing,
    feasible,
    headroom,
    state_violations,
)
from gbam.model import (
    alloctc_config,
    mam_config,
    rdm_config,
    static_max_allocation,
    validate_config,
)

from bruteforce import max_admissible, nearest_lender_greedy, packing_exists
from conftest import REFERENCE_BCS, REFERENCE_CAPACITY


def fill(link, cls, amount, start_id=1000):
    """Admit ``amount`` kbps on ``cls`` as one LSP; returns its id."""
    lid = start_id + len(link.lsps)
    assert link.admit(LspRequest(lid, cls, amount)).admitted
    return lid


# -- examples --------------------------------------------------------------------

def test_new_link(reference_configs):
    link = Link(reference_configs["rdm"])
    snap = link.snapshot()
    assert snap.totals == (0, 0, 0)
    assert snap.free == 622000
    assert Link(reference_configs["mam"]).snapshot().dynamic_bounds == (248800, 217700, 155500)
    assert Link(reference_configs["alloctc"]).snapshot().dynamic_bounds == (622000, 622000, 622000)


def test_feasible_alloctc_single_borrower():
    cfg = alloctc_config([10, 10, 10], 30)
    result = feasible(cfg, [30, 0, 0])
    assert result.feasible
    assert result.packing.own == (10, 0, 0)
    assert result.packing.lent[0] == (0, 10, 10)
    assert packing_exists([10, 10, 10], cfg.htl_caps, cfg.lth_caps, [30, 0, 0])


def test_mam_never_lends():
    cfg = mam_config(REFERENCE_BCS, REFERENCE_CAPACITY)
    assert not feasible(cfg, [248801, 0, 0])
    assert not feasible(cfg, [0, 0, 155501])
    assert feasible(cfg, REFERENCE_BCS)


def test_overloaded_pair_is_infeasible():
    # total demand 40 exceeds the 30 kbps of configured BCs; brute force agrees
    bcs, htl, lth = [10, 10, 10], [0, 10, 10], [10, 10, 0]
    cfg = validate_config(30, list(zip(bcs, htl, lth)))
    assert not feasible(cfg, [20, 0, 20])
    assert not admissible(cfg, [20, 0, 20])
    assert not packing_exists(bcs, htl, lth, [20, 0, 20])


def test_nearest_lender_greedy_is_not_enough():
    # class 1 must leave class 0's upward pool to class 3, whose only reachable lender it is
    bcs, htl, lth, totals = [7, 8, 7, 4], [0, 8, 6, 3], [6, 1, 0, 0], [0, 16, 0, 8]
    cfg = validate_config(26, list(zip(bcs, htl, lth)))
    assert packing_exists(bcs, htl, lth, totals)
    assert not nearest_lender_greedy(bcs, htl, lth, totals)
    result = feasible(cfg, totals)
    assert result.feasible
    assert state_violations(cfg, totals, result.packing) == []
    assert result.packing.lent[3][0] == 4


def test_admit_examples(reference_configs):
    mam = Link(reference_configs["mam"])
    assert mam.admit(LspRequest(1, 0, 248800)) == Decision(True)
    assert mam.admit(LspRequest(2, 0, 1)) == Decision(False, 1)

    assert Link(reference_configs["rdm"]).admit(LspRequest(1, 0, 622000)).admitted
    assert Link(reference_configs["rdm"]).admit(LspRequest(1, 2, 155501)) == Decision(False, 1)
    assert Link(reference_configs["alloctc"]).admit(LspRequest(1, 2, 622000)).admitted


def test_blocked_admit_leaves_state_untouched(reference_configs):
    link = Link(reference_configs["rdm"])
    fill(link, 0, 500000)
    before = link.snapshot()
    assert link.admit(LspRequest(7, 1, 200000)).blocked
    assert link.snapshot() == before
    assert 7 not in link.lsps


def test_admit_errors(reference_configs):
    link = Link(reference_configs["mam"])
    link.admit(LspRequest(1, 0, 10))
    with pytest.raises(DuplicateLspId):
        link.admit(LspRequest(1, 0, 10))
    with pytest.raises(ClassOutOfRange):
        link.admit(LspRequest(2, 3, 10))


def test_zero_bandwidth_request(reference_configs):
    link = Link(reference_configs["mam"])
    fill(link, 0, 248800)
    assert link.admit(LspRequest(5, 0, 0)).admitted
    assert link.totals == [248800, 0, 0]
    assert link.release(5).bandwidth == 0


def test_release_round_trip(reference_configs):
    link = Link(reference_configs["alloctc"])
    empty = link.snapshot()
    link.admit(LspRequest(1, 0, 5000))
    link.release(1)
    assert link.snapshot() == empty
    with pytest.raises(UnknownLspId):
        link.release(99)
    assert link.snapshot() == empty


def test_release_rehomes_borrowed_load(reference_configs):
    link = Link(reference_configs["rdm"])
    fill(link, 1, 217700)
    own_lsps = [fill(link, 0, 50000) for _ in range(4)] + [fill(link, 0, 48800)]
    fill(link, 0, 50000)
    snap = link.snapshot()
    assert snap.lent[0][2] == 50000 and snap.own[0] == 248800

    link.release(own_lsps[0])
    snap = link.snapshot()
    assert snap.lent[0][2] == 0
    assert snap.own[0] == 248800
    assert snap.totals[0] == 248800
    assert feasible(link.config, snap.totals).feasible


def test_snapshot_examples(reference_configs):
    link = Link(reference_configs["rdm"])
    fill(link, 0, 373200)
    snap = link.snapshot()
    assert snap.lent[0][1] == 124400
    assert snap.own[0] == 248800
    assert snap.htl_available[1] == 93300
    assert sum(snap.totals) + snap.free == REFERENCE_CAPACITY


def test_headroom_matches_bound_on_empty_link(reference_configs):
    for cfg in reference_configs.values():
        for i in range(3):
            assert headroom(cfg, [0, 0, 0], i) == min(static_max_allocation(cfg, i), cfg.capacity)


def test_lent_bandwidth_is_not_reclaimed():
    # class 1 lends 6 of its 10 downward; it can take back only the 4 still free
    cfg = validate_config(20, [(10, 0, 0), (10, 10, 0)])
    link = Link(cfg)
    fill(link, 0, 16)
    assert link.headroom(1) == 4
    assert link.admit(LspRequest(1, 1, 5)) == Decision(False, 1)


# -- properties against brute force -------------------------------------------------

@st.composite
def small_instances(draw, max_classes=4, max_capacity=20):
    n = draw(st.integers(1, max_classes))
    capacity = draw(st.integers(0, max_capacity))
    cuts = sorted(draw(st.lists(st.integers(0, capacity), min_size=n - 1, max_size=n - 1)))
    points = [0] + cuts + [capacity]
    bcs = [points[k + 1] - points[k] for k in range(n)]
    htl = [draw(st.integers(0, bc)) for bc in bcs]
    lth = [draw(st.integers(0, bc)) for bc in bcs]
    totals = [draw(st.integers(0, min(capacity, 2 * bc + 2))) for bc in bcs]
    return capacity, bcs, htl, lth, totals


@settings(max_examples=400, deadline=None)
@given(small_instances())
def test_feasible_matches_enumeration(inst):
    capacity, bcs, htl, lth, totals = inst
    cfg = validate_config(capacity, list(zip(bcs, htl, lth)))
    expected = packing_exists(bcs, htl, lth, totals)
    result = feasible(cfg, totals)
    assert result.feasible == expected
    assert admissible(cfg, totals) == expected
    if expected:
        assert state_violations(cfg, totals, result.packing) == []


@settings(max_examples=200, deadline=None)
@given(small_instances(max_classes=3, max_capacity=12), st.data())
def test_headroom_matches_enumeration(inst, data):
    capacity, bcs, htl, lth, totals = inst
    cfg = validate_config(capacity, list(zip(bcs, htl, lth)))
    if not packing_exists(bcs, htl, lth, totals):
        return
    cls = data.draw(st.integers(0, len(bcs) - 1))
    assert headroom(cfg, totals, cls) == max_admissible(bcs, htl, lth, totals, cls, capacity + 1)


@settings(max_examples=200, deadline=None)
@given(small_instances())
def test_packing_is_deterministic(inst):
    capacity, bcs, htl, lth, totals = inst
    cfg = validate_config(capacity, list(zip(bcs, htl, lth)))
    if not admissible(cfg, totals):
        return
    assert canonical_packing(cfg, totals) == canonical_packing(cfg, list(totals))


def _random_walk(cfg, rng, steps):
    link = Link(cfg)
    held, next_id = [], 0
    for _ in range(steps):
        if held and rng.random() < 0.4:
            link.release(held.pop(rng.randrange(len(held))))
        else:
            cls = rng.randrange(cfg.n_classes)
            bw = rng.randint(0, max(1, cfg.classes[cls].bc * 6 // 5))
            before = list(link.totals)
            d = link.admit(LspRequest(next_id, cls, bw))
            room = headroom(cfg, before, cls)
            assert d.admitted == (bw <= room)
            if d.admitted:
                held.append(next_id)
            else:
                assert d.shortfall == bw - room
                assert link.totals == before
            next_id += 1
        yield link


@pytest.mark.parametrize("seed", range(5))
def test_link_invariants_random_walk(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    bcs = [rng.randint(50, 200) for _ in range(n)]
    rows = [(bc, rng.randint(0, bc), rng.randint(0, bc)) for bc in bcs]
    cfg = validate_config(sum(bcs) + rng.randint(0, 50), rows)
    for link in _random_walk(cfg, rng, 600):
        assert link.violations() == []
        snap = link.snapshot()
        assert sum(snap.totals) + snap.free == cfg.capacity
        for i in range(n):
            assert snap.totals[i] == snap.own[i] + sum(snap.lent[i])


def test_mam_packing_stays_empty():
    cfg = mam_config([100, 80, 60], 240)
    rng = random.Random(3)
    for link in _random_walk(cfg, rng, 300):
        assert all(x == 0 for row in link.snapshot().lent for x in row)


def test_decisions_depend_only_on_totals():
    cfg = validate_config(300, [(100, 20, 70), (120, 90, 40), (80, 80, 0)])
    rng = random.Random(11)
    for link in _random_walk(cfg, rng, 300):
        fresh = Link(cfg)
        for cls, total in enumerate(link.totals):
            if total:
                assert fresh.admit(LspRequest(cls, cls, total)).admitted
        for cls in range(3):
            assert fresh.headroom(cls) == link.headroom(cls)
        assert fresh.snapshot() == link.snapshot()


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 200), min_size=2, max_size=5), st.data())
def test_factory_admissibility_is_nested(bcs, data):
    cap = sum(bcs)
    cfgs = [f(bcs, cap) for f in (mam_config, rdm_config, alloctc_config)]
    totals = [data.draw(st.integers(0, bc)) for bc in bcs]
    cls = data.draw(st.integers(0, len(bcs) - 1))
    b = data.draw(st.integers(0, cap))
    after = list(totals)
    after[cls] += b
    verdicts = [admissible(c, after) for c in cfgs]
    assert verdicts[0] <= verdicts[1] <= verdicts[2]
