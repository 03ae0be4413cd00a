import random

import pytest
from hypothesis import given, settings, strategies as st

from histq.compat import (OracleBoundError, QueueSnapshot, ViolationKind,
                          check_put_post, check_take_post, compatible,
                          compatible_fast, diagnose_take, explain_compatible,
                          oracle_compatible)
from histq.history import History, OrderPolicy, record_insert, record_remove

from helpers import node, tag

FIFO, PRIO, UNORD = OrderPolicy.FIFO, OrderPolicy.PRIORITY, OrderPolicy.UNORDERED
A, B = 1, 2

# (queue, history, policy, expected under the default reading)
LITERAL_CASES = [
    ([], [], FIFO, True),
    ([], [node(1, exist=False)], FIFO, True),
    ([2], [node(1, False, 0), node(2, True, 1)], FIFO, True),
    ([1], [node(1, False, 0)], FIFO, False),
    ([B, A], [node(A, True, key=5), node(B, True, key=5)], PRIO, True),
    ([B, A], [node(A, True, 0), node(B, True, 1)], FIFO, False),
]


@pytest.mark.parametrize("queue,history,policy,expected", LITERAL_CASES)
def test_literal_cases_all_three_forms(queue, history, policy, expected):
    assert oracle_compatible(queue, history, policy) is expected
    assert compatible(queue, history, policy) is expected
    assert compatible_fast(queue, history, policy) is expected


def test_strict_base_case_rejects_removed_nodes():
    dead = [node(1, exist=False)]
    assert compatible([], dead, FIFO, strict_empty=True) is False
    assert compatible_fast([], dead, FIFO, strict_empty=True) is False
    assert compatible([2], [node(1, False, 0), node(2, True, 1)], FIFO,
                      strict_empty=True) is False
    assert compatible([], [], FIFO, strict_empty=True) is True


def test_strict_needs_complete_view():
    h = History()
    record_insert(h, tag(1))
    with pytest.raises(ValueError):
        compatible([1], h.view(complete=False), FIFO, strict_empty=True)


def test_fast_handles_long_fifo_history():
    h = History(FIFO)
    tags = [tag(i) for i in range(1, 10_001)]
    nodes = [record_insert(h, t) for t in tags]
    for n in nodes[:3000]:
        record_remove(h, n)
    assert compatible_fast(tags[3000:], h, FIFO)
    assert not compatible_fast(tags[3001:] + [tags[3000]], h, FIFO)


def test_witness_and_counterexample():
    hist = [node(1, False, 0), node(2, True, 1), node(3, True, 2)]
    ok, info = explain_compatible([2, 3], hist, FIFO)
    assert ok and info["witness"] == [1, 2]
    ok, info = explain_compatible([3, 2], hist, FIFO)
    assert not ok and info["queue_position"] == 0 and info["eligible"] == [1]
    ok, info = explain_compatible([2], hist, FIFO)
    assert not ok and info["unmatched"] == [2]


def test_oracle_refuses_long_histories():
    with pytest.raises(OracleBoundError):
        oracle_compatible([], [node(i, exist=False) for i in range(13)], FIFO)


def test_oracle_queue_longer_than_live():
    assert oracle_compatible([1, 2], [node(1)], FIFO) is False
    assert oracle_compatible([], [], UNORD) is True


def test_queue_snapshot_rejects_duplicate_uids():
    with pytest.raises(ValueError):
        QueueSnapshot((tag(1), tag(1)))


def test_put_post_ignores_exist_flag():
    assert check_put_post([node(1, exist=True)], tag(1))
    assert check_put_post([node(1, exist=False)], tag(1))
    assert not check_put_post([], tag(1))
    assert not check_put_post(History(), tag(1))


def test_take_post_cases():
    assert check_take_post([node(1, True)], [node(1, False)], tag(1))
    assert check_take_post([], [node(1, False)], tag(1))
    assert diagnose_take([node(1, False)], [node(1, False)], tag(1)) \
        is ViolationKind.TAKE_OLD_EXIST_FAILED
    assert diagnose_take([node(1, True)], [node(1, True)], tag(1)) \
        is ViolationKind.TAKE_POST_FAILED
    assert not check_take_post([], [node(2, False)], tag(1))


def test_take_post_rejects_non_monotone_observations():
    from histq.compat import HistoryMutationIllegal
    with pytest.raises(HistoryMutationIllegal):
        check_take_post([node(1, True), node(2, True)], [node(2, False)], tag(2))


def _random_instance(rng, policy, n_uids, max_len):
    """Sorted history with distinct uids plus a queue biased to its live set."""
    length = rng.randrange(max_len + 1)
    uids = rng.sample(range(1, n_uids + 1), min(length, n_uids))
    hist = []
    order = 0
    for u in uids:
        if policy is FIFO and rng.random() < 0.5:
            order += 1
        key = rng.randrange(3) if policy is PRIO else None
        hist.append(node(u, rng.random() < 0.6, order, key=key))
    if policy is PRIO:
        hist.sort(key=lambda n: n.item.priority_key)
    live = [n.item.uid for n in hist if n.exist]
    # bias queues towards the live content so both verdicts occur
    if rng.random() < 0.7:
        queue = list(live)
        if rng.random() < 0.5:
            rng.shuffle(queue)
    else:
        queue = rng.sample(range(1, n_uids + 1), rng.randrange(4))
    return queue, hist


def test_fast_equals_reference_on_random_larger_instances():
    rng = random.Random(20240611)
    verdicts = set()
    for i in range(10_000):
        policy = (FIFO, PRIO, UNORD)[i % 3]
        queue, hist = _random_instance(rng, policy, 12, 10)
        ref = compatible(queue, hist, policy)
        assert compatible_fast(queue, hist, policy) == ref, (policy, queue, hist)
        verdicts.add(ref)
    assert verdicts == {True, False}


@settings(max_examples=300)
@given(st.permutations(list(range(1, 8))), st.permutations(list(range(1, 8))),
       st.integers(0, 7))
def test_erasure_property_fifo(queue_perm, hist_perm, qlen):
    hist = [node(u, True, i) for i, u in enumerate(hist_perm)]
    queue = list(queue_perm[:qlen]) if qlen < 7 else list(queue_perm)
    expected = queue == [n.item.uid for n in hist]
    assert compatible_fast(queue, hist, FIFO) is expected
    assert compatible(queue, hist, FIFO) is expected


@settings(max_examples=100)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 5)), max_size=40))
def test_put_post_stability_and_removal_permanence(script):
    h = History(FIFO)
    first = tag(10_000)
    n0 = record_insert(h, first)
    before = h.view()
    record_remove(h, n0)
    uid = 0
    for is_insert, k in script:
        if is_insert or not h.live_count:
            uid += 1
            record_insert(h, tag(uid))
        else:
            record_remove(h, h.live_nodes()[k % h.live_count])
        assert check_put_post(h, first)
        assert check_take_post(before, h.view(), first)
        assert not h.find(first.uid).exist


def test_compatible_ignores_dead_nodes_in_compact_view():
    h = History(PRIO)
    tags = [tag(i, key=i % 3) for i in range(1, 9)]
    nodes = [record_insert(h, t) for t in tags]
    for n in nodes[::3]:
        record_remove(h, n)
    live_queue = [n.item for n in h.live_nodes()]
    assert compatible(live_queue, h.view(), PRIO)
    assert compatible(live_queue, h.view(complete=False), PRIO)
    assert compatible_fast(live_queue, h.view(complete=False), PRIO)
