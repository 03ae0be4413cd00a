import pytest
from hypothesis import given, settings, strategies as st

from histq.compat import HistoryMutationIllegal, check_monotone
from histq.history import (ConfigError, DoubleRemoveError, ElementTag, History,
                           OrderPolicy, compare_order, is_sorted, new_history,
                           new_tag, record_insert, record_remove)

from helpers import node, tag


@pytest.mark.parametrize("policy", list(OrderPolicy))
def test_new_history_is_empty(policy):
    h = new_history(policy)
    assert h.nodes == () and h.counter == 0 and h.policy is policy


def test_compare_order_fifo_is_difference():
    assert compare_order(node(1, order_num=3), node(2, order_num=7), OrderPolicy.FIFO) == -4


@pytest.mark.parametrize("policy", list(OrderPolicy))
def test_compare_order_reflexive(policy):
    n = node(1, order_num=5, key=2)
    assert compare_order(n, n, policy) == 0


def test_compare_order_unordered_always_zero():
    assert compare_order(node(1, order_num=0, key=0), node(2, order_num=9, key=9),
                         "unordered") == 0


def test_compare_order_priority_smaller_key_first():
    assert compare_order(node(1, key=2), node(2, key=1), OrderPolicy.PRIORITY) > 0


def test_compare_order_priority_needs_key():
    with pytest.raises(ConfigError):
        compare_order(node(1), node(2, key=1), OrderPolicy.PRIORITY)


def test_policy_parse_rejects_unknown():
    with pytest.raises(ConfigError):
        OrderPolicy.parse("lifo")


def test_fifo_inserts_take_counter_values():
    h = History(OrderPolicy.FIFO)
    tags = [tag(1), tag(2), tag(3)]
    for t in tags:
        record_insert(h, t)
    assert [(n.item.uid, n.order_num) for n in h] == [(1, 0), (2, 1), (3, 2)]
    assert h.counter == 3


def _greatest_sorted_position(keys, new_key):
    """Brute force: largest insertion index keeping the keys nondecreasing."""
    best = None
    for p in range(len(keys) + 1):
        cand = keys[:p] + [new_key] + keys[p:]
        if all(a <= b for a, b in zip(cand, cand[1:])):
            best = p
    return best


def test_priority_insert_position_matches_exhaustive_search():
    h = History(OrderPolicy.PRIORITY)
    record_insert(h, tag(1, key=1))
    record_insert(h, tag(2, key=5))
    n = record_insert(h, tag(3, key=3))
    assert _greatest_sorted_position([1, 5], 3) == 1
    assert h.nodes.index(n) == 1


@given(st.lists(st.integers(0, 5), max_size=30))
def test_priority_insert_position_property(keys):
    h = History(OrderPolicy.PRIORITY)
    for i, k in enumerate(keys):
        before = [n.item.priority_key for n in h]
        n = record_insert(h, tag(i + 1, key=k))
        assert h.nodes.index(n) == _greatest_sorted_position(before, k)
        assert n.order_num == 0


def test_unordered_insert_appends():
    h = History(OrderPolicy.UNORDERED)
    for i in range(1, 5):
        record_insert(h, tag(i))
    assert [n.item.uid for n in h] == [1, 2, 3, 4]
    assert all(n.order_num == 0 for n in h)


def test_record_remove_flips_flag_only():
    h = History()
    n = record_insert(h, tag(1))
    record_remove(h, n)
    assert [(x.item.uid, x.exist, x.order_num) for x in h] == [(1, False, 0)]
    assert n.item == tag(1)
    assert len(h) == 1 and h.find(1) is n


def test_double_remove_is_an_error():
    h = History()
    n = record_insert(h, tag(1))
    record_remove(h, n)
    with pytest.raises(DoubleRemoveError):
        record_remove(h, n)


def test_node_fields_are_read_only():
    n = node(1)
    with pytest.raises(AttributeError):
        n.item = tag(2)
    with pytest.raises(AttributeError):
        n.exist = False


def test_priority_tag_required():
    with pytest.raises(ConfigError):
        record_insert(History(OrderPolicy.PRIORITY), tag(1))


def test_uids_strictly_increase():
    a, b = new_tag("x"), new_tag("x")
    assert b.uid > a.uid and a.payload == b.payload


def test_lead_is_first_live_node():
    h = History(OrderPolicy.PRIORITY)
    a = record_insert(h, tag(1, key=4))
    b = record_insert(h, tag(2, key=2))
    assert h.lead() is b
    record_remove(h, b)
    assert h.lead() is a
    record_remove(h, a)
    assert h.lead() is None


def test_record_round_trip_field_names():
    h = History(OrderPolicy.PRIORITY)
    record_insert(h, ElementTag(7, "p", 3))
    n = record_insert(h, ElementTag(8, {"a": 1}, 1))
    record_remove(h, n)
    recs = h.to_records()
    assert recs == [
        {"uid": 8, "payload": {"a": 1}, "key": 1, "exist": False, "order_num": 0},
        {"uid": 7, "payload": "p", "key": 3, "exist": True, "order_num": 0},
    ]
    back = History.from_records(recs, "priority")
    assert back.to_records() == recs
    assert back.live_count == 1


def test_fifo_records_omit_key():
    h = History()
    record_insert(h, ElementTag(1, "x"))
    assert list(h.to_records()[0]) == ["uid", "payload", "exist", "order_num"]


ops = st.lists(st.tuples(st.booleans(), st.integers(0, 3)), max_size=40)


@settings(max_examples=200)
@given(st.sampled_from(list(OrderPolicy)), ops)
def test_history_invariants_under_random_ops(policy, script):
    h = History(policy)
    uid = 0
    seen = []
    for is_insert, k in script:
        before = h.view()
        if is_insert or not h.live_count:
            uid += 1
            record_insert(h, tag(uid, key=k if policy is OrderPolicy.PRIORITY else None))
            seen.append(uid)
        else:
            live = h.live_nodes()
            record_remove(h, live[k % len(live)])
        check_monotone(before, h.view())
        assert is_sorted(h.nodes, policy)
        assert [n for n in h if n.exist] == list(h.live_nodes())
    if policy is OrderPolicy.FIFO:
        assert [n.order_num for n in h] == list(range(len(h)))
    if policy is OrderPolicy.PRIORITY:
        # insert stability: equal keys keep arrival order
        for a, b in zip(h.nodes, h.nodes[1:]):
            if a.item.priority_key == b.item.priority_key:
                assert a.item.uid < b.item.uid
    assert sorted(n.item.uid for n in h) == seen


def test_monotone_detects_illegal_changes():
    a, b = node(1), node(2)
    before = History.from_records([{"uid": 1, "exist": False, "order_num": 0}]).view()
    after = History.from_records([{"uid": 1, "exist": True, "order_num": 0}]).view()
    with pytest.raises(HistoryMutationIllegal):
        check_monotone(before, after)
    with pytest.raises(HistoryMutationIllegal):
        check_monotone([a, b], [b])
    with pytest.raises(HistoryMutationIllegal):
        check_monotone([a, b], [b, a])
