"""Queue/history compatibility and the history-based method contracts.

``compatible`` is the reference form: a direct recursive search. It is
exponential in the worst case and meant for short histories.
``compatible_fast`` gives the same answer in linear time. It exploits the
fact that "equally ordered" is an equivalence. A queue head may only
match a live node from the leading run of equally ordered live nodes, and
nodes inside a run that carry the same uid are interchangeable.
``oracle_compatible`` enumerates permutations and exists for tests.

Nodes whose ``exist`` flag is false are ignored when matching. Passing
``strict_empty=True`` keeps the literal base case "queue and history both
empty". Under that reading, any history that holds a removed node is
incompatible with every queue.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .history import (ElementTag, HistoryError, OrderPolicy, compare_order,
                      history_to_records, order_class)

ORACLE_MAX_LEN = 12


class ViolationKind(str, enum.Enum):
    INCOMPATIBLE_SNAPSHOT = "IncompatibleSnapshot"
    PUT_POST_FAILED = "PutPostFailed"
    TAKE_POST_FAILED = "TakePostFailed"
    TAKE_OLD_EXIST_FAILED = "TakeOldExistFailed"
    DOUBLE_REMOVE = "DoubleRemove"
    HISTORY_MUTATION_ILLEGAL = "HistoryMutationIllegal"
    CAPACITY_EXCEEDED = "CapacityExceeded"
    CONSERVATION_FAILED = "ConservationFailed"
    MALFORMED_TRACE = "MalformedTrace"
    UNEXPECTED_ERROR = "UnexpectedError"
    WATCHDOG_TIMEOUT = "WatchdogTimeout"


@dataclass
class Violation:
    kind: ViolationKind
    evidence: dict = field(default_factory=dict)
    detail: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "detail": self.detail,
                "evidence": self.evidence}


class HistoryMutationIllegal(HistoryError):
    """Two observations of a history are not related by legal growth."""


class OracleBoundError(ValueError):
    pass


@dataclass(frozen=True)
class QueueSnapshot:
    elements: tuple = ()

    def __post_init__(self):
        uids = self.uids
        if len(set(uids)) != len(uids):
            raise ValueError("duplicate uid in queue snapshot")

    @property
    def uids(self) -> tuple:
        return tuple(_uid(e) for e in self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _uid(x) -> int:
    return x.uid if isinstance(x, ElementTag) else int(x)


def _queue_uids(queue) -> list:
    if isinstance(queue, QueueSnapshot):
        return list(queue.uids)
    return [_uid(x) for x in queue]


def _nodes(history) -> Sequence:
    nodes = getattr(history, "nodes", history)
    return nodes if isinstance(nodes, (list, tuple)) else list(nodes)


def compatible(queue, history, policy, strict_empty: bool = False) -> bool:
    """Reference recursive predicate."""
    policy = OrderPolicy.parse(policy)
    if strict_empty and getattr(history, "complete", True) is False:
        raise ValueError("strict_empty needs a complete history view")
    return _compat_rec(_queue_uids(queue), list(_nodes(history)), policy,
                       strict_empty)


def _compat_rec(queue: list, hist: list, policy, strict_empty: bool) -> bool:
    if not queue:
        if strict_empty:
            return not hist
        return not any(n.exist for n in hist)
    head = queue[0]
    for idx, cand in enumerate(hist):
        if cand.item.uid != head or not cand.exist:
            continue
        if all(not hist[i].exist or compare_order(hist[i], cand, policy) == 0
               for i in range(idx)):
            if _compat_rec(queue[1:], hist[:idx] + hist[idx + 1:], policy,
                           strict_empty):
                return True
    return False


def compatible_fast(queue, history, policy, strict_empty: bool = False) -> bool:
    return explain_compatible(queue, history, policy, strict_empty)[0]


def explain_compatible(queue, history, policy, strict_empty: bool = False):
    """Linear-time predicate returning ``(ok, info)``.

    On success ``info`` is ``{"witness": [...]}``: the history index
    matched by each queue position, lowest index first. On failure it
    describes the first queue position that could not be matched. Both
    inputs are consumed lazily, so an early mismatch costs O(1).
    """
    policy = OrderPolicy.parse(policy)
    nodes = _nodes(history)
    if strict_empty:
        if getattr(history, "complete", True) is False:
            raise ValueError("strict_empty needs a complete history view")
        dead = [i for i, n in enumerate(nodes) if not n.exist]
        if dead:
            return False, {"reason": "removed node present under strict base case",
                           "queue_position": 0, "unmatched": dead}
    elements = queue.elements if isinstance(queue, QueueSnapshot) else queue
    live = ((i, n) for i, n in enumerate(nodes) if n.exist)
    pending = next(live, None)  # first live node not yet loaded into a block
    witness: list[int] = []
    block: dict[int, deque] = {}
    block_size = 0
    k = -1
    for k, x in enumerate(elements):
        uid = _uid(x)
        if block_size == 0 and pending is not None:
            cls = order_class(pending[1], policy)
            while pending is not None and order_class(pending[1], policy) == cls:
                block.setdefault(pending[1].item.uid, deque()).append(pending[0])
                block_size += 1
                pending = next(live, None)
        cands = block.get(uid)
        if not cands:
            eligible = sorted(i for d in block.values() for i in d)
            return False, {
                "reason": ("no live node left" if not eligible
                           else "queue element does not match an eligible live node"),
                "queue_position": k,
                "uid": uid,
                "eligible": eligible,
                "witness": witness,
            }
        witness.append(cands.popleft())
        if not cands:
            del block[uid]
        block_size -= 1
    if block_size or pending is not None:
        rest = [i for d in block.values() for i in d]
        if pending is not None:
            rest.append(pending[0])
            rest.extend(i for i, _ in live)
        return False, {"reason": "live nodes left unmatched",
                       "queue_position": k + 1, "unmatched": sorted(rest),
                       "witness": witness}
    return True, {"witness": witness}


def oracle_compatible(queue, history, policy) -> bool:
    """Brute force over every ordering of the live nodes."""
    policy = OrderPolicy.parse(policy)
    nodes = list(_nodes(history))
    if len(nodes) > ORACLE_MAX_LEN:
        raise OracleBoundError(
            f"history of length {len(nodes)} exceeds oracle bound {ORACLE_MAX_LEN}")
    uids = _queue_uids(queue)
    live = [i for i, n in enumerate(nodes) if n.exist]
    if len(live) != len(uids):
        return False
    for perm in itertools.permutations(live):
        if any(nodes[p].item.uid != u for p, u in zip(perm, uids)):
            continue
        if all(j > p or compare_order(nodes[j], nodes[p], policy) == 0
               for k, p in enumerate(perm) for j in perm[k + 1:]):
            return True
    return False


def check_put_post(history_after, e) -> bool:
    """Some node of the history carries ``e``; its flag is irrelevant."""
    uid = _uid(e)
    if hasattr(history_after, "has"):
        return history_after.has(uid)
    if getattr(history_after, "complete", True) is False:
        raise ValueError("put postcondition needs a complete history view")
    return any(n.item.uid == uid for n in _nodes(history_after))


def check_monotone(history_before, history_after) -> None:
    """Raise HistoryMutationIllegal unless ``after`` legally extends ``before``."""
    before, after = _nodes(history_before), _nodes(history_after)
    for h in (history_before, history_after):
        if getattr(h, "complete", True) is False:
            raise ValueError("monotonicity check needs complete history views")
    pos = {n.item.uid: i for i, n in enumerate(after)}
    last = -1
    for b in before:
        i = pos.get(b.item.uid)
        if i is None:
            raise HistoryMutationIllegal(f"node for uid {b.item.uid} disappeared")
        a = after[i]
        if a.item != b.item or a.order_num != b.order_num:
            raise HistoryMutationIllegal(f"node for uid {b.item.uid} was rewritten")
        if a.exist and not b.exist:
            raise HistoryMutationIllegal(f"node for uid {b.item.uid} came back to life")
        if i < last:
            raise HistoryMutationIllegal(f"node for uid {b.item.uid} was reordered")
        last = i


def diagnose_take(history_before, history_after, r) -> Optional[ViolationKind]:
    """Which part of the take postcondition fails, if any."""
    check_monotone(history_before, history_after)
    uid = _uid(r)
    if not any(n.item.uid == uid and not n.exist for n in _nodes(history_after)):
        return ViolationKind.TAKE_POST_FAILED
    for n in _nodes(history_before):
        if n.item.uid == uid and not n.exist:
            return ViolationKind.TAKE_OLD_EXIST_FAILED
    return None


def check_take_post(history_before, history_after, r) -> bool:
    return diagnose_take(history_before, history_after, r) is None


def diagnose_take_receipt(receipt, policy) -> Optional[tuple]:
    """Check a dequeue against the node it designated.

    Returns ``(kind, detail)`` for the first failed clause, or None.
    Works on the cheap watermarks recorded inside the critical section:
    the designated node, its flag and membership before removal, and the
    leading live node at that moment.
    """
    policy = OrderPolicy.parse(policy)
    node = receipt.node
    uid = receipt.tag.uid
    if node is None:
        return (ViolationKind.TAKE_POST_FAILED,
                "dequeued element has no matching history node")
    if node.item.uid != uid:
        return (ViolationKind.TAKE_POST_FAILED,
                "designated node holds a different element")
    if node.exist:
        return (ViolationKind.TAKE_POST_FAILED,
                "designated node still flagged as present")
    if receipt.exist_before is False:
        return (ViolationKind.TAKE_OLD_EXIST_FAILED,
                "designated node was already removed before the take")
    if not receipt.in_history_before:
        return (ViolationKind.INCOMPATIBLE_SNAPSHOT,
                "dequeued element was not in the history at removal time")
    lead = receipt.lead_before
    if lead is not None and compare_order(lead, node, policy) != 0:
        return (ViolationKind.INCOMPATIBLE_SNAPSHOT,
                "dequeued element is ordered after a live history node")
    return None


def failure_evidence(queue, history, info: dict) -> dict:
    """Minimal failing prefix for a failed compatibility check."""
    uids = _queue_uids(queue)
    nodes = _nodes(history)
    k = info.get("queue_position", len(uids))
    idx = info.get("eligible") or info.get("unmatched") or info.get("witness") or []
    upto = (max(idx) + 1) if idx else len(nodes)
    return {
        "reason": info.get("reason"),
        "queue_position": k,
        "queue_prefix": uids[:k + 1],
        "history_prefix": history_to_records(nodes[:upto]),
        "history_complete": getattr(history, "complete", True),
    }
