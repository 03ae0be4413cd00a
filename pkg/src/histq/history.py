"""Ghost history for instrumented queues.

A history remembers every element ever inserted into a queue. Nodes are
never deleted; a removal only flips the node's ``exist`` flag. Nodes are
kept sorted under the queue's order policy so the live nodes can be
matched against the queue contents.
"""

from __future__ import annotations

import bisect
import enum
import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Optional, Sequence


class HistoryError(Exception):
    """Instrumentation misuse detected by the history itself."""


class DoubleRemoveError(HistoryError):
    pass


class ConfigError(ValueError):
    """Invalid policy, queue or run configuration."""


class OrderPolicy(str, enum.Enum):
    FIFO = "fifo"
    PRIORITY = "priority"
    UNORDERED = "unordered"

    @classmethod
    def parse(cls, value: "str | OrderPolicy") -> "OrderPolicy":
        if isinstance(value, OrderPolicy):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown order policy {value!r}") from None


_uids = itertools.count(1)


@dataclass(frozen=True)
class ElementTag:
    uid: int
    payload: Any = None
    priority_key: Optional[int] = None


def new_tag(payload: Any = None, priority_key: Optional[int] = None) -> ElementTag:
    """Create a tag with a fresh process-wide uid."""
    return ElementTag(next(_uids), payload, priority_key)


class HistoryNode:
    """One history entry; ``item`` and ``order_num`` are read-only."""

    __slots__ = ("_item", "_order_num", "_exist")

    def __init__(self, item: ElementTag, order_num: int = 0, exist: bool = True):
        self._item = item
        self._order_num = order_num
        self._exist = exist

    @property
    def item(self) -> ElementTag:
        return self._item

    @property
    def order_num(self) -> int:
        return self._order_num

    @property
    def exist(self) -> bool:
        return self._exist

    def freeze(self) -> "NodeView":
        return NodeView(self._item, self._exist, self._order_num)

    def __repr__(self) -> str:
        return (f"HistoryNode(uid={self._item.uid}, exist={self._exist}, "
                f"order_num={self._order_num}, key={self._item.priority_key})")


@dataclass(frozen=True)
class NodeView:
    """Immutable copy of a node at the moment it was observed."""

    item: ElementTag
    exist: bool
    order_num: int

    def freeze(self) -> "NodeView":
        return self


@dataclass(frozen=True)
class HistoryView:
    """Immutable observation of a history.

    When ``complete`` is false the view holds only the live nodes. Dead
    nodes never take part in matching, so such a view is enough for the
    compatibility check and costs O(live) to capture.
    """

    nodes: tuple
    length: int
    policy: OrderPolicy
    complete: bool = True

    def __iter__(self) -> Iterator[NodeView]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, i):
        return self.nodes[i]


def order_class(node, policy: OrderPolicy):
    """Value whose equality decides whether two nodes are equally ordered."""
    if policy is OrderPolicy.FIFO:
        return node.order_num
    if policy is OrderPolicy.PRIORITY:
        key = node.item.priority_key
        if key is None:
            raise ConfigError(f"node for uid {node.item.uid} has no priority key")
        return key
    return 0


def compare_order(a, b, policy: OrderPolicy) -> int:
    """Signed order difference between two nodes; only the sign matters."""
    policy = OrderPolicy.parse(policy)
    if policy is OrderPolicy.UNORDERED:
        return 0
    return order_class(a, policy) - order_class(b, policy)


class History:
    """Append-only, policy-sorted sequence of history nodes.

    Not thread-safe on its own: the owning queue mutates and reads it only
    while holding its lock.
    """

    def __init__(self, policy: "OrderPolicy | str" = OrderPolicy.FIFO):
        self.policy = OrderPolicy.parse(policy)
        self.counter = 0
        self._nodes: list[HistoryNode] = []
        self._keys: list[int] = []  # parallel to _nodes, PRIORITY only
        self._by_uid: dict[int, HistoryNode] = {}
        self._live: list[HistoryNode] = []
        self._live_keys: list[int] = []

    @property
    def nodes(self) -> tuple:
        return tuple(self._nodes)

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[HistoryNode]:
        return iter(tuple(self._nodes))

    def __getitem__(self, i) -> HistoryNode:
        return self._nodes[i]

    @property
    def live_count(self) -> int:
        return len(self._live)

    def has(self, uid: int) -> bool:
        return uid in self._by_uid

    def find(self, uid: int) -> Optional[HistoryNode]:
        return self._by_uid.get(uid)

    def has_node(self, node: HistoryNode) -> bool:
        return self._by_uid.get(node.item.uid) is node

    def lead(self) -> Optional[HistoryNode]:
        """First live node in history order."""
        return self._live[0] if self._live else None

    def live_nodes(self) -> tuple:
        return tuple(self._live)

    def view(self, complete: bool = True, frozen: bool = True) -> HistoryView:
        """Observation of the history; ``frozen=False`` shares the live nodes
        and is only safe when nothing mutates the history meanwhile."""
        src = self._nodes if complete else self._live
        nodes = tuple(n.freeze() for n in src) if frozen else tuple(src)
        return HistoryView(nodes, len(self._nodes), self.policy, complete)

    def _insert(self, node: HistoryNode) -> int:
        if self.policy is OrderPolicy.PRIORITY:
            key = node.item.priority_key
            idx = bisect.bisect_right(self._keys, key)
            self._keys.insert(idx, key)
            self._nodes.insert(idx, node)
            li = bisect.bisect_right(self._live_keys, key)
            self._live_keys.insert(li, key)
            self._live.insert(li, node)
        else:
            # FIFO counters only grow and UNORDERED compares equal: the
            # position after the last equal node is always the end.
            idx = len(self._nodes)
            self._nodes.append(node)
            self._live.append(node)
        self._by_uid[node.item.uid] = node
        return idx

    def _forget_live(self, node: HistoryNode) -> None:
        if self.policy is OrderPolicy.PRIORITY:
            key = node.item.priority_key
            lo = bisect.bisect_left(self._live_keys, key)
            hi = bisect.bisect_right(self._live_keys, key)
            for i in range(lo, hi):
                if self._live[i] is node:
                    del self._live[i]
                    del self._live_keys[i]
                    return
        else:
            for i, n in enumerate(self._live):
                if n is node:
                    del self._live[i]
                    return
        raise HistoryError(f"live index lost track of {node!r}")

    def to_records(self) -> list[dict]:
        return history_to_records(self._nodes)

    @classmethod
    def from_records(cls, records: Iterable[dict],
                     policy: "OrderPolicy | str" = OrderPolicy.FIFO) -> "History":
        """Rebuild a history in the given node order (no re-sorting)."""
        h = cls(policy)
        for node in nodes_from_records(records):
            if node.item.uid in h._by_uid:
                raise HistoryError(f"duplicate uid {node.item.uid} in records")
            h._nodes.append(node)
            h._by_uid[node.item.uid] = node
            if h.policy is OrderPolicy.PRIORITY:
                h._keys.append(node.item.priority_key)
            if node.exist:
                h._live.append(node)
                if h.policy is OrderPolicy.PRIORITY:
                    h._live_keys.append(node.item.priority_key)
        if h._nodes and h.policy is OrderPolicy.FIFO:
            h.counter = max(n.order_num for n in h._nodes) + 1
        return h


def new_history(policy: "OrderPolicy | str" = OrderPolicy.FIFO) -> History:
    return History(policy)


def record_insert(h: History, e: ElementTag) -> HistoryNode:
    """Insert a live node for ``e`` after the last node not ordered after it."""
    if h.policy is OrderPolicy.PRIORITY and e.priority_key is None:
        raise ConfigError("priority history needs a priority key")
    if h.policy is OrderPolicy.FIFO:
        node = HistoryNode(e, h.counter)
        h.counter += 1
    else:
        node = HistoryNode(e, 0)
    h._insert(node)
    return node


def record_remove(h: History, n: HistoryNode) -> None:
    """Mark ``n`` as removed. The node stays in the history."""
    if not n._exist:
        raise DoubleRemoveError(f"node for uid {n.item.uid} already removed")
    n._exist = False
    if h.has_node(n):
        h._forget_live(n)


def history_to_records(nodes: Iterable) -> list[dict]:
    out = []
    for n in nodes:
        rec = {"uid": n.item.uid, "payload": n.item.payload}
        if n.item.priority_key is not None:
            rec["key"] = n.item.priority_key
        rec["exist"] = bool(n.exist)
        rec["order_num"] = n.order_num
        out.append(rec)
    return out


def nodes_from_records(records: Iterable[dict]) -> list[HistoryNode]:
    nodes = []
    for rec in records:
        try:
            uid = int(rec["uid"])
            exist = rec.get("exist", True)
            if not isinstance(exist, bool):
                raise TypeError("exist must be a boolean")
            key = rec.get("key")
            tag = ElementTag(uid, rec.get("payload"),
                             None if key is None else int(key))
            nodes.append(HistoryNode(tag, int(rec.get("order_num", 0)), exist))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad history record {rec!r}: {exc}") from None
    return nodes


def is_sorted(nodes: Sequence, policy: OrderPolicy) -> bool:
    return all(compare_order(nodes[i], nodes[i + 1], policy) <= 0
               for i in range(len(nodes) - 1))
