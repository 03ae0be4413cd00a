"""Instrumented blocking queues.

Each queue owns one ghost :class:`~histq.history.History` and updates it in
the same critical section as the store mutation it shadows. The optional
trace recorder gets one event per ghost update, numbered inside that
critical section.

Every operation has two forms. ``put``/``take``/``offer``/``poll`` return
plain values. The ``do_*`` forms return receipts: the node each operation
designated, plus the watermarks that the per-operation contract checks
need.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .compat import QueueSnapshot
from .history import (ConfigError, ElementTag, History, HistoryNode, HistoryView,
                      NodeView, OrderPolicy, new_tag, record_insert, record_remove)

MUTANTS = {
    "M1": "dequeue from the tail instead of the head (fifo)",
    "M2": "skip the ghost removal on take",
    "M3": "ghost insertion delayed until after the lock is released",
    "M4": "store priority comparison flipped, history left intact (priority)",
    "M5": "capacity check off by one (fifo)",
}
_MUTANT_QUEUES = {"M1": ("fifo",), "M4": ("priority",), "M5": ("fifo",)}

_WAIT_SLICE = 0.05


class Cancelled(Exception):
    """A blocking operation was cancelled before it mutated anything."""


@dataclass(frozen=True)
class OpEvent:
    seq: int
    thread: str
    kind: str
    uid: Optional[int] = None
    key: Optional[int] = None
    size: Optional[int] = None

    def to_json(self) -> dict:
        out = {"seq": self.seq, "thread": self.thread, "kind": self.kind}
        if self.uid is not None:
            out["uid"] = self.uid
        if self.key is not None:
            out["key"] = self.key
        if self.size is not None:
            out["size"] = self.size
        return out


EVENT_KINDS = ("Put", "Take", "OfferAccepted", "OfferRejected", "PollHit",
               "PollMiss", "SnapshotMark")


class TraceRecorder:
    """Collects events; ``seq`` comes from one shared counter."""

    def __init__(self):
        self._seq = itertools.count()
        self.events: list[OpEvent] = []

    def emit(self, kind: str, uid=None, key=None, size=None) -> int:
        seq = next(self._seq)
        self.events.append(OpEvent(seq, threading.current_thread().name,
                                   kind, uid, key, size))
        return seq

    def sorted_events(self) -> list[OpEvent]:
        return sorted(self.events, key=lambda e: e.seq)


class _Entry:
    __slots__ = ("tag", "node")

    def __init__(self, tag: ElementTag):
        self.tag = tag
        self.node: Optional[HistoryNode] = None


@dataclass(frozen=True)
class PutReceipt:
    tag: ElementTag
    node: Optional[HistoryNode]
    seq: Optional[int]
    size_after: int


@dataclass(frozen=True)
class TakeReceipt:
    tag: ElementTag
    node: Optional[HistoryNode]
    seq: Optional[int]
    in_history_before: bool
    exist_before: Optional[bool]
    lead_before: Optional[NodeView]
    size_before: int


class InstrumentedQueue:
    kind = "base"
    policy = OrderPolicy.FIFO
    capacity: Optional[int] = None

    def __init__(self, recorder: Optional[TraceRecorder] = None):
        self._lock = threading.Lock()
        self._not_empty = threading.Condition(self._lock)
        self._not_full = threading.Condition(self._lock)
        self.history = History(self.policy)
        self.recorder = recorder
        self.mutant: Optional[str] = None
        self._touched = False

    def inject_fault(self, mutant_id: str) -> None:
        if mutant_id not in MUTANTS:
            raise ConfigError(f"unknown mutant {mutant_id!r}; known: {sorted(MUTANTS)}")
        allowed = _MUTANT_QUEUES.get(mutant_id)
        if allowed and self.kind not in allowed:
            raise ConfigError(f"mutant {mutant_id} applies to {allowed[0]} queues only")
        if self._touched:
            raise ConfigError("faults must be injected before the first operation")
        self.mutant = mutant_id

    # subclass store hooks, all called with the lock held
    def _store_add(self, entry: _Entry) -> None:
        raise NotImplementedError

    def _store_pop(self) -> _Entry:
        raise NotImplementedError

    def _store_len(self) -> int:
        raise NotImplementedError

    def _store_items(self) -> list:
        raise NotImplementedError

    def _full(self) -> bool:
        return False

    def _emit(self, kind, uid=None, key=None, size=None) -> Optional[int]:
        if self.recorder is None:
            return None
        return self.recorder.emit(kind, uid, key, size)

    def _check_key(self, key):
        if self.policy is OrderPolicy.PRIORITY:
            if key is None:
                raise ConfigError("priority queue needs a priority key")
            return int(key)
        if key is not None:
            raise ConfigError(f"{self.kind} queue takes no priority key")
        return None

    def _enqueue(self, payload, key, cancel, blocking, accepted_kind):
        key = self._check_key(key)
        with self._lock:
            self._touched = True
            while self._full():
                if not blocking:
                    self._emit("OfferRejected")
                    return None
                if cancel is not None and cancel.is_set():
                    raise Cancelled()
                self._not_full.wait(_WAIT_SLICE)
            tag = new_tag(payload, key)
            entry = _Entry(tag)
            self._store_add(entry)
            size_after = self._store_len()
            seq = None
            if self.mutant != "M3":
                entry.node = record_insert(self.history, tag)
                seq = self._emit(accepted_kind, tag.uid, key)
            self._not_empty.notify()
        if self.mutant == "M3":
            time.sleep(0.0005)
            entry.node = record_insert(self.history, tag)
            seq = self._emit(accepted_kind, tag.uid, key)
        return PutReceipt(tag, entry.node, seq, size_after)

    def _dequeue(self, cancel, blocking, hit_kind):
        with self._lock:
            self._touched = True
            while self._store_len() == 0:
                if not blocking:
                    self._emit("PollMiss")
                    return None
                if cancel is not None and cancel.is_set():
                    raise Cancelled()
                self._not_empty.wait(_WAIT_SLICE)
            size_before = self._store_len()
            lead = self.history.lead()
            lead = lead.freeze() if lead is not None else None
            entry = self._store_pop()
            node = entry.node
            tag = entry.tag
            in_hist = node is not None and self.history.has_node(node)
            exist_before = node.exist if node is not None else None
            seq = None
            if self.mutant != "M2":
                if node is not None:
                    record_remove(self.history, node)
                seq = self._emit(hit_kind, tag.uid, tag.priority_key)
            self._not_full.notify()
        return TakeReceipt(tag, node, seq, in_hist, exist_before, lead, size_before)

    def do_put(self, payload=None, key=None, cancel: Optional[threading.Event] = None) -> PutReceipt:
        return self._enqueue(payload, key, cancel, True, "Put")

    def do_offer(self, payload=None, key=None) -> Optional[PutReceipt]:
        return self._enqueue(payload, key, None, False, "OfferAccepted")

    def do_take(self, cancel: Optional[threading.Event] = None) -> TakeReceipt:
        return self._dequeue(cancel, True, "Take")

    def do_poll(self) -> Optional[TakeReceipt]:
        return self._dequeue(None, False, "PollHit")

    def put(self, payload=None, key=None, cancel=None) -> ElementTag:
        return self.do_put(payload, key, cancel).tag

    def offer(self, payload=None, key=None) -> bool:
        return self.do_offer(payload, key) is not None

    def take(self, cancel=None) -> ElementTag:
        return self.do_take(cancel).tag

    def poll(self) -> Optional[ElementTag]:
        r = self.do_poll()
        return None if r is None else r.tag

    def snapshot(self, full: bool = False, mark: bool = False):
        """Consistent ``(QueueSnapshot, HistoryView)`` pair.

        By default the history view holds only the live nodes. With
        ``mark`` a SnapshotMark event is recorded with the observed size.
        """
        with self._lock:
            q = QueueSnapshot(tuple(self._store_items()))
            view = self.history.view(complete=full)
            if mark:
                self._emit("SnapshotMark", size=len(q))
        return q, view

    def inspect(self, fn: Callable[[History], Any]) -> Any:
        """Run ``fn`` on the history inside the critical section."""
        with self._lock:
            return fn(self.history)

    def __len__(self) -> int:
        with self._lock:
            return self._store_len()


class BoundedFifoQueue(InstrumentedQueue):
    kind = "fifo"
    policy = OrderPolicy.FIFO

    def __init__(self, capacity: int, recorder: Optional[TraceRecorder] = None):
        if int(capacity) < 1:
            raise ConfigError("capacity must be positive")
        super().__init__(recorder)
        self.capacity = int(capacity)
        self._items: deque = deque()

    def _full(self) -> bool:
        if self.mutant == "M5":
            return len(self._items) > self.capacity
        return len(self._items) >= self.capacity

    def _store_add(self, entry):
        self._items.append(entry)

    def _store_pop(self):
        if self.mutant == "M1":
            return self._items.pop()
        return self._items.popleft()

    def _store_len(self):
        return len(self._items)

    def _store_items(self):
        return [e.tag for e in self._items]


class PriorityQueue(InstrumentedQueue):
    """Unbounded; smallest key first, ties in arrival order."""

    kind = "priority"
    policy = OrderPolicy.PRIORITY

    def __init__(self, recorder: Optional[TraceRecorder] = None):
        super().__init__(recorder)
        self._heap: list = []
        self._arrival = itertools.count()

    def _store_add(self, entry):
        key = entry.tag.priority_key
        if self.mutant == "M4":
            key = -key
        heapq.heappush(self._heap, (key, next(self._arrival), entry))

    def _store_pop(self):
        return heapq.heappop(self._heap)[2]

    def _store_len(self):
        return len(self._heap)

    def _store_items(self):
        return [e.tag for _, _, e in sorted(self._heap, key=lambda t: t[:2])]


class UnorderedBag(InstrumentedQueue):
    """Unbounded multiset; take returns the most recent insertion."""

    kind = "bag"
    policy = OrderPolicy.UNORDERED

    def __init__(self, recorder: Optional[TraceRecorder] = None):
        super().__init__(recorder)
        self._items: list = []

    def _store_add(self, entry):
        self._items.append(entry)

    def _store_pop(self):
        return self._items.pop()

    def _store_len(self):
        return len(self._items)

    def _store_items(self):
        return [e.tag for e in self._items]


QUEUE_KINDS = {"fifo": BoundedFifoQueue, "priority": PriorityQueue, "bag": UnorderedBag}
POLICY_FOR_KIND = {"fifo": OrderPolicy.FIFO, "priority": OrderPolicy.PRIORITY,
                   "bag": OrderPolicy.UNORDERED}


def make_queue(kind: str, capacity: Optional[int] = None,
               recorder: Optional[TraceRecorder] = None) -> InstrumentedQueue:
    if kind not in QUEUE_KINDS:
        raise ConfigError(f"unknown queue kind {kind!r}")
    if kind == "fifo":
        if capacity is None:
            raise ConfigError("fifo queue needs a capacity")
        return BoundedFifoQueue(capacity, recorder)
    if capacity is not None:
        raise ConfigError(f"{kind} queue is unbounded; capacity not allowed")
    return QUEUE_KINDS[kind](recorder)
