"""Stress campaigns, trace replay and stability probing."""

from __future__ import annotations

import bisect
import hashlib
import heapq
import json
import logging
import os
import random
import threading
import time
from collections import Counter, deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .compat import (QueueSnapshot, Violation, ViolationKind, check_put_post,
                     diagnose_take_receipt, explain_compatible, failure_evidence)
from .history import (ConfigError, ElementTag, History, HistoryError,
                      DoubleRemoveError, record_insert, record_remove)
from .queues import (EVENT_KINDS, MUTANTS, POLICY_FOR_KIND, Cancelled,
                     InstrumentedQueue, OpEvent, TraceRecorder, make_queue)

log = logging.getLogger(__name__)

DEFAULT_WATCHDOG_SECS = 30.0
MAX_STORED_VIOLATIONS = 100
# Above this many live nodes, replay runs the full compatibility check only
# after events that can break it: a removal that disagrees with the model's
# discipline, a snapshot mark, and the last event.
FULL_CHECK_LIVE = 256

INSERT_KINDS = ("Put", "OfferAccepted")
REMOVE_KINDS = ("Take", "PollHit")


class TraceFormatError(ValueError):
    pass


def watchdog_from_env(default: float = DEFAULT_WATCHDOG_SECS) -> float:
    raw = os.environ.get("HISTQ_WATCHDOG_SECS")
    if not raw:
        return default
    try:
        secs = float(raw)
    except ValueError:
        raise ConfigError(f"HISTQ_WATCHDOG_SECS must be a number, got {raw!r}") from None
    if secs <= 0:
        raise ConfigError("HISTQ_WATCHDOG_SECS must be positive")
    return secs


@dataclass
class StressConfig:
    producers: int = 1
    consumers: int = 1
    ops_per_thread: int = 100
    queue_kind: str = "fifo"
    capacity: Optional[int] = 8
    seed: int = 0
    snapshot_interval_ops: int = 50
    mutant_id: Optional[str] = None
    watchdog_secs: float = DEFAULT_WATCHDOG_SECS
    payload_space: int = 64
    key_space: int = 8
    blocking_ratio: float = 0.7

    def validate(self) -> "StressConfig":
        if self.queue_kind not in POLICY_FOR_KIND:
            raise ConfigError(f"unknown queue kind {self.queue_kind!r}")
        if self.producers < 1 or self.consumers < 1:
            raise ConfigError("producers and consumers must be positive")
        if self.ops_per_thread < 0:
            raise ConfigError("ops_per_thread must be non-negative")
        if self.snapshot_interval_ops < 0:
            raise ConfigError("snapshot interval must be non-negative (0 disables)")
        if self.queue_kind == "fifo":
            if self.capacity is None or self.capacity < 1:
                raise ConfigError("fifo queue needs a positive capacity")
        elif self.capacity is not None:
            raise ConfigError(f"{self.queue_kind} queue is unbounded; drop the capacity")
        if self.mutant_id is not None and self.mutant_id not in MUTANTS:
            raise ConfigError(f"unknown mutant {self.mutant_id!r}")
        if self.watchdog_secs <= 0:
            raise ConfigError("watchdog must be positive")
        if self.payload_space < 1 or self.key_space < 1:
            raise ConfigError("payload and key spaces must be positive")
        if not 0.0 <= self.blocking_ratio <= 1.0:
            raise ConfigError("blocking_ratio must lie in [0, 1]")
        return self

    @property
    def policy(self):
        return POLICY_FOR_KIND[self.queue_kind]


def build_plan(cfg: StressConfig) -> dict:
    """Per-thread operation lists; a pure function of the config."""
    plan = {}
    for i in range(cfg.producers):
        rng = random.Random(f"{cfg.seed}/producer/{i}")
        ops = []
        for _ in range(cfg.ops_per_thread):
            op = "put" if rng.random() < cfg.blocking_ratio else "offer"
            payload = rng.randrange(cfg.payload_space)
            key = rng.randrange(cfg.key_space) if cfg.queue_kind == "priority" else None
            ops.append((op, payload, key))
        plan[f"producer-{i}"] = ops
    for i in range(cfg.consumers):
        rng = random.Random(f"{cfg.seed}/consumer/{i}")
        plan[f"consumer-{i}"] = [
            ("take" if rng.random() < cfg.blocking_ratio else "poll", None, None)
            for _ in range(cfg.ops_per_thread)]
    return plan


def plan_digest(plan: dict) -> str:
    return hashlib.sha256(json.dumps(plan, sort_keys=True).encode()).hexdigest()


class _ViolationLog:
    def __init__(self, limit: int = MAX_STORED_VIOLATIONS):
        self._lock = threading.Lock()
        self.limit = limit
        self.stored: list[Violation] = []
        self.counts: Counter = Counter()

    def add(self, kind: ViolationKind, detail: str = "", **evidence) -> None:
        with self._lock:
            self.counts[kind.value] += 1
            if len(self.stored) < self.limit:
                self.stored.append(Violation(kind, evidence, detail))


@dataclass
class CheckReport:
    totals: dict = field(default_factory=dict)
    snapshots_checked: int = 0
    violations: list = field(default_factory=list)
    violation_counts: dict = field(default_factory=dict)
    events: int = 0
    wall_seconds: float = 0.0
    config: dict = field(default_factory=dict)
    plan_digest: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def watchdog_fired(self) -> bool:
        return ViolationKind.WATCHDOG_TIMEOUT.value in self.violation_counts

    def kinds(self) -> set:
        return set(self.violation_counts)

    def to_json(self) -> dict:
        # "runtime" holds everything that depends on scheduling or the clock.
        return {
            "pass": self.passed,
            "config": self.config,
            "plan_digest": self.plan_digest,
            "violation_counts": dict(sorted(self.violation_counts.items())),
            "violations": [v.to_json() for v in self.violations],
            "runtime": {
                "wall_seconds": round(self.wall_seconds, 6),
                "events": self.events,
                "snapshots_checked": self.snapshots_checked,
                "totals": dict(sorted(self.totals.items())),
            },
        }


def _finish_report(report: CheckReport, vlog: _ViolationLog) -> CheckReport:
    report.violations = list(vlog.stored)
    report.violation_counts = dict(vlog.counts)
    return report


def _event_evidence(ev: OpEvent) -> dict:
    return ev.to_json()


def trace_structure(events: Sequence[OpEvent], vlog: _ViolationLog) -> list:
    """Sort by seq and flag density or uid-uniqueness problems."""
    ordered = sorted(events, key=lambda e: e.seq)
    seqs = [e.seq for e in ordered]
    if seqs != list(range(len(seqs))):
        gaps = [i for i, s in enumerate(seqs) if s != i][:5]
        vlog.add(ViolationKind.MALFORMED_TRACE, "sequence numbers are not dense 0..n-1",
                 first_bad_positions=gaps, n=len(seqs))
    inserted, removed = set(), set()
    for ev in ordered:
        if ev.kind in INSERT_KINDS:
            if ev.uid in inserted:
                vlog.add(ViolationKind.MALFORMED_TRACE, "uid inserted twice",
                         event=_event_evidence(ev))
            inserted.add(ev.uid)
        elif ev.kind in REMOVE_KINDS:
            if ev.uid in removed:
                vlog.add(ViolationKind.DOUBLE_REMOVE, "uid removed twice",
                         event=_event_evidence(ev))
            removed.add(ev.uid)
    return ordered


def conservation_balance(events: Iterable[OpEvent]) -> int:
    c = Counter(e.kind for e in events)
    return sum(c[k] for k in INSERT_KINDS) - sum(c[k] for k in REMOVE_KINDS)


def stress_run(cfg: StressConfig,
               queue_factory: Optional[Callable[[TraceRecorder], InstrumentedQueue]] = None):
    """Run one multi-threaded campaign; returns ``(CheckReport, trace)``."""
    cfg.validate()
    plan = build_plan(cfg)
    recorder = TraceRecorder()
    if queue_factory is not None:
        q = queue_factory(recorder)
    else:
        q = make_queue(cfg.queue_kind, cfg.capacity, recorder)
    if cfg.mutant_id:
        q.inject_fault(cfg.mutant_id)
    policy = q.policy
    vlog = _ViolationLog()
    totals: Counter = Counter()
    totals_lock = threading.Lock()
    progress = [0] * (cfg.producers + cfg.consumers)
    ticks = iter(range(1, 1 << 62))
    tick_lock = threading.Lock()
    snapshots = [0]
    abort = threading.Event()
    stop_producers = threading.Event()
    stop_consumers = threading.Event()
    remaining = {"producer": cfg.producers, "consumer": cfg.consumers}
    remaining_lock = threading.Lock()

    def bump(name: str) -> None:
        with totals_lock:
            totals[name] += 1

    def check_snapshot(where: str, final: bool = False) -> None:
        snap, view = q.snapshot(mark=True)
        ok, info = explain_compatible(snap, view, policy)
        with totals_lock:
            snapshots[0] += 1
        if not ok:
            vlog.add(ViolationKind.INCOMPATIBLE_SNAPSHOT, f"{where}: {info['reason']}",
                     **failure_evidence(snap, view, info))
        if q.capacity is not None and len(snap) > q.capacity:
            vlog.add(ViolationKind.CAPACITY_EXCEEDED, f"{where}: snapshot over capacity",
                     size=len(snap), capacity=q.capacity)

    def after_op(slot: int) -> None:
        progress[slot] += 1
        if cfg.snapshot_interval_ops:
            with tick_lock:
                t = next(ticks)
            if t % cfg.snapshot_interval_ops == 0:
                check_snapshot(f"sample {t}")

    def check_put(r) -> None:
        if not q.inspect(lambda h: check_put_post(h, r.tag)):
            vlog.add(ViolationKind.PUT_POST_FAILED, "no history node for inserted element",
                     uid=r.tag.uid, seq=r.seq)
        if q.capacity is not None and r.size_after > q.capacity:
            vlog.add(ViolationKind.CAPACITY_EXCEEDED, "insert overfilled the queue",
                     uid=r.tag.uid, size=r.size_after, capacity=q.capacity)

    def check_take(r) -> None:
        bad = diagnose_take_receipt(r, policy)
        if bad is not None:
            kind, detail = bad
            vlog.add(kind, detail, uid=r.tag.uid, seq=r.seq,
                     lead=None if r.lead_before is None else r.lead_before.item.uid)

    def guarded(fn, *args):
        try:
            return fn(*args)
        except Cancelled:
            raise
        except DoubleRemoveError as exc:
            vlog.add(ViolationKind.DOUBLE_REMOVE, str(exc))
        except HistoryError as exc:
            vlog.add(ViolationKind.HISTORY_MUTATION_ILLEGAL, str(exc))
        except Exception as exc:  # keep the campaign alive, report the fault
            vlog.add(ViolationKind.UNEXPECTED_ERROR, f"{type(exc).__name__}: {exc}")
        return None

    def finished(role: str) -> None:
        with remaining_lock:
            remaining[role] -= 1
            if remaining[role] == 0:
                (stop_consumers if role == "producer" else stop_producers).set()

    def producer(slot: int, ops: list) -> None:
        try:
            for op, payload, key in ops:
                if abort.is_set():
                    return
                try:
                    if op == "put":
                        r = guarded(q.do_put, payload, key, stop_producers)
                        if r is not None:
                            check_put(r)
                    else:
                        r = guarded(q.do_offer, payload, key)
                        if r is None:
                            bump("offer_not_accepted")
                        else:
                            check_put(r)
                except Cancelled:
                    bump("put_cancelled")
                after_op(slot)
        finally:
            finished("producer")

    def consumer(slot: int, ops: list) -> None:
        try:
            for op, _, _ in ops:
                if abort.is_set():
                    return
                try:
                    if op == "take":
                        r = guarded(q.do_take, stop_consumers)
                    else:
                        r = guarded(q.do_poll)
                    if r is not None:
                        check_take(r)
                except Cancelled:
                    bump("take_cancelled")
                after_op(slot)
        finally:
            finished("consumer")

    threads = []
    for slot, (name, ops) in enumerate(plan.items()):
        target = producer if name.startswith("producer") else consumer
        threads.append(threading.Thread(target=target, args=(slot, ops), name=name,
                                        daemon=True))
    t0 = time.perf_counter()
    for t in threads:
        t.start()

    last_progress, last_change = -1, time.monotonic()
    while any(t.is_alive() for t in threads):
        for t in threads:
            t.join(0.05)
        now_progress = sum(progress)
        if now_progress != last_progress:
            last_progress, last_change = now_progress, time.monotonic()
        elif time.monotonic() - last_change > cfg.watchdog_secs:
            abort.set()
            stop_producers.set()
            stop_consumers.set()
            stuck = [t.name for t in threads if t.is_alive()]
            vlog.add(ViolationKind.WATCHDOG_TIMEOUT,
                     f"no progress for {cfg.watchdog_secs}s",
                     stuck_threads=stuck, completed_ops=now_progress)
            log.error("watchdog fired; stuck threads: %s", stuck)
            break

    if not abort.is_set():
        def drain():
            while True:
                r = guarded(q.do_poll)
                if r is None:
                    break
                check_take(r)

        dt = threading.Thread(target=drain, name="drain", daemon=True)
        dt.start()
        dt.join(cfg.watchdog_secs)
        if dt.is_alive():
            vlog.add(ViolationKind.WATCHDOG_TIMEOUT, "final drain did not finish")
        else:
            check_snapshot("final drain", final=True)

    trace = trace_structure(recorder.events, vlog)
    if not abort.is_set():
        snap, _ = q.snapshot()
        live = q.inspect(lambda h: h.live_count)
        balance = conservation_balance(trace)
        if not balance == len(snap) == live:
            vlog.add(ViolationKind.CONSERVATION_FAILED,
                     "inserted minus removed differs from final contents",
                     balance=balance, snapshot_size=len(snap), live_nodes=live)

    report = CheckReport(config=asdict(cfg), plan_digest=plan_digest(plan))
    report.totals = dict(totals) | {k: v for k, v in
                                    Counter(e.kind for e in trace).items()}
    report.snapshots_checked = snapshots[0]
    report.events = len(trace)
    report.wall_seconds = time.perf_counter() - t0
    return _finish_report(report, vlog), trace


class _ModelStore:
    """Sequential reference store following the queue's discipline."""

    def __init__(self, kind: str):
        self.kind = kind
        self.fifo: deque = deque()
        self.prio_keys: list = []  # sorted (key, arrival)
        self.prio_tags: list = []
        self.prio_pos: dict = {}
        self.bag: dict = {}
        self.arrival = 0
        self.last_arrival = None

    @property
    def size(self) -> int:
        if self.kind == "fifo":
            return len(self.fifo)
        if self.kind == "priority":
            return len(self.prio_tags)
        return len(self.bag)

    def add(self, tag: ElementTag, arrival: Optional[int] = None) -> None:
        if self.kind == "fifo":
            self.fifo.append(tag)
        elif self.kind == "priority":
            if arrival is None:
                arrival = self.arrival
                self.arrival += 1
            k = (tag.priority_key, arrival)
            i = bisect.bisect_left(self.prio_keys, k)
            self.prio_keys.insert(i, k)
            self.prio_tags.insert(i, tag)
            self.prio_pos[tag.uid] = k
        else:
            self.bag[tag.uid] = tag

    def _remove(self, tag: ElementTag) -> bool:
        if self.kind == "fifo":
            try:
                self.fifo.remove(tag)
            except ValueError:
                return False
            return True
        if self.kind == "priority":
            k = self.prio_pos.pop(tag.uid, None)
            if k is None:
                return False
            i = bisect.bisect_left(self.prio_keys, k)
            del self.prio_keys[i]
            del self.prio_tags[i]
            return True
        return self.bag.pop(tag.uid, None) is not None

    def take(self, claimed: ElementTag) -> Optional[ElementTag]:
        """Remove what this discipline would return; prefers ``claimed`` when legal."""
        if self.size == 0:
            return None
        if self.kind == "fifo":
            return self.fifo.popleft()
        if self.kind == "priority":
            k = self.prio_pos.get(claimed.uid)
            if k is not None and k[0] == self.prio_keys[0][0]:
                self._remove(claimed)
                self.last_arrival = k[1]
                return claimed
            top = self.prio_tags[0]
            self.last_arrival = self.prio_keys[0][1]
            self._remove(top)
            return top
        if claimed.uid in self.bag:
            return self.bag.pop(claimed.uid)
        return self.bag.popitem()[1]

    def repair(self, picked: Optional[ElementTag], claimed: ElementTag) -> None:
        """Undo the discipline's pick and remove what the trace says was removed."""
        if picked is not None:
            if self.kind == "fifo":
                self.fifo.appendleft(picked)
            else:
                self.add(picked, self.last_arrival)
        self._remove(claimed)

    def reset(self, tags: list) -> None:
        self.fifo.clear()
        self.prio_keys.clear()
        self.prio_tags.clear()
        self.prio_pos.clear()
        self.bag.clear()
        for t in tags:
            self.add(t)

    def contents(self) -> list:
        if self.kind == "fifo":
            return list(self.fifo)
        if self.kind == "priority":
            return list(self.prio_tags)
        return list(self.bag.values())


def replay_check(trace: Sequence[OpEvent], cfg: Optional[StressConfig] = None, *,
                 queue_kind: Optional[str] = None,
                 capacity: Optional[int] = None) -> CheckReport:
    """Re-verify a trace against a sequential model queue and ghost history."""
    if cfg is not None:
        queue_kind = cfg.queue_kind
        capacity = cfg.capacity
    if queue_kind not in POLICY_FOR_KIND:
        raise ConfigError(f"unknown queue kind {queue_kind!r}")
    if queue_kind != "fifo" and capacity is not None:
        raise ConfigError(f"{queue_kind} queue is unbounded; drop the capacity")
    policy = POLICY_FOR_KIND[queue_kind]
    t0 = time.perf_counter()
    vlog = _ViolationLog()
    ordered = trace_structure(trace, vlog)
    history = History(policy)
    store = _ModelStore(queue_kind)
    checks = 0
    last = ordered[-1] if ordered else None
    for ev in ordered:
        where = f"seq {ev.seq} ({ev.kind})"
        suspect = False
        mismatch = None
        if ev.kind in INSERT_KINDS:
            if ev.uid is None or (queue_kind == "priority" and ev.key is None):
                vlog.add(ViolationKind.MALFORMED_TRACE, f"{where}: missing uid or key",
                         event=_event_evidence(ev))
                continue
            if history.has(ev.uid):
                continue  # already flagged by trace_structure
            if capacity is not None and store.size >= capacity:
                vlog.add(ViolationKind.CAPACITY_EXCEEDED, f"{where}: insert into a full queue",
                         event=_event_evidence(ev), size=store.size, capacity=capacity)
            tag = ElementTag(ev.uid, None, ev.key if queue_kind == "priority" else None)
            store.add(tag)
            record_insert(history, tag)
            if not check_put_post(history, tag):
                vlog.add(ViolationKind.PUT_POST_FAILED, where, event=_event_evidence(ev))
        elif ev.kind in REMOVE_KINDS:
            node = history.find(ev.uid) if ev.uid is not None else None
            if node is None:
                vlog.add(ViolationKind.TAKE_POST_FAILED,
                         f"{where}: removal of an element never inserted",
                         event=_event_evidence(ev))
                continue
            if not node.exist:
                continue  # already flagged by trace_structure
            picked = store.take(node.item)
            record_remove(history, node)
            suspect = picked is None or picked.uid != node.item.uid
            if suspect:
                mismatch = (picked, node.item)
        elif ev.kind == "OfferRejected":
            if capacity is None or store.size < capacity:
                vlog.add(ViolationKind.INCOMPATIBLE_SNAPSHOT,
                         f"{where}: offer rejected while the model has room",
                         event=_event_evidence(ev), size=store.size)
        elif ev.kind == "PollMiss":
            if store.size:
                vlog.add(ViolationKind.INCOMPATIBLE_SNAPSHOT,
                         f"{where}: poll missed while the model holds {store.size}",
                         event=_event_evidence(ev), size=store.size)
        elif ev.kind == "SnapshotMark":
            if ev.size is not None and ev.size != store.size:
                vlog.add(ViolationKind.INCOMPATIBLE_SNAPSHOT,
                         f"{where}: observed size {ev.size}, model size {store.size}",
                         event=_event_evidence(ev))
        else:
            vlog.add(ViolationKind.MALFORMED_TRACE, f"{where}: unknown event kind",
                     event=_event_evidence(ev))
            continue
        if not (suspect or ev.kind == "SnapshotMark" or ev is last
                or history.live_count <= FULL_CHECK_LIVE):
            continue
        contents = store.contents()
        view = history.view(complete=False, frozen=False)
        ok, info = explain_compatible(contents, view, policy)
        checks += 1
        if not ok:
            evidence = failure_evidence(contents, view, info)
            evidence["event"] = _event_evidence(ev)
            vlog.add(ViolationKind.INCOMPATIBLE_SNAPSHOT, f"{where}: {info['reason']}",
                     **evidence)
        if mismatch is not None:
            store.repair(*mismatch)
        elif not ok:
            store.reset([n.item for n in history.live_nodes()])
    report = CheckReport(config={"queue_kind": queue_kind, "capacity": capacity})
    report.totals = dict(Counter(e.kind for e in ordered))
    report.snapshots_checked = checks
    report.events = len(ordered)
    report.wall_seconds = time.perf_counter() - t0
    return _finish_report(report, vlog)


def fifo_order_preserved(trace: Sequence[OpEvent]) -> bool:
    """Removals, in seq order, come out in the order of their insertions."""
    put_seq = {e.uid: e.seq for e in trace if e.kind in INSERT_KINDS}
    taken = [put_seq.get(e.uid, -1) for e in sorted(trace, key=lambda e: e.seq)
             if e.kind in REMOVE_KINDS]
    return all(a < b for a, b in zip(taken, taken[1:])) and -1 not in taken


def priority_order_violations(trace: Sequence[OpEvent]) -> list:
    """Removals whose key exceeds the smallest key live just before them."""
    live: list = []
    dead: set = set()
    bad = []
    for e in sorted(trace, key=lambda e: e.seq):
        if e.kind in INSERT_KINDS:
            heapq.heappush(live, (e.key, e.uid))
        elif e.kind in REMOVE_KINDS:
            while live and live[0][1] in dead:
                heapq.heappop(live)
            if live and e.key > live[0][0]:
                bad.append((e.seq, e.key, live[0][0]))
            dead.add(e.uid)
    return bad


def stability_probe(q: InstrumentedQueue, e: ElementTag, rounds: int,
                    mutators: int = 8, seed: int = 0) -> bool:
    """Re-check the put postcondition for ``e`` while other threads mutate ``q``."""
    if not q.inspect(lambda h: check_put_post(h, e)):
        raise ValueError("put postcondition does not hold for the probed element")
    if rounds <= 0:
        return True
    stop = threading.Event()

    def mutate(i: int) -> None:
        rng = random.Random(f"{seed}/mutator/{i}")
        while not stop.is_set():
            if rng.random() < 0.5:
                key = rng.randrange(8) if q.kind == "priority" else None
                q.offer(rng.randrange(64), key)
            else:
                q.poll()

    workers = [threading.Thread(target=mutate, args=(i,), name=f"mutator-{i}",
                                daemon=True) for i in range(mutators)]
    for w in workers:
        w.start()
    held = True
    try:
        for _ in range(rounds):
            if not q.inspect(lambda h: check_put_post(h, e)):
                held = False
            time.sleep(0)
    finally:
        stop.set()
        for w in workers:
            w.join()
    return held


def write_trace(path, events: Iterable[OpEvent]) -> None:
    with open(path, "w") as fh:
        for ev in sorted(events, key=lambda e: e.seq):
            fh.write(json.dumps(ev.to_json()) + "\n")


def read_trace(path) -> list:
    events = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                kind = obj["kind"]
                if kind not in EVENT_KINDS:
                    raise ValueError(f"unknown kind {kind!r}")
                opt = {k: obj.get(k) for k in ("uid", "key", "size")}
                for k, v in opt.items():
                    if v is not None and (not isinstance(v, int) or isinstance(v, bool)):
                        raise ValueError(f"{k} must be an integer")
                if not isinstance(obj["seq"], int) or isinstance(obj["seq"], bool):
                    raise ValueError("seq must be an integer")
                events.append(OpEvent(obj["seq"], str(obj["thread"]), kind, **opt))
            except (KeyError, TypeError, ValueError) as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
    return events


def write_report(path, report: CheckReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
