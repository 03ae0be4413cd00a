"""
Recording and replaying traces
==============================

Every ghost update is numbered inside the queue's critical section, so a
trace can be re-checked offline against a sequential model queue.
"""

import os
import tempfile

from histq.harness import StressConfig, read_trace, replay_check, stress_run, write_trace

cfg = StressConfig(producers=2, consumers=2, ops_per_thread=500,
                   queue_kind="fifo", capacity=4, seed=3, mutant_id="M1")
online, trace = stress_run(cfg)

path = os.path.join(tempfile.mkdtemp(), "m1.jsonl")
write_trace(path, trace)
offline = replay_check(read_trace(path), cfg)
print("online pass:", online.passed, " offline pass:", offline.passed)

first = offline.violations[0]
print(first.kind.value, first.detail)
print(first.evidence.get("event"))
