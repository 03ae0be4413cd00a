"""
Stress campaigns and seeded bugs
================================

A campaign runs seeded producer and consumer threads against one queue,
checks every operation's contract, and samples snapshots for
compatibility. Each catalog mutant should be caught.
"""

from histq.harness import StressConfig, stress_run
from histq.queues import MUTANTS

cfg = StressConfig(producers=4, consumers=4, ops_per_thread=2000,
                   queue_kind="fifo", capacity=8, seed=7)
report, trace = stress_run(cfg)
print("clean:", report.passed, len(trace), "events,",
      report.snapshots_checked, "snapshots")

for mutant, what in sorted(MUTANTS.items()):
    kind = "priority" if mutant == "M4" else "fifo"
    cfg = StressConfig(producers=4, consumers=4, ops_per_thread=1250,
                       queue_kind=kind, capacity=8 if kind == "fifo" else None,
                       seed=1, mutant_id=mutant)
    report, _ = stress_run(cfg)
    print(f"{mutant} ({what}): caught={not report.passed}",
          dict(sorted(report.violation_counts.items())))
