"""History-instrumented concurrent queues and a runtime checker for them."""

from .history import (ConfigError, DoubleRemoveError, ElementTag, History,
                      HistoryError, HistoryNode, HistoryView, NodeView, OrderPolicy,
                      compare_order, new_history, new_tag, record_insert,
                      record_remove)
from .compat import (QueueSnapshot, Violation, ViolationKind, check_put_post,
                     check_take_post, compatible, compatible_fast,
                     explain_compatible, oracle_compatible)
from .queues import (MUTANTS, BoundedFifoQueue, Cancelled, OpEvent, PriorityQueue,
                     TraceRecorder, UnorderedBag, make_queue)
from .harness import (CheckReport, StressConfig, read_trace, replay_check,
                      stability_probe, stress_run, write_trace)

__version__ = "0.1.0"
