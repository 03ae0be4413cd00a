"""
The compatibility predicate
===========================

A queue's contents are compatible with its history when the live nodes,
read in history order, give the queue, allowing swaps only between
equally-ordered nodes.
"""

from histq.compat import compatible, explain_compatible, oracle_compatible
from histq.history import ElementTag, HistoryNode, OrderPolicy

A = ElementTag(1, "A", 5)
B = ElementTag(2, "B", 5)

# A and B share a priority key, so either order is fine
hist = [HistoryNode(A, 0, True), HistoryNode(B, 0, True)]
print("priority [B, A]:", compatible([B, A], hist, OrderPolicy.PRIORITY))

# under FIFO they carry different counters and A must come first
fifo = [HistoryNode(A, 0, True), HistoryNode(B, 1, True)]
print("fifo [B, A]:", compatible([B, A], fifo, OrderPolicy.FIFO))

# the linear-time form explains a failure
ok, info = explain_compatible([B, A], fifo, OrderPolicy.FIFO)
print(ok, info)

# removed nodes drop out; the brute-force oracle agrees
drained = [HistoryNode(A, 0, False), HistoryNode(B, 1, True)]
print("after taking A:", compatible([B], drained, "fifo"),
      oracle_compatible([B], drained, "fifo"))
# the literal base case (both sides empty) is available on request
print("strict:", compatible([B], drained, "fifo", strict_empty=True))
