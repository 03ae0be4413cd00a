"""
Ghost histories
===============

A history never forgets an element. Removing one only clears its
``exist`` flag, so "e was added at some point" stays true forever.
"""

from histq.history import History, OrderPolicy, new_tag, record_insert, record_remove

# FIFO: every insert gets the next counter value
h = History(OrderPolicy.FIFO)
a, b, c = new_tag("a"), new_tag("b"), new_tag("c")
nodes = [record_insert(h, t) for t in (a, b, c)]
record_remove(h, nodes[0])
for n in h:
    print(n)

# priority: equal keys keep their arrival order
p = History(OrderPolicy.PRIORITY)
for payload, key in [("x", 3), ("y", 1), ("z", 3), ("w", 1)]:
    record_insert(p, new_tag(payload, key))
print([(n.item.payload, n.item.priority_key) for n in p])

# the whole history serializes to plain records
print(h.to_records())
