from histq.history import ElementTag, HistoryNode


def node(uid, exist=True, order_num=0, key=None):
    return HistoryNode(ElementTag(uid, None, key), order_num, exist)


def tag(uid, key=None):
    return ElementTag(uid, None, key)
