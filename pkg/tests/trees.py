"""Tree fixtures shared by the tests."""

from spherelayout.tree import TreeNode


def fanout_tree(fanouts, prefix="r"):
    """Complete tree with the given fanout per depth, ids like ``r.a1.b0``."""

    def build(node_id, depth):
        if depth == len(fanouts):
            return TreeNode(node_id)
        letter = "abcdefgh"[depth]
        kids = [build(f"{node_id}.{letter}{i}", depth + 1) for i in range(fanouts[depth])]
        return TreeNode(node_id, children=kids)

    return build(prefix, 0)
