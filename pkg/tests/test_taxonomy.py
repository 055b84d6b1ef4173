from collections import deque

import pytest

from osr.errors import OsrError, ParseError
from osr.taxonomy import (
    is_descendant,
    is_synset_id,
    leaf_descendants,
    parse_hierarchy,
    serialize_hierarchy,
)


def bfs_reachable(t, ancestor, node):
    """Independent reachability oracle: plain queue walk over children."""
    seen = {ancestor}
    queue = deque([ancestor])
    while queue:
        current = queue.popleft()
        if current == node:
            return True
        for child in t.nodes[current].children:
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return False


def test_synset_id_shape():
    assert is_synset_id("n02087122")
    assert not is_synset_id("n0208712")
    assert not is_synset_id("n020871223")
    assert not is_synset_id("x02087122")
    assert not is_synset_id("n02x87122")


def test_minimal_tree():
    t = parse_hierarchy(
        "n10000000 n10000001\nn10000000 n10000002\n",
        "",
        "n10000001\nn10000002\n",
    )
    assert len(t.ilsvrc_leaves) == 2
    assert leaf_descendants(t, "n10000000") == ["n10000001", "n10000002"]
    # unnamed synsets fall back to their id
    assert t.name_of("n10000000") == "n10000000"


def test_malformed_id_reports_line():
    with pytest.raises(ParseError, match="line 2"):
        parse_hierarchy(
            "n10000000 n10000001\nn0001 n02x\n", "", "n10000001\n"
        )


def test_duplicate_edges_counted(tiny_taxonomy):
    text = "n10000000 n10000001\nn10000000 n10000001\n"
    t = parse_hierarchy(text, "", "n10000001\n")
    assert t.duplicate_edges == 1
    assert t.nodes["n10000000"].children == {"n10000001"}


def test_cycle_is_fatal():
    edges = "n10000000 n10000001\nn10000001 n10000002\nn10000002 n10000000\n"
    with pytest.raises(OsrError, match="cycle"):
        parse_hierarchy(edges, "", "n10000002\n")


def test_missing_ilsvrc_entry_is_fatal():
    with pytest.raises(OsrError, match="n19999999"):
        parse_hierarchy("n10000000 n10000001\n", "", "n19999999\n")


def test_restriction_drops_unreachable_nodes():
    edges = (
        "n10000000 n10000001\n"
        "n20000000 n20000001\n"  # disconnected from the leaf
    )
    t = parse_hierarchy(edges, "", "n10000001\n")
    assert "n20000000" not in t
    assert "n10000000" in t


def test_dag_diamond_deduplicates():
    # two paths from the root to the same leaf
    edges = (
        "n10000000 n10000001\n"
        "n10000000 n10000002\n"
        "n10000001 n11000001\n"
        "n10000002 n11000001\n"
    )
    t = parse_hierarchy(edges, "", "n11000001\n")
    assert leaf_descendants(t, "n10000000") == ["n11000001"]


def test_leaf_is_its_own_descendant(tiny_taxonomy):
    assert leaf_descendants(tiny_taxonomy, "n11000001") == ["n11000001"]


def test_unknown_root_errors(tiny_taxonomy):
    with pytest.raises(OsrError, match="n19999999"):
        leaf_descendants(tiny_taxonomy, "n19999999")


def test_is_descendant(tiny_taxonomy):
    t = tiny_taxonomy
    assert is_descendant(t, "n11000001", "n11000001")
    assert is_descendant(t, "n11000001", "n10000000")
    assert not is_descendant(t, "n10000001", "n11000001")
    with pytest.raises(OsrError):
        is_descendant(t, "n19999999", "n10000000")


def test_parent_descendants_superset(tiny_taxonomy):
    t = tiny_taxonomy
    for synset, node in t.nodes.items():
        parent_leaves = set(leaf_descendants(t, synset))
        for child in node.children:
            assert parent_leaves >= set(leaf_descendants(t, child))


def test_serialize_parse_idempotent(tiny_taxonomy):
    texts = serialize_hierarchy(tiny_taxonomy)
    again = parse_hierarchy(*texts)
    assert again.structure() == tiny_taxonomy.structure()
    assert serialize_hierarchy(again) == texts


# -- checks against the bundled ILSVRC-restricted metadata --------------------

def test_bundled_hunting_dog_name(bundled_taxonomy):
    assert bundled_taxonomy.name_of("n02087122") == "hunting dog"


def test_bundled_dog_has_116_leaves(bundled_taxonomy):
    assert len(leaf_descendants(bundled_taxonomy, "n02084071")) == 116


def test_bundled_hunting_dog_has_61_leaves(bundled_taxonomy):
    leaves = leaf_descendants(bundled_taxonomy, "n02087122")
    assert len(leaves) == 61
    assert "n02087394" in leaves  # Rhodesian ridgeback
    assert "n02091032" not in leaves  # Italian greyhound falls outside


def test_bundled_descendant_queries_match_bfs_oracle(bundled_taxonomy):
    t = bundled_taxonomy
    dog_leaves = leaf_descendants(t, "n02084071")
    assert is_descendant(t, dog_leaves[0], "n02084071")
    assert bfs_reachable(t, "n02084071", dog_leaves[0])
    assert not is_descendant(t, "n02084071", dog_leaves[0])


def test_bundled_random_roots_sorted_unique_subset(bundled_taxonomy):
    import random

    t = bundled_taxonomy
    ilsvrc = set(t.ilsvrc_leaves)
    rng = random.Random(7)
    roots = rng.sample(sorted(t.nodes), 100)
    for root in roots:
        leaves = leaf_descendants(t, root)
        assert leaves == sorted(set(leaves))
        assert set(leaves) <= ilsvrc
        found = {x for x in ilsvrc if bfs_reachable(t, root, x)}
        assert found == set(leaves)


def test_bundled_idempotent_roundtrip(bundled_taxonomy):
    texts = serialize_hierarchy(bundled_taxonomy)
    again = parse_hierarchy(*texts)
    assert again.structure() == bundled_taxonomy.structure()
