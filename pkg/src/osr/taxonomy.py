"""WordNet synset hierarchy restricted to the ILSVRC-relevant subgraph.

Inputs are the publicly distributed metadata shapes: a two-column
``parent child`` edge list (``is_a.txt``), tab-separated ``id<TAB>name``
lines (``words.txt``), and a one-id-per-line list of the ILSVRC leaf
synsets. The parsed graph is a DAG (real hypernym data contains
diamonds), immutable after construction.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from .errors import OsrError, ParseError

SYNSET_RE = re.compile(r"^n[0-9]{8}$")


def is_synset_id(s: str) -> bool:
    """True for a 9-character id: letter ``n`` plus 8 decimal digits."""
    return bool(SYNSET_RE.match(s))


@dataclass
class Node:
    name: str
    parents: set[str] = field(default_factory=set)
    children: set[str] = field(default_factory=set)


@dataclass
class Taxonomy:
    """Synset DAG plus the ordered set of ILSVRC leaf classes."""

    nodes: dict[str, Node]
    ilsvrc_leaves: tuple[str, ...]
    duplicate_edges: int = 0

    def __contains__(self, synset: str) -> bool:
        return synset in self.nodes

    def name_of(self, synset: str) -> str:
        self._require(synset)
        return self.nodes[synset].name

    def _require(self, synset: str) -> None:
        if synset not in self.nodes:
            raise OsrError(f"unknown synset id: {synset}")

    def structure(self) -> tuple:
        """Hashable view of the graph used by equality/idempotency checks."""
        edges = tuple(
            sorted((p, c) for c, node in self.nodes.items() for p in node.parents)
        )
        names = tuple(sorted((s, n.name) for s, n in self.nodes.items()))
        return (edges, names, self.ilsvrc_leaves)


def _parse_id(token: str, line_no: int) -> str:
    if not is_synset_id(token):
        raise ParseError(f"malformed synset id {token!r}", line_no)
    return token


def parse_hierarchy(is_a_text: str, synset_names: str, ilsvrc_list: str) -> Taxonomy:
    """Build a Taxonomy from edge, name, and ILSVRC-leaf listings.

    The graph is restricted to nodes reachable from the ILSVRC leaves in
    either direction (ancestors and descendants). Duplicate edges are
    dropped and counted; a cycle or an ILSVRC id that never appears in
    the edge or name data is fatal.
    """
    edges: set[tuple[str, str]] = set()
    duplicates = 0
    for line_no, line in enumerate(is_a_text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'parent child', got {line!r}", line_no)
        parent = _parse_id(parts[0], line_no)
        child = _parse_id(parts[1], line_no)
        if parent == child:
            raise ParseError(f"self-edge on {parent}", line_no)
        if (parent, child) in edges:
            duplicates += 1
            continue
        edges.add((parent, child))

    names: dict[str, str] = {}
    for line_no, line in enumerate(synset_names.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError(f"expected 'id<TAB>name', got {line!r}", line_no)
        synset, name = line.split("\t", 1)
        _parse_id(synset.strip(), line_no)
        names[synset.strip()] = name.strip()

    leaves: list[str] = []
    seen_leaves: set[str] = set()
    for line_no, line in enumerate(ilsvrc_list.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        synset = _parse_id(line, line_no)
        if synset in seen_leaves:
            raise ParseError(f"duplicate ILSVRC entry {synset}", line_no)
        seen_leaves.add(synset)
        leaves.append(synset)
    if not leaves:
        raise OsrError("ILSVRC synset list is empty")

    known_ids = {s for edge in edges for s in edge} | set(names)
    for synset in leaves:
        if synset not in known_ids:
            raise OsrError(f"ILSVRC synset {synset} absent from hierarchy data")

    parents_of: dict[str, set[str]] = {}
    children_of: dict[str, set[str]] = {}
    for parent, child in edges:
        children_of.setdefault(parent, set()).add(child)
        parents_of.setdefault(child, set()).add(parent)

    keep = _bidirectional_closure(leaves, parents_of, children_of)

    nodes: dict[str, Node] = {}
    for synset in keep:
        nodes[synset] = Node(name=names.get(synset, synset))
    for parent, child in edges:
        if parent in keep and child in keep:
            nodes[parent].children.add(child)
            nodes[child].parents.add(parent)

    _check_acyclic(nodes)
    return Taxonomy(nodes=nodes, ilsvrc_leaves=tuple(leaves), duplicate_edges=duplicates)


def _bidirectional_closure(
    leaves: list[str],
    parents_of: dict[str, set[str]],
    children_of: dict[str, set[str]],
) -> set[str]:
    keep = set(leaves)
    for relation in (parents_of, children_of):
        queue = deque(leaves)
        visited = set(leaves)
        while queue:
            current = queue.popleft()
            for nxt in relation.get(current, ()):
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
        keep |= visited
    return keep


def _check_acyclic(nodes: dict[str, Node]) -> None:
    # Kahn's algorithm; leftovers after peeling indicate a cycle.
    indegree = {s: len(n.parents) for s, n in nodes.items()}
    queue = deque(s for s, d in indegree.items() if d == 0)
    seen = 0
    while queue:
        current = queue.popleft()
        seen += 1
        for child in nodes[current].children:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if seen != len(nodes):
        cyclic = sorted(s for s, d in indegree.items() if d > 0)
        raise OsrError(f"hierarchy contains a cycle through: {', '.join(cyclic[:5])}")


def leaf_descendants(t: Taxonomy, root: str) -> list[str]:
    """ILSVRC leaves at or below ``root``, sorted bytewise, deduplicated."""
    t._require(root)
    ilsvrc = set(t.ilsvrc_leaves)
    found: set[str] = set()
    visited = {root}
    queue = deque([root])
    while queue:
        current = queue.popleft()
        if current in ilsvrc:
            found.add(current)
        for child in t.nodes[current].children:
            if child not in visited:
                visited.add(child)
                queue.append(child)
    return sorted(found)


def is_descendant(t: Taxonomy, node: str, ancestor: str) -> bool:
    """True iff ``node`` equals ``ancestor`` or lies below it."""
    t._require(node)
    t._require(ancestor)
    if node == ancestor:
        return True
    visited = {ancestor}
    queue = deque([ancestor])
    while queue:
        current = queue.popleft()
        for child in t.nodes[current].children:
            if child == node:
                return True
            if child not in visited:
                visited.add(child)
                queue.append(child)
    return False


def serialize_hierarchy(t: Taxonomy) -> tuple[str, str, str]:
    """Canonical (is_a, words, ilsvrc) texts; re-parsing them reproduces ``t``."""
    edges, names, leaves = t.structure()
    is_a_text = "".join(f"{p} {c}\n" for p, c in edges)
    words_text = "".join(f"{s}\t{n}\n" for s, n in names)
    ilsvrc_text = "".join(f"{s}\n" for s in leaves)
    return is_a_text, words_text, ilsvrc_text
