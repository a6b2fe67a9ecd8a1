"""Rooted tree combinatorics for the covariance model.

A model tree is an unrooted tree on leaves 0..n with no degree-two vertices,
directed away from leaf 0.  Vertices are numbered so that

  * 0 is the root (it has exactly one child),
  * 1..n are the leaves,
  * n+1..nv are the internal vertices, assigned in post-order with children
    visited in order of their smallest descendant leaf.

The numbering therefore refines descendant containment: if the leaves below
u are a subset of the leaves below v then u <= v.  Every operation in this
module returns trees in this canonical numbering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

MAX_LEAVES = 64


class TreeError(ValueError):
    """Malformed tree input: syntax, duplicate leaves, degree-2 vertices."""


@dataclass(frozen=True)
class QuartetTopology:
    """Induced unrooted topology on four leaf labels.

    ``kind`` is ``"star"`` (single internal vertex) or ``"trivalent"``, in
    which case ``split`` holds the unique cherry split as a frozenset of two
    frozen label pairs, e.g. ``{{1,2},{0,3}}``.
    """

    kind: str
    split: frozenset | None = None

    @property
    def is_star(self) -> bool:
        return self.kind == "star"

    def split_pairs(self) -> tuple[tuple[int, int], tuple[int, int]]:
        if self.split is None:
            raise ValueError("star quartet has no split")
        pairs = sorted(tuple(sorted(p)) for p in self.split)
        return pairs[0], pairs[1]


class RootedTree:
    """Immutable rooted tree in canonical numbering (see module docstring).

    ``parents[v-1]`` is the parent of vertex v for v = 1..nv; the child of
    the root is the unique vertex with parent 0.  ``labels`` carries a
    stable identifier per vertex; derived trees (induced, contracted,
    refined) use it to record which original vertex each new vertex came
    from, with None marking vertices that have no original counterpart.
    """

    __slots__ = ("n", "nv", "parents", "labels", "_children", "_de", "_depth")

    def __init__(self, n: int, parents, labels=None):
        parents = tuple(parents)
        nv = len(parents)
        if not 1 <= n <= MAX_LEAVES:
            raise TreeError(f"leaf count {n} outside supported range 1..{MAX_LEAVES}")
        if nv < n:
            raise TreeError("fewer vertices than leaves")
        children = [[] for _ in range(nv + 1)]
        for v, p in enumerate(parents, start=1):
            if not 0 <= p <= nv:
                raise TreeError(f"vertex {v} has out-of-range parent {p}")
            if p >= 1 and p <= v:
                raise TreeError(f"vertex numbering does not refine containment at {v}->{p}")
            children[p].append(v)
        if len(children[0]) != 1:
            raise TreeError("root 0 must have exactly one child")
        for leaf in range(1, n + 1):
            if children[leaf]:
                raise TreeError(f"leaf {leaf} has children")
        for v in range(n + 1, nv + 1):
            if len(children[v]) < 2:
                raise TreeError(f"internal vertex {v} has degree two")

        self.n = n
        self.nv = nv
        self.parents = parents
        self.labels = tuple(labels) if labels is not None else tuple(range(1, nv + 1))
        if len(self.labels) != nv:
            raise TreeError("labels must cover all non-root vertices")
        self._children = tuple(tuple(c) for c in children)

        # Descendant-leaf masks accumulate bottom-up; child ids are smaller
        # than parent ids, so one ascending pass suffices.
        de = [0] * (nv + 1)
        for v in range(1, n + 1):
            de[v] = 1 << (v - 1)
        for v in range(1, nv + 1):
            de[parents[v - 1]] |= de[v]
        self._de = tuple(de)

        depth = [0] * (nv + 1)
        for v in range(nv, 0, -1):  # parents precede children in this order
            depth[v] = depth[parents[v - 1]] + 1
        self._depth = tuple(depth)

    # -- basic queries ----------------------------------------------------

    @property
    def root_child(self) -> int:
        return self._children[0][0]

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def is_leaf(self, v: int) -> bool:
        return 1 <= v <= self.n

    def is_binary(self) -> bool:
        return all(len(self._children[v]) == 2 for v in range(self.n + 1, self.nv + 1))

    def vertices(self) -> range:
        """Non-root vertices in the stored total order."""
        return range(1, self.nv + 1)

    def parent(self, v: int) -> int:
        self._check_vertex(v)
        if v == 0:
            raise TreeError("root has no parent")
        return self.parents[v - 1]

    def depth(self, v: int) -> int:
        self._check_vertex(v)
        return self._depth[v]

    def de_mask(self, v: int) -> int:
        """Bitmask of descendant leaves (bit i-1 for leaf i)."""
        self._check_vertex(v)
        return self._de[v]

    def de_leaves(self, v: int) -> tuple[int, ...]:
        mask = self.de_mask(v)
        return tuple(i for i in range(1, self.n + 1) if mask >> (i - 1) & 1)

    def _check_vertex(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v <= self.nv:
            raise TreeError(f"unknown vertex {v}")

    def lca(self, u: int, v: int) -> int:
        """Deepest common ancestor; lca(v, v) == v, lca with 0 is 0."""
        self._check_vertex(u)
        self._check_vertex(v)
        while u != v:
            if self._depth[u] >= self._depth[v]:
                u = self.parents[u - 1] if u else 0
            else:
                v = self.parents[v - 1]
        return u

    def root_path(self, v: int) -> tuple[int, ...]:
        """Vertices from the root child down to v, inclusive."""
        self._check_vertex(v)
        path = []
        while v != 0:
            path.append(v)
            v = self.parents[v - 1]
        return tuple(reversed(path))

    def unrooted_distance(self, x: int, y: int) -> int:
        """Edge count between x and y in the unrooted tree (0 is a leaf)."""
        return self._depth[x] + self._depth[y] - 2 * self._depth[self.lca(x, y)]

    def edges(self) -> list[tuple[int, int]]:
        """Directed edges (parent, v) for every non-root vertex v."""
        return [(self.parents[v - 1], v) for v in range(1, self.nv + 1)]

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self.n == other.n and self.parents == other.parents

    def __hash__(self):
        return hash((self.n, self.parents))

    def __repr__(self):
        return f"RootedTree(n={self.n}, parents={self.parents})"

    # -- quartets ----------------------------------------------------------

    def quartet_topology(self, labels) -> QuartetTopology:
        """Induced topology on four distinct labels in {0..n}.

        Uses the four-point comparison with unit edge lengths: the pairing
        whose distance sum is strictly smallest is the cherry split, and all
        three sums coincide exactly when the induced tree is a star.
        """
        a, b, c, d = sorted(labels)
        if len({a, b, c, d}) != 4 or a < 0 or d > self.n:
            raise TreeError(f"quartet labels must be four distinct leaves in 0..{self.n}")
        pairings = (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c)))
        sums = [
            self.unrooted_distance(*p) + self.unrooted_distance(*q) for p, q in pairings
        ]
        lo = min(sums)
        if sums.count(lo) == 3:
            return QuartetTopology("star")
        p, q = pairings[sums.index(lo)]
        return QuartetTopology("trivalent", frozenset({frozenset(p), frozenset(q)}))

    # -- derived trees -----------------------------------------------------

    def induced(self, theta: dict, leaves) -> tuple["RootedTree", dict]:
        """Tree induced on a leaf subset, with path-summed edge weights.

        The vertices of the induced tree are the pairwise lcas of ``leaves``
        plus the root; each new edge weight is the sum of the original
        weights along the collapsed path.  Leaves are renumbered 1..|A| in
        sorted order and ``labels`` records the original vertex ids.
        """
        A = sorted(set(leaves))
        if not A:
            raise TreeError("induced leaf set must be nonempty")
        if any(not self.is_leaf(i) for i in A):
            raise TreeError("induced set must consist of leaves")
        keep = {self.lca(i, j) for i, j in itertools.combinations_with_replacement(A, 2)}
        kept_children: dict[int, list] = {v: [] for v in keep}
        anchor = {}
        top = None
        for v in keep:
            u = self.parents[v - 1]
            while u != 0 and u not in keep:
                u = self.parents[u - 1]
            anchor[v] = u
            if u == 0:
                top = v
            else:
                kept_children[u].append(v)
        new_leaf = {orig: idx for idx, orig in enumerate(A, start=1)}

        def structure(v):
            if v in new_leaf:
                return (new_leaf[v], v, None)
            return (None, v, [structure(c) for c in kept_children[v]])

        tree, vertex_of = _assemble(len(A), structure(top))
        theta_new = {}
        labels = [None] * tree.nv
        for orig, new_v in vertex_of.items():
            labels[new_v - 1] = self.labels[orig - 1]
            total = theta[orig]
            w = self.parents[orig - 1]
            while w != anchor[orig]:
                total = total + theta[w]
                w = self.parents[w - 1]
            theta_new[new_v] = total
        return RootedTree(tree.n, tree.parents, labels), theta_new

    def contract(self, theta: dict, tol=1e-9) -> tuple["RootedTree", dict]:
        """Contract internal edges with weight <= tol into their parents.

        Leaf edges and the root edge are never contracted.  Returns the
        renumbered tree (labels record the surviving original ids) and the
        weights of the surviving edges.
        """
        gone = {
            v
            for v in range(self.n + 1, self.nv + 1)
            if self.parents[v - 1] != 0 and theta[v] <= tol
        }
        kept_children: dict[int, list] = {}
        for v in range(1, self.nv + 1):
            if v in gone:
                continue
            p = self.parents[v - 1]
            while p in gone:
                p = self.parents[p - 1]
            kept_children.setdefault(p, []).append(v)

        def structure(v):
            if self.is_leaf(v):
                return (v, v, None)
            return (None, v, [structure(c) for c in kept_children.get(v, [])])

        tree, vertex_of = _assemble(self.n, structure(kept_children[0][0]))
        labels = [None] * tree.nv
        theta_new = {}
        for orig, new_v in vertex_of.items():
            labels[new_v - 1] = self.labels[orig - 1]
            theta_new[new_v] = theta[orig]
        return RootedTree(tree.n, tree.parents, labels), theta_new

    def binary_refinements(self) -> list["RootedTree"]:
        """All binary trees refining this one, rooted back at 0.

        A vertex with k >= 3 children contributes (2k-3)!! local
        resolutions; a binary tree returns only itself.  New internal
        vertices carry label None, so a refinement contracts back to the
        original tree when the unlabeled edges are given weight zero.
        """

        def refine(v):
            if self.is_leaf(v):
                return [(v, v, None)]
            child_sets = [refine(c) for c in self._children[v]]
            out = []
            for combo in itertools.product(*child_sets):
                if len(combo) == 2:
                    out.append((None, v, list(combo)))
                else:
                    for grouping in _binary_joins(list(combo)):
                        out.append((None, v, grouping))
            return out

        results = []
        for structure in refine(self.root_child):
            tree, vertex_of = _assemble(self.n, structure)
            labels = [None] * tree.nv
            for orig, new_v in vertex_of.items():
                labels[new_v - 1] = self.labels[orig - 1]
            results.append(RootedTree(tree.n, tree.parents, labels))
        return results


def _min_leaf(node) -> int:
    leaf, _orig, subs = node
    if subs is None:
        return leaf
    return min(_min_leaf(s) for s in subs)


def _binary_joins(nodes: list) -> list[list]:
    """All rooted binary groupings of >= 3 subtree nodes.

    Each grouping is returned as the two-element child list for the vertex
    being resolved; inner scaffold vertices appear as (None, None, [a, b]).
    Built by inserting each successive node on every edge of every partial
    scaffold, giving the (2k-3)!! distinct resolutions.
    """
    shapes = [nodes[0]]
    for node in nodes[1:]:
        shapes = [
            variant for shape in shapes for variant in _insert_on_every_edge(shape, node)
        ]
    out = []
    for shape in shapes:
        _leaf, orig, subs = shape
        assert orig is None and subs is not None
        out.append(subs)
    return out


def _insert_on_every_edge(shape, node):
    """Yield copies of ``shape`` with ``node`` joined along each edge.

    Descends only into anonymous scaffold vertices; the original child
    subtrees are treated as atoms.
    """
    yield (None, None, [shape, node])
    leaf, orig, subs = shape
    if subs is not None and orig is None:
        for idx, sub in enumerate(subs):
            for variant in _insert_on_every_edge(sub, node):
                new_subs = list(subs)
                new_subs[idx] = variant
                yield (leaf, orig, new_subs)


def _assemble(n: int, structure) -> tuple[RootedTree, dict]:
    """Build a canonical tree from a nested (leaf, orig, children) structure.

    Children are ordered by smallest descendant leaf and internal vertices
    numbered post-order.  Returns the tree and {orig_payload: new_vertex}
    for the nodes that carried a payload.
    """
    parents: dict[int, int] = {}
    vertex_of: dict = {}
    counter = [n]

    def walk(node) -> int:
        leaf, orig, subs = node
        if subs is None:
            if orig is not None:
                vertex_of[orig] = leaf
            return leaf
        kids = [walk(s) for s in sorted(subs, key=_min_leaf)]
        counter[0] += 1
        vid = counter[0]
        for k in kids:
            parents[k] = vid
        if orig is not None:
            vertex_of[orig] = vid
        return vid

    top = walk(structure)
    parents[top] = 0
    parent_list = [parents[v] for v in range(1, counter[0] + 1)]
    return RootedTree(n, parent_list), vertex_of


# ---------------------------------------------------------------------------
# Newick-like parsing
# ---------------------------------------------------------------------------


def parse_tree(text: str, exact: bool = False) -> tuple[RootedTree, dict]:
    """Parse a Newick-like string with branch lengths into (tree, theta).

    Leaves must be named 1..n; every edge carries a length, and the length
    on the outermost group is the weight of the root edge (the edge between
    leaf 0 and its neighbour).  With ``exact=True`` lengths are parsed as
    Fractions instead of floats.

    Raises TreeError on malformed syntax, duplicate or non-contiguous leaf
    names, and internal vertices of degree two.
    """
    tokens = _tokenize(text)
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take(expected=None):
        tok = peek()
        if tok is None:
            raise TreeError("unexpected end of input")
        if expected is not None and tok != expected:
            raise TreeError(f"expected '{expected}', found '{tok}'")
        pos[0] += 1
        return tok

    def parse_length():
        take(":")
        tok = take()
        try:
            return Fraction(tok) if exact else float(tok)
        except (ValueError, ZeroDivisionError) as exc:
            raise TreeError(f"invalid branch length '{tok}'") from exc

    def parse_node():
        if peek() == "(":
            take("(")
            kids = []
            while True:
                node = parse_node()
                kids.append((node[0], node[1], parse_length()))
                if peek() == ",":
                    take(",")
                    continue
                break
            take(")")
            if len(kids) < 2:
                raise TreeError("internal vertex of degree two")
            return ("int", kids, None)
        tok = take()
        if tok in "():,;":
            raise TreeError(f"unexpected token '{tok}'")
        return ("leaf", tok, None)

    root = parse_node()
    if root[0] != "int":
        raise TreeError("tree must have at least two leaves")
    root = (root[0], root[1], parse_length())
    take(";")
    if peek() is not None:
        raise TreeError(f"trailing input after ';': '{peek()}'")

    leaf_names: list[str] = []

    def collect(node):
        kind, payload, _w = node
        if kind == "leaf":
            leaf_names.append(payload)
        else:
            for child in payload:
                collect(child)

    collect(root)
    if len(set(leaf_names)) != len(leaf_names):
        dup = next(x for x in leaf_names if leaf_names.count(x) > 1)
        raise TreeError(f"duplicate leaf name '{dup}'")
    n = len(leaf_names)
    try:
        ids = sorted(int(x) for x in leaf_names)
    except ValueError as exc:
        raise TreeError("leaf names must be the integers 1..n") from exc
    if ids != list(range(1, n + 1)):
        raise TreeError(f"leaf names must be exactly 1..{n}")

    weights: dict = {}
    markers = itertools.count(-1, -1)

    def structure(node):
        kind, payload, weight = node
        if kind == "leaf":
            leaf = int(payload)
            weights[leaf] = weight
            return (leaf, leaf, None)
        marker = next(markers)
        weights[marker] = weight
        return (None, marker, [structure(c) for c in payload])

    tree, vertex_of = _assemble(n, structure(root))
    theta = {vertex_of[key]: w for key, w in weights.items()}
    return tree, theta


def _tokenize(text: str) -> list[str]:
    tokens = []
    i, m = 0, len(text)
    while i < m:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "():,;":
            tokens.append(ch)
            i += 1
        else:
            j = i
            while j < m and not text[j].isspace() and text[j] not in "():,;":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def to_newick(tree: RootedTree, theta: dict) -> str:
    """Serialize back to the Newick-like format accepted by parse_tree."""

    def fmt(x):
        return str(x) if isinstance(x, (int, Fraction)) else repr(x)

    def render(v):
        if tree.is_leaf(v):
            return str(v)
        inner = ",".join(f"{render(c)}:{fmt(theta[c])}" for c in tree.children(v))
        return f"({inner})"

    top = tree.root_child
    return f"{render(top)}:{fmt(theta[top])};"


# ---------------------------------------------------------------------------
# Shape enumeration (drives the identity test suites)
# ---------------------------------------------------------------------------


def _shapes(num_leaves: int, _cache={}) -> list:
    """Canonical rooted shapes: () for a leaf, sorted tuple of >=2 children.

    These are the series-reduced rooted trees, counted 1, 1, 2, 5, 12, 33,
    ... for 1, 2, 3, 4, 5, 6 leaves.
    """
    if num_leaves in _cache:
        return _cache[num_leaves]
    if num_leaves == 1:
        result = [()]
    else:
        found = set()
        for parts in _partitions(num_leaves, num_leaves):
            if len(parts) < 2:
                continue
            pools = []
            for size, count in sorted(_tally(parts).items()):
                pools.append(
                    list(itertools.combinations_with_replacement(_shapes(size), count))
                )
            for combo in itertools.product(*pools):
                found.add(tuple(sorted(c for group in combo for c in group)))
        result = sorted(found)
    _cache[num_leaves] = result
    return result


def _partitions(total: int, cap: int):
    if total == 0:
        yield ()
        return
    for first in range(min(total, cap), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


def _tally(items) -> dict:
    counts: dict = {}
    for x in items:
        counts[x] = counts.get(x, 0) + 1
    return counts


def _shape_to_tree(shape, n: int) -> RootedTree:
    next_leaf = itertools.count(1)

    def structure(node):
        if node == ():
            leaf = next(next_leaf)
            return (leaf, None, None)
        return (None, None, [structure(c) for c in node])

    tree, _ = _assemble(n, structure(shape))
    return tree


def tree_shapes(n: int) -> list[RootedTree]:
    """One labeled representative per rooted tree shape with n leaves.

    Leaves are assigned 1..n left to right.  Every operation in this
    package is equivariant under leaf relabeling, so identity checks over
    these representatives cover all trees of each shape.
    """
    if n < 2:
        raise TreeError("shapes are enumerated for n >= 2")
    return [_shape_to_tree(s, n) for s in _shapes(n)]


def binary_tree_shapes(n: int) -> list[RootedTree]:
    """The binary subset of tree_shapes(n)."""
    return [t for t in tree_shapes(n) if t.is_binary()]


def unit_theta(tree: RootedTree, value=1) -> dict:
    """Constant edge weights, handy for tests and CLI defaults."""
    return {v: value for v in tree.vertices()}
