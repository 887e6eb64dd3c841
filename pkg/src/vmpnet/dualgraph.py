"""Rooted genealogy DAGs of the backward net, relevance, and reduction.

The component of the backward net grown from a root down to a horizon is a
finite acyclic digraph whose vertices have out-degree at most two.  An
intermediate vertex is *relevant* when two directed paths leave it and
reach the leaves without sharing any other vertex (checked by a
unit-vertex-capacity max-flow; a brute-force path-pair oracle is kept for
cross-validation).  The reduced graph skips all irrelevant vertices: it
keeps the root, the relevant vertices and the leaves, and joins two kept
vertices when some path of the original graph connects them through
irrelevant interior vertices only.

Every irrelevant vertex funnels through a single cut vertex, so the first
kept vertex reached from it is unique; ReductionError signals a violation
of that invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidParameterError, ReductionError, StateSpaceError, WindowError
from .lattice_net import BACKWARD, ArrowOutcome, Vertex, is_odd_vertex
from .rng import rescale_uniform


class DagKind(str, Enum):
    ROOT = "root"
    BRANCH = "branch"
    KILLING_LEAF = "killing_leaf"
    TIME_ZERO_LEAF = "time_zero_leaf"
    PASS_THROUGH = "pass_through"


LEAF_KINDS = (DagKind.KILLING_LEAF, DagKind.TIME_ZERO_LEAF)


@dataclass
class RootedDag:
    """Backward component from ``root``: kinds, ordered children, uniforms.

    ``children[v]`` lists the targets of v's arrows, left arrow first.
    ``uniforms`` holds a draw for exactly the vertices that consume
    randomness when coloring: branching vertices (two children), killing
    leaves, horizon leaves, and a two-child root.
    """

    root: Vertex
    kinds: dict[Vertex, DagKind]
    children: dict[Vertex, tuple[Vertex, ...]]
    uniforms: dict[Vertex, float]

    @property
    def vertices(self) -> set[Vertex]:
        return set(self.kinds)

    def leaves(self) -> list[Vertex]:
        return [v for v, k in self.kinds.items() if k in LEAF_KINDS]

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        return [(p, c) for p, cs in self.children.items() for c in cs]

    def out_degree(self, v: Vertex) -> int:
        return len(self.children.get(v, ()))


@dataclass
class ReducedDag(RootedDag):
    """Reduction of a RootedDag: root, relevant vertices and leaves only.

    A branch vertex whose two routes end at the same kept vertex stores
    that child twice (an edge of multiplicity two); coloring treats it as
    two agreeing neighbors.
    """


def build_dag(net, root: Vertex, horizon: int = 0) -> RootedDag:
    """Grow the backward component of ``net`` from ``root`` down to ``horizon``.

    ``net`` must be backward-oriented (arrows to time t-1).  Vertices at the
    horizon become horizon leaves regardless of their outcome; arrowless
    vertices above it become killing leaves; vertices with both arrows
    branch.  Raises WindowError if the component would leave the window
    sideways or the horizon/root lie outside it.
    """
    if net.direction != BACKWARD:
        raise InvalidParameterError("build_dag requires a backward-oriented net")
    w = net.window
    if not is_odd_vertex(root.x, root.t):
        raise InvalidParameterError(f"root {root} is not on the odd sublattice")
    if not w.contains(root.x, root.t):
        raise WindowError(f"root {root} outside window {w}")
    if horizon < w.t_min or horizon > root.t:
        raise WindowError(f"horizon {horizon} outside [{w.t_min}, {root.t}]")

    b, kappa = net.b, net.kappa
    walk = 1.0 - b - kappa
    kinds: dict[Vertex, DagKind] = {}
    children: dict[Vertex, tuple[Vertex, ...]] = {}
    uniforms: dict[Vertex, float] = {}

    frontier = {root}
    for t in range(root.t, horizon - 1, -1):
        if not frontier:
            break
        next_frontier: set[Vertex] = set()
        for v in sorted(frontier):
            u = net.uniform_at(v.x, v.t)
            out = net.outcome_at(v.x, v.t)
            if v.t == horizon:
                kinds[v] = DagKind.TIME_ZERO_LEAF
                children[v] = ()
                uniforms[v] = u
                continue
            if out is ArrowOutcome.NONE:
                kinds[v] = DagKind.KILLING_LEAF
                children[v] = ()
                uniforms[v] = rescale_uniform(u, 1.0 - kappa, kappa)
                continue
            if out is ArrowOutcome.LEFT_ONLY:
                kids = (Vertex(v.x - 1, v.t - 1),)
            elif out is ArrowOutcome.RIGHT_ONLY:
                kids = (Vertex(v.x + 1, v.t - 1),)
            else:
                kids = (Vertex(v.x - 1, v.t - 1), Vertex(v.x + 1, v.t - 1))
                uniforms[v] = rescale_uniform(u, walk, b)
            for c in kids:
                if not (w.x_min <= c.x <= w.x_max):
                    raise WindowError(
                        f"component from {root} escaped window sideways at {c}; widen the window"
                    )
                next_frontier.add(c)
            kinds[v] = DagKind.BRANCH if len(kids) == 2 else DagKind.PASS_THROUGH
            children[v] = kids
        frontier = next_frontier

    kinds[root] = DagKind.ROOT if kinds[root] in (DagKind.BRANCH, DagKind.PASS_THROUGH) else kinds[root]
    return RootedDag(root, kinds, children, uniforms)


# ---------------------------------------------------------------------------
# Relevance
# ---------------------------------------------------------------------------

def relevant_points(dag: RootedDag) -> set[Vertex]:
    """Intermediate vertices with two paths to the leaves disjoint except at
    the vertex itself.

    Computed per candidate by max-flow with unit vertex capacities from the
    candidate to a super-sink over all leaves; only two-child vertices can
    qualify.  Two paths ending at the same leaf count as meeting.
    """
    idx = {v: i for i, v in enumerate(sorted(dag.kinds))}
    n = len(idx)
    sink = 2 * n
    out: set[Vertex] = set()
    for z in dag.kinds:
        if z == dag.root or dag.out_degree(z) != 2:
            continue
        if _maxflow_at_least_two(dag, idx, n, sink, z):
            out.add(z)
    return out


def _maxflow_at_least_two(dag, idx, n, sink, z) -> bool:
    # node 2i = v_in, 2i+1 = v_out; source = z_out (z uncapacitated).
    cap: dict[tuple[int, int], int] = {}
    adj: dict[int, list[int]] = {}

    def add(a, b_):
        if (a, b_) not in cap:
            cap[(a, b_)] = 0
            cap[(b_, a)] = cap.get((b_, a), 0)
            adj.setdefault(a, []).append(b_)
            adj.setdefault(b_, []).append(a)
        cap[(a, b_)] += 1

    for v, kind in dag.kinds.items():
        i = idx[v]
        if v != z:
            add(2 * i, 2 * i + 1)
        if kind in LEAF_KINDS:
            add(2 * i + 1, sink)
        for c in set(dag.children.get(v, ())):
            add(2 * i + 1, 2 * idx[c])

    source = 2 * idx[z] + 1
    flow = 0
    while flow < 2:
        # BFS augmenting path on the unit-capacity residual graph
        parent = {source: source}
        queue = [source]
        while queue and sink not in parent:
            a = queue.pop(0)
            for b_ in adj.get(a, ()):
                if b_ not in parent and cap.get((a, b_), 0) > 0:
                    parent[b_] = a
                    queue.append(b_)
        if sink not in parent:
            return False
        node = sink
        while node != source:
            prev = parent[node]
            cap[(prev, node)] -= 1
            cap[(node, prev)] += 1
            node = prev
        flow += 1
    return True


def relevant_points_bruteforce(dag: RootedDag, max_paths: int = 20000) -> set[Vertex]:
    """Relevance by enumerating all path pairs; oracle for small graphs."""
    out: set[Vertex] = set()
    for z in dag.kinds:
        if z == dag.root or dag.out_degree(z) != 2:
            continue
        paths: list[frozenset[Vertex]] = []
        stack = [(z, [])]
        while stack:
            v, trail = stack.pop()
            kids = dag.children.get(v, ())
            if not kids:
                paths.append(frozenset(trail + [v]) - {z})
                if len(paths) > max_paths:
                    raise StateSpaceError("too many paths for brute-force relevance")
                continue
            for c in kids:
                stack.append((c, trail + [v]))
        if any(
            p1.isdisjoint(p2) for i, p1 in enumerate(paths) for p2 in paths[i + 1:]
        ):
            out.add(z)
    return out


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------

def reduce_dag(dag: RootedDag) -> ReducedDag:
    """Skip all irrelevant vertices, keeping root, relevant vertices, leaves.

    Kept vertices are joined when a path of the source graph connects them
    through irrelevant interior vertices only; a branch vertex's two route
    targets keep the left/right order of its arrows.  Uniforms carry over
    unchanged.
    """
    rel = relevant_points(dag)
    keep = set(rel) | {dag.root} | set(dag.leaves())

    target: dict[Vertex, Vertex] = {}

    def resolve(v0: Vertex) -> Vertex:
        stack = [v0]
        while stack:
            v = stack[-1]
            if v in target or v in keep:
                stack.pop()
                continue
            pending = [c for c in dag.children[v] if c not in keep and c not in target]
            if pending:
                stack.extend(pending)
                continue
            ts = {c if c in keep else target[c] for c in dag.children[v]}
            if len(ts) != 1:
                raise ReductionError(f"irrelevant vertex {v} reaches multiple kept vertices {ts}")
            target[v] = next(iter(ts))
            stack.pop()
        return v0 if v0 in keep else target[v0]

    kinds: dict[Vertex, DagKind] = {}
    children: dict[Vertex, tuple[Vertex, ...]] = {}
    uniforms: dict[Vertex, float] = {}
    for v in keep:
        kind = dag.kinds[v]
        if v == dag.root:
            kinds[v] = kind  # a leaf root keeps its leaf kind
        elif kind in LEAF_KINDS:
            kinds[v] = kind
        else:
            kinds[v] = DagKind.BRANCH
        if kind in LEAF_KINDS:
            children[v] = ()
        else:
            children[v] = tuple(resolve(c) for c in dag.children[v])
        if v in dag.uniforms:
            uniforms[v] = dag.uniforms[v]

    for v, kids in children.items():
        if v != dag.root and kinds[v] is DagKind.BRANCH and len(kids) != 2:
            raise ReductionError(f"reduced vertex {v} has out-degree {len(kids)}")
    return ReducedDag(dag.root, kinds, children, uniforms)


def differ_only_by_root(g1: RootedDag, g2: RootedDag) -> bool:
    """True when relabeling g1's root as g2's root and fixing every other
    vertex is a graph isomorphism (edge sets correspond exactly)."""
    if g1.vertices - {g1.root} != g2.vertices - {g2.root}:
        return False

    def psi(v: Vertex) -> Vertex:
        return g2.root if v == g1.root else v

    e1 = {(psi(p), psi(c)) for p, c in g1.edges()}
    e2 = set(g2.edges())
    return e1 == e2


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def dag_to_json(dag: RootedDag) -> str:
    order = sorted(dag.kinds)
    idx = {v: i for i, v in enumerate(order)}
    verts = []
    for v in order:
        rec = {"x": v.x, "t": v.t, "kind": dag.kinds[v].value}
        if v in dag.uniforms:
            rec["uniform"] = dag.uniforms[v]
        verts.append(rec)
    edges = []
    for p in order:
        kids = dag.children.get(p, ())
        seen: list[Vertex] = []
        for c in kids:
            if c in seen:
                for e in edges:
                    if e["parent"] == idx[p] and e["child"] == idx[c]:
                        e["multiplicity"] += 1
            else:
                edges.append({"parent": idx[p], "child": idx[c], "multiplicity": 1})
                seen.append(c)
    doc = {
        "root": {"x": dag.root.x, "t": dag.root.t},
        "reduced": isinstance(dag, ReducedDag),
        "vertices": verts,
        "edges": edges,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def dag_from_json(text: str) -> RootedDag:
    doc = json.loads(text)
    verts = [Vertex(rec["x"], rec["t"]) for rec in doc["vertices"]]
    kinds = {v: DagKind(rec["kind"]) for v, rec in zip(verts, doc["vertices"])}
    uniforms = {
        v: rec["uniform"] for v, rec in zip(verts, doc["vertices"]) if "uniform" in rec
    }
    children: dict[Vertex, list[Vertex]] = {v: [] for v in verts}
    for e in doc["edges"]:
        for _ in range(e.get("multiplicity", 1)):
            children[verts[e["parent"]]].append(verts[e["child"]])
    root = Vertex(doc["root"]["x"], doc["root"]["t"])
    cls = ReducedDag if doc.get("reduced") else RootedDag
    return cls(root, kinds, {v: tuple(cs) for v, cs in children.items()}, uniforms)


def dag_to_dot(dag: RootedDag) -> str:
    """Graphviz export for visual inspection."""
    shapes = {
        DagKind.ROOT: "doublecircle",
        DagKind.BRANCH: "circle",
        DagKind.PASS_THROUGH: "point",
        DagKind.KILLING_LEAF: "box",
        DagKind.TIME_ZERO_LEAF: "triangle",
    }
    lines = ["digraph dual {", "  rankdir=TB;"]
    for v in sorted(dag.kinds):
        lines.append(
            f'  "{v.x},{v.t}" [shape={shapes[dag.kinds[v]]} label="({v.x},{v.t})"];'
        )
    for p, c in dag.edges():
        lines.append(f'  "{p.x},{p.t}" -> "{c.x},{c.t}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def validate_dag(dag: RootedDag) -> None:
    """Check structural invariants; raises on violation (used by tests)."""
    if dag.root not in dag.kinds:
        raise ReductionError("root missing")
    seen = set()
    stack = [dag.root]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        kind = dag.kinds[v]
        deg = dag.out_degree(v)
        if kind in LEAF_KINDS and deg != 0:
            raise ReductionError(f"leaf {v} has children")
        if kind is DagKind.BRANCH and deg != 2:
            raise ReductionError(f"branch {v} has out-degree {deg}")
        if kind is DagKind.PASS_THROUGH and deg != 1:
            raise ReductionError(f"pass-through {v} has out-degree {deg}")
        for c in dag.children.get(v, ()):
            if c.t >= v.t:
                raise ReductionError(f"edge {v}->{c} does not decrease time")
            stack.append(c)
    if seen != dag.vertices:
        raise ReductionError("unreachable vertices present")
