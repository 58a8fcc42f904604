"""Keyed unicast networks: parsing, topological order, min-cuts, and the
star augmentation used by the achievability construction.

Edges are identified by their position in ``Network.edges``; parallel edges
are repeated entries.
"""

from __future__ import annotations

import heapq
import itertools
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

_ID = re.compile(r"^[A-Za-z0-9_]+$")
_ROLES = {"source": "source", "key": "key_node", "terminal": "terminal"}


class NetworkError(ValueError):
    """Invalid network; ``line`` is the 1-based source line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _find_cycle_free(nodes, edges) -> bool:
    indeg = {v: 0 for v in nodes}
    succ = {v: [] for v in nodes}
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    stack = [v for v in nodes if indeg[v] == 0]
    seen = 0
    while stack:
        u = stack.pop()
        seen += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                stack.append(v)
    return seen == len(nodes)


@dataclass(frozen=True)
class Network:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    source: str
    key_node: str
    terminal: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((str(u), str(v)) for u, v in self.edges))
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("duplicate node identifiers")
        known = set(self.nodes)
        for u, v in self.edges:
            if u not in known or v not in known:
                raise NetworkError(f"edge {u}->{v} uses an undeclared node")
        for role in ("source", "key_node", "terminal"):
            if getattr(self, role) not in known:
                raise NetworkError(f"{role} {getattr(self, role)!r} is not a node")
        if len({self.source, self.key_node, self.terminal}) != 3:
            raise NetworkError("source, key and terminal must be distinct nodes")
        if not _find_cycle_free(self.nodes, self.edges):
            raise NetworkError("edge relation contains a cycle")

    @cached_property
    def _incidence(self):
        ins = {v: [] for v in self.nodes}
        outs = {v: [] for v in self.nodes}
        for i, (u, v) in enumerate(self.edges):
            outs[u].append(i)
            ins[v].append(i)
        return (
            {v: tuple(e) for v, e in ins.items()},
            {v: tuple(e) for v, e in outs.items()},
        )

    def in_edges(self, node: str) -> tuple[int, ...]:
        return self._incidence[0][node]

    def out_edges(self, node: str) -> tuple[int, ...]:
        return self._incidence[1][node]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def order(self) -> tuple[str, ...]:
        return tuple(topo_order(self))

    def with_edge(self, u: str, v: str) -> "Network":
        nodes = self.nodes + tuple(x for x in dict.fromkeys((u, v)) if x not in self.nodes)
        return Network(nodes, self.edges + ((u, v),), self.source, self.key_node, self.terminal)

    def to_text(self) -> str:
        lines = [f"node {v}" for v in self.nodes]
        lines += [f"edge {u} {v}" for u, v in self.edges]
        lines += [
            f"source {self.source}",
            f"key {self.key_node}",
            f"terminal {self.terminal}",
        ]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edges],
            "source": self.source,
            "key": self.key_node,
            "terminal": self.terminal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        try:
            return cls(
                tuple(d["nodes"]),
                tuple(tuple(e) for e in d["edges"]),
                d["source"],
                d["key"],
                d["terminal"],
            )
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed network record: {exc}") from exc


def parse_network(text: str) -> Network:
    """Parse the line-oriented network format (``node``/``edge``/role lines)."""
    nodes: dict[str, None] = {}
    edges: list[tuple[str, str]] = []
    edge_lines: list[int] = []
    roles: dict[str, tuple[str, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        kw, *args = body.split()
        expected = {"node": 1, "edge": 2, "source": 1, "key": 1, "terminal": 1}
        if kw not in expected:
            raise NetworkError(f"unknown statement {kw!r}", lineno)
        if len(args) != expected[kw]:
            raise NetworkError(f"{kw} takes {expected[kw]} argument(s)", lineno)
        for a in args:
            if not _ID.match(a):
                raise NetworkError(f"invalid node id {a!r}", lineno)
        if kw == "node":
            nodes.setdefault(args[0])
        elif kw == "edge":
            u, v = args
            nodes.setdefault(u)
            nodes.setdefault(v)
            edges.append((u, v))
            edge_lines.append(lineno)
        else:
            if kw in roles:
                raise NetworkError(f"duplicate {kw} declaration", lineno)
            roles[kw] = (args[0], lineno)

    for kw in ("source", "key", "terminal"):
        if kw not in roles:
            raise NetworkError(f"missing {kw} declaration")
        node, lineno = roles[kw]
        if node not in nodes:
            raise NetworkError(f"unknown node {node!r} in {kw} declaration", lineno)
    (s, ls), (k, lk), (t, lt) = roles["source"], roles["key"], roles["terminal"]
    if s == k:
        raise NetworkError("source and key must differ", max(ls, lk))
    if s == t:
        raise NetworkError("source and terminal must differ", max(ls, lt))
    if k == t:
        raise NetworkError("key and terminal must differ", max(lk, lt))

    # report the first edge (in file order) that closes a cycle
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for (u, v), lineno in zip(edges, edge_lines):
        if _reaches(succ, v, u):
            raise NetworkError(f"edge {u} {v} creates a cycle", lineno)
        succ[u].append(v)

    return Network(tuple(nodes), tuple(edges), s, k, t)


def _reaches(succ, start, goal) -> bool:
    if start == goal:
        return True
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in succ[u]:
            if v == goal:
                return True
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def topo_order(net: Network) -> list[str]:
    """Kahn's algorithm; among ready nodes the earliest-declared goes first."""
    pos = {v: i for i, v in enumerate(net.nodes)}
    indeg = {v: 0 for v in net.nodes}
    for _, v in net.edges:
        indeg[v] += 1
    ready = [pos[v] for v in net.nodes if indeg[v] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        u = net.nodes[heapq.heappop(ready)]
        out.append(u)
        for e in net.out_edges(u):
            v = net.edges[e][1]
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, pos[v])
    return out


def mincut(net: Network, sources: Iterable[str] | str, sink: str) -> int:
    """Max-flow value from a super-source over ``sources`` to ``sink``.

    Every real edge has unit capacity, so each BFS augmentation pushes one unit
    (Edmonds-Karp).
    """
    if isinstance(sources, str):
        sources = (sources,)
    sources = set(sources)
    known = set(net.nodes)
    for v in sources | {sink}:
        if v not in known:
            raise NetworkError(f"unknown node {v!r}")
    if sink in sources:
        raise NetworkError("sink must not be one of the sources")

    # arcs: parallel lists; arc i and i ^ 1 are mutual reverses
    index = {v: i for i, v in enumerate(net.nodes)}
    n = len(net.nodes) + 1
    super_src = n - 1
    head: list[int] = []
    cap: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n)]

    def add_arc(u, v, c):
        adj[u].append(len(head))
        head.append(v)
        cap.append(c)
        adj[v].append(len(head))
        head.append(u)
        cap.append(0)

    for u, v in net.edges:
        add_arc(index[u], index[v], 1)
    big = len(net.edges) + 1
    for s in sorted(sources, key=index.get):
        add_arc(super_src, index[s], big)

    target = index[sink]
    flow = 0
    while True:
        parent_arc = [-1] * n
        parent_arc[super_src] = -2
        dq = deque([super_src])
        while dq and parent_arc[target] == -1:
            u = dq.popleft()
            for a in adj[u]:
                v = head[a]
                if cap[a] > 0 and parent_arc[v] == -1:
                    parent_arc[v] = a
                    dq.append(v)
        if parent_arc[target] == -1:
            return flow
        v = target
        while v != super_src:
            a = parent_arc[v]
            cap[a] -= 1
            cap[a ^ 1] += 1
            v = head[a ^ 1]
        flow += 1


@dataclass(frozen=True)
class CutCapacities:
    c_ks: int
    c_kt: int
    c_st: int
    c_kst: int

    def __post_init__(self):
        if min(self.c_ks, self.c_kt, self.c_st, self.c_kst) < 0:
            raise ValueError("cut capacities must be non-negative")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.c_ks, self.c_kt, self.c_st, self.c_kst)

    def to_dict(self) -> dict:
        return {"C_K-S": self.c_ks, "C_K-T": self.c_kt, "C_S-T": self.c_st, "C_KS-T": self.c_kst}


def cut_capacities(net: Network) -> CutCapacities:
    k, s, t = net.key_node, net.source, net.terminal
    return CutCapacities(
        c_ks=mincut(net, {k}, s),
        c_kt=mincut(net, {k}, t),
        c_st=mincut(net, {s}, t),
        c_kst=mincut(net, {k, s}, t),
    )


@dataclass(frozen=True)
class AugmentedNetwork:
    """The base network plus a second terminal fed by R+z parallel S edges."""

    base: Network
    star_terminal: str
    star_edges: tuple[int, ...]
    network: Network = field(repr=False, compare=False)

    @property
    def R_plus_z(self) -> int:
        return len(self.star_edges)


def augment_star(net: Network, R: int, z: int) -> AugmentedNetwork:
    if R < 0 or z < 0:
        raise ValueError("R and z must be non-negative")
    if R + z == 0:
        raise ValueError("empty augmentation")
    star = "T_star"
    while star in net.nodes:
        star += "_"
    m = len(net.edges)
    full = Network(
        net.nodes + (star,),
        net.edges + ((net.source, star),) * (R + z),
        net.source,
        net.key_node,
        net.terminal,
    )
    return AugmentedNetwork(net, star, tuple(range(m, m + R + z)), full)


def random_dag(
    rng: np.random.Generator,
    max_nodes: int = 8,
    max_edges: int = 12,
    min_nodes: int = 3,
    ordered_roles: bool = True,
) -> Network:
    """Random DAG with roles; parallel edges allowed.

    Nodes are created in a random topological order. With ``ordered_roles``
    the key node comes first, the terminal last and the source in between;
    otherwise the three roles land on arbitrary distinct nodes.
    """
    n = int(rng.integers(min_nodes, max_nodes + 1))
    names = [f"v{i}" for i in range(n)]
    n_edges = int(rng.integers(n - 1, max(n - 1, max_edges) + 1))
    edges = []
    for _ in range(n_edges):
        i = int(rng.integers(0, n - 1))
        j = int(rng.integers(i + 1, n))
        edges.append((names[i], names[j]))
    if ordered_roles:
        k, s, t = 0, int(rng.integers(1, n - 1)), n - 1
    else:
        k, s, t = (int(x) for x in rng.choice(n, size=3, replace=False))
    return Network(tuple(names), tuple(edges), names[s], names[k], names[t])


def _canonical_form(n: int, edges, fixed=()) -> tuple:
    """Smallest sorted edge list over relabelings that keep ``fixed`` in front.

    Only nodes sharing (in-degree, out-degree) are permuted among themselves,
    which is enough because any isomorphism preserves degrees.
    """
    indeg = Counter(v for _, v in edges)
    outdeg = Counter(u for u, _ in edges)
    deg = lambda v: (indeg[v], outdeg[v])
    free = sorted((v for v in range(n) if v not in fixed), key=deg)
    groups = [list(g) for _, g in itertools.groupby(free, key=deg)]
    best = None
    for perms in itertools.product(*(itertools.permutations(g) for g in groups)):
        label = {v: i for i, v in enumerate([*fixed, *itertools.chain.from_iterable(perms)])}
        form = tuple(sorted((label[u], label[v]) for u, v in edges))
        if best is None or form < best:
            best = form
    return n, best


def _acyclic_ints(n: int, edges) -> bool:
    return _find_cycle_free(range(n), edges)


def enumerate_topologies(max_edges: int) -> list[Network]:
    """Every connected DAG multigraph with 1..max_edges edges and distinct K, S, T.

    Isomorphic copies are removed with the three roles held fixed, so two
    graphs that differ only in which node plays K, S or T both appear. Nodes
    are named K, S, T, v3, v4, ... and every node touches an edge. Growth
    adds one edge at a time (possibly to a fresh node), which reaches every
    connected multigraph.
    """
    level = {(2, ((0, 1),))}
    shapes = set(level)
    for _ in range(max_edges - 1):
        nxt = set()
        for n, edges in level:
            for u in range(n):
                grown = [(n, edges + ((u, v),)) for v in range(n) if v != u]
                grown += [(n + 1, edges + ((u, n),)), (n + 1, edges + ((n, u),))]
                for n2, e2 in grown:
                    if _acyclic_ints(n2, e2):
                        nxt.add(_canonical_form(n2, e2))
        level = nxt
        shapes |= nxt
    labelled = set()
    for n, edges in shapes:
        for roles in itertools.permutations(range(n), 3):
            labelled.add(_canonical_form(n, edges, roles))
    out = []
    for n, edges in sorted(labelled, key=lambda t: (len(t[1]), t)):
        names = ["K", "S", "T"] + [f"v{i}" for i in range(3, n)]
        out.append(Network(tuple(names), tuple((names[u], names[v]) for u, v in edges), "S", "K", "T"))
    return out
