"""Random linear network codes with a key node, and their global encoding.

A code is sampled on the augmented network (base network plus the second
terminal) and restricted to the base network by dropping the star edges.
Every edge symbol is a linear functional of ``(M, N)``; its coefficient
vector has ``R`` message entries followed by ``z`` key entries.

All coefficients of a code live in one flat vector laid out as
``B_K | A_S | B_S | local coefficients by edge index``. A ``CodeBatch`` stacks
many such vectors so a whole family of codes on one network can be
propagated, simulated and checked together.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .field import FieldError, FieldSpec, as_matrix, mat_rank, rowspace_contains, solve_left
from .network import AugmentedNetwork, Network, NetworkError, augment_star

CODE_FORMAT = "secnc-code/1"


class NotDecodableError(ValueError):
    def __init__(self, deficit: int):
        self.deficit = deficit
        super().__init__(f"message not decodable at terminal (rank deficit {deficit})")


@lru_cache(maxsize=64)
def _field(q: int) -> FieldSpec:
    return FieldSpec(q)


def _graph(net: Network | AugmentedNetwork) -> Network:
    return net.network if isinstance(net, AugmentedNetwork) else net


@dataclass(frozen=True, eq=False)
class CodeLayout:
    """Where each coefficient of a code sits in its flat coefficient vector."""

    R: int
    z: int
    o_k: int
    o_s: int
    i_s: int
    size: int
    local_offsets: tuple  # per edge: offset of its local vector, or None
    # processing plan in topological order:
    #   ("key", outs) | ("source", outs, ins) | ("mix", outs, ins, gather)
    # where gather[o, i] is the flat index of the coefficient of ins[i] on outs[o]
    steps: tuple

    @property
    def bk(self) -> slice:
        return slice(0, self.o_k * self.z)

    @property
    def as_(self) -> slice:
        start = self.o_k * self.z
        return slice(start, start + self.o_s * self.R)

    @property
    def bs(self) -> slice:
        start = self.o_k * self.z + self.o_s * self.R
        return slice(start, start + self.o_s * self.i_s)


@lru_cache(maxsize=4096)
def code_layout(g: Network, R: int, z: int) -> CodeLayout:
    k, s = g.key_node, g.source
    o_k, o_s, i_s = len(g.out_edges(k)), len(g.out_edges(s)), len(g.in_edges(s))
    off = o_k * z + o_s * R + o_s * i_s
    offsets = []
    for u, _ in g.edges:
        if u in (k, s):
            offsets.append(None)
        else:
            offsets.append(off)
            off += len(g.in_edges(u))
    steps = []
    for u in g.order:
        outs = np.array(g.out_edges(u), dtype=np.intp)
        if not len(outs):
            continue
        ins = np.array(g.in_edges(u), dtype=np.intp)
        if u == k:
            steps.append(("key", outs))
        elif u == s:
            steps.append(("source", outs, ins))
        elif len(ins):
            gather = np.array([[offsets[e] + i for i in range(len(ins))] for e in outs], dtype=np.intp)
            steps.append(("mix", outs, ins, gather))
    return CodeLayout(R, z, o_k, o_s, i_s, off, tuple(offsets), tuple(steps))


@dataclass(frozen=True, eq=False)
class LinearCode:
    net: Network | AugmentedNetwork
    R: int
    z: int
    field: FieldSpec
    seed: int | None
    coefficients: np.ndarray  # flat, see CodeLayout

    @property
    def graph(self) -> Network:
        return _graph(self.net)

    @property
    def base(self) -> Network:
        return self.net.base if isinstance(self.net, AugmentedNetwork) else self.net

    @property
    def layout(self) -> CodeLayout:
        return code_layout(self.graph, self.R, self.z)

    @property
    def b_k(self) -> np.ndarray:
        lay = self.layout
        return self.coefficients[lay.bk].reshape(lay.o_k, self.z)

    @property
    def a_s(self) -> np.ndarray:
        lay = self.layout
        return self.coefficients[lay.as_].reshape(lay.o_s, self.R)

    @property
    def b_s(self) -> np.ndarray:
        lay = self.layout
        return self.coefficients[lay.bs].reshape(lay.o_s, lay.i_s)

    @property
    def local(self) -> tuple:
        g = self.graph
        out = []
        for e, off in enumerate(self.layout.local_offsets):
            if off is None:
                out.append(None)
            else:
                out.append(self.coefficients[off : off + len(g.in_edges(g.edges[e][0]))])
        return tuple(out)

    @classmethod
    def from_parts(cls, net, R, z, field, seed, b_k, a_s, b_s, local) -> "LinearCode":
        g = _graph(net)
        lay = code_layout(g, R, z)
        b_k, a_s, b_s = (np.asarray(x, dtype=np.int64) for x in (b_k, a_s, b_s))
        if b_k.shape != (lay.o_k, z) or a_s.shape != (lay.o_s, R) or b_s.shape != (lay.o_s, lay.i_s):
            raise ValueError("source/key coefficient shapes do not match the network")
        if len(local) != g.num_edges:
            raise ValueError("local coefficient list does not match edge count")
        parts = [b_k.ravel(), a_s.ravel(), b_s.ravel()]
        for e, (c, off) in enumerate(zip(local, lay.local_offsets)):
            if off is None:
                continue
            c = np.asarray(c, dtype=np.int64).ravel()
            if len(c) != len(g.in_edges(g.edges[e][0])):
                raise ValueError(f"edge {e}: wrong number of local coefficients")
            parts.append(c)
        coef = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return cls(net, R, z, field, seed, coef.astype(np.int64))

    def __eq__(self, other):
        if not isinstance(other, LinearCode):
            return NotImplemented
        return code_to_dict(self) == code_to_dict(other)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CodeBatch:
    """Several codes on one network; row ``i`` of ``coefficients`` is code ``i``."""

    net: Network | AugmentedNetwork
    R: int
    z: int
    field: FieldSpec
    coefficients: np.ndarray  # (batch, layout.size)

    @property
    def graph(self) -> Network:
        return _graph(self.net)

    @property
    def layout(self) -> CodeLayout:
        return code_layout(self.graph, self.R, self.z)

    def __len__(self) -> int:
        return self.coefficients.shape[0]

    def __getitem__(self, i: int) -> LinearCode:
        return LinearCode(self.net, self.R, self.z, self.field, None, self.coefficients[i])

    @classmethod
    def of(cls, code: LinearCode) -> "CodeBatch":
        return cls(code.net, code.R, code.z, code.field, code.coefficients[None, :])


@dataclass(frozen=True, eq=False)
class GlobalEncoding:
    """Row ``e`` of ``vectors`` is the global encoding vector of edge ``e``."""

    R: int
    z: int
    q: int
    vectors: np.ndarray

    def a(self, e: int) -> np.ndarray:
        return self.vectors[e, : self.R]

    def b(self, e: int) -> np.ndarray:
        return self.vectors[e, self.R :]

    def rows(self, edges) -> np.ndarray:
        edges = list(edges)
        return self.vectors[edges].reshape(len(edges), self.R + self.z)

    def restrict(self, n_edges: int) -> "GlobalEncoding":
        return GlobalEncoding(self.R, self.z, self.q, self.vectors[:n_edges])


def sample_code(net: Network | AugmentedNetwork, R: int, z: int, field: FieldSpec, seed) -> LinearCode:
    """Draw every coefficient i.i.d. uniform over F_q, as one flat vector."""
    if R < 1 or z < 0:
        raise ValueError("need R >= 1 and z >= 0")
    lay = code_layout(_graph(net), R, z)
    rng = np.random.default_rng(seed)
    coef = rng.integers(0, field.q, size=lay.size, dtype=np.int64)
    return LinearCode(net, R, z, field, seed if isinstance(seed, (int, np.integer)) else None, coef)


def sample_codes(net: Network | AugmentedNetwork, R: int, z: int, field: FieldSpec, rng, count: int) -> CodeBatch:
    if R < 1 or z < 0:
        raise ValueError("need R >= 1 and z >= 0")
    lay = code_layout(_graph(net), R, z)
    rng = np.random.default_rng(rng)
    coef = rng.integers(0, field.q, size=(count, lay.size), dtype=np.int64)
    return CodeBatch(net, R, z, field, coef)


def restrict(code: LinearCode) -> LinearCode:
    """The same coefficients on the base network (star edges dropped)."""
    if not isinstance(code.net, AugmentedNetwork):
        return code
    base = code.net.base
    keep = len(base.out_edges(base.source))
    return LinearCode.from_parts(
        base, code.R, code.z, code.field, code.seed,
        code.b_k, code.a_s[:keep], code.b_s[:keep], code.local[: base.num_edges],
    )


def _bmm(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Batched ``a @ b`` mod q, exact for any supported q."""
    inner = a.shape[-1]
    if (q - 1) ** 2 * max(inner, 1) < 2**63:
        return np.matmul(a, b) % q
    return (np.matmul(a.astype(object), b.astype(object)) % q).astype(np.int64)


def propagate_batch(batch: CodeBatch) -> np.ndarray:
    """Global encoding vectors of every code: shape ``(batch, edges, R+z)``."""
    g = batch.graph
    lay = batch.layout
    q = batch.field.q
    R, z = batch.R, batch.z
    coef = batch.coefficients
    nb = coef.shape[0]
    vec = np.zeros((nb, g.num_edges, R + z), dtype=np.int64)
    for step in lay.steps:
        kind, outs = step[0], step[1]
        if kind == "key":
            vec[:, outs, R:] = coef[:, lay.bk].reshape(nb, lay.o_k, z)
        elif kind == "source":
            ins = step[2]
            b_s = coef[:, lay.bs].reshape(nb, lay.o_s, lay.i_s)
            mixed = _bmm(b_s, vec[:, ins], q)
            mixed[:, :, :R] += coef[:, lay.as_].reshape(nb, lay.o_s, R)
            vec[:, outs] = mixed % q
        else:
            ins, gather = step[2], step[3]
            vec[:, outs] = _bmm(coef[:, gather], vec[:, ins], q)
    return vec


def propagate(code: LinearCode) -> GlobalEncoding:
    vec = propagate_batch(CodeBatch.of(code))[0]
    return GlobalEncoding(code.R, code.z, code.field.q, vec)


@lru_cache(maxsize=64)
def _unit_message_rows(R: int, z: int) -> np.ndarray:
    out = np.hstack([np.eye(R, dtype=np.int64), np.zeros((R, z), dtype=np.int64)])
    out.setflags(write=False)
    return out


def decodable(enc: GlobalEncoding, net: Network, R: int | None = None) -> bool:
    """True iff a linear decoder at the terminal recovers M exactly."""
    R = enc.R if R is None else R
    rows = enc.rows(net.in_edges(net.terminal))
    return rowspace_contains(rows, _unit_message_rows(R, enc.z), _field(enc.q))


def decodable_batch(vectors: np.ndarray, net: Network, R: int, q: int) -> np.ndarray:
    """``decodable`` for a stack of encodings ``(batch, edges, R+z)``."""
    nb, _, width = vectors.shape
    rows = vectors[:, list(net.in_edges(net.terminal)), :]
    probe = np.broadcast_to(_unit_message_rows(R, width - R), (nb, R, width))
    both = np.concatenate([rows, probe], axis=1)
    return kernels.rank_batch(both, q) == kernels.rank_batch(rows, q)


def decode_matrix(enc: GlobalEncoding, net: Network, R: int | None = None) -> np.ndarray:
    """D with ``D @ stack(In(T)) == [I_R | 0]``."""
    R = enc.R if R is None else R
    f = _field(enc.q)
    rows = enc.rows(net.in_edges(net.terminal))
    target = _unit_message_rows(R, enc.z)
    try:
        return solve_left(rows, target, f)
    except FieldError:
        deficit = mat_rank(np.vstack([rows, target]), f) - mat_rank(rows, f)
        raise NotDecodableError(deficit) from None


def star_feasible(enc: GlobalEncoding, aug: AugmentedNetwork, R: int | None = None, z: int | None = None) -> bool:
    """Both T and T* can recover all of (M, N)."""
    R = enc.R if R is None else R
    z = enc.z if z is None else z
    f = _field(enc.q)
    g = aug.network
    return all(
        mat_rank(enc.rows(g.in_edges(term)), f) == R + z
        for term in (g.terminal, aug.star_terminal)
    )


# -- concrete simulation (values, not coefficient vectors) --------------------


@lru_cache(maxsize=32)
def all_inputs(q: int, n: int) -> np.ndarray:
    """Every vector of F_q^n, one per row, in lexicographic order (read-only)."""
    if n == 0:
        out = np.zeros((1, 0), dtype=np.int64)
    else:
        out = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    out.setflags(write=False)
    return out


def simulate_batch(batch: CodeBatch, inputs: np.ndarray) -> np.ndarray:
    """Edge symbols for every code and every concrete ``(M, N)`` row.

    Returns shape ``(batch, len(inputs), edges)``. Works node by node on
    symbol values, never forming global encoding vectors.
    """
    g = batch.graph
    lay = batch.layout
    q = batch.field.q
    R = batch.R
    coef = batch.coefficients
    nb = coef.shape[0]
    inputs = np.asarray(inputs, dtype=np.int64)
    msg = np.broadcast_to(inputs[:, :R], (nb,) + inputs[:, :R].shape)
    key = np.broadcast_to(inputs[:, R:], (nb,) + inputs[:, R:].shape)
    x = np.zeros((nb, inputs.shape[0], g.num_edges), dtype=np.int64)
    for step in lay.steps:
        kind, outs = step[0], step[1]
        if kind == "key":
            b_k = coef[:, lay.bk].reshape(nb, lay.o_k, batch.z)
            x[:, :, outs] = _bmm(key, b_k.transpose(0, 2, 1), q)
        elif kind == "source":
            ins = step[2]
            a_s = coef[:, lay.as_].reshape(nb, lay.o_s, R)
            b_s = coef[:, lay.bs].reshape(nb, lay.o_s, lay.i_s)
            x[:, :, outs] = (_bmm(msg, a_s.transpose(0, 2, 1), q) + _bmm(x[:, :, ins], b_s.transpose(0, 2, 1), q)) % q
        else:
            ins, gather = step[2], step[3]
            x[:, :, outs] = _bmm(x[:, :, ins], coef[:, gather].transpose(0, 2, 1), q)
    return x


def simulate(code: LinearCode, inputs: np.ndarray) -> np.ndarray:
    """Edge symbols per concrete ``(M, N)`` row: shape ``(len(inputs), edges)``."""
    return simulate_batch(CodeBatch.of(code), inputs)[0]


def row_keys(a: np.ndarray, q: int) -> np.ndarray:
    """Injective integer key per row of the last axis (base-q digits)."""
    k = a.shape[-1]
    if k == 0:
        return np.zeros(a.shape[:-1], dtype=np.int64)
    if q**k >= 2**62:
        raise OverflowError("row keys would overflow int64")
    powers = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return a @ powers


def decodable_bruteforce_batch(batch: CodeBatch, table: np.ndarray | None = None, budget: int = 10**6) -> np.ndarray:
    """Per code: is M a function of X_In(T) over all q^(R+z) inputs?"""
    q, R, z = batch.field.q, batch.R, batch.z
    if q ** (R + z) > budget:
        raise ValueError(f"q^(R+z) = {q ** (R + z)} exceeds enumeration budget {budget}")
    inputs = all_inputs(q, R + z)
    if table is None:
        table = simulate_batch(batch, inputs)
    g = batch.graph
    n_codes = len(batch)
    ins = list(g.in_edges(g.terminal))
    n_msg, n_obs = q**R, q ** len(ins)
    msg = row_keys(inputs[:, :R], q)  # (P,)
    out = np.ones(n_codes, dtype=bool)
    if n_codes * n_obs * n_msg < 2**62:
        obs = row_keys(table[:, :, ins], q)  # (B, P)
        cell = (np.arange(n_codes)[:, None] * n_obs + obs) * n_msg + msg[None, :]
        seen = np.unique(cell) // n_msg  # one entry per distinct (code, observation, message)
        clash = seen[1:][seen[1:] == seen[:-1]]  # same observation, different message
        out[np.unique(clash // n_obs)] = False
        return out
    for b in range(n_codes):
        mapping: dict[tuple, int] = {}
        for obs_row, m in zip(table[b][:, ins].tolist(), msg.tolist()):
            if mapping.setdefault(tuple(obs_row), m) != m:
                out[b] = False
                break
    return out


def decodable_bruteforce(code: LinearCode, budget: int = 10**6) -> bool:
    """M is a function of X_In(T) over all q^(R+z) equally likely inputs."""
    return bool(decodable_bruteforce_batch(CodeBatch.of(code), budget=budget)[0])


# -- serialization -------------------------------------------------------------


def code_to_dict(code: LinearCode) -> dict:
    aug = isinstance(code.net, AugmentedNetwork)
    return {
        "format": CODE_FORMAT,
        "q": code.field.q,
        "R": code.R,
        "z": code.z,
        "seed": code.seed,
        "network": code.base.to_dict(),
        "star_edges": code.net.R_plus_z if aug else 0,
        "b_k": code.b_k.tolist(),
        "a_s": code.a_s.tolist(),
        "b_s": code.b_s.tolist(),
        "local": [None if c is None else c.tolist() for c in code.local],
    }


def code_from_dict(d: dict) -> LinearCode:
    if not isinstance(d, dict) or d.get("format") != CODE_FORMAT:
        raise ValueError("not a code record (missing or unsupported 'format')")
    try:
        f = FieldSpec(d["q"])
        R, z = int(d["R"]), int(d["z"])
        base = Network.from_dict(d["network"])
        star = int(d.get("star_edges", 0))
        if star and star != R + z:
            raise ValueError("star edge count must equal R + z")
        net = augment_star(base, R, z) if star else base
        g = _graph(net)
        lay = code_layout(g, R, z)
        b_k = as_matrix(d["b_k"], f, cols=z).reshape(lay.o_k, z)
        a_s = as_matrix(d["a_s"], f, cols=R).reshape(lay.o_s, R)
        b_s = as_matrix(d["b_s"], f, cols=lay.i_s).reshape(lay.o_s, lay.i_s)
        local = [None if c is None else as_matrix([c], f, cols=len(c))[0] for c in d["local"]]
        seed = d.get("seed")
        return LinearCode.from_parts(net, R, z, f, seed, b_k, a_s, b_s, local)
    except (KeyError, TypeError, FieldError, NetworkError) as exc:
        raise ValueError(f"malformed code record: {exc}") from exc


def dumps_code(code: LinearCode) -> str:
    return json.dumps(code_to_dict(code), indent=2) + "\n"


def loads_code(text: str) -> LinearCode:
    return code_from_dict(json.loads(text))
