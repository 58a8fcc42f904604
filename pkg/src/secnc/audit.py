"""z-security of a concrete linear code.

A wiretap set W leaks nothing about M iff rk([A_W | B_W]) == rk(B_W). The
audit checks that for every z-subset of base-network edges; the entropy
oracle recomputes I(M; X_W) from an exhaustive input table so the rank test
can be checked against the definition on small instances.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .codec import CodeBatch, GlobalEncoding, LinearCode, row_keys, all_inputs, simulate_batch
from .field import FieldSpec, mat_rank
from .network import Network

DEFAULT_SUBSET_BUDGET = 10**7
DEFAULT_ENUM_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class WiretapMatrices:
    subset: tuple[int, ...]
    a_w: np.ndarray  # |W| x R
    b_w: np.ndarray  # |W| x z
    q: int


@dataclass(frozen=True)
class Violation:
    subset: tuple[int, ...]
    rank_ab: int
    rank_b: int


@dataclass(frozen=True)
class SecurityReport:
    secure: bool
    subsets_checked: int
    first_violation: Violation | None = None
    violations: int = 0

    def to_dict(self) -> dict:
        v = self.first_violation
        return {
            "secure": self.secure,
            "subsets_checked": self.subsets_checked,
            "violations": self.violations,
            "violation": None
            if v is None
            else {"subset": list(v.subset), "rank_ab": v.rank_ab, "rank_b": v.rank_b},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def wiretap_matrices(enc: GlobalEncoding, subset: Sequence[int], n_edges: int | None = None) -> WiretapMatrices:
    """Stack the global vectors of ``subset``; ``n_edges`` bounds the wiretappable universe."""
    subset = tuple(int(e) for e in subset)
    limit = enc.vectors.shape[0] if n_edges is None else n_edges
    if len(set(subset)) != len(subset):
        raise ValueError(f"duplicate edge index in wiretap set {subset}")
    for e in subset:
        if not 0 <= e < limit:
            raise ValueError(f"edge index {e} out of range [0, {limit})")
    rows = enc.rows(subset)
    return WiretapMatrices(subset, rows[:, : enc.R].copy(), rows[:, enc.R :].copy(), enc.q)


def is_secure_subset(wm: WiretapMatrices) -> bool:
    f = FieldSpec(wm.q)
    return mat_rank(np.hstack([wm.a_w, wm.b_w]), f) == mat_rank(wm.b_w, f)


def audit_all(
    enc: GlobalEncoding,
    net: Network,
    z: int | None = None,
    budget: int = DEFAULT_SUBSET_BUDGET,
    exhaustive: bool = False,
) -> SecurityReport:
    """Check every z-subset of ``net``'s edges in lexicographic order.

    Only the first ``net.num_edges`` rows of ``enc`` are wiretappable, so an
    encoding computed on the augmented network can be passed directly.
    """
    z = enc.z if z is None else z
    m = net.num_edges
    total = math.comb(m, z)
    if total > budget:
        raise BudgetExceeded(f"C({m}, {z}) = {total} subsets exceeds budget {budget}")
    rows = np.ascontiguousarray(enc.vectors[:m], dtype=np.int64)
    if rows.shape[1] != enc.R + z:
        raise ValueError("encoding width does not match R + z")
    checked, violations, first, rab, rb = kernels.audit_scan(rows, enc.R, z, enc.q, exhaustive)
    viol = None if first is None else Violation(tuple(first), int(rab), int(rb))
    return SecurityReport(viol is None, int(checked), viol, int(violations))


def mutual_information(pairs) -> float:
    """I(A; B) in nats from equally likely ``(a, b)`` samples.

    Returns exactly 0.0 when the count table factorizes (decided in integer
    arithmetic); otherwise the value in natural-log units.
    """
    pairs = list(pairs)
    n = len(pairs)
    joint = Counter(pairs)
    ca = Counter(a for a, _ in pairs)
    cb = Counter(b for _, b in pairs)
    independent = len(joint) == len(ca) * len(cb) and all(
        c * n == ca[a] * cb[b] for (a, b), c in joint.items()
    )
    if independent:
        return 0.0
    return sum(c / n * math.log(c * n / (ca[a] * cb[b])) for (a, b), c in joint.items())


def secure_verdicts(vectors: np.ndarray, R: int, q: int, subsets) -> np.ndarray:
    """Rank criterion for every code in a stack and every subset: ``(batch, subsets)`` bools."""
    vectors = np.asarray(vectors, dtype=np.int64)
    n_codes, _, width = vectors.shape
    idx = np.array([list(s) for s in subsets], dtype=np.intp).reshape(len(subsets), -1)
    rows = vectors[:, idx, :].reshape(n_codes * len(subsets), idx.shape[1], width)
    ok = kernels.rank_batch(rows, q) == kernels.rank_batch(rows[:, :, R:], q)
    return ok.reshape(n_codes, len(subsets))


def entropy_oracle_batch(
    batch: CodeBatch,
    subsets,
    table: np.ndarray | None = None,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> np.ndarray:
    """Exact I(M; X_W) in log-q units for every code and subset.

    Enumerates all q^(R+z) equally likely ``(M, N)``, runs each code on them
    (or reads ``table`` from ``simulate_batch``) and tabulates joint counts of
    ``(M, X_W)``. A cell is exactly 0.0 iff the count table factorizes,
    checked in integer arithmetic.
    """
    q, R, z = batch.field.q, batch.R, batch.z
    if q ** (R + z) > budget:
        raise BudgetExceeded(f"q^(R+z) = {q ** (R + z)} exceeds enumeration budget {budget}")
    inputs = all_inputs(q, R + z)
    if table is None:
        table = simulate_batch(batch, inputs)
    sizes = {len(s) for s in subsets}
    if len(sizes) > 1:
        return np.hstack([entropy_oracle_batch(batch, [s], table, budget) for s in subsets])
    subsets = np.array([list(s) for s in subsets], dtype=np.intp).reshape(len(subsets), -1)
    n_codes, n_inputs = table.shape[0], table.shape[1]
    n_sub = subsets.shape[0]
    n_msg, n_obs = q**R, q ** subsets.shape[1]
    if n_codes * n_sub * n_msg * n_obs > 50 * budget:
        raise BudgetExceeded("joint count table too large")
    msg = row_keys(inputs[:, :R], q)  # (inputs,)
    obs = row_keys(table[:, :, subsets], q)  # (codes, inputs, subsets)
    group = np.arange(n_codes * n_sub).reshape(n_codes, 1, n_sub)
    cell = (group * n_msg + msg[None, :, None]) * n_obs + obs
    joint = np.bincount(cell.ravel(), minlength=n_codes * n_sub * n_msg * n_obs)
    joint = joint.reshape(n_codes, n_sub, n_msg, n_obs)
    c_msg = joint.sum(axis=3, keepdims=True)
    c_obs = joint.sum(axis=2, keepdims=True)
    expected = c_msg * c_obs
    independent = np.all(joint * n_inputs == expected, axis=(2, 3))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = joint * n_inputs / np.where(expected > 0, expected, 1)
        terms = np.where(joint > 0, joint * np.log(np.where(joint > 0, ratio, 1.0)), 0.0)
    info = terms.sum(axis=(2, 3)) / n_inputs / math.log(q)
    return np.where(independent, 0.0, info)


def entropy_oracle(
    code: LinearCode,
    subset: Sequence[int],
    budget: int = DEFAULT_ENUM_BUDGET,
    table: np.ndarray | None = None,
) -> float:
    """Exact I(M; X_W) in log-q units by enumerating every (M, N).

    ``table`` may carry a precomputed ``simulate(code, all_inputs(...))`` so
    several subsets of one code share the enumeration.
    """
    tab = None if table is None else np.asarray(table)[None]
    return float(entropy_oracle_batch(CodeBatch.of(code), [subset], tab, budget)[0, 0])
