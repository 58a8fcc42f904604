"""Monte Carlo campaigns over random codes.

Seeds: trial ``i`` at rate point ``(R, z)`` under base seed ``b`` uses the
64-bit word ``SeedSequence([b, R, z, i]).generate_state(1, uint64)[0]``. The
counter is part of the entropy, so trials are independent and can be run in
any order or on any number of workers.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .audit import DEFAULT_SUBSET_BUDGET, audit_all, entropy_oracle_batch, secure_verdicts
from .codec import (
    all_inputs,
    decodable,
    decodable_batch,
    decodable_bruteforce_batch,
    propagate,
    propagate_batch,
    restrict,
    sample_code,
    sample_codes,
    simulate_batch,
    star_feasible,
)
from .field import FieldSpec, mat_mul, mat_rank, random_matrix
from .network import Network, augment_star, cut_capacities
from .region import RatePoint, feasible


def trial_seed(base_seed: int, *counter: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), *(int(c) for c in counter)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TrialOutcome:
    seed: int
    star_ok: bool
    decodable: bool
    secure: bool
    feasible: bool


def run_trial(net: Network, R: int, z: int, q: int, seed: int, budget: int = DEFAULT_SUBSET_BUDGET) -> TrialOutcome:
    """Sample on the augmented network, restrict to the base network, audit."""
    f = FieldSpec(q)
    aug = augment_star(net, R, z)
    code = sample_code(aug, R, z, f, seed)
    star_ok = star_feasible(propagate(code), aug, R, z)
    enc = propagate(restrict(code))
    dec = decodable(enc, net, R)
    sec = audit_all(enc, net, z, budget=budget).secure
    return TrialOutcome(seed, star_ok, dec, sec, dec and sec)


def lemma1_bound(n_edges: int, R: int, z: int, q: int) -> Fraction:
    return 1 - Fraction(2 * (n_edges + R + z) ** 2, q)


def lemma2_bound(n_edges: int, R: int, z: int, q: int) -> Fraction:
    return 1 - Fraction(math.comb(n_edges, z) * 2 * z, q)


def joint_bound(n_edges: int, R: int, z: int, q: int) -> Fraction:
    return 1 - Fraction(2 * (n_edges + R + z) ** 2 + math.comb(n_edges, z) * 2 * z, q)


def sampling_sigma(p_hat: float, trials: int) -> float:
    return math.sqrt(p_hat * (1 - p_hat) / trials)


@dataclass
class CampaignResult:
    rate_point: RatePoint
    q: int
    trials: int
    successes: int
    decodable: int
    secure: int
    star_ok: int
    restriction_violations: int
    n_edges: int
    base_seed: int
    theoretical_lower_bound: Fraction = field(init=False)
    lemma1_bound: Fraction = field(init=False)
    lemma2_bound: Fraction = field(init=False)

    def __post_init__(self):
        R, z = self.rate_point.R, self.rate_point.z
        self.theoretical_lower_bound = joint_bound(self.n_edges, R, z, self.q)
        self.lemma1_bound = lemma1_bound(self.n_edges, R, z, self.q)
        self.lemma2_bound = lemma2_bound(self.n_edges, R, z, self.q)

    def rate(self, which: str = "successes") -> float:
        return getattr(self, which) / self.trials

    def sigma(self, which: str = "successes") -> float:
        return sampling_sigma(self.rate(which), self.trials)

    def meets_bound(self, which: str, bound: Fraction, k: float = 3.0) -> bool:
        """Empirical rate is at least ``bound - k*sigma`` (always true if the bound is vacuous)."""
        if bound <= 0:
            return True
        return self.rate(which) >= float(bound) - k * self.sigma(which)

    def to_row(self) -> dict:
        return {
            "R": self.rate_point.R,
            "z": self.rate_point.z,
            "q": self.q,
            "edges": self.n_edges,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "decodable": self.decodable,
            "secure": self.secure,
            "successes": self.successes,
            "star_ok": self.star_ok,
            "restriction_violations": self.restriction_violations,
            "decodable_rate": round(self.rate("decodable"), 12),
            "secure_rate": round(self.rate("secure"), 12),
            "joint_rate": round(self.rate("successes"), 12),
            "lemma1_bound": _fmt_bound(self.lemma1_bound),
            "lemma2_bound": _fmt_bound(self.lemma2_bound),
            "joint_bound": _fmt_bound(self.theoretical_lower_bound),
            "lemma1_status": _binding(self.lemma1_bound),
            "lemma2_status": _binding(self.lemma2_bound),
            "joint_status": _binding(self.theoretical_lower_bound),
        }


def _fmt_bound(b: Fraction) -> float:
    return round(float(b), 12)


def _binding(b: Fraction) -> str:
    # a bound at or below zero says nothing about the rate
    return "BINDING" if b > 0 else "NON-BINDING"


def _trial_job(args):
    net, R, z, q, seed, budget = args
    return run_trial(net, R, z, q, seed, budget)


def _run_many(jobs_args, jobs: int):
    if jobs <= 1:
        return [_trial_job(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial_job, jobs_args, chunksize=max(1, len(jobs_args) // (4 * jobs))))


def success_rate(
    net: Network,
    R: int,
    z: int,
    q: int,
    trials: int,
    base_seed: int,
    budget: int = DEFAULT_SUBSET_BUDGET,
    jobs: int = 1,
    outcomes: list | None = None,
) -> CampaignResult:
    """Independent trials at one rate point; ``outcomes`` collects each TrialOutcome if given."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    args = [(net, R, z, q, trial_seed(base_seed, R, z, i), budget) for i in range(trials)]
    results = _run_many(args, jobs)
    if outcomes is not None:
        outcomes.extend(results)
    return CampaignResult(
        rate_point=RatePoint(R, z),
        q=q,
        trials=trials,
        successes=sum(o.feasible for o in results),
        decodable=sum(o.decodable for o in results),
        secure=sum(o.secure for o in results),
        star_ok=sum(o.star_ok for o in results),
        restriction_violations=sum(o.star_ok and not o.decodable for o in results),
        n_edges=net.num_edges,
        base_seed=base_seed,
    )


ACHIEVED = "ACHIEVED"
EMPIRICALLY_INFEASIBLE = "EMPIRICALLY-INFEASIBLE"


@dataclass
class ScanRow:
    R: int
    z: int
    theorem_feasible: bool
    violated_bounds: tuple[str, ...]
    campaign: CampaignResult

    @property
    def status(self) -> str:
        return ACHIEVED if self.campaign.successes > 0 else EMPIRICALLY_INFEASIBLE

    @property
    def contradiction(self) -> bool:
        return not self.theorem_feasible and self.campaign.successes > 0

    @property
    def agrees(self) -> bool:
        return self.theorem_feasible == (self.status == ACHIEVED)

    def to_row(self) -> dict:
        row = self.campaign.to_row()
        row.update(
            theorem_feasible=self.theorem_feasible,
            violated_bounds="".join(self.violated_bounds) or "-",
            status=self.status,
            contradiction=self.contradiction,
        )
        return row


@dataclass
class RegionScan:
    q: int
    trials_per_point: int
    base_seed: int
    caps: tuple[int, int, int, int]
    rows: list[ScanRow]

    @property
    def contradictions(self) -> int:
        return sum(r.contradiction for r in self.rows)

    @property
    def restriction_violations(self) -> int:
        return sum(r.campaign.restriction_violations for r in self.rows)

    def achieved(self) -> set[tuple[int, int]]:
        return {(r.R, r.z) for r in self.rows if r.status == ACHIEVED}

    def theorem_region(self) -> set[tuple[int, int]]:
        return {(r.R, r.z) for r in self.rows if r.theorem_feasible}


def region_scan(
    net: Network,
    q: int,
    trials_per_point: int,
    base_seed: int,
    budget: int = DEFAULT_SUBSET_BUDGET,
    jobs: int = 1,
    outcomes: list | None = None,
) -> RegionScan:
    """Every (R, z) with 1 <= R <= C_KS-T and 0 <= z <= |E|."""
    caps = cut_capacities(net)
    rows = []
    for R in range(1, caps.c_kst + 1):
        for z in range(0, net.num_edges + 1):
            verdict = feasible(caps, RatePoint(R, z))
            camp = success_rate(net, R, z, q, trials_per_point, base_seed, budget, jobs, outcomes)
            rows.append(ScanRow(R, z, verdict.feasible, tuple(sorted(verdict.violated_bounds)), camp))
    return RegionScan(q, trials_per_point, base_seed, caps.as_tuple(), rows)


@dataclass(frozen=True)
class RankProductResult:
    n: int
    m: int
    q: int
    trials: int
    full_rank: int
    seed: int

    @property
    def probability(self) -> float:
        return self.full_rank / self.trials

    @property
    def bound(self) -> Fraction:
        return 1 - Fraction(self.n, self.q)

    @property
    def sigma(self) -> float:
        return sampling_sigma(self.probability, self.trials)

    def to_row(self) -> dict:
        row = asdict(self)
        row.update(probability=round(self.probability, 12), bound=_fmt_bound(self.bound))
        return row


def _full_row_rank_matrix(n: int, m: int, f: FieldSpec, rng) -> np.ndarray:
    while True:
        a = random_matrix(n, m, f, rng)
        if mat_rank(a, f) == n:
            return a


def rank_product_experiment(n: int, m: int, q: int, trials: int, seed: int) -> RankProductResult:
    """Empirical Pr{rk(AB) = n} for full-row-rank n x m A and uniform m x n B.

    A fresh A is drawn (by rejection) for every trial.
    """
    if not 0 <= n <= m:
        raise ValueError("need 0 <= n <= m")
    f = FieldSpec(q)
    rng = np.random.default_rng(seed)
    if n == 0:
        return RankProductResult(n, m, q, trials, trials, seed)
    hits = 0
    for _ in range(trials):
        a = _full_row_rank_matrix(n, m, f, rng)
        b = random_matrix(m, n, f, rng)
        hits += mat_rank(mat_mul(a, b, f), f) == n
    return RankProductResult(n, m, q, trials, hits, seed)


def rank_product_exact(a: np.ndarray, q: int, budget: int = 10**6) -> Fraction:
    """Exact Pr{rk(AB) = n} over all B in F_q^{m x n}, for a fixed n x m A."""
    f = FieldSpec(q)
    a = np.asarray(a, dtype=np.int64)
    n, m = a.shape
    if q ** (m * n) > budget:
        raise ValueError("enumeration budget exceeded")
    hits = total = 0
    for entries in itertools.product(range(q), repeat=m * n):
        b = np.array(entries, dtype=np.int64).reshape(m, n)
        hits += mat_rank(mat_mul(a, b, f), f) == n
        total += 1
    return Fraction(hits, total)


@dataclass
class OracleSweep:
    """Agreement counts between the rank tests and their brute-force oracles."""

    q: int
    networks: int = 0
    codes: int = 0
    subsets: int = 0
    insecure: int = 0
    undecodable: int = 0
    security_mismatches: int = 0
    decodability_mismatches: int = 0
    first_mismatch: tuple | None = None

    def to_row(self) -> dict:
        row = asdict(self)
        row.pop("first_mismatch")
        return row


def oracle_sweep(
    networks,
    q: int,
    R: int = 1,
    z: int = 1,
    codes_per_network: int = 20,
    base_seed: int = 0,
) -> OracleSweep:
    """Sample codes on every network and compare, for each code,

    * the rank criterion against the exact mutual information on every
      z-subset of edges, and
    * the rank decodability test against functional dependence of M on
      X_In(T) over all q^(R+z) inputs.

    Network ``i`` draws its codes from ``trial_seed(base_seed, q, i)``.
    """
    f = FieldSpec(q)
    inputs = all_inputs(q, R + z)
    out = OracleSweep(q)
    for i, net in enumerate(networks):
        batch = sample_codes(net, R, z, f, trial_seed(base_seed, q, i), codes_per_network)
        vectors = propagate_batch(batch)
        table = simulate_batch(batch, inputs)
        subsets = list(itertools.combinations(range(net.num_edges), z))
        by_rank = secure_verdicts(vectors, R, q, subsets)
        by_info = entropy_oracle_batch(batch, subsets, table) == 0
        dec = decodable_batch(vectors, net, R, q)
        dec_bf = decodable_bruteforce_batch(batch, table)
        out.networks += 1
        out.codes += len(batch)
        out.subsets += by_rank.size
        out.insecure += int((~by_rank).sum())
        out.undecodable += int((~dec).sum())
        sec_bad = int((by_rank != by_info).sum())
        dec_bad = int((dec != dec_bf).sum())
        if (sec_bad or dec_bad) and out.first_mismatch is None:
            out.first_mismatch = (i, net)
        out.security_mismatches += sec_bad
        out.decodability_mismatches += dec_bad
    return out


# -- emitters ----------------------------------------------------------------


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def rows_to_json(rows: list[dict], **meta) -> str:
    return json.dumps({**meta, "rows": rows}, indent=2) + "\n"
