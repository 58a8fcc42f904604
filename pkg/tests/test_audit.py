import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secnc.audit import (
    BudgetExceeded,
    SecurityReport,
    WiretapMatrices,
    audit_all,
    entropy_oracle,
    entropy_oracle_batch,
    is_secure_subset,
    mutual_information,
    secure_verdicts,
    wiretap_matrices,
)
from secnc.codec import (
    GlobalEncoding,
    LinearCode,
    all_inputs,
    propagate,
    propagate_batch,
    restrict,
    sample_code,
    sample_codes,
    simulate,
)
from secnc.field import FieldSpec, mat_rank
from secnc.network import augment_star, parse_network, random_dag

ROLES = "key K\nsource S\nterminal T\n"


def wm(a, b, q):
    a, b = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    return WiretapMatrices(tuple(range(len(a))), a, b, q)


def exact_info_bruteforce(a_w, b_w, q):
    """I(M; X_W) in log-q units from the joint table, via explicit entropies."""
    R, z = a_w.shape[1], b_w.shape[1]
    joint = {}
    for m in itertools.product(range(q), repeat=R):
        for n in itertools.product(range(q), repeat=z):
            x = tuple((a_w @ np.array(m, dtype=np.int64) + b_w @ np.array(n, dtype=np.int64)) % q)
            joint[(m, x)] = joint.get((m, x), 0) + 1
    total = q ** (R + z)

    def h(counts):
        return -sum(c / total * math.log(c / total, q) for c in counts if c)

    xs = {}
    for (_, x), c in joint.items():
        xs[x] = xs.get(x, 0) + c
    return h([q**z] * q**R) + h(xs.values()) - h(joint.values())


def test_is_secure_examples():
    assert is_secure_subset(wm([[0]], [[3]], 5))
    assert is_secure_subset(wm([[0, 0]], [[0]], 5))
    assert not is_secure_subset(wm([[1]], [[0]], 2))
    assert is_secure_subset(wm([[1]], [[1]], 2))
    assert exact_info_bruteforce(np.array([[1]]), np.array([[1]]), 2) == pytest.approx(0, abs=1e-12)


def test_wiretap_matrices(line):
    code = sample_code(line, 1, 1, FieldSpec(7), 2)
    enc = propagate(code)
    w = wiretap_matrices(enc, [0])
    assert w.a_w.tolist() == [[0]] and w.b_w.tolist() == [[int(code.b_k[0, 0])]]
    empty = wiretap_matrices(enc, [])
    assert empty.a_w.shape == (0, 1) and empty.b_w.shape == (0, 1)
    assert is_secure_subset(empty)
    with pytest.raises(ValueError, match="duplicate"):
        wiretap_matrices(enc, [1, 1])
    with pytest.raises(ValueError, match="out of range"):
        wiretap_matrices(enc, [2])
    aug = augment_star(line, 1, 1)
    enc_star = propagate(sample_code(aug, 1, 1, FieldSpec(7), 2))
    with pytest.raises(ValueError, match="out of range"):
        wiretap_matrices(enc_star, [2], n_edges=line.num_edges)


def test_wiretap_rows_match_hand_fixture(hand_net):
    code = LinearCode.from_parts(
        hand_net, 1, 1, FieldSpec(5), None, [[2], [3]], [[1]], [[4]], [None, None, None, [1, 2]]
    )
    w = wiretap_matrices(propagate(code), [1, 3])
    assert np.hstack([w.a_w, w.b_w]).tolist() == [[1, 3], [1, 4]]
    assert not is_secure_subset(w)  # difference of the rows is [0|1], so M leaks


def test_audit_examples():
    net = parse_network("edge K S\nedge S T\nedge K T\n" + ROLES)
    enc = GlobalEncoding(1, 0, 5, np.array([[0], [1], [0]]))
    rep = audit_all(enc, net, 0)
    assert rep.secure and rep.subsets_checked == 1
    plain = GlobalEncoding(1, 1, 5, np.array([[0, 1], [1, 0], [0, 1]]))
    rep = audit_all(plain, net)
    assert not rep.secure
    assert rep.first_violation.subset == (1,)
    assert (rep.first_violation.rank_ab, rep.first_violation.rank_b) == (1, 0)
    assert rep.subsets_checked == 2
    full = audit_all(plain, net, exhaustive=True)
    assert full.subsets_checked == 3 and full.violations == 1


def test_audit_budget(butterfly):
    enc = propagate(sample_code(butterfly, 1, 3, FieldSpec(5), 1))
    with pytest.raises(BudgetExceeded, match="C\\(10, 3\\) = 120"):
        audit_all(enc, butterfly, budget=100)


def test_report_json():
    rep = SecurityReport(False, 4, None, 0)
    assert rep.to_dict() == {"secure": False, "subsets_checked": 4, "violations": 0, "violation": None}
    assert rep.to_json().endswith("}\n")


def test_entropy_oracle_examples():
    net = parse_network("edge K S\nedge S T\nedge K T\n" + ROLES)
    code = LinearCode.from_parts(net, 1, 1, FieldSpec(3), None, [[1], [1]], [[1]], [[0]], [None] * 3)
    assert entropy_oracle(code, [1]) == pytest.approx(1.0)
    assert entropy_oracle(code, [0]) == 0.0
    assert entropy_oracle(code, [1, 2]) == pytest.approx(1.0)
    with pytest.raises(BudgetExceeded):
        entropy_oracle(code, [1], budget=5)


def test_mutual_information_helper():
    pairs = [(a, b) for a in range(3) for b in range(3)]
    assert mutual_information(pairs) == 0.0
    assert mutual_information([(a, a) for a in range(4)]) == pytest.approx(math.log(4))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3]), st.integers(1, 2), st.integers(0, 2))
def test_rank_criterion_equals_oracle(seed, q, R, z):
    net = random_dag(np.random.default_rng(seed), max_nodes=5, max_edges=6)
    code = sample_code(net, R, z, FieldSpec(q), seed)
    enc = propagate(code)
    table = simulate(code, all_inputs(q, R + z))
    for k in range(1, 3):
        for s in itertools.combinations(range(net.num_edges), k):
            w = wiretap_matrices(enc, s)
            info = entropy_oracle(code, s, table=table)
            assert (info == 0.0) == is_secure_subset(w)
            assert info == pytest.approx(exact_info_bruteforce(w.a_w, w.b_w, q), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3, 7]))
def test_insecure_sets_stay_insecure_when_enlarged(seed, q):
    net = random_dag(np.random.default_rng(seed), max_nodes=6, max_edges=8)
    enc = propagate(sample_code(net, 1, 1, FieldSpec(q), seed))
    m = net.num_edges
    for w in itertools.combinations(range(m), 2):
        if not is_secure_subset(wiretap_matrices(enc, w)):
            for extra in set(range(m)) - set(w):
                assert not is_secure_subset(wiretap_matrices(enc, w + (extra,)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3, 7]))
def test_dropping_a_dependent_row_keeps_verdict(seed, q):
    f = FieldSpec(q)
    net = random_dag(np.random.default_rng(seed), max_nodes=6, max_edges=8)
    enc = propagate(sample_code(net, 1, 2, f, seed))
    for w in itertools.combinations(range(net.num_edges), 3):
        full = wiretap_matrices(enc, w)
        rows = np.hstack([full.a_w, full.b_w])
        r = mat_rank(rows, f)
        for i in range(3):
            rest = tuple(x for j, x in enumerate(w) if j != i)
            if mat_rank(np.delete(rows, i, axis=0), f) == r:
                assert is_secure_subset(wiretap_matrices(enc, rest)) == is_secure_subset(full)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3, 5]), st.integers(0, 3))
def test_verdict_independent_of_order(seed, q, z):
    net = random_dag(np.random.default_rng(seed), max_nodes=6, max_edges=8)
    enc = propagate(sample_code(net, 1, z, FieldSpec(q), seed))
    rep = audit_all(enc, net, exhaustive=True)
    subsets = list(itertools.combinations(range(net.num_edges), z))
    rng = np.random.default_rng(seed)
    rng.shuffle(subsets)
    shuffled = [is_secure_subset(wiretap_matrices(enc, s)) for s in subsets]
    assert rep.secure == all(shuffled)
    assert rep.violations == shuffled.count(False)
    assert rep.subsets_checked == len(subsets)
    reversed_perm = [tuple(reversed(s)) for s in subsets]
    assert all(is_secure_subset(wiretap_matrices(enc, s)) == v for s, v in zip(reversed_perm, shuffled))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3]))
def test_batch_verdicts_match_scalar(seed, q):
    net = random_dag(np.random.default_rng(seed), max_nodes=5, max_edges=6)
    batch = sample_codes(net, 1, 1, FieldSpec(q), seed, 5)
    subsets = [(e,) for e in range(net.num_edges)]
    vec = propagate_batch(batch)
    v = secure_verdicts(vec, 1, q, subsets)
    info = entropy_oracle_batch(batch, subsets)
    for i in range(len(batch)):
        enc = propagate(batch[i])
        for j, s in enumerate(subsets):
            assert v[i, j] == is_secure_subset(wiretap_matrices(enc, s))
            assert info[i, j] == entropy_oracle(batch[i], s)


def test_audit_uses_only_base_edges(butterfly):
    aug = augment_star(butterfly, 1, 1)
    code = sample_code(aug, 1, 1, FieldSpec(101), 8)
    full = propagate(code)
    a = audit_all(full, butterfly, exhaustive=True)
    b = audit_all(propagate(restrict(code)), butterfly, exhaustive=True)
    assert a == b and a.subsets_checked == butterfly.num_edges
