import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secnc.network import (
    Network,
    NetworkError,
    augment_star,
    cut_capacities,
    enumerate_topologies,
    mincut,
    parse_network,
    random_dag,
    topo_order,
)

from conftest import EXAMPLES, brute_mincut

ROLES = "key K\nsource S\nterminal T\n"


def test_parse_line(line):
    assert line.num_edges == 2
    assert line.nodes == ("K", "S", "T")
    assert (line.key_node, line.source, line.terminal) == ("K", "S", "T")


def test_parse_butterfly(butterfly):
    assert len(butterfly.nodes) == 7
    assert butterfly.num_edges == 10


def test_parse_comments_and_parallel_edges():
    net = parse_network("# header\nedge S T  # first\nedge S T\nnode K\n\n" + ROLES)
    assert net.edges == (("S", "T"), ("S", "T"))
    assert net.in_edges("T") == (0, 1)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("edge S S\n" + ROLES + "node K\nnode T\n", 1, "cycle"),
        ("edge K S\nedge S a\nedge a K\nedge S T\n" + ROLES, 3, "cycle"),
        ("edge K S\nedge S T\n" + ROLES + "key S\n", 6, "duplicate key"),
        ("edge K S\nedge S T\nkey K\nsource S\n", None, "missing terminal"),
        ("edge K S\nedge S T\nkey K\nsource K\nterminal T\n", 4, "source and key"),
        ("edge K S\nedge S T\nkey K\nsource S\nterminal S\n", 5, "source and terminal"),
        ("edge K S\nedge S T\nkey K\nsource S\nterminal X\n", 5, "unknown node"),
        ("edge K S T\n" + ROLES, 1, "takes 2"),
        ("vertex K\n" + ROLES, 1, "unknown statement"),
        ("edge K S-1\n" + ROLES, 1, "invalid node id"),
    ],
)
def test_parse_errors(text, line, fragment):
    with pytest.raises(NetworkError, match=fragment) as exc:
        parse_network(text)
    assert exc.value.line == line


def test_network_constructor_validates():
    with pytest.raises(NetworkError):
        Network(("K", "S", "T"), (("S", "X"),), "S", "K", "T")
    with pytest.raises(NetworkError):
        Network(("K", "S", "T"), (("S", "T"), ("T", "S")), "S", "K", "T")
    with pytest.raises(NetworkError):
        Network(("K", "S", "T"), (), "S", "S", "T")


def test_text_and_dict_round_trip(butterfly):
    assert parse_network(butterfly.to_text()) == butterfly
    assert Network.from_dict(butterfly.to_dict()) == butterfly


def test_topo_order_examples(line):
    assert topo_order(line) == ["K", "S", "T"]
    diamond = parse_network("edge K a\nedge K b\nedge a S\nedge b S\nedge S T\n" + ROLES)
    order = topo_order(diamond)
    assert order[0] == "K" and order[-2:] == ["S", "T"]
    assert order == ["K", "a", "b", "S", "T"]  # ties by declaration order


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_topo_order_is_a_linear_extension(seed, ordered):
    net = random_dag(np.random.default_rng(seed), ordered_roles=ordered)
    order = topo_order(net)
    assert sorted(order) == sorted(net.nodes)
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[u] < pos[v] for u, v in net.edges)


def test_mincut_examples(line, butterfly):
    assert mincut(line, {"K"}, "T") == 1
    two = parse_network("node K\nedge S T\nedge S T\n" + ROLES)
    assert mincut(two, {"S"}, "T") == 2
    assert mincut(butterfly, {"K", "S"}, "T") == brute_mincut(butterfly, {"K", "S"}, "T") == 3
    assert mincut(parse_network("node K\nedge S T\n" + ROLES), "K", "T") == 0
    with pytest.raises(NetworkError):
        mincut(line, {"T"}, "T")


def test_cut_capacities_examples(line, butterfly):
    assert cut_capacities(line).as_tuple() == (1, 1, 1, 1)
    split = parse_network("edge K a\nedge a T\nedge S b\nedge b T\n" + ROLES)
    assert cut_capacities(split).c_ks == 0
    caps = cut_capacities(butterfly)
    brute = (
        brute_mincut(butterfly, "K", "S"),
        brute_mincut(butterfly, "K", "T"),
        brute_mincut(butterfly, "S", "T"),
        brute_mincut(butterfly, {"K", "S"}, "T"),
    )
    assert caps.as_tuple() == brute == (2, 2, 2, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_mincut_matches_brute_force(seed, ordered):
    net = random_dag(np.random.default_rng(seed), max_nodes=6, max_edges=8, ordered_roles=ordered)
    k, s, t = net.key_node, net.source, net.terminal
    for srcs, sink in (({k}, s), ({k}, t), ({s}, t), ({k, s}, t)):
        assert mincut(net, srcs, sink) == brute_mincut(net, srcs, sink)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_adding_an_edge_never_lowers_a_cut(seed, pick):
    rng = np.random.default_rng(seed)
    net = random_dag(rng, ordered_roles=False)
    order = topo_order(net)
    i, j = sorted(np.random.default_rng(pick).choice(len(order), size=2, replace=False))
    bigger = net.with_edge(order[i], order[j])
    before, after = cut_capacities(net).as_tuple(), cut_capacities(bigger).as_tuple()
    assert all(a >= b for a, b in zip(after, before))
    for u in net.nodes:
        for v in net.nodes:
            if u != v:
                assert mincut(bigger, {u}, v) >= mincut(net, {u}, v)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_cut_capacity_inequalities(seed, ordered):
    caps = cut_capacities(random_dag(np.random.default_rng(seed), ordered_roles=ordered))
    assert caps.c_kst >= max(caps.c_kt, caps.c_st)
    assert caps.c_kst <= caps.c_kt + caps.c_st
    assert min(caps.as_tuple()) >= 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 4), st.integers(0, 4))
def test_augmentation_identities(seed, R, z):
    if R + z == 0:
        return
    net = random_dag(np.random.default_rng(seed))
    aug = augment_star(net, R, z)
    g, star = aug.network, aug.star_terminal
    caps = cut_capacities(net)
    assert aug.base is net and aug.R_plus_z == R + z
    assert all(g.edges[e] == (net.source, star) for e in aug.star_edges)
    assert g.edges[: net.num_edges] == net.edges
    assert mincut(g, {net.source}, star) == R + z
    assert mincut(g, {net.key_node}, star) == min(R + z, caps.c_ks)
    assert mincut(g, {net.key_node, net.source}, net.terminal) == caps.c_kst


def test_augment_errors_and_name_clash(line):
    with pytest.raises(ValueError, match="empty augmentation"):
        augment_star(line, 0, 0)
    clash = parse_network("edge K S\nedge S T\nedge S T_star\n" + ROLES)
    assert augment_star(clash, 1, 0).star_terminal == "T_star_"


def _brute_topology_count(max_edges):
    """Orbit count over labelled multigraphs, independent of the growth method."""
    import itertools

    forms = set()
    for m in range(1, max_edges + 1):
        for n in range(3, m + 2):
            pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
            for edges in itertools.combinations_with_replacement(pairs, m):
                if {x for e in edges for x in e} != set(range(n)):
                    continue
                names = ["K", "S", "T"] + [f"v{i}" for i in range(3, n)]
                try:
                    net = Network(tuple(names), tuple((names[u], names[v]) for u, v in edges), "S", "K", "T")
                except NetworkError:
                    continue
                # weak connectivity: union-find over the edges
                parent = list(range(n))

                def find(x):
                    while parent[x] != x:
                        x = parent[x]
                    return x

                for u, v in edges:
                    parent[find(u)] = find(v)
                if len({find(x) for x in range(n)}) != 1:
                    continue
                forms.add(min(
                    tuple(sorted((lab[u], lab[v]) for u, v in edges))
                    for perm in itertools.permutations(range(3, n))
                    for lab in [dict(zip(range(n), (0, 1, 2, *perm)))]
                ))
    return len(forms)


def test_enumerate_topologies_matches_brute_force():
    for k in (2, 3, 4):
        assert len(enumerate_topologies(k)) == _brute_topology_count(k)


def test_enumerate_topologies_small_counts():
    nets = enumerate_topologies(2)
    # two edges on three nodes: the path (6 role placements), the out-star and
    # the in-star (3 centre choices each)
    assert len(nets) == 12
    assert len(enumerate_topologies(3)) == 12 + 158
    for net in enumerate_topologies(3):
        touched = {v for e in net.edges for v in e}
        assert touched == set(net.nodes)


def test_example_files_parse():
    for path in sorted(EXAMPLES.glob("*.net")):
        net = parse_network(path.read_text())
        assert net.num_edges >= 1
