import itertools
from pathlib import Path

import numpy as np
import pytest

from secnc.network import Network, load_network, parse_network

EXAMPLES = Path(__file__).resolve().parent.parent / "docs" / "examples"


@pytest.fixture
def butterfly():
    return load_network(EXAMPLES / "butterfly.net")


@pytest.fixture
def line():
    return parse_network("edge K S\nedge S T\nkey K\nsource S\nterminal T\n")


@pytest.fixture
def hand_net():
    # e0 K->S, e1 S->a, e2 K->a, e3 a->T
    return parse_network("edge K S\nedge S a\nedge K a\nedge a T\nkey K\nsource S\nterminal T\n")


def brute_rank(m, q):
    """Rank as log_q of the size of the row span, by enumerating combinations."""
    m = np.asarray(m, dtype=np.int64)
    if m.size == 0:
        return 0
    span = {tuple((np.array(c) @ m) % q) for c in itertools.product(range(q), repeat=m.shape[0])}
    r = 0
    while q**r < len(span):
        r += 1
    return r


def _disconnects(net: Network, removed, sources, sink) -> bool:
    succ = {v: [] for v in net.nodes}
    for i, (u, v) in enumerate(net.edges):
        if i not in removed:
            succ[u].append(v)
    seen, stack = set(sources), list(sources)
    while stack:
        for v in succ[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return sink not in seen


def brute_mincut(net: Network, sources, sink) -> int:
    sources = [sources] if isinstance(sources, str) else list(sources)
    for k in range(net.num_edges + 1):
        for removed in itertools.combinations(range(net.num_edges), k):
            if _disconnects(net, set(removed), sources, sink):
                return k
    raise AssertionError("removing every edge must disconnect")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
