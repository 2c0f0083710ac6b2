"""Graph states over stabilizer registers.

A graph G on N vertices defines correlation operators K_a = X_a prod_{b in
N_a} Z_b.  The joint eigenbasis |G, mu> (mu a bit per vertex) is the graph
basis; preparing, reading out, and fusing states in this basis is what the
simulation layers build on.  Index bookkeeping follows the usual rules:

    Z on vertex a flips mu_a,
    X on vertex a flips mu_b for all neighbors b (sign only on mu_a),
    Y does both.

Fusion projects two qubits held at the same site onto one vertex whose
neighborhood is the union of the two originals.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .tableau import StabilizerRegister


class OddCycleError(ValueError):
    """Graph admits no two-coloring."""


class StateNotGraphDiagonalError(RuntimeError):
    """Graph-basis readout hit a non-deterministic measurement."""


class NonlocalOperationError(RuntimeError):
    """Operation requires its qubits to live at one site."""


class Graph:
    """Immutable undirected graph with precomputed neighborhoods."""

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError(f"graph needs at least one vertex, got {n}")
        seen = set()
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError(f"bad edge ({a}, {b}) for n={n}")
            e = (min(a, b), max(a, b))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        self.n = n
        self.edges = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        self.neighbors = tuple(tuple(sorted(v)) for v in nbrs)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={list(self.edges)})"

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a


def star(n: int) -> Graph:
    """Star graph with the center at vertex 0 (GHZ-class state)."""
    if n < 2:
        raise ValueError("star needs at least 2 vertices")
    return Graph(n, [(0, k) for k in range(1, n)])


def path(n: int) -> Graph:
    """Linear chain 0-1-...-(n-1) (1D cluster state)."""
    if n < 2:
        raise ValueError("path needs at least 2 vertices")
    return Graph(n, [(k, k + 1) for k in range(n - 1)])


def bipartition(g: Graph) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Two-color g into (V_A, V_B); V_A is the class of the lowest vertex of
    each component.  For star(n) this makes V_A the center.  Raises
    OddCycleError if no two-coloring exists."""
    color = [-1] * g.n
    for root in range(g.n):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.neighbors[u]:
                if color[v] == -1:
                    color[v] = color[u] ^ 1
                    queue.append(v)
                elif color[v] == color[u]:
                    raise OddCycleError(f"odd cycle through vertices {u} and {v}")
    va = tuple(v for v in range(g.n) if color[v] == 0)
    vb = tuple(v for v in range(g.n) if color[v] == 1)
    return va, vb


def pauli_index_oracle(mu: np.ndarray, kind: str, vertex: int, g: Graph) -> np.ndarray:
    """Exact graph-basis index action of a single Pauli, as a new vector."""
    out = np.array(mu, dtype=np.uint8, copy=True)
    if kind == "I":
        return out
    if kind in ("Z", "Y"):
        out[vertex] ^= 1
    if kind in ("X", "Y"):
        for b in g.neighbors[vertex]:
            out[b] ^= 1
    if kind not in ("X", "Y", "Z"):
        raise ValueError(f"unknown Pauli {kind!r}")
    return out


@dataclass(frozen=True)
class StateHandle:
    """A graph-state instance: the graph plus vertex -> register qubit map."""

    graph: Graph
    qubits: tuple[int, ...]

    def __post_init__(self):
        if len(self.qubits) != self.graph.n:
            raise ValueError("qubit assignment length differs from vertex count")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("qubit assignment repeats a qubit")


def prepare_graph_state(reg: StabilizerRegister, qubits, g: Graph,
                        assume_fresh: bool = False) -> StateHandle:
    """Install |G, 0> on fresh |0> qubits of reg (H on all, CZ per edge).

    The qubits must still be in their initial |0> rows; the tableau block is
    written directly, which is what the H+CZ circuit produces.  Callers that
    allocate a register and install states strictly in qubit order may pass
    ``assume_fresh=True`` to skip the freshness scan.
    """
    qubits = tuple(int(q) for q in qubits)
    handle = StateHandle(g, qubits)
    n = reg.n
    qarr = np.asarray(qubits)
    w, b = qarr // 64, (qarr % 64).astype(np.uint64)
    bit = np.uint64(1) << b

    # freshness check: destabilizer row q is exactly X_q, stabilizer row n+q
    # exactly Z_q, signs clear
    def _is_unit_row(m, rows, wcol, bits):
        ok = m[rows, wcol] == bits
        other = m[rows].copy()
        other[np.arange(len(rows)), wcol] = 0
        return bool(np.all(ok)) and not other.any()

    fresh = assume_fresh or (
        _is_unit_row(reg.x, qarr, w, bit)
        and not reg.z[qarr].any()
        and _is_unit_row(reg.z, n + qarr, w, bit)
        and not reg.x[n + qarr].any()
        and not reg.r[qarr].any()
        and not reg.r[n + qarr].any()
    )
    if not fresh:
        raise ValueError("prepare_graph_state needs fresh |0> qubits")
    # destabilizer rows become Z_q, stabilizer rows X_q Z_{neighbors}
    reg.x[qarr, w] ^= bit
    reg.z[qarr, w] ^= bit
    reg.z[n + qarr, w] ^= bit
    reg.x[n + qarr, w] ^= bit
    for u, v in g.edges:
        qu, qv = qubits[u], qubits[v]
        reg.z[n + qu, qv // 64] ^= np.uint64(1) << np.uint64(qv % 64)
        reg.z[n + qv, qu // 64] ^= np.uint64(1) << np.uint64(qu % 64)
    if reg.oplog is not None:
        for q in qubits:
            reg.oplog.append(("H", q))
        for u, v in g.edges:
            reg.oplog.append(("CZ", qubits[u], qubits[v]))
    return handle


def readout_index(reg: StabilizerRegister, handle: StateHandle,
                  rng: np.random.Generator) -> np.ndarray:
    """Destructively measure the graph-basis index of a state.

    Re-applies the edge CZ layer, rotates with H, and measures Z everywhere;
    every measurement must come out deterministic, otherwise the state was
    not diagonal in this graph basis.
    """
    g, qubits = handle.graph, handle.qubits
    for u, v in g.edges:
        reg.cz(qubits[u], qubits[v])
    reg.h_all(qubits)
    mu = np.zeros(g.n, dtype=np.uint8)
    for vtx, q in enumerate(qubits):
        bit, det = reg.measure_z(q, rng)
        if not det:
            raise StateNotGraphDiagonalError(
                f"random outcome on vertex {vtx}; state is not graph-diagonal")
        mu[vtx] = bit
    return mu


def connect(reg: StabilizerRegister, h1: StateHandle, v1: int,
            h2: StateHandle, v2: int, rng: np.random.Generator) -> StateHandle:
    """Fuse vertex v1 of h1 with vertex v2 of h2 into one vertex.

    Both qubits must sit at the same site.  Realized as CNOT(q1 -> q2) plus a
    Z measurement of q2; outcome 1 is corrected with Z on v2's neighborhood.
    The surviving qubit q1 carries the fused vertex, whose neighborhood is
    the union of both originals.  Returns the fused handle (h1's vertex ids,
    then h2's with v2 removed).
    """
    if set(h1.qubits) & set(h2.qubits):
        raise ValueError("states share qubits")
    q1, q2 = h1.qubits[v1], h2.qubits[v2]
    if reg.sites[q1] != reg.sites[q2]:
        raise NonlocalOperationError(
            f"fusion qubits live at sites {reg.sites[q1]} and {reg.sites[q2]}")
    reg.cnot(q1, q2)
    outcome, _ = reg.measure_z(q2, rng)
    if outcome:
        for b in h2.graph.neighbors[v2]:
            reg.apply_pauli("Z", h2.qubits[b])
    n1 = h1.graph.n

    def remap(u: int) -> int:
        if u == v2:
            return v1
        return n1 + u - (1 if u > v2 else 0)

    edges = list(h1.graph.edges)
    for a, b in h2.graph.edges:
        edges.append((remap(a), remap(b)))
    fused_graph = Graph(n1 + h2.graph.n - 1, edges)
    fused_qubits = h1.qubits + tuple(q for u, q in enumerate(h2.qubits) if u != v2)
    return StateHandle(fused_graph, fused_qubits)


def connect_index(mu1: np.ndarray, v1: int, mu2: np.ndarray, v2: int) -> np.ndarray:
    """Graph-basis index of the state :func:`connect` produces.

    On basis states the corrected fusion outcome is branch-independent: the
    measured vertex's index bit folds into the surviving fused vertex and
    every other bit passes through.  Vertex order matches :func:`connect`
    (h1's vertices, then h2's with v2 removed).
    """
    fused = np.concatenate([mu1, np.delete(mu2, v2)]).astype(np.uint8)
    fused[v1] ^= np.uint8(mu2[v2])
    return fused


_BELL = {(0, 0): "Phi+", (0, 1): "Psi+", (1, 0): "Phi-", (1, 1): "Psi-"}
_BELL_INV = {v: k for k, v in _BELL.items()}


def bell_label(mu1: int, mu2: int) -> str:
    """Conventional Bell name of the 2-vertex graph-basis state |G2; mu1 mu2>
    (up to the fixed local rotation on the second qubit)."""
    return _BELL[(int(mu1) & 1, int(mu2) & 1)]


def bell_bits(label: str) -> tuple[int, int]:
    try:
        return _BELL_INV[label]
    except KeyError:
        raise ValueError(f"unknown Bell label {label!r}") from None
