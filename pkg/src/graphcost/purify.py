"""Entanglement purification steps on graph-state ensembles.

Monte Carlo side: states of one ensemble are paired consecutively (1-2, 3-4,
...; an odd leftover is discarded).  Each pair runs one bilateral-CNOT
subprotocol with local gate noise on every operand qubit, then the second
state is measured out and a parity rule decides whether the first survives.

    P1 purifies the V_A correlation eigenvalues: V_A parties point their
    CNOTs from the second state to the first, V_B the other way; the second
    state is read in X on V_A and Z on V_B, and the state is kept when every
    xi_a ^ XOR(zeta_b, b in N_a) vanishes.

    P2 is P1 with the roles of V_A and V_B exchanged.

    Pb is the two-qubit pairwise protocol: a local twirl on both states
    (fused into the CNOT layer, so it adds no extra noise) followed by a P2
    round on the two-vertex graph.

Exact side: DiagonalEnsemble evolves a graph-diagonal mixture's index
distribution in closed form (noiseless subprotocols, arbitrary Pauli
channels) and is the independent reference the Monte Carlo is tested
against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, StateHandle, bipartition
from .noise import NoiseParams, apply_local_noise
from .tableau import StabilizerRegister

# net Clifford of the pairwise twirl, one-qubit rotations per side:
# V_A qubits get X->X, Z->-Y; V_B qubits get Z->Z, X->-Y.
_TWIRL_A = (("H",), ("S",), ("H",))
_TWIRL_B = (("S",), ("Z",))


@dataclass
class StepOutcome:
    """Counts for one purification step: states entering, states actually
    paired (even floor), and survivors."""

    before: int
    paired: int
    kept: int


def _parity_keep(g: Graph, measured_x, measured_z, check_set) -> bool:
    for v in check_set:
        bit = measured_x[v]
        for u in g.neighbors[v]:
            bit ^= measured_z[u]
        if bit:
            return False
    return True


def _pair_step(reg: StabilizerRegister, src: StateHandle, tgt: StateHandle,
               protocol: str, va, vb, params: NoiseParams,
               rng: np.random.Generator) -> bool:
    """One noisy bilateral round on a pair; returns True if src survives."""
    g = src.graph
    sq, tq = src.qubits, tgt.qubits
    twirl = protocol == "Pb"
    # which side's CNOTs run target-state -> source-state
    reversed_side = va if protocol == "P1" else vb
    x_side = set(va if protocol == "P1" else vb)
    for v in range(g.n):
        if reg.sites[sq[v]] != reg.sites[tq[v]]:
            raise ValueError(f"pair qubits for vertex {v} are at different sites")
        apply_local_noise(reg, sq[v], params, rng)
        apply_local_noise(reg, tq[v], params, rng)
        if twirl:
            seq = _TWIRL_A if v in set(va) else _TWIRL_B
            for q in (sq[v], tq[v]):
                for (gate,) in seq:
                    if gate == "Z":
                        reg.apply_pauli("Z", q)
                    else:
                        reg.apply_gate(gate, q)
        if v in set(reversed_side):
            reg.cnot(tq[v], sq[v])
        else:
            reg.cnot(sq[v], tq[v])
    mx = np.zeros(g.n, dtype=np.uint8)
    mz = np.zeros(g.n, dtype=np.uint8)
    for v in range(g.n):
        if v in x_side:
            mx[v], _ = reg.measure_x(tq[v], rng)
        else:
            mz[v], _ = reg.measure_z(tq[v], rng)
    return _parity_keep(g, mx, mz, x_side)


def purification_step(reg: StabilizerRegister, states: list[StateHandle],
                      protocol: str, params: NoiseParams,
                      rng: np.random.Generator) -> tuple[list[StateHandle], StepOutcome]:
    """Run one round of P1/P2/Pb over consecutive pairs of an ensemble.

    Returns the surviving handles and the step's counting record.  All
    states must share one graph; Pb additionally needs two-vertex states.
    """
    if protocol not in ("P1", "P2", "Pb"):
        raise ValueError(f"unknown protocol {protocol!r}")
    if not states:
        return [], StepOutcome(0, 0, 0)
    g = states[0].graph
    for st in states:
        if st.graph is not g and st.graph != g:
            raise ValueError("ensemble states disagree on the graph")
    if protocol == "Pb" and g.n != 2:
        raise ValueError(f"Pb needs two-qubit states, got {g.n} qubits")
    va, vb = bipartition(g)
    paired = len(states) - (len(states) % 2)
    kept: list[StateHandle] = []
    for i in range(0, paired, 2):
        if _pair_step(reg, states[i], states[i + 1], protocol, va, vb, params, rng):
            kept.append(states[i])
    return kept, StepOutcome(len(states), paired, len(kept))


# ----------------------------------------------------------------------
# exact evolution of graph-diagonal mixtures


def bepp_coefficient_map(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Closed-form pairwise purification map on (x00, x01, x10, x11).

    Returns the renormalized coefficients and the success probability
    k = (x00+x11)^2 + (x01+x10)^2.
    """
    x00, x01, x10, x11 = (float(v) for v in x)
    k = (x00 + x11) ** 2 + (x01 + x10) ** 2
    out = np.array([
        x00 * x00 + x11 * x11,
        x01 * x01 + x10 * x10,
        2.0 * x00 * x11,
        2.0 * x01 * x10,
    ]) / k
    return out, k


def _wht(arr: np.ndarray, axes) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the given axes."""
    out = arr.copy()
    for ax in axes:
        a = np.take(out, 0, axis=ax)
        b = np.take(out, 1, axis=ax)
        out = np.stack([a + b, a - b], axis=ax)
    return out


class DiagonalEnsemble:
    """Index distribution of a graph-diagonal mixture, exact arithmetic.

    weights has shape (2,)*n, axis v indexing mu_v, and sums to one.
    """

    def __init__(self, g: Graph, weights: np.ndarray | None = None):
        self.graph = g
        if weights is None:
            weights = np.zeros((2,) * g.n)
            weights[(0,) * g.n] = 1.0
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (2,) * g.n:
            raise ValueError("weights shape disagrees with vertex count")

    def copy(self) -> "DiagonalEnsemble":
        return DiagonalEnsemble(self.graph, self.weights.copy())

    def fidelity(self) -> float:
        return float(self.weights[(0,) * self.graph.n])

    def apply_channel(self, vertex: int, kind: str, q: float) -> None:
        """Mix in one Pauli channel on a vertex (exact index action)."""
        w = self.weights
        nbrs = tuple(self.graph.neighbors[vertex])
        z_img = np.flip(w, axis=vertex)
        x_img = np.flip(w, axis=nbrs) if nbrs else w
        if kind == "phase":
            self.weights = q * w + (1.0 - q) * z_img
        elif kind == "bit":
            self.weights = q * w + (1.0 - q) * x_img
        elif kind == "depol":
            y_img = np.flip(x_img, axis=vertex)
            self.weights = q * w + (1.0 - q) / 3.0 * (x_img + y_img + z_img)
        else:
            raise ValueError(f"unknown channel {kind!r}")

    def step_p1(self) -> float:
        """Noiseless P1 round; returns the success probability."""
        va, vb = bipartition(self.graph)
        t = _wht(self.weights, vb)
        raw = _wht(t * t, vb) / float(1 << len(vb))
        k = float(raw.sum())
        self.weights = raw / k
        return k

    def step_p2(self) -> float:
        """Noiseless P2 round; returns the success probability."""
        va, vb = bipartition(self.graph)
        t = _wht(self.weights, va)
        raw = _wht(t * t, va) / float(1 << len(va))
        k = float(raw.sum())
        self.weights = raw / k
        return k

    def step_bepp(self) -> float:
        """Twirl both pair members, then a P2 round (two-vertex graphs)."""
        if self.graph.n != 2:
            raise ValueError("pairwise step needs a two-vertex graph")
        w = self.weights
        self.weights = np.array([[w[0, 0], w[0, 1]], [w[1, 1], w[1, 0]]])
        return self.step_p2()

    def flat(self) -> np.ndarray:
        """Coefficients ordered with vertex 0 as the most significant bit."""
        return self.weights.reshape(-1)
