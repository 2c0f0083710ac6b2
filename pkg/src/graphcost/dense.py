"""Dense statevector oracle for small registers.

Replays a register's recorded operation log on a 2^n amplitude vector,
projecting measurements onto the recorded outcomes.  Used as an independent
reference implementation in tests; limited to n <= 12.

Basis convention: qubit 0 is the most significant bit, so basis index
b = sum_q bit_q * 2^(n-1-q) and the all-zero state is amplitude index 0.
"""

from __future__ import annotations

import numpy as np

from .tableau import StabilizerRegister

_SQ = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}


def _apply_1q(psi: np.ndarray, n: int, q: int, m: np.ndarray) -> np.ndarray:
    psi = psi.reshape((1 << q, 2, -1))
    out = np.einsum("ab,ibj->iaj", m, psi)
    return out.reshape(-1)


def _apply_cz(psi: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(1 << n)
    mask = (((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)).astype(bool)
    psi = psi.copy()
    psi[mask] *= -1
    return psi


def _apply_cnot(psi: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(1 << n)
    ctrl = ((idx >> (n - 1 - c)) & 1).astype(bool)
    flipped = idx ^ (1 << (n - 1 - t))
    out = psi.copy()
    out[idx[ctrl]] = psi[flipped[ctrl]]
    return out


def replay(reg: StabilizerRegister) -> tuple[np.ndarray, list[float]]:
    """Replay reg's op log densely.  Returns (amplitudes, branch probabilities).

    Each measurement contributes the pre-projection probability of the
    recorded outcome; for a valid stabilizer history these are 0, 1/2 or 1.
    """
    n = reg.n
    if n > 12:
        raise ValueError(f"dense replay limited to 12 qubits, got {n}")
    if reg.oplog is None:
        raise ValueError("register has no recorded operation log")
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    probs: list[float] = []
    for op in reg.oplog:
        kind = op[0]
        if kind == "init":
            if op[1] == "plus":
                psi = np.full(1 << n, 1.0 / np.sqrt(1 << n), dtype=complex)
        elif kind in ("H", "S", "X", "Y", "Z"):
            psi = _apply_1q(psi, n, op[1], _SQ[kind])
        elif kind == "CZ":
            psi = _apply_cz(psi, n, op[1], op[2])
        elif kind == "CNOT":
            psi = _apply_cnot(psi, n, op[1], op[2])
        elif kind == "M":
            q, outcome = op[1], op[2]
            idx = np.arange(1 << n)
            keep = ((idx >> (n - 1 - q)) & 1) == outcome
            p = float(np.sum(np.abs(psi[keep]) ** 2))
            probs.append(p)
            if p <= 1e-12:
                raise ValueError(f"recorded outcome {outcome} on qubit {q} has zero probability")
            psi = np.where(keep, psi, 0.0) / np.sqrt(p)
        else:
            raise ValueError(f"unknown logged op {op!r}")
    return psi, probs


def dense_oracle(reg: StabilizerRegister) -> np.ndarray:
    """Amplitude vector of the register's state, from the recorded circuit."""
    return replay(reg)[0]


def pauli_row_matrix(n: int, xbits: np.ndarray, zbits: np.ndarray, sign: int) -> np.ndarray:
    """Dense matrix of the Hermitian Pauli encoded by one tableau row."""
    m = np.array([[1.0 + 0j]])
    for q in range(n):
        x, z = int(xbits[q]), int(zbits[q])
        p = _SQ["I"] if (x, z) == (0, 0) else _SQ["X"] if (x, z) == (1, 0) \
            else _SQ["Z"] if (x, z) == (0, 1) else _SQ["Y"]
        m = np.kron(m, p)
    return -m if sign else m


def _row_bits(reg: StabilizerRegister, row: int) -> tuple[np.ndarray, np.ndarray]:
    q = np.arange(reg.n)
    w, b = q // 64, (q % 64).astype(np.uint64)
    xb = (reg.x[row, w] >> b) & np.uint64(1)
    zb = (reg.z[row, w] >> b) & np.uint64(1)
    return xb.astype(np.uint8), zb.astype(np.uint8)


def state_from_tableau(reg: StabilizerRegister) -> np.ndarray:
    """Reconstruct the state directly from the stabilizer rows (n <= 8).

    Applies the stabilizer-group projector to basis vectors until one has
    nonzero overlap; independent of the operation log.
    """
    n = reg.n
    if n > 8:
        raise ValueError("projector reconstruction limited to 8 qubits")
    proj = np.eye(1 << n, dtype=complex)
    for row in range(n, 2 * n):
        xb, zb = _row_bits(reg, row)
        s = pauli_row_matrix(n, xb, zb, int(reg.r[row]))
        proj = proj @ (np.eye(1 << n, dtype=complex) + s) / 2.0
    for col in range(1 << n):
        v = proj[:, col]
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            return v / norm
    raise ValueError("projector annihilated every basis vector; invalid tableau")
