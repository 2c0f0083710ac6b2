"""Bit-packed stabilizer tableau simulator with destabilizer tracking.

The register keeps 2n generator rows (n destabilizers followed by n
stabilizers) as packed uint64 bit matrices, one bit per qubit for the X and Z
parts plus a sign bit per row.  A row with bits (x, z) and sign s represents
the Hermitian Pauli (-1)^s * prod_j i^(x_j z_j) X_j^{x_j} Z_j^{z_j}.  Global
phase is not tracked.  Gates are column operations vectorized over all rows;
measurements use a batched row-multiply so the per-measurement cost is one
column scan plus O(rows_hit * words) vector work.

Destabilizer sign bits carry no meaning (only their X/Z bits are used, to
locate the stabilizer product that decides deterministic measurements), so no
phase validity is asserted for them during row multiplication.

Registers also carry a per-qubit site label (which party holds the qubit) and
a channel-use counter; both are bookkeeping for the transmission layer.
"""

from __future__ import annotations

import numpy as np

_W = 64  # bits per packed word

# Gate and Pauli names accepted by apply_gate / apply_pauli.
ONE_QUBIT_GATES = ("H", "S")
TWO_QUBIT_GATES = ("CZ", "CNOT")
PAULIS = ("I", "X", "Y", "Z")


class StabilizerRegister:
    """n-qubit stabilizer state with O(n^2 / 64) words of storage."""

    def __init__(self, n: int, init: str = "zero", record: bool | None = None):
        if n < 1:
            raise ValueError(f"register needs at least one qubit, got {n}")
        if init not in ("zero", "plus"):
            raise ValueError(f"unknown initial state {init!r}")
        self.n = n
        self.nw = (n + _W - 1) // _W
        self.x = np.zeros((2 * n, self.nw), dtype=np.uint64)
        self.z = np.zeros((2 * n, self.nw), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        rows = np.arange(n)
        words = rows // _W
        bits = np.uint64(1) << (rows % _W).astype(np.uint64)
        if init == "zero":
            # destabilizers X_i, stabilizers Z_i
            self.x[rows, words] = bits
            self.z[n + rows, words] = bits
        else:
            # destabilizers Z_i, stabilizers X_i
            self.z[rows, words] = bits
            self.x[n + rows, words] = bits
        self.sites = np.zeros(n, dtype=np.int32)
        self.channel_uses = 0
        if record is None:
            record = n <= 12
        self.oplog: list[tuple] | None = [("init", init)] if record else None

    # ------------------------------------------------------------------
    # column helpers

    def _check(self, *qs: int) -> None:
        for q in qs:
            if not 0 <= q < self.n:
                raise ValueError(f"qubit {q} out of range for n={self.n}")
        if len(qs) == 2 and qs[0] == qs[1]:
            raise ValueError(f"two-qubit gate needs distinct qubits, got {qs}")

    def _cols(self, q: int):
        w, b = divmod(q, _W)
        b = np.uint64(b)
        xc = (self.x[:, w] >> b) & np.uint64(1)
        zc = (self.z[:, w] >> b) & np.uint64(1)
        return w, b, xc, zc

    # ------------------------------------------------------------------
    # Clifford gates

    def h(self, q: int) -> None:
        """Hadamard: X <-> Z, sign flips on Y rows."""
        self._check(q)
        w, b, xc, zc = self._cols(q)
        self.r ^= (xc & zc).astype(np.uint8)
        diff = (xc ^ zc) << b
        self.x[:, w] ^= diff
        self.z[:, w] ^= diff
        if self.oplog is not None:
            self.oplog.append(("H", q))

    def h_all(self, qubits) -> None:
        """Hadamard on a set of distinct qubits, one pass per touched word.

        Equivalent to calling :meth:`h` on each qubit (the columns are
        independent), but vectorized over whole words.
        """
        qs = np.asarray(qubits, dtype=np.int64)
        if qs.size == 0:
            return
        if qs.min() < 0 or qs.max() >= self.n:
            raise ValueError(f"qubit out of range for n={self.n}")
        if np.unique(qs).size != qs.size:
            raise ValueError("h_all needs distinct qubits")
        words = qs // _W
        bits = np.uint64(1) << (qs % _W).astype(np.uint64)
        for w in np.unique(words):
            mask = np.bitwise_or.reduce(bits[words == w])
            xw = self.x[:, w]
            zw = self.z[:, w]
            self.r ^= (np.bitwise_count(xw & zw & mask) & 1).astype(np.uint8)
            diff = (xw ^ zw) & mask
            xw ^= diff
            zw ^= diff
        if self.oplog is not None:
            for q in qs:
                self.oplog.append(("H", int(q)))

    def s(self, q: int) -> None:
        """Phase gate: X -> Y, Z -> Z."""
        self._check(q)
        w, b, xc, zc = self._cols(q)
        self.r ^= (xc & zc).astype(np.uint8)
        self.z[:, w] ^= xc << b
        if self.oplog is not None:
            self.oplog.append(("S", q))

    def cz(self, a: int, b: int) -> None:
        """Controlled-Z: X_a -> X_a Z_b and symmetrically."""
        self._check(a, b)
        wa, ba, xa, za = self._cols(a)
        wb, bb, xb, zb = self._cols(b)
        self.r ^= (xa & xb & (za ^ zb)).astype(np.uint8)
        self.z[:, wa] ^= xb << ba
        self.z[:, wb] ^= xa << bb
        if self.oplog is not None:
            self.oplog.append(("CZ", a, b))

    def cnot(self, c: int, t: int) -> None:
        """Controlled-NOT: X_c -> X_c X_t, Z_t -> Z_c Z_t."""
        self._check(c, t)
        wc, bc, xc, zc = self._cols(c)
        wt, bt, xt, zt = self._cols(t)
        one = np.uint64(1)
        self.r ^= (xc & zt & (xt ^ zc ^ one)).astype(np.uint8)
        self.x[:, wt] ^= xc << bt
        self.z[:, wc] ^= zt << bc
        if self.oplog is not None:
            self.oplog.append(("CNOT", c, t))

    def apply_gate(self, name: str, *qs: int) -> None:
        if name == "H":
            self.h(*qs)
        elif name == "S":
            self.s(*qs)
        elif name == "CZ":
            self.cz(*qs)
        elif name == "CNOT":
            self.cnot(*qs)
        else:
            raise ValueError(f"unknown gate {name!r}")

    # ------------------------------------------------------------------
    # Paulis (sign-only updates)

    def apply_pauli(self, kind: str, q: int) -> None:
        """Apply X, Y or Z to qubit q; flips signs of anticommuting rows."""
        self._check(q)
        if kind == "I":
            return
        _, _, xc, zc = self._cols(q)
        if kind == "X":
            self.r ^= zc.astype(np.uint8)
        elif kind == "Z":
            self.r ^= xc.astype(np.uint8)
        elif kind == "Y":
            self.r ^= (xc ^ zc).astype(np.uint8)
        else:
            raise ValueError(f"unknown Pauli {kind!r}")
        if self.oplog is not None:
            self.oplog.append((kind, q))

    # ------------------------------------------------------------------
    # measurement

    def _phase_exponent(self, xa, za, xb, zb):
        """Sum over qubits of the i-exponent of P(xa,za)*P(xb,zb), per row.

        Cyclic pairs (X,Y),(Y,Z),(Z,X) contribute +1, anticyclic -1.
        """
        plus = (xa & xb & zb & ~za) | (xa & za & zb & ~xb) | (za & xb & ~xa & ~zb)
        minus = (xa & za & xb & ~zb) | (za & xb & zb & ~xa) | (xa & zb & ~za & ~xb)
        if plus.ndim == 1:
            return int(np.bitwise_count(plus).sum()) - int(np.bitwise_count(minus).sum())
        return (
            np.bitwise_count(plus).sum(axis=1, dtype=np.int64)
            - np.bitwise_count(minus).sum(axis=1, dtype=np.int64)
        )

    def _rowmult_into(self, idx: np.ndarray, p: int) -> None:
        """row[i] := row[p] * row[i] for all i in idx, with sign tracking."""
        xa, za = self.x[p], self.z[p]
        e = self._phase_exponent(xa, za, self.x[idx], self.z[idx])
        tot = (2 * self.r[idx].astype(np.int64) + 2 * int(self.r[p]) + e) & 3
        self.r[idx] = (tot >> 1).astype(np.uint8)
        self.x[idx] ^= xa
        self.z[idx] ^= za

    def measure_z(self, q: int, rng: np.random.Generator) -> tuple[int, bool]:
        """Measure Z on qubit q.  Returns (outcome bit, deterministic flag).

        Random outcomes draw exactly one integer from rng; deterministic
        outcomes draw nothing.
        """
        self._check(q)
        n = self.n
        w, b = divmod(q, _W)
        b = np.uint64(b)
        xcol = (self.x[:, w] >> b) & np.uint64(1)
        stab_hits = np.flatnonzero(xcol[n:])
        if stab_hits.size:
            p = n + int(stab_hits[0])
            idx = np.flatnonzero(xcol)
            idx = idx[idx != p]
            if idx.size:
                self._rowmult_into(idx, p)
            # pivot becomes the new destabilizer; stabilizer row is +/- Z_q
            outcome = int(rng.integers(0, 2))
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, w] = np.uint64(1) << b
            self.r[p] = outcome
            if self.oplog is not None:
                self.oplog.append(("M", q, outcome))
            return outcome, False
        # deterministic: multiply the stabilizer partners of destabilizers
        # that anticommute with Z_q; the product is +/- Z_q and its sign is
        # the outcome.
        xs = np.zeros(self.nw, dtype=np.uint64)
        zs = np.zeros(self.nw, dtype=np.uint64)
        acc = 0
        for j in np.flatnonzero(xcol[:n]):
            i = n + int(j)
            e = self._phase_exponent(self.x[i], self.z[i], xs, zs)
            acc = (acc + 2 * int(self.r[i]) + e) & 3
            xs ^= self.x[i]
            zs ^= self.z[i]
        outcome = acc >> 1
        if self.oplog is not None:
            self.oplog.append(("M", q, outcome))
        return outcome, True

    def measure_x(self, q: int, rng: np.random.Generator) -> tuple[int, bool]:
        """Measure X on qubit q via a basis-rotating Hadamard."""
        self.h(q)
        return self.measure_z(q, rng)
