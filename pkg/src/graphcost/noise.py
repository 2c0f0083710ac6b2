"""Pauli channels, local gate noise, transmission, and noise calibration.

Channels are parametrized by the retention probability q: with probability q
the qubit is untouched, otherwise a Pauli is applied (Z for phase flip, X for
bit flip, uniformly X/Y/Z for the symmetric depolarizing channel).  The
equivalent reliability parameter p of the four-way depolarizing form relates
by q = (3p + 1)/4.

Local gate noise precedes the perfect gate, one sample per operand qubit.
Two local-noise models are supported: "depol" applies the depolarizing
channel at every site, "toy" applies bit-flip noise at Alice's site and
phase-flip noise everywhere else (and treats fusion as noise-free, which is
what its closed-form companion model assumes).

The depolarizing sampler deliberately draws twice (accept/alter, then a
three-way choice) so seeded runs remain reproducible under this documented
scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .tableau import StabilizerRegister

CHANNELS = ("phase", "bit", "depol")
LOCAL_MODELS = ("none", "depol", "toy")


class OutOfRangeError(ValueError):
    """Requested target is outside the reachable range."""


def reliability_to_retention(p: float) -> float:
    """q = (3p + 1)/4 for the depolarizing channel."""
    if not -1.0 / 3.0 <= p <= 1.0:
        raise ValueError(f"reliability p={p} outside [-1/3, 1]")
    return (3.0 * p + 1.0) / 4.0

def retention_to_reliability(q: float) -> float:
    """p = (4q - 1)/3 for the depolarizing channel."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"retention q={q} outside [0, 1]")
    return (4.0 * q - 1.0) / 3.0


@dataclass(frozen=True)
class NoiseParams:
    """Channel retention, local-noise model, and site conventions."""

    channel: str = "depol"
    q_channel: float = 1.0
    local_model: str = "none"
    q_local: float = 1.0
    alice_site: int = 0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.local_model not in LOCAL_MODELS:
            raise ValueError(f"local model must be one of {LOCAL_MODELS}, got {self.local_model!r}")
        for name, v in (("q_channel", self.q_channel), ("q_local", self.q_local)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def local_channel(self, site: int) -> tuple[str, float] | None:
        if self.local_model == "none" or self.q_local >= 1.0:
            return None
        if self.local_model == "depol":
            return "depol", self.q_local
        return ("bit" if site == self.alice_site else "phase"), self.q_local

    @property
    def noisy_fusion(self) -> bool:
        # the toy model's closed-form companion treats fusion as exact
        return self.local_model == "depol"


def sample_channel(kind: str, q: float, rng: np.random.Generator) -> str:
    """Draw one Pauli from the channel; 'I' means the qubit was retained."""
    if rng.random() >= 1.0 - q:
        return "I"
    if kind == "phase":
        return "Z"
    if kind == "bit":
        return "X"
    if kind == "depol":
        return "XYZ"[int(rng.integers(0, 3))]
    raise ValueError(f"unknown channel {kind!r}")


def apply_local_noise(reg: StabilizerRegister, qubit: int, params: NoiseParams,
                      rng: np.random.Generator) -> None:
    """One local-noise sample on a qubit, per its site's channel."""
    ch = params.local_channel(int(reg.sites[qubit]))
    if ch is None:
        return
    kind, q = ch
    p = sample_channel(kind, q, rng)
    if p != "I":
        reg.apply_pauli(p, qubit)


def noisy_gate(reg: StabilizerRegister, name: str, qubits, params: NoiseParams,
               rng: np.random.Generator, prefix=()) -> None:
    """Local noise on each operand, then the perfect gate.

    prefix lists (gate, qubit) single-qubit rotations that are fused into
    this gate and therefore incur no extra noise.
    """
    for q in qubits:
        apply_local_noise(reg, q, params, rng)
    for g, q in prefix:
        if g in ("X", "Y", "Z"):
            reg.apply_pauli(g, q)
        else:
            reg.apply_gate(g, q)
    reg.apply_gate(name, *qubits)


def transmit(reg: StabilizerRegister, qubit: int, from_site: int, to_site: int,
             params: NoiseParams, rng: np.random.Generator) -> None:
    """Send a qubit through the channel: sample noise, relabel the site, and
    count one channel use."""
    if reg.sites[qubit] != from_site:
        raise ValueError(
            f"qubit {qubit} is at site {reg.sites[qubit]}, not {from_site}")
    p = sample_channel(params.channel, params.q_channel, rng)
    if p != "I":
        reg.apply_pauli(p, qubit)
    reg.sites[qubit] = to_site
    reg.channel_uses += 1


# ----------------------------------------------------------------------
# local-noise-equivalent calibration


def depol_index_fidelity(g: Graph, alteration: float, samples: int,
                         rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of the probability that i.i.d. per-qubit
    depolarizing noise at the given alteration leaves the graph-basis index
    all-zero.  Uses the exact index action, vectorized over samples."""
    n = g.n
    adj = g.adjacency().astype(np.int16)
    altered = rng.random((samples, n)) < alteration
    kinds = rng.integers(0, 3, size=(samples, n))  # 0=X 1=Y 2=Z
    ex = (altered & (kinds <= 1)).astype(np.int16)
    ez = (altered & (kinds >= 1)).astype(np.int16)
    mu = (ez + ex @ adj) & 1
    f = float(np.mean(~mu.any(axis=1)))
    return f, float(np.sqrt(max(f * (1.0 - f), 1e-300) / samples))


def lne_estimate(g: Graph, f_target: float, rng: np.random.Generator,
                 tol: float = 1e-3, samples: int = 100_000,
                 max_iter: int = 60) -> tuple[float, float]:
    """Local depolarizing alteration whose single application reproduces the
    target fidelity, by bisection on Monte Carlo probes.

    Returns (alteration, uncertainty); the uncertainty propagates the
    binomial probe error through the locally estimated slope.
    """
    floor = 2.0 ** (-g.n)
    if not floor < f_target <= 1.0:
        raise OutOfRangeError(
            f"target fidelity {f_target} outside ({floor}, 1] for n={g.n}")
    if f_target == 1.0:
        return 0.0, 0.0
    lo, f_lo = 0.0, 1.0
    hi = 0.75
    f_hi, sig = depol_index_fidelity(g, hi, samples, rng)
    if f_hi - 3.0 * sig > f_target:
        raise OutOfRangeError(f"target fidelity {f_target} below the reachable floor")
    mid, f_mid = hi, f_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid, sig = depol_index_fidelity(g, mid, samples, rng)
        if abs(f_mid - f_target) < tol:
            break
        if f_mid > f_target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < 1e-12:
            break
    slope = (f_lo - f_hi) / max(hi - lo, 1e-12)
    return mid, sig / max(abs(slope), 1e-12)
