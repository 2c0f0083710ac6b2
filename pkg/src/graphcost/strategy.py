"""Instruction-string strategies: parsing, validation, execution, and cost curves.

A strategy describes one way to distribute a shared target state (a star or
path graph state on ``target_n`` parties) over noisy channels:

* prepare small fragments locally,
* send each qubit to the party that will hold it,
* run purification rounds on the distributed fragments,
* fuse fragments into larger pieces until the target is assembled.

Strategies are written as hyphen-separated instruction tokens, e.g.
``"M5-S-P1-P2"`` or ``"B2-S-Pb-Pb-C4"``:

==========  ====================================================
``M<n>``    prepare fragments of ``n`` qubits (star or path)
``B2``      prepare two-qubit fragments, one batch per target edge
``S``       send every qubit not already at its destination
``P1``      purification round, variant 1
``P2``      purification round, variant 2
``Pb``      purification round for twirled two-qubit states
``C<l>``    fuse surviving fragments in groups of ``l``
==========  ====================================================

Execution returns pooled counting statistics (:class:`RunStats`) from which
fidelity, yield, and communication cost are estimated with binomial error
bars.  Mixing two operating points by time-sharing traces out a curve in the
(fidelity, 1/cost) plane; crossovers between two families of strategies are
located on those mixed curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod, sqrt

import numpy as np

from . import graphs, noise, purify
from .graphs import Graph, path, star
from .noise import NoiseParams
from .tableau import StabilizerRegister

FAMILIES = ("ghz", "cluster")


# --------------------------------------------------------------------------
# Instruction types and errors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PrepareState:
    """Prepare fragments of ``size`` qubits each (token ``M<size>``)."""

    size: int


@dataclass(frozen=True)
class PrepareBell:
    """Prepare two-qubit fragments, one batch per target edge (token ``B2``)."""


@dataclass(frozen=True)
class Send:
    """Transmit every qubit not already at its destination (token ``S``)."""


@dataclass(frozen=True)
class Purify:
    """One purification round (tokens ``P1``, ``P2``, ``Pb``)."""

    protocol: str


@dataclass(frozen=True)
class Connect:
    """Fuse surviving fragments in groups of ``arity`` (token ``C<arity>``)."""

    arity: int


Instruction = PrepareState | PrepareBell | Send | Purify | Connect


class StrategyError(ValueError):
    """Base class for strategy parsing/validation failures."""


class EmptyStringError(StrategyError):
    """The strategy string is empty."""


class UnknownTokenError(StrategyError):
    """A token does not match any instruction form."""


class BadNumberError(StrategyError):
    """A numeric suffix is missing, malformed, or out of range."""


class SizeMismatchError(StrategyError):
    """Symbolic execution does not end at the target size."""


class IllegalInstructionError(StrategyError):
    """An instruction is not applicable at its position."""


class NoSurvivorsError(RuntimeError):
    """No final states survived, so the fidelity is undefined."""


# --------------------------------------------------------------------------
# Parsing and formatting
# --------------------------------------------------------------------------

_PLAIN_TOKENS = {
    "B2": PrepareBell(),
    "S": Send(),
    "P1": Purify("P1"),
    "P2": Purify("P2"),
    "Pb": Purify("Pb"),
}


def parse(text: str) -> tuple[Instruction, ...]:
    """Parse a hyphen-separated strategy string into instructions.

    Grammar: ``strategy := token ("-" token)*`` with tokens ``M<digits>``,
    ``B2``, ``S``, ``P1``, ``P2``, ``Pb``, ``C<digits>``; case-sensitive,
    no whitespace.
    """
    if text == "":
        raise EmptyStringError("empty strategy string")
    out: list[Instruction] = []
    for pos, token in enumerate(text.split("-")):
        if token in _PLAIN_TOKENS:
            out.append(_PLAIN_TOKENS[token])
        elif token[:1] in ("M", "C"):
            digits = token[1:]
            if not digits.isdigit():
                raise UnknownTokenError(
                    f"token {token!r} at position {pos}: expected digits after {token[:1]!r}"
                )
            value = int(digits)
            if value < 2:
                raise BadNumberError(
                    f"token {token!r} at position {pos}: count must be at least 2"
                )
            out.append(PrepareState(value) if token[0] == "M" else Connect(value))
        else:
            raise UnknownTokenError(f"unknown token {token!r} at position {pos}")
    return tuple(out)


def format_strategy(instructions) -> str:
    """Render instructions back to the hyphen-separated string form."""
    parts = []
    for ins in instructions:
        if isinstance(ins, PrepareState):
            parts.append(f"M{ins.size}")
        elif isinstance(ins, PrepareBell):
            parts.append("B2")
        elif isinstance(ins, Send):
            parts.append("S")
        elif isinstance(ins, Purify):
            parts.append(ins.protocol)
        elif isinstance(ins, Connect):
            parts.append(f"C{ins.arity}")
        else:
            raise TypeError(f"not an instruction: {ins!r}")
    return "-".join(parts)


def validate(instructions, target_n: int) -> None:
    """Check an instruction sequence against a target size.

    Runs a symbolic execution of the fragment size: preparation fixes the
    initial size, each ``Connect(l)`` maps size ``s`` to ``l*s - (l-1)``, and
    the final size must equal ``target_n``.  Also enforces: exactly one
    preparation (first), exactly one send (immediately after), and ``Pb``
    only while fragments have 2 qubits.
    """
    if target_n < 2:
        raise SizeMismatchError(f"target size must be at least 2, got {target_n}")
    if not instructions:
        raise EmptyStringError("no instructions")
    first = instructions[0]
    if isinstance(first, PrepareState):
        size = first.size
    elif isinstance(first, PrepareBell):
        size = 2
    else:
        raise IllegalInstructionError(
            "position 0: strategy must start with a preparation (M<n> or B2)"
        )
    if len(instructions) < 2 or not isinstance(instructions[1], Send):
        raise IllegalInstructionError(
            "position 1: preparation must be followed by the send instruction S"
        )
    if size > target_n:
        raise SizeMismatchError(
            f"fragment size {size} exceeds target size {target_n}"
        )
    for pos in range(2, len(instructions)):
        ins = instructions[pos]
        if isinstance(ins, (PrepareState, PrepareBell)):
            raise IllegalInstructionError(f"position {pos}: second preparation")
        if isinstance(ins, Send):
            raise IllegalInstructionError(f"position {pos}: second send")
        if isinstance(ins, Purify):
            if ins.protocol == "Pb" and size != 2:
                raise IllegalInstructionError(
                    f"position {pos}: Pb applies only to 2-qubit states "
                    f"(current size {size})"
                )
        elif isinstance(ins, Connect):
            size = ins.arity * size - (ins.arity - 1)
            if size > target_n:
                raise SizeMismatchError(
                    f"position {pos}: connect yields size {size}, "
                    f"beyond target {target_n}"
                )
    if size != target_n:
        raise SizeMismatchError(
            f"strategy ends at size {size}, target is {target_n}"
        )


def purification_steps(instructions) -> int:
    """Number of purification rounds in the sequence."""
    return sum(1 for ins in instructions if isinstance(ins, Purify))


# --------------------------------------------------------------------------
# Run statistics
# --------------------------------------------------------------------------

@dataclass
class StepCount:
    """Pooled survival counters for one purification round.

    ``paired`` counts the states that entered pairs (even-floored per pool);
    ``kept`` counts the surviving outputs; ``good`` counts the survivors
    whose graph-basis index is all-zero, so the ensemble's operating point
    after every round can be read off one deep run.
    """

    protocol: str
    paired: int = 0
    kept: int = 0
    good: int = 0


@dataclass
class RunStats:
    """Pooled counters from executing a strategy on an ensemble.

    Merging is a commutative sum over all counters, so run-level results can
    be pooled in any order.
    """

    family: str
    target_n: int
    initial: int = 0
    steps: list[StepCount] = field(default_factory=list)
    connect_factor: int = 1
    n_final: int = 0
    n_good: int = 0
    channel_uses: int = 0
    runs: int = 0

    def merge(self, other: "RunStats") -> "RunStats":
        if (self.family, self.target_n) != (other.family, other.target_n):
            raise ValueError("cannot merge stats for different targets")
        if self.connect_factor != other.connect_factor:
            raise ValueError("cannot merge stats with different connect factors")
        labels = [s.protocol for s in self.steps]
        if labels != [s.protocol for s in other.steps]:
            raise ValueError("cannot merge stats with different step sequences")
        merged = RunStats(
            family=self.family,
            target_n=self.target_n,
            initial=self.initial + other.initial,
            steps=[
                StepCount(a.protocol, a.paired + b.paired, a.kept + b.kept,
                          a.good + b.good)
                for a, b in zip(self.steps, other.steps)
            ],
            connect_factor=self.connect_factor,
            n_final=self.n_final + other.n_final,
            n_good=self.n_good + other.n_good,
            channel_uses=self.channel_uses + other.channel_uses,
            runs=self.runs + other.runs,
        )
        return merged


def pool_stats(stats_list) -> RunStats:
    """Pool per-run statistics (commutative monoid sum)."""
    it = iter(stats_list)
    try:
        total = next(it)
    except StopIteration:
        raise ValueError("no run statistics to pool") from None
    for stats in it:
        total = total.merge(stats)
    return total


def yield_estimate(stats: RunStats) -> tuple[float, float]:
    """Survival probability through the purification rounds, with error bar.

    Telescoping product of per-round ``kept/paired`` ratios (fusion rounds do
    not enter the product: fused groups always produce one output, and the
    cost formula accounts for group size separately).  The error bar treats
    the ``n_final * connect_factor`` effectively-surviving inputs out of
    ``initial`` as a binomial count.
    """
    y = 1.0
    for step in stats.steps:
        if step.paired == 0:
            return 0.0, 0.0
        y *= step.kept / step.paired
    m = stats.initial
    eff = stats.n_final * stats.connect_factor
    if m == 0:
        return y, 0.0
    sigma = sqrt(eff * max(m - eff, 0) / m**3)
    return y, sigma


def fidelity_estimate(stats: RunStats) -> tuple[float, float]:
    """Fraction of final states read out in the target index, with error bar."""
    nf, ng = stats.n_final, stats.n_good
    if nf == 0:
        raise NoSurvivorsError("no final states survived; fidelity undefined")
    f = ng / nf
    sigma = sqrt(ng * (nf - ng) / nf**3)
    return f, sigma


def inv_cost_estimate(stats: RunStats) -> tuple[float, float]:
    """Inverse communication cost per copy: yield / (target_n - 1)."""
    y, sigma = yield_estimate(stats)
    scale = stats.target_n - 1
    return y / scale, sigma / scale


# --------------------------------------------------------------------------
# Execution
# --------------------------------------------------------------------------

# Registers wider than about a hundred qubits slow every measurement down
# (row operations scan the whole tableau), so each position's sub-ensemble is
# processed in register-sized chunks drawn sequentially from the run's
# generator.  Chunk sizes are kept even so that chunk boundaries only add the
# same kind of odd-count discard that pairing performs anyway.
_CHUNK_QUBITS = 96


def _even_cap(width: int) -> int:
    cap = _CHUNK_QUBITS // width
    return max(cap - cap % 2, 2)


def _piece_site(family: str, size: int, position: int, vertex: int) -> int:
    """Party holding ``vertex`` of the ``size``-qubit piece at ``position``.

    Star pieces keep their center at the hub party (site 0) and their leaves
    at the covered parties; path pieces lie along consecutive parties, with
    adjacent positions sharing a boundary party so fusions are local.
    """
    if family == "ghz" and vertex == 0:
        return 0
    return position * (size - 1) + vertex


def _distribute(family: str, piece: Graph, position: int, copies: int,
                first_round, params: NoiseParams, rng: np.random.Generator,
                stats: RunStats) -> list[np.ndarray]:
    """Prepare and transmit one position's sub-ensemble, in register chunks.

    ``first_round``, if given, is the first purification round's
    ``(instruction, counter)``; it runs inside the same chunks, where its
    pools are still at full size so chunk-local pairing loses nothing.
    Survivors leave as graph-basis index vectors (their readout is
    deterministic).
    """
    n = piece.n
    owner = _piece_site(family, n, position, 0)
    cap = _even_cap(n)
    survivors: list[np.ndarray] = []
    done = 0
    while done < copies:
        take = min(cap, copies - done)
        done += take
        reg = StabilizerRegister(take * n, record=False)
        handles = []
        for c in range(take):
            qs = tuple(range(c * n, (c + 1) * n))
            reg.sites[list(qs)] = owner
            handles.append(
                graphs.prepare_graph_state(reg, qs, piece, assume_fresh=True))
        for h in handles:
            for v, q in enumerate(h.qubits):
                site = _piece_site(family, n, position, v)
                if site != owner:
                    noise.transmit(reg, q, owner, site, params, rng)
        if first_round is not None:
            ins, record = first_round
            handles, outcome = purify.purification_step(
                reg, handles, ins.protocol, params, rng)
            record.paired += outcome.paired
            record.kept += outcome.kept
        for h in handles:
            survivors.append(graphs.readout_index(reg, h, rng))
        stats.channel_uses += reg.channel_uses
    return survivors


def _count_good(indices) -> int:
    """Number of survivors sitting exactly in the all-zero index."""
    return sum(int(not mu.any()) for mu in indices)


def _purify_round(family: str, piece: Graph, position: int, indices,
                  ins: Purify, record: StepCount, params: NoiseParams,
                  rng: np.random.Generator) -> list[np.ndarray]:
    """One pooled purification round, executed in register chunks.

    The pool holds exact graph-basis states, so preparing the plain graph
    state in a fresh register and flipping the recorded index bits
    reproduces each survivor exactly.  Chunk sizes are even, so chunk-local
    pairing discards exactly as many odd leftovers as one register holding
    the whole pool would.
    """
    n = piece.n
    cap = _even_cap(n)
    out: list[np.ndarray] = []
    done = 0
    while done < len(indices):
        batch = indices[done:done + cap]
        done += len(batch)
        reg = StabilizerRegister(len(batch) * n, record=False)
        handles = []
        for c, mu in enumerate(batch):
            qs = tuple(range(c * n, (c + 1) * n))
            reg.sites[list(qs)] = [
                _piece_site(family, n, position, v) for v in range(n)]
            handles.append(
                graphs.prepare_graph_state(reg, qs, piece, assume_fresh=True))
            for v in np.flatnonzero(mu):
                reg.apply_pauli("Z", qs[v])
        handles, outcome = purify.purification_step(
            reg, handles, ins.protocol, params, rng)
        record.paired += outcome.paired
        record.kept += outcome.kept
        for h in handles:
            out.append(graphs.readout_index(reg, h, rng))
    return out


def _fuse_group(family: str, chain, group_pos: int, indices,
                params: NoiseParams, rng: np.random.Generator) -> np.ndarray:
    """Fuse one group of surviving pieces, in index space.

    ``chain[k]`` is the accumulated graph after ``k`` pairwise fusions.
    Each pairwise fusion is one local two-qubit gate plus a measurement
    whose corrected outcome is branch-independent on graph-basis states, so
    the fused index follows deterministically; under a noisy local model the
    gate's noise is sampled on both fusion qubits first.
    """
    acc = indices[0]
    span = chain[0].n - 1
    for k in range(1, len(indices)):
        g_acc = chain[k - 1]
        nxt = indices[k]
        if family == "ghz":
            v1 = v2 = 0
            site = 0
        else:
            v1, v2 = g_acc.n - 1, 0
            site = (group_pos * len(indices) + k) * span
        channel = params.local_channel(site) if params.noisy_fusion else None
        if channel is not None:
            kind, q = channel
            p_acc = noise.sample_channel(kind, q, rng)
            if p_acc != "I":
                acc = graphs.pauli_index_oracle(acc, p_acc, v1, g_acc)
            p_nxt = noise.sample_channel(kind, q, rng)
            if p_nxt != "I":
                nxt = graphs.pauli_index_oracle(nxt, p_nxt, v2, chain[0])
        acc = graphs.connect_index(acc, v1, nxt, v2)
    return acc


def execute(instructions, family: str, target_n: int, m_states: int,
            params: NoiseParams, rng: np.random.Generator) -> RunStats:
    """Run one ensemble of a validated strategy and return its counters.

    ``m_states`` is the ensemble size: for ``M<n>`` preparations it is the
    number of fragments built (rounded down to complete position sets); for
    ``B2`` it is the number of batches, i.e. ``m_states`` pairs per target
    edge.  All randomness flows through ``rng`` in a fixed order, so equal
    seeds give identical results.

    Tableau work between fusions runs on register-sized chunks, one position
    at a time.  At each fusion instruction the surviving pieces of the whole
    ensemble are pooled, grouped in ensemble order, and fused; groups missing
    a piece are discarded whole.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown state family {family!r}")
    validate(instructions, target_n)

    first = instructions[0]
    frag_n = 2 if isinstance(first, PrepareBell) else first.size
    arities = [ins.arity for ins in instructions if isinstance(ins, Connect)]
    n_positions = prod(arities)
    if isinstance(first, PrepareBell):
        copies = m_states
    else:
        copies = m_states // n_positions
    if copies == 0:
        raise ValueError(
            f"ensemble of {m_states} states cannot fill {n_positions} positions"
        )

    stats = RunStats(
        family=family,
        target_n=target_n,
        initial=copies * n_positions,
        connect_factor=n_positions,
        runs=1,
    )
    # Segment the body at fusion instructions; each purification instruction
    # owns one pooled counter shared by every position and chunk.
    segments: list[tuple[Connect | None, list]] = [(None, [])]
    for ins in instructions[2:]:
        if isinstance(ins, Connect):
            segments.append((ins, []))
        else:
            record = StepCount(ins.protocol)
            stats.steps.append(record)
            segments[-1][1].append((ins, record))

    piece = star(frag_n) if family == "ghz" else path(frag_n)
    head = segments[0][1]
    pools = []
    for i in range(n_positions):
        idx = _distribute(family, piece, i, copies,
                          head[0] if head else None, params, rng, stats)
        if head:
            head[0][1].good += _count_good(idx)
        for ins, record in head[1:]:
            idx = _purify_round(family, piece, i, idx, ins, record,
                                params, rng)
            record.good += _count_good(idx)
        pools.append(idx)

    for conn, purifies in segments[1:]:
        ell = conn.arity
        chain = [piece] + [
            star(k * (piece.n - 1) + piece.n) if family == "ghz"
            else path(k * (piece.n - 1) + piece.n)
            for k in range(1, ell)
        ]
        new_pools = []
        for g_idx, gstart in enumerate(range(0, len(pools), ell)):
            group = pools[gstart:gstart + ell]
            group_sets = min(len(p) for p in group)
            new_pools.append([
                _fuse_group(family, chain, g_idx, [p[s] for p in group],
                            params, rng)
                for s in range(group_sets)
            ])
        pools = new_pools
        fused_n = ell * piece.n - (ell - 1)
        piece = star(fused_n) if family == "ghz" else path(fused_n)
        for j in range(len(pools)):
            for ins, record in purifies:
                pools[j] = _purify_round(family, piece, j, pools[j],
                                         ins, record, params, rng)
                record.good += _count_good(pools[j])

    if len(pools) != 1:
        raise AssertionError("connects did not reduce to a single position")
    expected = star(target_n) if family == "ghz" else path(target_n)
    if piece != expected:
        raise AssertionError("final states do not match the target graph")
    for mu in pools[0]:
        stats.n_final += 1
        stats.n_good += int(not mu.any())
    return stats


def run_strategy(text: str, family: str, target_n: int, m_states: int,
                 params: NoiseParams, runs: int,
                 seed_seq: np.random.SeedSequence) -> RunStats:
    """Execute ``runs`` independent ensembles of a strategy and pool them.

    The ensemble is split evenly across runs (earlier runs take the
    remainder).  Run ``r`` draws its generator from
    ``seed_seq.spawn``-style child ``(r,)``, so growing ``runs`` never
    perturbs earlier runs.  Within a run the ensemble is processed in
    register-sized chunks that consume the run's generator sequentially.
    """
    instructions = parse(text)
    validate(instructions, target_n)
    base, extra = divmod(m_states, runs)
    all_stats = []
    for r in range(runs):
        m_run = base + (1 if r < extra else 0)
        if m_run == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(
            entropy=seed_seq.entropy, spawn_key=seed_seq.spawn_key + (r,)))
        all_stats.append(
            execute(instructions, family, target_n, m_run, params, rng))
    return pool_stats(all_stats)


# --------------------------------------------------------------------------
# Cost points, mixing, frontiers, crossovers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CostPoint:
    """One strategy's operating point in the (fidelity, 1/cost) plane."""

    strategy: str
    target_n: int
    steps: int
    fidelity: float
    fidelity_err: float
    yield_: float
    yield_err: float
    inv_cost: float
    inv_cost_err: float


def cost_point(strategy_text: str, stats: RunStats) -> CostPoint:
    """Summarize pooled run statistics as a cost point."""
    f, f_err = fidelity_estimate(stats)
    y, y_err = yield_estimate(stats)
    ic, ic_err = inv_cost_estimate(stats)
    return CostPoint(
        strategy=strategy_text,
        target_n=stats.target_n,
        steps=len(stats.steps),
        fidelity=f,
        fidelity_err=f_err,
        yield_=y,
        yield_err=y_err,
        inv_cost=ic,
        inv_cost_err=ic_err,
    )


def round_points(strategy_text: str, stats: RunStats) -> list[CostPoint]:
    """Operating point after every purification round of one deep run.

    Valid only for strategies without fusion instructions, where each round
    acts directly on target-size states: the round-``m`` survivors of an
    ``m_max``-round run are then exactly the ensemble an ``m``-round run
    would keep, so a single deep run yields the whole family curve.  Rounds
    after the pool dies out are omitted.
    """
    if any(isinstance(ins, Connect) for ins in parse(strategy_text)):
        raise ValueError(
            "round_points needs a fusion-free strategy; per-round survivors "
            "of piecewise strategies are not target-size states")
    points = []
    y = 1.0
    span = stats.target_n - 1
    for m, step in enumerate(stats.steps, start=1):
        if step.paired == 0 or step.kept == 0:
            break
        y *= step.kept / step.paired
        f = step.good / step.kept
        f_err = sqrt(step.good * (step.kept - step.good) / step.kept**3)
        eff = step.kept * stats.connect_factor
        y_err = sqrt(eff * max(stats.initial - eff, 0) / stats.initial**3)
        points.append(CostPoint(
            strategy=strategy_text,
            target_n=stats.target_n,
            steps=m,
            fidelity=f,
            fidelity_err=f_err,
            yield_=y,
            yield_err=y_err,
            inv_cost=y / span,
            inv_cost_err=y_err / span,
        ))
    return points


def mix_arc(p1: CostPoint, p2: CostPoint, n_alpha: int = 201):
    """Time-sharing curve between two operating points.

    Running a fraction ``alpha`` of resources with the first strategy and the
    rest with the second yields a state ensemble whose fidelity is the
    yield-weighted average and whose inverse cost interpolates linearly:

    ``F(a) = (a*Y1*F1 + (1-a)*Y2*F2) / (a*Y1 + (1-a)*Y2)``,
    ``1/C(a) = a/C1 + (1-a)/C2``.

    Returns arrays ``(fidelity, yield, inv_cost)`` sampled on an alpha grid
    from 0 (all ``p2``) to 1 (all ``p1``).
    """
    alpha = np.linspace(0.0, 1.0, n_alpha)
    w1 = alpha * p1.yield_
    w2 = (1.0 - alpha) * p2.yield_
    total = w1 + w2
    with np.errstate(invalid="ignore"):
        fid = (w1 * p1.fidelity + w2 * p2.fidelity) / total
    fid = np.where(total > 0, fid, 0.0)
    inv_cost = alpha * p1.inv_cost + (1.0 - alpha) * p2.inv_cost
    # The endpoints are the unmixed strategies; report them exactly.
    fid[0], total[0], inv_cost[0] = p2.fidelity, p2.yield_, p2.inv_cost
    fid[-1], total[-1], inv_cost[-1] = p1.fidelity, p1.yield_, p1.inv_cost
    return fid, total, inv_cost


def family_curve(points, n_alpha: int = 201):
    """Polyline through consecutive operating points with mixing arcs.

    ``points`` are one family's operating points in increasing round order;
    adjacent points are joined by their time-sharing arcs.  Returns
    ``(fidelity, inv_cost)`` arrays describing the concatenated curve.
    """
    if not points:
        raise ValueError("no points to mix")
    if len(points) == 1:
        p = points[0]
        return (np.array([p.fidelity]), np.array([p.inv_cost]))
    fs: list[np.ndarray] = []
    ics: list[np.ndarray] = []
    for a, b in zip(points, points[1:]):
        fid, _, inv_cost = mix_arc(b, a, n_alpha)
        if fs:
            fid, inv_cost = fid[1:], inv_cost[1:]
        fs.append(fid)
        ics.append(inv_cost)
    return np.concatenate(fs), np.concatenate(ics)


def curve_upper(f: np.ndarray, inv_cost: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Upper envelope of a polyline evaluated on a fidelity grid.

    Each polyline segment contributes a linear interpolant over the grid
    points it spans; the envelope takes the maximum, with NaN outside the
    curve's fidelity range.
    """
    out = np.full(grid.shape, np.nan)
    for i in range(len(f) - 1):
        f0, f1 = f[i], f[i + 1]
        ic0, ic1 = inv_cost[i], inv_cost[i + 1]
        lo, hi = (f0, f1) if f0 <= f1 else (f1, f0)
        mask = (grid >= lo) & (grid <= hi)
        if not mask.any():
            continue
        if f1 == f0:
            vals = np.full(mask.sum(), max(ic0, ic1))
        else:
            t = (grid[mask] - f0) / (f1 - f0)
            vals = ic0 + t * (ic1 - ic0)
        out[mask] = np.fmax(out[mask], vals)
    single = np.isin(grid, f)
    if single.any():
        for fv, iv in zip(f, inv_cost):
            at = grid == fv
            out[at] = np.fmax(out[at], iv)
    return out


def frontier(curves, n_grid: int = 2001):
    """Upper envelope over several curves in the (fidelity, 1/cost) plane.

    ``curves`` is a list of ``(fidelity, inv_cost)`` polylines.  Returns
    ``(grid, envelope)`` with NaN where no curve is defined.
    """
    lo = min(float(np.min(f)) for f, _ in curves)
    hi = max(float(np.max(f)) for f, _ in curves)
    grid = np.linspace(lo, hi, n_grid)
    env = np.full(grid.shape, np.nan)
    for f, inv_cost in curves:
        env = np.fmax(env, curve_upper(f, inv_cost, grid))
    return grid, env


def crossover(curve_a, curve_b):
    """Smallest-fidelity point where curve B crosses over curve A.

    Both curves are ``(fidelity, inv_cost)`` polylines.  A crossing is a
    transversal intersection of two segment interiors; touching endpoints
    (such as a shared starting point) and collinear overlaps (such as
    identical curves) do not count.  Segments may be vertical: near a
    family's fidelity ceiling the points pile up at one fidelity while the
    inverse cost keeps falling, and the other curve crosses that tail.
    Returns the crossing ``(fidelity, inv_cost)`` with the smallest
    fidelity, or ``None`` when the curves never cross.
    """
    fa, ia = (np.asarray(c, dtype=float) for c in curve_a)
    fb, ib = (np.asarray(c, dtype=float) for c in curve_b)
    if len(fa) < 2 or len(fb) < 2:
        return None
    # B segments as origin + direction, broadcast against each A segment.
    qf, qi = fb[:-1], ib[:-1]
    sf, si = np.diff(fb), np.diff(ib)
    best = None
    for i in range(len(fa) - 1):
        pf, pi = fa[i], ia[i]
        rf, ri = fa[i + 1] - pf, ia[i + 1] - pi
        denom = rf * si - ri * sf
        df, di = qf - pf, qi - pi
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (df * si - di * sf) / denom
            u = (df * ri - di * rf) / denom
        hit = (denom != 0.0) & (0.0 < t) & (t < 1.0) & (0.0 < u) & (u < 1.0)
        if not hit.any():
            continue
        f_hits = pf + t[hit] * rf
        ic_hits = pi + t[hit] * ri
        j = int(np.argmin(f_hits))
        if best is None or f_hits[j] < best[0]:
            best = (float(f_hits[j]), float(ic_hits[j]))
    return best


def frontier_crossover(curve_a, curve_b, n_grid: int = 2001):
    """Fidelity from which curve B's envelope beats curve A's.

    Both curves are ``(fidelity, inv_cost)`` polylines, reduced to upper
    envelopes on a shared fidelity grid spanning both ranges.  B beats at a
    grid fidelity when it is defined there and either A is not (the point
    lies beyond A's reachable fidelity) or B's inverse cost is strictly
    higher.  Returns B's ``(fidelity, inv_cost)`` at the smallest grid point
    from which B beats all the way to the top of the grid, or ``None`` when
    there is no such takeover.  Unlike :func:`crossover`, which needs the
    polylines to intersect, this also detects the takeover that happens at
    the cheaper curve's fidelity ceiling.
    """
    fa, ia = (np.asarray(c, dtype=float) for c in curve_a)
    fb, ib = (np.asarray(c, dtype=float) for c in curve_b)
    lo = min(float(fa.min()), float(fb.min()))
    hi = max(float(fa.max()), float(fb.max()))
    if not hi > lo:
        return None
    grid = np.linspace(lo, hi, n_grid)
    env_a = curve_upper(fa, ia, grid)
    env_b = curve_upper(fb, ib, grid)
    beats = ~np.isnan(env_b) & (np.isnan(env_a) | (env_b > env_a))
    if not beats[-1]:
        return None
    idx = n_grid - 1
    while idx > 0 and beats[idx - 1]:
        idx -= 1
    return float(grid[idx]), float(env_b[idx])


# --------------------------------------------------------------------------
# Preset strategy families
# --------------------------------------------------------------------------

def _alternating(rounds: int, first: str = "P1") -> str:
    second = "P2" if first == "P1" else "P1"
    parts = [first if i % 2 == 0 else second for i in range(rounds)]
    return "".join("-" + p for p in parts)


def extremal_presets(target_n: int, max_rounds: int = 6) -> dict[str, list[str]]:
    """The two extremal families for a target of ``target_n`` parties.

    ``pairs``: two-qubit fragments, twirl-based rounds, one final fusion.
    ``direct``: full-size fragments with alternating rounds starting at P1.
    Each list covers 1..``max_rounds`` purification rounds.
    """
    suffix = f"-C{target_n - 1}" if target_n > 2 else ""
    pairs = [
        "B2-S" + "-Pb" * m + suffix for m in range(1, max_rounds + 1)
    ]
    direct = [
        f"M{target_n}-S" + _alternating(m) for m in range(1, max_rounds + 1)
    ]
    return {"pairs": pairs, "direct": direct}


def intermediate_presets(target_n: int, max_rounds: int = 4) -> list[str]:
    """Fragment-then-fuse strategies for every integer fragmentation.

    Enumerates fragment sizes ``n`` with ``target_n = L*n - (L-1)`` for an
    integer group count ``L >= 2``, with 0..``max_rounds`` alternating
    purification rounds before and after the single fusion stage.
    """
    out = []
    for frag in range(2, target_n):
        if (target_n - 1) % (frag - 1):
            continue
        group = (target_n - 1) // (frag - 1)
        if group < 2:
            continue
        for pre in range(max_rounds + 1):
            for post in range(max_rounds + 1):
                text = (f"M{frag}-S" + _alternating(pre)
                        + f"-C{group}" + _alternating(post))
                out.append(text)
    return out
