"""Closed-form fidelity, yield, and cost for hub-centered (star) targets.

This module is the independent oracle for the simulator.  It covers a
restricted noise model that stays diagonal in a small family of symmetric
mixtures: the channel applies phase flips to every sent qubit, and each
purification round is preceded by bit-flip noise on the hub qubit and
phase-flip noise on every other qubit.

States are tracked as ``r``-vectors: ``r[j]`` is the weight of each basis
index with ``j`` flipped leaves (and an unflipped hub), so a state on ``n``
parties needs only ``n`` coefficients with normalization
``sum_j binom(n-1, j) r[j] = 1``.  A purification round maps ``r`` by the
local-noise transfer matrix, then squares elementwise and renormalizes; the
discarded mass is the round's success probability.

All scalar helpers use only ``+``, ``*``, ``/`` and integer powers, so they
accept :class:`fractions.Fraction` inputs for exact-arithmetic checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .noise import OutOfRangeError


def _check_retention(name: str, value) -> None:
    if not 0 <= value <= 1:
        raise OutOfRangeError(f"{name} must lie in [0, 1], got {value}")


def _check_channel_retention(value) -> None:
    if not 1 / 2 < value <= 1:
        raise OutOfRangeError(
            f"channel retention must lie in (1/2, 1], got {value}")


# --------------------------------------------------------------------------
# Perfect local operations
# --------------------------------------------------------------------------

def survival_scale(q, m: int):
    """``S(m) = q^(2^m) + (1-q)^(2^m)``, the m-fold purification mass."""
    e = 2 ** m
    return q**e + (1 - q) ** e


def bepp_perfect(q, m: int):
    """Pair purification with perfect local operations.

    Returns ``(f, k, y)``: the pair fidelity after ``m`` rounds, the success
    probability of round ``m`` itself, and the total survival fraction.
    With ``S(i) = q^(2^i) + (1-q)^(2^i)``:

    ``f = q^(2^m) / S(m)``, ``k = S(m) / S(m-1)^2``,
    ``y = S(m) / (2^m * prod_{i<m} S(i))``.
    """
    _check_channel_retention(q)
    if m < 0:
        raise OutOfRangeError(f"round count must be nonnegative, got {m}")
    f = q ** (2**m) / survival_scale(q, m)
    if m == 0:
        return f, f * 0 + 1, f * 0 + 1
    k = survival_scale(q, m) / survival_scale(q, m - 1) ** 2
    denom = 1
    for i in range(m):
        denom = denom * survival_scale(q, i)
    y = survival_scale(q, m) / (2**m * denom)
    return f, k, y


def initial_r(n_parties: int, q) -> list:
    """Raw distributed-state coefficients: ``r[j] = q^(n-1-j) (1-q)^j``."""
    span = n_parties - 1
    return [q ** (span - j) * (1 - q) ** j for j in range(n_parties)]


def mepp_perfect(n_parties: int, q, m: int):
    """Direct purification of the full star state with perfect locals.

    Returns ``(r, f_final, k, y)`` after ``m`` rounds.  The final fidelity
    is computed from the same pair expression as :func:`bepp_perfect`
    raised to ``n_parties - 1``, which it equals identically; the round-``m``
    success probability and survival fraction obey

    ``k = [k_pair]^(n-1)`` and ``y = 2^(m(n-2)) * [y_pair]^(n-1)``.
    """
    if n_parties < 2:
        raise OutOfRangeError(f"need at least 2 parties, got {n_parties}")
    f_pair, k_pair, y_pair = bepp_perfect(q, m)
    span = n_parties - 1
    f = f_pair**span
    k = k_pair**span
    # Equal to 2^(m(span-1)) * y_pair^span, but the ratio stays O(1) so large
    # sizes neither overflow nor underflow.
    y = (2**m * y_pair) ** span / 2**m
    # r[j] = q^((span-j) 2^m) (1-q)^(j 2^m) / S(m)^span, grouped per factor
    # so nothing underflows.
    r = [f_pair ** (span - j) * (1 - f_pair) ** j for j in range(n_parties)]
    return r, f, k, y


# --------------------------------------------------------------------------
# Local-noise transfer matrix
# --------------------------------------------------------------------------

def flip_probability(n_parties: int, j: int, k: int, q_local):
    """Probability that leaf phase noise turns a ``k``-flip state into a
    given count ``j``: sum over ``s`` flipped-back ones of
    ``binom(k,s) (1-q)^s q^(k-s) binom(n-1-k, j-k+s) (1-q)^(j-k+s)
    q^(n-1-k-(j-k+s))``, with out-of-range binomials equal to zero.
    """
    span = n_parties - 1
    total = q_local * 0
    for s in range(k + 1):
        need = j - k + s
        if need < 0 or need > span - k:
            continue
        ones = comb(k, s) * (1 - q_local) ** s * q_local ** (k - s)
        zeros = (comb(span - k, need) * (1 - q_local) ** need
                 * q_local ** (span - k - need))
        total = total + ones * zeros
    return total


def _count_ratio(span: int, k: int, j: int, like):
    """``binom(span,k)/binom(span,j)`` in the arithmetic domain of ``like``."""
    from fractions import Fraction

    num, den = comb(span, k), comb(span, j)
    if isinstance(like, Fraction):
        return Fraction(num, den)
    return num / den


def transfer_entry(n_parties: int, j: int, k: int, q_local):
    """One entry of the per-round local-noise map on ``r``-vectors.

    Leaf phase noise spreads a ``k``-flip state over ``j``-flip states with
    the weight ratio ``binom(n-1,k)/binom(n-1,j)``; hub bit-flip noise then
    mixes in the reflected count ``n-1-j``.
    """
    span = n_parties - 1
    direct = (_count_ratio(span, k, j, q_local)
              * flip_probability(n_parties, j, k, q_local))
    flipped = (_count_ratio(span, k, span - j, q_local)
               * flip_probability(n_parties, span - j, k, q_local))
    return q_local * direct + (1 - q_local) * flipped


def build_transfer(n_parties: int, q_local) -> np.ndarray:
    """Per-round local-noise transfer matrix on ``r``-vectors.

    Vectorized form of :func:`transfer_entry`: the flip-probability sum over
    ``s`` is a correlation of the flip-back and flip-forward binomial
    weights, evaluated per source count with :func:`numpy.correlate`.

    ``build_transfer(n, 1.0)`` is the identity; in general column ``k``
    conserves the binomially weighted mass:
    ``sum_j binom(n-1,j) T[j,k] = binom(n-1,k)``.
    """
    if n_parties < 2:
        raise OutOfRangeError(f"need at least 2 parties, got {n_parties}")
    _check_retention("local retention", q_local)
    span = n_parties - 1
    ql = float(q_local)
    p = 1.0 - ql
    binoms = np.array([comb(span, j) for j in range(n_parties)], dtype=float)
    lam = np.empty((n_parties, n_parties))
    for k in range(n_parties):
        s = np.arange(k + 1)
        t = np.arange(span - k + 1)
        flip_back = (np.array([comb(k, i) for i in s], dtype=float)
                     * p**s * ql ** (k - s))
        flip_fwd = (np.array([comb(span - k, i) for i in t], dtype=float)
                    * p**t * ql ** (span - k - t))
        # correlate(b, a)[j] = sum_s a[s] * b[j - k + s]: spread over counts j
        lam[:, k] = np.correlate(flip_fwd, flip_back, mode="full")
    lam *= binoms[None, :] / binoms[:, None]
    return ql * lam + p * lam[::-1, :]


def brute_transfer(n_parties: int, q_local) -> np.ndarray:
    """Transfer matrix by exhaustive enumeration of per-qubit flip patterns.

    Independent oracle for :func:`build_transfer`: every subset of leaves may
    phase-flip (each with probability ``1 - q_local``) and the hub may
    bit-flip (reflecting the leaf pattern), and the resulting index weights
    are re-binned by flip count.  Exponential in ``n_parties``; intended for
    small sizes only.
    """
    span = n_parties - 1
    patterns = np.arange(1 << span, dtype=np.uint32)
    flips = np.bitwise_count(patterns).astype(int)
    weights = (1 - q_local) ** flips * q_local ** (span - flips)
    full = (1 << span) - 1
    out = np.zeros((n_parties, n_parties))
    for k in range(n_parties):
        start = (1 << k) - 1  # representative pattern: lowest k leaves flipped
        j_direct = np.bitwise_count(patterns ^ start).astype(int)
        j_flipped = np.bitwise_count(patterns ^ start ^ full).astype(int)
        per_j = np.zeros(n_parties)
        np.add.at(per_j, j_direct, q_local * weights)
        np.add.at(per_j, j_flipped, (1 - q_local) * weights)
        for j in range(n_parties):
            out[j, k] = comb(span, k) / comb(span, j) * per_j[j]
    return out


# --------------------------------------------------------------------------
# Imperfect local operations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ImperfectResult:
    """Outcome of iterating noisy purification rounds on an ``r``-vector."""

    n_parties: int
    rounds: int
    f_steps: tuple[float, ...]
    k_steps: tuple[float, ...]
    fidelity: float
    survival: float
    cost: float
    r: tuple[float, ...]


def _binom_weights(n_parties: int) -> np.ndarray:
    return np.array([comb(n_parties - 1, j) for j in range(n_parties)],
                    dtype=float)


def noisy_round_sequence(n_parties: int, q, q_local, m_max: int,
                         r0=None) -> list[ImperfectResult]:
    """Results after 0..``m_max`` noisy rounds on a star of ``n_parties``.

    Each round applies the local-noise transfer matrix, then squares the
    coefficients elementwise and renormalizes; the pre-normalization mass is
    the round's success probability.  Each entry records the per-round
    fidelities and success probabilities so far, the total survival fraction
    ``prod_i k_i / 2`` and the cost ``(n_parties - 1) / survival``.  The
    whole sequence shares one transfer matrix, so asking for all round
    counts at once costs the same as asking for the last.
    """
    _check_channel_retention(q)
    _check_retention("local retention", q_local)
    if m_max < 0:
        raise OutOfRangeError(f"round count must be nonnegative, got {m_max}")
    transfer = build_transfer(n_parties, q_local)
    weights = _binom_weights(n_parties)
    r = np.array(initial_r(n_parties, float(q))) if r0 is None \
        else np.array(r0, dtype=float)
    f_steps: list[float] = []
    k_steps: list[float] = []
    survival = 1.0
    span = n_parties - 1

    def snapshot() -> ImperfectResult:
        return ImperfectResult(
            n_parties=n_parties,
            rounds=len(f_steps),
            f_steps=tuple(f_steps),
            k_steps=tuple(k_steps),
            fidelity=float(r[0]),
            survival=survival,
            cost=span / survival if survival > 0 else float("inf"),
            r=tuple(float(x) for x in r),
        )

    out = [snapshot()]
    for _ in range(m_max):
        rn = transfer @ r
        sq = rn * rn
        k = float(weights @ sq)
        r = sq / k
        f_steps.append(float(r[0]))
        k_steps.append(k)
        survival *= k / 2.0
        out.append(snapshot())
    return out


def noisy_rounds(n_parties: int, q, q_local, m: int,
                 r0=None) -> ImperfectResult:
    """Iterate ``m`` noisy purification rounds on a star of ``n_parties``."""
    return noisy_round_sequence(n_parties, q, q_local, m, r0)[-1]


def _lift_pair(pair: ImperfectResult, n_parties: int) -> ImperfectResult:
    """Reinterpret a purified-pair result as the fused star it builds.

    Fusing ``n_parties - 1`` purified pairs multiplies their fidelities (the
    residual errors commute with the fusion measurements) and costs one
    channel use per pair, so the cost is ``(n_parties - 1) / survival``.
    """
    span = n_parties - 1
    return ImperfectResult(
        n_parties=n_parties,
        rounds=pair.rounds,
        f_steps=pair.f_steps,
        k_steps=pair.k_steps,
        fidelity=pair.fidelity**span,
        survival=pair.survival,
        cost=span / pair.survival if pair.survival > 0 else float("inf"),
        r=pair.r,
    )


def mepp_imperfect(n_parties: int, q, q_local, m: int) -> ImperfectResult:
    """Direct purification of the full star under noisy local operations."""
    return noisy_rounds(n_parties, q, q_local, m)


def bepp_imperfect(n_parties: int, q, q_local, m: int) -> ImperfectResult:
    """Pair purification followed by fusion, under noisy local operations."""
    return _lift_pair(noisy_rounds(2, q, q_local, m), n_parties)


def _converged_fidelity(fidelities, tol: float) -> float:
    """First fidelity whose change from the previous round is below ``tol``."""
    prev = None
    for cur in fidelities:
        if prev is not None and abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def fixed_point_fidelity(n_parties: int, q, q_local, *, tol: float = 1e-12,
                         max_rounds: int = 64,
                         strategy: str = "direct") -> float:
    """Fidelity reached when further purification rounds stop helping.

    Iterates rounds until the fidelity changes by less than ``tol`` or
    ``max_rounds`` is hit.  ``strategy`` is ``"direct"`` (full-size states)
    or ``"pairs"`` (purify pairs, then fuse).
    """
    size = n_parties if strategy == "direct" else 2
    seq = noisy_round_sequence(size, q, q_local, max_rounds)
    if strategy != "direct":
        seq = [_lift_pair(res, n_parties) for res in seq]
    return _converged_fidelity((res.fidelity for res in seq), tol)


# --------------------------------------------------------------------------
# Sweeps and crossovers
# --------------------------------------------------------------------------

def family_label(strategy: str, n_parties: int) -> str:
    """Strategy string stem for one extremal family at one size."""
    if strategy == "direct":
        return f"M{n_parties}-S"
    return "B2-S" + (f"-C{n_parties - 1}" if n_parties > 2 else "")


def _points_from(results, m_values, label: str, n_parties: int):
    from .strategy import CostPoint

    points = []
    for m in m_values:
        res = results[m]
        points.append(CostPoint(
            strategy=label,
            target_n=n_parties,
            steps=m,
            fidelity=res.fidelity,
            fidelity_err=0.0,
            yield_=res.survival,
            yield_err=0.0,
            inv_cost=res.survival / (n_parties - 1),
            inv_cost_err=0.0,
        ))
    return points


def analytic_points(n_parties: int, q, q_local, m_values,
                    strategy: str = "direct"):
    """Cost points (one per round count) for one strategy family."""
    m_values = list(m_values)
    size = n_parties if strategy == "direct" else 2
    seq = noisy_round_sequence(size, q, q_local, max(m_values, default=0))
    if strategy != "direct":
        seq = [_lift_pair(res, n_parties) for res in seq]
    return _points_from(seq, m_values, family_label(strategy, n_parties),
                        n_parties)


@dataclass(frozen=True)
class SweepEntry:
    """Analytic comparison of the two extremal families at one size."""

    n_parties: int
    pairs_points: tuple
    direct_points: tuple
    crossover: tuple[float, float] | None
    f_max_pairs: float
    f_max_direct: float


def analytic_sweep(n_values, q, q_local, m_values=None, *,
                   tol: float = 1e-12) -> list[SweepEntry]:
    """Compare pair-based and direct purification across target sizes.

    For each size, build both families' cost points over the round counts,
    join them with mixing arcs, and locate the smallest fidelity where the
    two families' curves cross.  The default round range runs to 64 because
    at large sizes the crossing sits on the pair family's convergence tail,
    where the fidelity has plateaued and only the yield still falls.
    """
    from .strategy import crossover as find_crossover
    from .strategy import family_curve

    if m_values is None:
        m_values = range(0, 65)
    m_values = list(m_values)
    if not m_values:
        raise OutOfRangeError("no round counts to sweep")
    m_top = max(m_values)
    pair_seq = noisy_round_sequence(2, q, q_local, m_top)
    out = []
    for n in n_values:
        lifted = [_lift_pair(res, n) for res in pair_seq]
        direct_seq = noisy_round_sequence(n, q, q_local, m_top)
        pairs = _points_from(lifted, m_values, family_label("pairs", n), n)
        direct = _points_from(direct_seq, m_values,
                              family_label("direct", n), n)
        cross = find_crossover(family_curve(pairs, n_alpha=9),
                               family_curve(direct, n_alpha=9))
        out.append(SweepEntry(
            n_parties=n,
            pairs_points=tuple(pairs),
            direct_points=tuple(direct),
            crossover=cross,
            f_max_pairs=_converged_fidelity(
                (res.fidelity for res in lifted), tol),
            f_max_direct=_converged_fidelity(
                (res.fidelity for res in direct_seq), tol),
        ))
    return out
