"""Campaign runner: validated configs, seeding, and bit-exact result files.

A campaign executes a list of strategies (or a preset family) against one
noise setting, pools the per-run statistics, and emits:

* one CSV record per strategy point,
* mixed-frontier records (the upper envelope over all families' mixing
  curves in the (fidelity, 1/cost) plane), and
* crossover records between the first strategy family and each later one.

The CSV column order is fixed::

    strategy,n_qubits,steps,fidelity,fidelity_err,yield,yield_err,
    inv_cost,inv_cost_err,lne,lne_err,channel_uses,seed

Floats are written with ``repr`` (shortest round-trip form) and inapplicable
fields are left empty, so re-running an identical config with the same seed
reproduces the file byte for byte.  A JSON sidecar (``<out>.json``) records
the full config.

Seeding scheme: the master seed expands per strategy point ``i`` and run
``r`` as ``SeedSequence(seed, spawn_key=(i, r))``; post-processing draws
(the noise-equivalent calibration) use ``spawn_key=(i, 0, 0)``.  Growing the
run count therefore never perturbs existing runs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from math import sqrt
from pathlib import Path

import numpy as np

from . import analytic, noise, strategy
from .graphs import path, star
from .noise import NoiseParams
from .strategy import (CostPoint, NoSurvivorsError, cost_point,
                       extremal_presets, family_curve, frontier_crossover,
                       intermediate_presets, parse, purification_steps,
                       run_strategy, validate)

COLUMNS = ("strategy", "n_qubits", "steps", "fidelity", "fidelity_err",
           "yield", "yield_err", "inv_cost", "inv_cost_err", "lne",
           "lne_err", "channel_uses", "seed")

PRESETS = ("extremal", "intermediate")


class ConfigError(ValueError):
    """A campaign config field is invalid; the message names the field."""


@dataclass
class CampaignConfig:
    """Everything needed to reproduce one campaign bit for bit."""

    family: str = "ghz"
    target_n: int = 2
    strategies: tuple[str, ...] = ()
    preset: str | None = None
    channel: str = "depol"
    q_channel: float = 1.0
    local_model: str = "depol"
    q_local: float = 1.0
    ensemble: int = 20000
    runs: int = 100
    seed: int = 0
    lne: bool = False
    out: str = "results.csv"
    steps: int = 8
    sweep_n: tuple[int, int] | None = None
    preset_rounds: int = 6
    frontier_points: int = 201


def resolve_strategies(cfg: CampaignConfig) -> list[str]:
    """Expand the preset (if any) into the concrete strategy list."""
    if cfg.preset is not None and cfg.strategies:
        raise ConfigError("strategies/preset: give one or the other, not both")
    if cfg.preset is not None:
        if cfg.preset == "extremal":
            fams = extremal_presets(cfg.target_n, cfg.preset_rounds)
            return fams["pairs"] + fams["direct"]
        if cfg.preset == "intermediate":
            return intermediate_presets(cfg.target_n)
        raise ConfigError(f"preset: must be one of {PRESETS}, got {cfg.preset!r}")
    if not cfg.strategies:
        raise ConfigError("strategies: none given and no preset selected")
    return list(cfg.strategies)


def validate_config(cfg: CampaignConfig) -> list[str]:
    """Check all fields; returns the resolved strategy list."""
    if cfg.family not in strategy.FAMILIES:
        raise ConfigError(
            f"family: must be one of {strategy.FAMILIES}, got {cfg.family!r}")
    if cfg.target_n < 2:
        raise ConfigError(f"target_n: must be at least 2, got {cfg.target_n}")
    if cfg.channel not in noise.CHANNELS:
        raise ConfigError(
            f"channel: must be one of {noise.CHANNELS}, got {cfg.channel!r}")
    if cfg.local_model not in noise.LOCAL_MODELS:
        raise ConfigError(
            f"local_model: must be one of {noise.LOCAL_MODELS}, "
            f"got {cfg.local_model!r}")
    for name, value in (("q_channel", cfg.q_channel), ("q_local", cfg.q_local)):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name}: must lie in [0, 1], got {value}")
    for name, value in (("ensemble", cfg.ensemble), ("runs", cfg.runs),
                        ("frontier_points", cfg.frontier_points)):
        if value < 1:
            raise ConfigError(f"{name}: must be positive, got {value}")
    texts = resolve_strategies(cfg)
    for i, text in enumerate(texts):
        try:
            validate(parse(text), cfg.target_n)
        except strategy.StrategyError as exc:
            raise ConfigError(f"strategies[{i}]: {text!r}: {exc}") from exc
    return texts


def noise_params(cfg: CampaignConfig) -> NoiseParams:
    return NoiseParams(
        channel=cfg.channel,
        q_channel=cfg.q_channel,
        local_model=cfg.local_model,
        q_local=cfg.q_local,
    )


def family_key(text: str) -> str:
    """Group label for mixing: the strategy with purification rounds removed.

    Points that differ only in their purification rounds (e.g.
    ``B2-S-Pb-C4`` and ``B2-S-Pb-Pb-C4``) belong to one family and are
    joined by mixing arcs in round order.
    """
    kept = [ins for ins in parse(text)
            if not isinstance(ins, strategy.Purify)]
    return strategy.format_strategy(kept)


# --------------------------------------------------------------------------
# Simulation campaigns
# --------------------------------------------------------------------------

@dataclass
class PointResult:
    """One strategy's pooled outcome inside a campaign."""

    text: str
    stats: strategy.RunStats
    point: CostPoint | None
    lne: tuple[float, float] | None = None


def _lne_for_point(cfg: CampaignConfig, index: int, fidelity: float,
                   fidelity_err: float) -> tuple[float, float] | None:
    """Noise-equivalent calibration for one point, with propagated error."""
    graph = star(cfg.target_n) if cfg.family == "ghz" else path(cfg.target_n)
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=cfg.seed, spawn_key=(index, 0, 0)))
    floor = 2.0 ** (-cfg.target_n)
    try:
        x, x_probe = noise.lne_estimate(graph, fidelity, rng)
    except noise.OutOfRangeError:
        return None
    spread = 0.0
    lo = max(fidelity - fidelity_err, floor * (1 + 1e-9))
    hi = min(fidelity + fidelity_err, 1.0)
    if fidelity_err > 0:
        try:
            x_lo, _ = noise.lne_estimate(graph, hi, rng)
            x_hi, _ = noise.lne_estimate(graph, lo, rng)
            spread = abs(x_hi - x_lo) / 2.0
        except noise.OutOfRangeError:
            spread = 0.0
    return x, sqrt(x_probe**2 + spread**2)


def simulate_points(cfg: CampaignConfig) -> list[PointResult]:
    """Execute every strategy point of a simulation campaign."""
    texts = validate_config(cfg)
    params = noise_params(cfg)
    results = []
    for i, text in enumerate(texts):
        seq = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(i,))
        stats = run_strategy(text, cfg.family, cfg.target_n, cfg.ensemble,
                             params, cfg.runs, seq)
        try:
            point = cost_point(text, stats)
        except NoSurvivorsError:
            point = None
        res = PointResult(text=text, stats=stats, point=point)
        if cfg.lne and point is not None:
            res.lne = _lne_for_point(cfg, i, point.fidelity,
                                     point.fidelity_err)
        results.append(res)
    return results


def group_families(results) -> dict[str, list[CostPoint]]:
    """Group survivable points into mixing families, ordered by round count."""
    groups: dict[str, list[CostPoint]] = {}
    for res in results:
        if res.point is None:
            continue
        groups.setdefault(family_key(res.text), []).append(res.point)
    for points in groups.values():
        points.sort(key=lambda p: p.steps)
    return groups


def campaign_curves(groups: dict[str, list[CostPoint]]):
    """Mixing curve per family, in insertion order."""
    return {key: family_curve(points) for key, points in groups.items()}


def campaign_crossovers(curves: dict) -> list[tuple[str, str, tuple | None]]:
    """Crossovers between the first family (reference) and each later one.

    Uses the envelope-takeover test, which also catches the takeover at the
    reference family's fidelity ceiling (where its curve simply stops).
    """
    keys = list(curves)
    if len(keys) < 2:
        return []
    ref = keys[0]
    return [(ref, key, frontier_crossover(curves[ref], curves[key]))
            for key in keys[1:]]


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _record(**kw) -> str:
    return ",".join(_cell(kw.get(col)) for col in COLUMNS)


def simulate_rows(cfg: CampaignConfig, results) -> list[str]:
    """All CSV records of a simulation campaign, in deterministic order."""
    rows = []
    for res in results:
        base = dict(strategy=res.text, n_qubits=cfg.target_n,
                    steps=purification_steps(parse(res.text)),
                    channel_uses=res.stats.channel_uses, seed=cfg.seed)
        if res.point is not None:
            p = res.point
            base.update(fidelity=p.fidelity, fidelity_err=p.fidelity_err)
            base.update(**{"yield": p.yield_, "yield_err": p.yield_err})
            base.update(inv_cost=p.inv_cost, inv_cost_err=p.inv_cost_err)
        if res.lne is not None:
            base.update(lne=res.lne[0], lne_err=res.lne[1])
        rows.append(_record(**base))
    groups = group_families(results)
    curves = campaign_curves(groups)
    if curves:
        grid, env = strategy.frontier(list(curves.values()),
                                      cfg.frontier_points)
        span = cfg.target_n - 1
        for f, ic in zip(grid, env):
            if np.isnan(ic):
                continue
            rows.append(_record(
                strategy="frontier", n_qubits=cfg.target_n,
                fidelity=float(f), inv_cost=float(ic),
                **{"yield": float(ic) * span}, seed=cfg.seed))
    for ref, other, cross in campaign_crossovers(curves):
        base = dict(strategy=f"crossover:{ref}->{other}",
                    n_qubits=cfg.target_n, seed=cfg.seed)
        if cross is not None:
            base.update(fidelity=cross[0], inv_cost=cross[1],
                        **{"yield": cross[1] * (cfg.target_n - 1)})
        rows.append(_record(**base))
    return rows


def write_results(cfg: CampaignConfig, rows: list[str]) -> Path:
    """Write the CSV and its JSON config sidecar; returns the CSV path."""
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = ",".join(COLUMNS) + "\n" + "".join(row + "\n" for row in rows)
    out.write_text(text)
    sidecar = asdict(cfg)
    sidecar["columns"] = list(COLUMNS)
    Path(str(out) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    return out


def run_campaign(cfg: CampaignConfig) -> Path:
    """Validate, execute, and emit one simulation campaign."""
    results = simulate_points(cfg)
    rows = simulate_rows(cfg, results)
    return write_results(cfg, rows)


# --------------------------------------------------------------------------
# Analytic campaigns
# --------------------------------------------------------------------------

def analytic_rows(cfg: CampaignConfig) -> list[str]:
    """CSV records for closed-form curves (zero error bars).

    For a single target size the frontier records are included; for a size
    sweep only the per-size points and crossover records are emitted.
    """
    if not 0.5 < cfg.q_channel <= 1.0:
        raise ConfigError(
            f"q_channel: closed forms need retention in (1/2, 1], "
            f"got {cfg.q_channel}")
    if cfg.steps < 0:
        raise ConfigError(f"steps: must be nonnegative, got {cfg.steps}")
    if cfg.sweep_n is not None:
        lo, hi = cfg.sweep_n
        if not 2 <= lo <= hi:
            raise ConfigError(f"sweep_n: bad range {cfg.sweep_n}")
        sizes = range(lo, hi + 1)
    else:
        if cfg.target_n < 2:
            raise ConfigError(f"target_n: must be at least 2, got {cfg.target_n}")
        sizes = [cfg.target_n]
    entries = analytic.analytic_sweep(sizes, cfg.q_channel, cfg.q_local,
                                     range(0, cfg.steps + 1))
    rows = []
    emit_frontier = len(entries) == 1
    for entry in entries:
        families = {"pairs": entry.pairs_points, "direct": entry.direct_points}
        for points in families.values():
            for p in points:
                rows.append(_record(
                    strategy=p.strategy, n_qubits=entry.n_parties,
                    steps=p.steps, fidelity=p.fidelity, fidelity_err=0.0,
                    **{"yield": p.yield_, "yield_err": 0.0},
                    inv_cost=p.inv_cost, inv_cost_err=0.0))
        if emit_frontier:
            curves = [family_curve(list(points))
                      for points in families.values()]
            grid, env = strategy.frontier(curves, cfg.frontier_points)
            for f, ic in zip(grid, env):
                if np.isnan(ic):
                    continue
                rows.append(_record(
                    strategy="frontier", n_qubits=entry.n_parties,
                    fidelity=float(f), inv_cost=float(ic),
                    **{"yield": float(ic) * (entry.n_parties - 1)}))
        base = dict(strategy="crossover:pairs->direct",
                    n_qubits=entry.n_parties)
        if entry.crossover is not None:
            base.update(fidelity=entry.crossover[0],
                        inv_cost=entry.crossover[1],
                        **{"yield": entry.crossover[1] * (entry.n_parties - 1)})
        rows.append(_record(**base))
    return rows


def run_analytic(cfg: CampaignConfig) -> Path:
    return write_results(cfg, analytic_rows(cfg))


# --------------------------------------------------------------------------
# Compare mode
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CompareRow:
    strategy: str
    steps: int
    quantity: str
    mc: float
    mc_err: float
    analytic_value: float
    z: float


def _analytic_counterpart(text: str, cfg: CampaignConfig):
    """Closed-form prediction for a strategy, or a ConfigError if it has none.

    Comparable shapes: full-size preparation with P2-only rounds, or pair
    preparation with P2/Pb rounds and the single final fusion.
    """
    instructions = parse(text)
    purifies = [ins for ins in instructions
                if isinstance(ins, strategy.Purify)]
    m = len(purifies)
    if isinstance(instructions[0], strategy.PrepareState):
        if instructions[0].size != cfg.target_n:
            raise ConfigError(
                f"strategy {text!r}: closed forms cover only full-size or "
                f"pair preparations")
        if any(p.protocol != "P2" for p in purifies):
            raise ConfigError(
                f"strategy {text!r}: closed forms cover only P2 rounds "
                f"for full-size states")
        return analytic.mepp_imperfect(cfg.target_n, cfg.q_channel,
                                       cfg.q_local, m)
    if any(p.protocol not in ("P2", "Pb") for p in purifies):
        raise ConfigError(
            f"strategy {text!r}: closed forms cover only P2/Pb rounds "
            f"for pairs")
    return analytic.bepp_imperfect(cfg.target_n, cfg.q_channel,
                                   cfg.q_local, m)


def _z_score(mc: float, err: float, ref: float) -> float:
    if err == 0.0:
        return 0.0 if abs(mc - ref) < 1e-12 else float("inf")
    return (mc - ref) / err


def compare_mode(cfg: CampaignConfig) -> tuple[list[CompareRow], float]:
    """Side-by-side simulator vs closed forms; returns rows and worst |z|."""
    if cfg.channel != "phase":
        raise ConfigError(
            f"channel: compare mode needs the phase channel, got {cfg.channel!r}")
    if cfg.local_model not in ("toy", "none"):
        raise ConfigError(
            f"local_model: compare mode needs 'toy' or 'none', "
            f"got {cfg.local_model!r}")
    if cfg.family != "ghz":
        raise ConfigError(
            f"family: closed forms cover only 'ghz', got {cfg.family!r}")
    texts = validate_config(cfg)
    predicted = [_analytic_counterpart(text, cfg) for text in texts]
    results = simulate_points(cfg)
    rows: list[CompareRow] = []
    worst = 0.0
    for res, ref in zip(results, predicted):
        m = purification_steps(parse(res.text))
        if res.point is None:
            rows.append(CompareRow(res.text, m, "fidelity", float("nan"),
                                   0.0, ref.fidelity, float("inf")))
            worst = float("inf")
            continue
        p = res.point
        for quantity, mc, err, target in (
                ("fidelity", p.fidelity, p.fidelity_err, ref.fidelity),
                ("yield", p.yield_, p.yield_err, ref.survival)):
            z = _z_score(mc, err, target)
            rows.append(CompareRow(res.text, m, quantity, mc, err, target, z))
            worst = max(worst, abs(z))
    return rows, worst


def write_compare(cfg: CampaignConfig, rows: list[CompareRow]) -> Path:
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["strategy,steps,quantity,mc,mc_err,analytic,z"]
    for r in rows:
        lines.append(",".join([
            r.strategy, str(r.steps), r.quantity, _cell(r.mc),
            _cell(r.mc_err), _cell(r.analytic_value), _cell(r.z)]))
    out.write_text("".join(line + "\n" for line in lines))
    sidecar = asdict(cfg)
    Path(str(out) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    return out
