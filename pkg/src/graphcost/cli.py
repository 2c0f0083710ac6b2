"""Command-line entry points: ``simulate``, ``analytic``, and ``compare``.

Examples::

    graphcost simulate --state ghz --n 5 --preset extremal \\
        --channel depol --p 0.9 --q-local 0.9925 --local-model depol \\
        --ensemble 20000 --runs 100 --seed 7 --out ghz5.csv

    graphcost analytic --n 10 --q 0.9 --q-local 0.95 --steps 8 --out toy.csv
    graphcost analytic --sweep-n 5..70 --q 0.9 --q-local 0.95 --out sweep.csv

    graphcost compare --state ghz --n 10 --strategy M10-S-P2-P2 \\
        --channel phase --q 0.9 --q-local 0.95 --local-model toy \\
        --ensemble 100000 --runs 400 --seed 3 --out check.csv

``compare`` exits with a nonzero status if any simulator estimate deviates
from the closed forms by more than four standard errors.
"""

from __future__ import annotations

import sys

import click

from . import campaign
from .campaign import CampaignConfig, ConfigError
from .noise import reliability_to_retention


def _resolve_q(q: float | None, p: float | None, channel: str) -> float:
    if (q is None) == (p is None):
        raise click.UsageError("give exactly one of --q or --p")
    if p is not None:
        if channel != "depol":
            raise click.UsageError("--p applies only to --channel depol")
        return reliability_to_retention(p)
    return q


def _parse_span(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep or not lo.isdigit() or not hi.isdigit():
        raise click.UsageError(f"--sweep-n expects A..B, got {text!r}")
    return int(lo), int(hi)


_common = [
    click.option("--state", type=click.Choice(["ghz", "cluster"]),
                 default="ghz", show_default=True,
                 help="Target state family."),
    click.option("--n", "target_n", type=int, required=True,
                 help="Number of parties in the target state."),
    click.option("--strategy", "strategies", multiple=True,
                 help="Strategy string; repeatable."),
    click.option("--preset", type=click.Choice(["extremal", "intermediate"]),
                 help="Generate the strategy list from a preset family."),
    click.option("--channel", type=click.Choice(["phase", "bit", "depol"]),
                 default="depol", show_default=True,
                 help="Transmission channel noise kind."),
    click.option("--q", type=float, help="Channel retention probability."),
    click.option("--p", type=float,
                 help="Channel reliability (depolarizing only); "
                      "converted via q = (3p+1)/4."),
    click.option("--q-local", type=float, default=1.0, show_default=True,
                 help="Local-operation retention probability."),
    click.option("--local-model", type=click.Choice(["none", "depol", "toy"]),
                 default="depol", show_default=True,
                 help="Local-noise model for two-qubit operations."),
    click.option("--ensemble", type=int, default=20000, show_default=True,
                 help="Initial states per strategy point."),
    click.option("--runs", type=int, default=100, show_default=True,
                 help="Independent runs the ensemble is split across."),
    click.option("--seed", type=int, default=0, show_default=True,
                 help="Master seed."),
    click.option("--lne", is_flag=True,
                 help="Also calibrate the per-qubit noise-equivalent."),
    click.option("--out", type=click.Path(dir_okay=False), required=True,
                 help="Output CSV path (a .json sidecar is written too)."),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


def _config(state, target_n, strategies, preset, channel, q, p, q_local,
            local_model, ensemble, runs, seed, lne, out) -> CampaignConfig:
    return CampaignConfig(
        family=state,
        target_n=target_n,
        strategies=tuple(strategies),
        preset=preset,
        channel=channel,
        q_channel=_resolve_q(q, p, channel),
        local_model=local_model,
        q_local=q_local,
        ensemble=ensemble,
        runs=runs,
        seed=seed,
        lne=lne,
        out=out,
    )


@click.group()
def main() -> None:
    """Communication-cost toolkit for distributed graph states."""


@main.command()
@_with_common
def simulate(**kw) -> None:
    """Monte Carlo campaign over the given strategies."""
    cfg = _config(**kw)
    try:
        out = campaign.run_campaign(cfg)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(f"wrote {out}")


@main.command("analytic")
@click.option("--n", "target_n", type=int, help="Target size.")
@click.option("--sweep-n", "sweep", type=str,
              help="Size range A..B to sweep instead of a single --n.")
@click.option("--q", type=float, required=True,
              help="Channel retention probability (phase-flip model).")
@click.option("--q-local", type=float, default=1.0, show_default=True,
              help="Local-operation retention probability.")
@click.option("--steps", type=int, default=64, show_default=True,
              help="Largest purification round count.  The default reaches "
                   "the pair family's convergence tail, where large-size "
                   "crossings sit.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output CSV path.")
def analytic_cmd(target_n, sweep, q, q_local, steps, out) -> None:
    """Closed-form curves and crossovers for the restricted noise model."""
    if (target_n is None) == (sweep is None):
        raise click.UsageError("give exactly one of --n or --sweep-n")
    cfg = CampaignConfig(
        target_n=target_n if target_n is not None else 2,
        sweep_n=_parse_span(sweep) if sweep is not None else None,
        channel="phase",
        q_channel=q,
        local_model="toy",
        q_local=q_local,
        steps=steps,
        out=out,
    )
    try:
        path = campaign.run_analytic(cfg)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(f"wrote {path}")


@main.command()
@_with_common
def compare(**kw) -> None:
    """Simulator vs closed forms; nonzero exit if any |z| > 4."""
    cfg = _config(**kw)
    try:
        rows, worst = campaign.compare_mode(cfg)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    path = campaign.write_compare(cfg, rows)
    click.echo(f"wrote {path}; worst |z| = {worst:.3f}")
    if worst > 4.0:
        sys.exit(1)


if __name__ == "__main__":
    main()
