"""Command line interface: ``magicdesign [global options] <command> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 resource cap, 4 internal
invariant violation.
"""

from __future__ import annotations

import sys

import click

from . import __version__, runner
from .errors import ConfigError, InvariantViolation, ResourceCapError, UnsupportedParameter

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INVARIANT = 4


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="magicdesign")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed (required for stochastic commands).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Flat key = value parameter file.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON report here (default: stdout).")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Also write a flat CSV of report rows.")
@click.option("--cache-dir", default=runner.DEFAULT_CACHE_DIR, show_default=True, help="Catalog cache directory.")
@click.option("--threads", type=click.IntRange(1), default=1, show_default=True, help="Worker threads over grid points.")
@click.option("--dump-moments", is_flag=True, help="Embed exact moment matrices in the report (base64).")
@click.option("--dump-states", is_flag=True, help="Embed sampled states in the report (base64).")
@click.option("--unsafe-caps", is_flag=True, help="Raise the dense-dimension caps.")
@click.pass_context
def main(ctx, seed, config_path, out, csv_path, cache_dir, threads, dump_moments, dump_states, unsafe_caps):
    """Clifford-commutant design analytics and experiments."""
    ctx.obj = {
        "seed": seed,
        "config_path": config_path,
        "opts": dict(
            out=out,
            csv=csv_path,
            cache_dir=cache_dir,
            threads=threads,
            dump_moments=dump_moments,
            dump_states=dump_states,
            unsafe_caps=unsafe_caps,
        ),
    }


def _execute(ctx, experiment: str, overrides: dict) -> None:
    obj = ctx.obj
    try:
        file_values = runner.load_config_file(obj["config_path"]) if obj["config_path"] else {}
        cfg = runner.ExperimentConfig.build(experiment, file_values, overrides, seed=obj["seed"], **obj["opts"])
        rep = runner.run(cfg)
        text = runner.write_report(rep, cfg)
    except InvariantViolation as exc:
        click.echo(f"invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    except ResourceCapError as exc:
        click.echo(f"resource cap: {exc}", err=True)
        sys.exit(EXIT_CAP)
    except (ConfigError, UnsupportedParameter) as exc:
        click.echo(f"invalid configuration: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if cfg.out:
        failed = [name for name, ok in rep.checks.items() if not ok]
        status = "all checks pass" if not failed else "failed checks: " + ", ".join(failed)
        click.echo(f"{experiment}: wrote {cfg.out} ({status})", err=True)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--k", type=int, default=None, help="Replica number.")
@click.option("--bruteforce-check", is_flag=True, default=None, help="Compare with the brute-force oracle (k <= 4).")
@click.pass_context
def catalog(ctx, **kw):
    """Enumerate Sigma_{k,k}, write the cache file and summarize it."""
    _execute(ctx, "catalog", kw)


@main.command("stab-design-scan")
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--xi", default=None, help="Comma-separated block half-sizes.")
@click.option("--samples", type=int, default=None)
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.pass_context
def stab_design_scan(ctx, **kw):
    """Frame potentials and additive error of two-layer Clifford circuits over xi."""
    _execute(ctx, "stab-design-scan", kw)


@main.command("magic-scan")
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--xi", type=int, default=None)
@click.option("--n-magic", default=None, help="Comma-separated numbers of single-qubit Haar gates.")
@click.option("--placement", type=click.Choice(["final", "initial"]), default=None)
@click.option("--samples", type=int, default=None)
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.pass_context
def magic_scan(ctx, **kw):
    """Frame-potential excess over Haar as magic gates are added."""
    _execute(ctx, "magic-scan", kw)


@main.command("relative-check")
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--xi", type=int, default=None)
@click.option("--ell", type=int, default=None)
@click.option("--mode", type=click.Choice(["state", "unitary-choi"]), default=None)
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.pass_context
def relative_check(ctx, **kw):
    """Exact relative error of the Haar-cluster architecture against Clifford baselines."""
    _execute(ctx, "relative-check", kw)


@main.command()
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--family", type=click.Choice(["product", "shallow", "user"]), default=None)
@click.option("--samples", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--region", type=int, default=None, help="Region size for entropies (shallow and user families).")
@click.option("--state-path", default=None, help="A .npy amplitude vector for the user family.")
@click.pass_context
def nogo(ctx, **kw):
    """Pauli fourth moments, region entropies and the no-go lower bound."""
    _execute(ctx, "nogo", kw)


@main.command()
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--xi", default=None, help="Comma-separated block half-sizes.")
@click.option("--samples", type=int, default=None)
@click.option("--x", type=int, default=None, help="Output bitstring as an integer.")
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.pass_context
def collision(ctx, **kw):
    """Collision probabilities of two-layer Clifford circuits against the global value."""
    _execute(ctx, "collision", kw)


@main.command()
@click.option("--k", type=int, default=None)
@click.option("--na", type=int, default=None)
@click.option("--nd", type=int, default=None)
@click.option("--nb", default=None, help="Comma-separated sizes of region B.")
@click.option("--nc", default=None, help="Comma-separated sizes of region C.")
@click.option("--samples", type=int, default=None)
@click.pass_context
def gluing(ctx, **kw):
    """Additive error after gluing a Haar state and a stabilizer state with a Clifford."""
    _execute(ctx, "gluing", kw)


@main.command("statmech-delta")
@click.option("--k", type=int, default=None)
@click.option("--xi", type=int, default=None)
@click.option("--L", "L", type=int, default=None)
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.pass_context
def statmech_delta(ctx, **kw):
    """Uniformity deviation, frame potential and domain walls of a block chain."""
    _execute(ctx, "statmech-delta", kw)


if __name__ == "__main__":
    main()
