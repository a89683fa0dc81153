"""Command-line interface for moment-realizer."""

import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from .batch_processor import MODES, BatchProcessor
from .config import Config, create_default_config
from .config_space import KSpec, KVariant, SiteSpace, count_configurations, enumerate_configurations
from .exceptions import (
    CapExceededError,
    ConfigError,
    DimensionError,
    GeneratorError,
    InstanceFormatError,
    KSpecError,
    LPError,
    MomentRealizerError,
    PivotLimitError,
    VerificationError,
)
from .generators import (
    bernoulli_field,
    gibbs_hardcore,
    instance_from_measure,
    random_measure,
    truncated_poisson,
)
from .moments import correlation_functions, factorial_to_power, power_moments, power_to_factorial
from .polynomial import Polynomial, empirical_ratio_max, ratio_bound
from .realizer import Realizer, RealizabilityInstance, RepresentingMeasure
from .result import RealizabilityResult
from .schema import (
    instance_to_dict,
    load_instance,
    load_measure,
    load_polynomial,
    measure_to_list,
    moments_to_dict,
    parse_kspec,
    parse_space,
    parse_tensors,
    parse_verdict,
    read_json,
    tensors_to_dict,
    verdict_context,
    write_json,
)
from .utils import format_rational, parse_labels, parse_rational_list, to_fraction
from .version import __version__

console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CERTIFICATE = 1
EXIT_USAGE = 2
EXIT_CAP = 3
EXIT_VERIFY = 4


def _configure_logging(level: int):
    root = logging.getLogger()
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(RichHandler(console=err_console, rich_tracebacks=True, show_path=False))
    root.setLevel(level)


class RealizerGroup(click.Group):
    """Maps library errors onto the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (CapExceededError, PivotLimitError) as e:
            err_console.print(f"[red]Resource cap exceeded:[/red] {escape(str(e))}")
            raise click.exceptions.Exit(EXIT_CAP)
        except VerificationError as e:
            err_console.print(f"[red]Verification failed:[/red] {escape(str(e))}")
            raise click.exceptions.Exit(EXIT_VERIFY)
        except (InstanceFormatError, DimensionError, KSpecError, ConfigError, GeneratorError) as e:
            err_console.print(f"[red]Error:[/red] {escape(str(e))}")
            raise click.exceptions.Exit(EXIT_USAGE)
        except (LPError, MomentRealizerError) as e:
            err_console.print(f"[red]Solver error:[/red] {escape(str(e))}")
            if logger.isEnabledFor(logging.DEBUG):
                err_console.print_exception()
            raise click.exceptions.Exit(EXIT_USAGE)


@click.group(cls=RealizerGroup)
@click.version_option(version=__version__, prog_name="moment-realizer")
@click.option("--config", "-c", "config_path", type=click.Path(exists=True), help="Config file path")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.option("--quiet", "-q", is_flag=True, help="Only log errors")
@click.pass_context
def cli(ctx, config_path, verbose, quiet):
    """moment-realizer - exact truncated K-moment problems for point processes.

    \b
    Decides whether given first and second moment data come from a point
    process supported on a finite configuration set K, returning either a
    representing measure or a positivity certificate.
    """
    ctx.ensure_object(dict)

    if quiet:
        _configure_logging(logging.ERROR)
    elif verbose:
        _configure_logging(logging.DEBUG)
    else:
        _configure_logging(logging.INFO)

    config = Config.load(config_path)
    ctx.obj["config"] = config
    ctx.obj["config_path"] = config_path
    ctx.obj["realizer"] = Realizer.from_config(config)


def _emit(data, output: Optional[str], indent: int):
    if output:
        path = write_json(data, output, indent)
        console.print(f"[bold]Saved to:[/bold] {path}")
    else:
        click.echo(json.dumps(data, indent=indent))


def _space_from_options(space_file: Optional[str], sites: Optional[str],
                        spacing: Optional[str]) -> SiteSpace:
    if space_file:
        return parse_space(read_json(space_file))
    if not sites:
        raise click.UsageError("give an instance/space file or --sites")
    labels = parse_labels(sites)
    if spacing is not None:
        return SiteSpace.on_line(labels, to_fraction(spacing, "--spacing"))
    return SiteSpace(tuple(labels))


def _kspec_from_options(variant: str, q: Optional[int], d: Optional[str]) -> KSpec:
    if q is None:
        raise click.UsageError("--q is required")
    if KVariant(variant) is KVariant.HARD_CORE:
        if d is None:
            raise click.UsageError("--d is required for the hard_core variant")
        return KSpec.hard_core(to_fraction(d, "--d"), q)
    return KSpec(KVariant(variant), q)


VARIANT_CHOICE = click.Choice([v.value for v in KVariant if v is not KVariant.LISTED])


@cli.command("enumerate")
@click.argument("space_file", required=False, type=click.Path(exists=True))
@click.option("--sites", help="Site labels 'a,b,c' or a site count")
@click.option("--spacing", help="Place the sites on a line with this spacing")
@click.option("--variant", default="at_most", type=VARIANT_CHOICE, help="Configuration set")
@click.option("--q", "q", type=int, help="Total-mass cap Q")
@click.option("--d", "d", help="Hard-core exclusion distance D")
@click.option("--count", is_flag=True, help="Only print the number of configurations")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "table"]), help="Output format")
@click.pass_context
def enumerate_cmd(ctx, space_file, sites, spacing, variant, q, d, count, fmt):
    """Enumerate the configuration set K of a site space."""
    config = ctx.obj["config"]
    if space_file:
        data = read_json(space_file)
        space = parse_space(data)
        if "kspec" in data:
            kspec = parse_kspec(data["kspec"], "$.kspec", space.size)
        else:
            kspec = _kspec_from_options(variant, q, d)
    else:
        space = _space_from_options(None, sites, spacing)
        kspec = _kspec_from_options(variant, q, d)

    if count:
        click.echo(str(count_configurations(space, kspec)))
        return

    configs = enumerate_configurations(space, kspec, config.limits.enumeration_cap)
    if (fmt or config.output.format) == "table":
        table = Table(title=f"{kspec.describe()} on ({', '.join(space.sites)})")
        table.add_column("#", justify="right")
        table.add_column("counts", style="cyan")
        table.add_column("mass", justify="right")
        for i, c in enumerate(configs):
            table.add_row(str(i), str(c), str(c.total_mass))
        console.print(table)
    else:
        click.echo(json.dumps([list(c.counts) for c in configs]))


@cli.command()
@click.argument("measure_file", type=click.Path(exists=True))
@click.option("--order", "-n", default=2, type=click.IntRange(0, 3), help="Highest moment order")
@click.option("--output", "-o", type=click.Path(), help="Output file path")
@click.pass_context
def moments(ctx, measure_file, order, output):
    """Power moments and correlation functions of a measure."""
    mu = load_measure(measure_file)
    if mu.n_sites is None:
        raise InstanceFormatError("the measure has an empty support", "$.support")
    data = moments_to_dict(power_moments(mu, order), correlation_functions(mu, order))
    data["total_weight"] = format_rational(mu.total_weight)
    _emit(data, output, ctx.obj["config"].output.indent)


@cli.command()
@click.argument("tensor_file", type=click.Path(exists=True))
@click.option("--to", "target", required=True, type=click.Choice(["factorial", "power"]),
              help="Convert power moments to correlation functions or back")
@click.option("--output", "-o", type=click.Path(), help="Output file path")
@click.pass_context
def convert(ctx, tensor_file, target, output):
    """Convert between power moments and correlation functions."""
    data = read_json(tensor_file)
    path = "$"
    if isinstance(data, dict) and "L" in data:
        data, path = data["L"], "$.L"
    if not isinstance(data, dict) or not isinstance(data.get("ell1"), list):
        raise InstanceFormatError("expected an object with an ell1 array", f"{path}.ell1")
    tensors = parse_tensors(data, path, len(data["ell1"]), default_ell0="1")
    converted = power_to_factorial(tensors) if target == "factorial" else factorial_to_power(tensors)
    _emit(tensors_to_dict(converted), output, ctx.obj["config"].output.indent)


def _load(ctx, instance_file: str, factorial: bool, ell0: Optional[str]) -> RealizabilityInstance:
    config = ctx.obj["config"]
    instance = load_instance(instance_file, config.solver.default_ell0, factorial)
    if ell0 is not None:
        instance = replace(instance, L=instance.L.with_ell0(to_fraction(ell0, "--ell0")))
    return instance


def _finish(ctx, result: RealizabilityResult, verify: bool, output: Optional[str],
            fmt: Optional[str]):
    config = ctx.obj["config"]
    realizer: Realizer = ctx.obj["realizer"]
    fmt = fmt or config.output.format

    if verify or config.solver.verify:
        result.report = realizer.verify_verdict(result.instance, result.verdict)

    if output:
        path = result.save(output, format=fmt, indent=config.output.indent)
        console.print(f"[bold]Saved to:[/bold] {path}")
    elif fmt == "table":
        console.print(result.to_table())
    else:
        click.echo(json.dumps(result.to_dict(), indent=config.output.indent))

    logger.info(result.get_summary())
    if result.report is not None and not result.report.passed:
        raise VerificationError(result.report.summary())
    ctx.exit(result.exit_code)


COMMON_OUTPUT = [
    click.option("--verify", is_flag=True, help="Re-check the verdict before exiting"),
    click.option("--output", "-o", type=click.Path(), help="Output file path"),
    click.option("--format", "-f", "fmt", type=click.Choice(["json", "table"]), help="Output format"),
    click.option("--factorial", is_flag=True, help="Moment data are correlation functions"),
    click.option("--ell0", help="Override the total mass ell0"),
]


def common_output(func):
    for option in reversed(COMMON_OUTPUT):
        func = option(func)
    return func


@cli.command()
@click.argument("instance_file", type=click.Path(exists=True))
@common_output
@click.pass_context
def realize(ctx, instance_file, verify, output, fmt, factorial, ell0):
    """Find a representing measure or a positivity certificate."""
    instance = _load(ctx, instance_file, factorial, ell0)
    realizer: Realizer = ctx.obj["realizer"]

    start = time.perf_counter()
    verdict = realizer.find_representing_measure(instance)
    result = RealizabilityResult(verdict, instance, "realize", time.perf_counter() - start,
                                 realizer.enumeration_cap, instance_file)
    _finish(ctx, result, verify, output, fmt)


@cli.command("extend-cubic")
@click.argument("instance_file", type=click.Path(exists=True))
@click.option("--r-max", help="Cap on the weighted third moment (overrides the instance)")
@click.option("--gamma", help="Positive site weights 'g1,g2,...' (overrides the instance)")
@click.option("--minimize", is_flag=True, help="Report the minimal third moment R* instead")
@common_output
@click.pass_context
def extend_cubic(ctx, instance_file, r_max, gamma, minimize, verify, output, fmt, factorial, ell0):
    """Realize with a bounded third moment, or certify with a restricted cubic."""
    instance = _load(ctx, instance_file, factorial, ell0)
    if gamma is not None:
        instance = replace(instance, gamma=tuple(parse_rational_list(gamma, "--gamma")))
    if r_max is not None:
        instance = replace(instance, r_max=to_fraction(r_max, "--r-max"))
    realizer: Realizer = ctx.obj["realizer"]

    start = time.perf_counter()
    if minimize:
        verdict = realizer.minimal_third_moment(instance)
        mode = "minimize"
    else:
        verdict = realizer.extend_with_cubic(instance)
        mode = "extend-cubic"
    result = RealizabilityResult(verdict, instance, mode, time.perf_counter() - start,
                                 realizer.enumeration_cap, instance_file)
    _finish(ctx, result, verify, output, fmt)


@cli.command("certify-check")
@click.argument("instance_file", type=click.Path(exists=True))
@click.argument("result_file", type=click.Path(exists=True))
@click.option("--gamma", help="Site weights 'g1,g2,...' (default: instance, then result file)")
@click.option("--r-max", help="Third-moment cap (default: instance, then result file)")
@click.option("--factorial", is_flag=True, help="Moment data are correlation functions")
@click.option("--ell0", help="Override the total mass ell0")
@click.pass_context
def certify_check(ctx, instance_file, result_file, gamma, r_max, factorial, ell0):
    """Re-verify a stored verdict against its instance."""
    instance = _load(ctx, instance_file, factorial, ell0)
    data = read_json(result_file)
    verdict = parse_verdict(data, instance.space.size)

    recorded = verdict_context(data, instance.space.size)
    if gamma is not None:
        instance = replace(instance, gamma=tuple(parse_rational_list(gamma, "--gamma")))
    elif instance.gamma is None and "gamma" in recorded:
        instance = replace(instance, gamma=recorded["gamma"])
    if r_max is not None:
        instance = replace(instance, r_max=to_fraction(r_max, "--r-max"))
        if isinstance(verdict, RepresentingMeasure) and verdict.r_max is None:
            verdict = replace(verdict, r_max=instance.r_max)
    elif instance.r_max is None and "r_max" in recorded:
        instance = replace(instance, r_max=recorded["r_max"])

    report = ctx.obj["realizer"].verify_verdict(instance, verdict)

    table = Table(title=f"Verification of {Path(result_file).name}")
    table.add_column("check", style="cyan")
    table.add_column("status")
    table.add_column("detail")
    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(escape(check.name), status, escape(check.detail) if not check.passed else "")
    console.print(table)

    if report.passed:
        console.print("[bold green]✓ Verdict verified[/bold green]")
        ctx.exit(EXIT_OK)
    console.print(f"[bold red]✗ {len(report.failures)} check(s) failed[/bold red]")
    ctx.exit(EXIT_VERIFY)


@cli.command()
@click.argument("kind", type=click.Choice(["bernoulli", "poisson", "hardcore", "random"]))
@click.option("--sites", help="Site labels 'a,b,c' or a site count")
@click.option("--spacing", help="Place the sites on a line with this spacing")
@click.option("--space", "space_file", type=click.Path(exists=True), help="Site space JSON file")
@click.option("--probs", help="bernoulli: occupation probabilities 'p1,p2,...'")
@click.option("--intensities", help="poisson: intensities 'l1,l2,...'")
@click.option("--cap", default=1, type=click.IntRange(0), help="poisson: per-site count cap")
@click.option("--z", "z", default="1", help="hardcore: activity")
@click.option("--d", "d", help="hardcore/random: exclusion distance D")
@click.option("--q", "q", type=int, help="hardcore/random: total-mass cap Q")
@click.option("--variant", default="at_most", type=VARIANT_CHOICE, help="random: configuration set")
@click.option("--seed", default=0, type=int, help="random: PRNG seed")
@click.option("--gamma", help="Attach site weights 'g1,g2,...' to the instance")
@click.option("--measure-only", is_flag=True, help="Emit the measure instead of an instance")
@click.option("--output", "-o", type=click.Path(), help="Output file path")
@click.pass_context
def generate(ctx, kind, sites, spacing, space_file, probs, intensities, cap, z, d, q,
             variant, seed, gamma, measure_only, output):
    """Emit a known-realizable instance from a point-process generator."""
    config = ctx.obj["config"]
    space = _space_from_options(space_file, sites, spacing)
    n = space.size
    meta = {"generator": kind}

    if kind == "bernoulli":
        values = parse_rational_list(probs, "--probs") if probs else ["1/2"] * n
        mu = bernoulli_field(space, values)
        kspec = KSpec.simple(n)
        meta["probs"] = [format_rational(to_fraction(v)) for v in values]
    elif kind == "poisson":
        values = parse_rational_list(intensities, "--intensities") if intensities else ["1"] * n
        mu = truncated_poisson(space, values, cap)
        kspec = KSpec.at_most(n * cap)
        meta["intensities"] = [format_rational(to_fraction(v)) for v in values]
        meta["cap"] = cap
    elif kind == "hardcore":
        if d is None or q is None:
            raise click.UsageError("hardcore needs --d and --q")
        kspec = KSpec.hard_core(to_fraction(d, "--d"), q)
        mu = gibbs_hardcore(space, to_fraction(z, "--z"), kspec.D, q, config.limits.enumeration_cap)
        meta["z"] = format_rational(to_fraction(z, "--z"))
    else:
        kspec = _kspec_from_options(variant, q, d)
        mu = random_measure(space, kspec, seed, config.limits.enumeration_cap)
        meta["seed"] = seed

    logger.info(f"Generated {kind} measure with {len(mu)} atoms")
    if measure_only:
        _emit({"sites": list(space.sites), "support": measure_to_list(mu)},
              output, config.output.indent)
        return

    weights = tuple(parse_rational_list(gamma, "--gamma")) if gamma else None
    instance = instance_from_measure(mu, space, kspec, weights, meta=meta)
    _emit(instance_to_dict(instance), output, config.output.indent)


@cli.command("ratio-bound")
@click.argument("polynomial_file", type=click.Path(exists=True))
@click.option("--gamma", help="Positive site weights (default all 1)")
@click.option("--q", "q", default=6, type=click.IntRange(0), help="Scan configurations with mass <= Q")
@click.pass_context
def ratio_bound_cmd(ctx, polynomial_file, gamma, q):
    """Dominance constant lambda_b of a degree-2 polynomial, with an empirical scan."""
    b = load_polynomial(polynomial_file)
    if not isinstance(b, Polynomial):
        raise InstanceFormatError("expected a polynomial without gamma", "$")
    if b.n_sites is None:
        raise InstanceFormatError("cannot infer the number of sites from a constant", "$.f1")
    weights = parse_rational_list(gamma, "--gamma") if gamma else [1] * b.n_sites

    bound = ratio_bound(b, weights)
    space = SiteSpace(tuple(f"s{i}" for i in range(b.n_sites)))
    configs = enumerate_configurations(space, KSpec.at_most(q), ctx.obj["config"].limits.enumeration_cap)
    empirical = empirical_ratio_max(b, weights, configs)

    table = Table(title="Ratio bound |b| / (1 + (sum gamma k)^3)")
    table.add_column("quantity", style="cyan")
    table.add_column("value", justify="right")
    table.add_row("lambda_b", str(bound))
    table.add_row(f"empirical max (Q <= {q}, {len(configs)} configurations)", str(empirical))
    console.print(table)
    click.echo(json.dumps({"lambda_b": format_rational(bound),
                           "empirical_max": format_rational(empirical), "Q": q}))


@cli.command()
@click.argument("instance_file", type=click.Path(exists=True))
@click.option("--q-values", required=True, help="Caps to try, e.g. '0,1,2,3'")
@click.option("--factorial", is_flag=True, help="Moment data are correlation functions")
@click.option("--ell0", help="Override the total mass ell0")
@click.pass_context
def sweep(ctx, instance_file, q_values, factorial, ell0):
    """Decide the same moment data for increasing caps Q."""
    instance = _load(ctx, instance_file, factorial, ell0)
    try:
        caps = [int(v) for v in q_values.split(",")]
    except ValueError:
        raise click.BadParameter(f"expected integers, got {q_values!r}", param_hint="--q-values")

    points = ctx.obj["realizer"].sweep_q(instance, caps, progress=logging.getLogger().level <= logging.INFO)
    table = Table(title=f"Sweep over Q ({instance.kspec.variant.value})")
    table.add_column("Q", justify="right")
    table.add_column("|K|", justify="right")
    table.add_column("verdict")
    table.add_column("detail")
    for point in points:
        if point.verdict.is_measure:
            detail = f"{len(point.verdict.measure)} atoms"
            table.add_row(str(point.Q), str(point.n_configurations), "[green]measure[/green]", detail)
        else:
            detail = f"degree {point.verdict.q.effective_degree()}"
            table.add_row(str(point.Q), str(point.n_configurations), "[red]certificate[/red]", detail)
    console.print(table)


@cli.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--output-dir", "-o", type=click.Path(), help="Output directory")
@click.option("--mode", default="realize", type=click.Choice(list(MODES)), help="Operation to run")
@click.option("--jobs", "-j", type=click.IntRange(1), help="Parallel workers")
@click.option("--pattern", "-p", default="*.json", help="Instance file pattern")
@click.option("--recursive", "-r", is_flag=True, help="Process subdirectories")
@click.option("--format", "-f", "fmt", type=click.Choice(["json", "table"]), help="Output format")
@click.option("--verify", is_flag=True, help="Re-check every verdict")
@click.option("--factorial", is_flag=True, help="Moment data are correlation functions")
@click.option("--overwrite", is_flag=True, help="Recompute instances that already have results")
@click.option("--report", "report_path", type=click.Path(), help="Write the batch report here")
@click.pass_context
def batch(ctx, input_dir, output_dir, mode, jobs, pattern, recursive, fmt, verify,
          factorial, overwrite, report_path):
    """Decide every instance file in a directory."""
    config = ctx.obj["config"]
    processor = BatchProcessor(
        realizer=ctx.obj["realizer"],
        mode=mode,
        output_format=fmt or config.output.format,
        num_workers=jobs or config.processing.num_workers,
        verify=verify or config.solver.verify,
        factorial=factorial,
        default_ell0=config.solver.default_ell0,
        indent=config.output.indent,
    )

    results = processor.process_directory(
        input_dir,
        output_dir or config.output.output_dir,
        pattern=pattern,
        recursive=recursive,
        skip_existing=config.processing.skip_existing and not overwrite,
    )
    report = processor.generate_report(results)
    console.print(report)
    if report_path:
        Path(report_path).write_text(report, encoding="utf-8")

    failed = [r for r in results if not r['success']]
    unverified = [r for r in results if r.get('verified') is False]
    if unverified:
        ctx.exit(EXIT_VERIFY)
    if failed:
        ctx.exit(EXIT_USAGE)
    console.print(f"\n[bold green]✓ Batch processing complete![/bold green] {len(results)} instances")


@cli.command()
@click.option("--show", is_flag=True, help="Show current configuration")
@click.option("--init", "init_path", type=click.Path(), help="Write a default configuration file")
@click.option("--set", "set_key", help="Set configuration key (format: section.key=value)")
@click.pass_context
def config(ctx, show, init_path, set_key):
    """Manage configuration."""
    config = ctx.obj["config"]

    if show or not (init_path or set_key):
        console.print("\n[bold]Current Configuration:[/bold]")
        console.print(escape(config.to_yaml()))
    elif init_path:
        path = create_default_config(init_path)
        console.print(f"[green]✓ Wrote default configuration to {path}[/green]")
    elif set_key:
        if "=" not in set_key:
            raise click.BadParameter("use section.key=value", param_hint="--set")
        key, value = set_key.split("=", 1)
        config.set(key.strip(), value.strip())
        path = Path(ctx.obj["config_path"] or Config.default_config_path())
        config.save(path)
        console.print(f"[green]✓ Set {key} = {value}[/green] in {path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    try:
        rv = cli.main(args=argv, prog_name="moment-realizer", standalone_mode=False)
    except click.exceptions.Abort:
        err_console.print("[red]Aborted[/red]")
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
