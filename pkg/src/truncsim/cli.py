"""Command line front end.

Subcommands draw univariate or multivariate truncated normal samples,
emit the acceptance tables and the method-crossover curve, and write a
reproducibility manifest next to every output. Exit codes are stable for
scripting: 0 success, 2 invalid input, 3 sampling failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .diagnostics import collect_acceptance, ks_test, multi_chain_spread, truncated_cdf
from .errors import SamplingCapError, TruncsimError
from .manifest import RunManifest, build_manifest, write_manifest
from .mvn import (
    Ball,
    Box,
    ChainConfig,
    MvnSpec,
    OrderCone,
    mvn_rejection,
    run_chain,
)
from .numerics import RandomStream, derive_seed, normal_sf
from .univariate import (
    DEFAULT_MAX_PROPOSALS,
    SamplerMethod,
    UnivariateTruncationSpec,
    acceptance_one_sided,
    acceptance_two_sided,
    alpha_star,
    choose_one_sided_method,
    choose_two_sided_method,
    draw_one_sided,
    draw_two_sided,
    eq21_bound,
    sample_truncated,
    standardize,
)

INF = math.inf
SEED_ENV_VAR = "TRUNCNORM_SEED"

ONE_SIDED_GRID = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
TWO_SIDED_MU_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)
TWO_SIDED_WIDTHS = (2.0, 1.0, 0.5, 0.1)

_INDICATOR_RE = re.compile(r"^\s*(\d+)\s*([<>])\s*([-+0-9.eE]+)\s*$")


class CliError(ValueError):
    """Invalid command line input; reported with exit code 2."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_float(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise CliError(f"{flag} expects a number (or inf/-inf), got {text!r}") from exc


def _parse_vector(text: str, flag: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise CliError(f"{flag} expects a comma-separated list of numbers, got {text!r}") from exc


def _parse_covariance(text: str) -> np.ndarray:
    if text.lstrip().startswith("["):
        try:
            return np.asarray(json.loads(text), dtype=np.float64)
        except (json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"could not parse inline covariance {text!r}") from exc
    path = Path(text)
    if not path.exists():
        raise CliError(f"covariance file not found: {text}")
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise CliError(f"could not parse covariance CSV {text}") from exc


def _resolve_seed(seed_arg) -> int:
    if seed_arg is not None:
        return int(seed_arg) & (2**64 - 1)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env) & (2**64 - 1)
        except ValueError as exc:
            raise CliError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return int.from_bytes(os.urandom(8), "big")


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, embedded_manifest: RunManifest, summary: dict, draws=None) -> None:
    payload = {"manifest": asdict(embedded_manifest), "summary": summary}
    if draws is not None:
        payload["draws"] = draws
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _finish_outputs(command: str, parameters: dict, seed: int, outputs: list[Path]) -> None:
    manifest = build_manifest(command, parameters, seed, outputs)
    write_manifest(manifest, outputs[0])


# --------------------------------------------------------------------------
# sample-uni


def _resolved_uni_method(spec: UnivariateTruncationSpec, method: SamplerMethod) -> SamplerMethod:
    sb = standardize(spec)
    one_sided_map = {
        SamplerMethod.ONE_SIDED_THEN_REJECT: SamplerMethod.EXPONENTIAL_AR,
    }
    if sb.a == -INF and sb.b == INF:
        if method in (SamplerMethod.AUTO, SamplerMethod.REPEATED_NORMAL):
            return SamplerMethod.REPEATED_NORMAL
        return method
    if sb.b == INF:
        if method is SamplerMethod.AUTO:
            return choose_one_sided_method(sb.a)
        return one_sided_map.get(method, method)
    if sb.a == -INF:
        if method is SamplerMethod.AUTO:
            return choose_one_sided_method(-sb.b)
        return one_sided_map.get(method, method)
    if method is SamplerMethod.AUTO:
        return choose_two_sided_method(sb.a, sb.b)
    return method


def _analytic_uni_acceptance(spec: UnivariateTruncationSpec, method: SamplerMethod):
    sb = standardize(spec)
    if method is SamplerMethod.INVERSION:
        return 1.0
    if sb.a == -INF and sb.b == INF:
        return 1.0
    if sb.b == INF or sb.a == -INF:
        a = sb.a if sb.b == INF else -sb.b
        if method is SamplerMethod.EXPONENTIAL_AR:
            return acceptance_one_sided(a, alpha_star(a))
        if method is SamplerMethod.REPEATED_NORMAL:
            return normal_sf(a)
        return None
    try:
        return acceptance_two_sided(sb.a, sb.b, method)
    except ValueError:
        return None


def cmd_sample_uni(args) -> int:
    seed = _resolve_seed(args.seed)
    spec = UnivariateTruncationSpec(
        mu=args.mu, sigma=args.sigma, lower=args.lower, upper=args.upper, allow_untruncated=True
    )
    method = SamplerMethod(args.method)
    if args.summary_only and args.format != "json":
        raise CliError("--summary-only requires --format json")
    rng = RandomStream(seed)
    values, proposals = sample_truncated(spec, args.n, method, rng, args.max_proposals)
    resolved = _resolved_uni_method(spec, method)
    analytic = _analytic_uni_acceptance(spec, resolved)

    summary = {
        "n": args.n,
        "method": resolved.value,
        "proposals": proposals,
        "empirical_acceptance": args.n / proposals,
        "analytic_acceptance": analytic,
        "mean": float(np.mean(values)),
        "variance": float(np.var(values, ddof=1)) if args.n >= 2 else 0.0,
        "min": float(np.min(values)),
        "max": float(np.max(values)),
    }
    if args.n >= 10:
        ks_n = min(args.n, 100_000)
        report = ks_test(np.sort(values[:ks_n]), lambda x: truncated_cdf(spec, x))
        summary["ks_statistic"] = report.statistic
        summary["ks_p_value"] = report.p_value

    parameters = {
        "mu": args.mu,
        "sigma": args.sigma,
        "lower": args.lower,
        "upper": args.upper,
        "n": args.n,
        "method": args.method,
        "format": args.format,
        "max_proposals": args.max_proposals,
        "summary_only": args.summary_only,
        "out": str(args.out),
        "plot": str(args.plot) if args.plot else None,
    }
    embedded = RunManifest("sample-uni", parameters, seed)

    out = Path(args.out)
    if args.format == "csv":
        _write_csv(out, ["value"], [[_fmt(v)] for v in values])
    else:
        draws = None if args.summary_only else [[v] for v in values.tolist()]
        _write_json(out, embedded, summary, draws)

    outputs = [out]
    if args.plot:
        from .figures import save_univariate_histogram

        save_univariate_histogram(values, spec, args.plot)
        outputs.append(Path(args.plot))
    _finish_outputs("sample-uni", parameters, seed, outputs)

    acc = summary["empirical_acceptance"]
    print(f"wrote {args.n} draws to {out} (method {resolved.value}, acceptance {acc:.4f})")
    return 0


# --------------------------------------------------------------------------
# tables


def _one_sided_table_rows(empirical: bool, n: int, rng, max_proposals: int) -> list[dict]:
    rows = []
    for a in ONE_SIDED_GRID:
        ast = alpha_star(a)
        row = {"mu_minus": a, "alpha_star": ast, "analytic": acceptance_one_sided(a, ast)}
        if empirical:
            stats = collect_acceptance(
                lambda: draw_one_sided(a, SamplerMethod.EXPONENTIAL_AR, rng, max_proposals), n
            )
            row["empirical"] = stats.rate
            row["std_error"] = stats.std_error
            row["proposals"] = stats.proposals
        rows.append(row)
    return rows


def _two_sided_table_rows(empirical: bool, n: int, rng, max_proposals: int) -> list[dict]:
    rows = []
    for width in TWO_SIDED_WIDTHS:
        for a in TWO_SIDED_MU_GRID:
            b = a + width
            method = choose_two_sided_method(a, b)
            row = {
                "mu_minus": a,
                "width": width,
                "method": method.value,
                "analytic": acceptance_two_sided(a, b, method),
            }
            if empirical:
                stats = collect_acceptance(
                    lambda: draw_two_sided(a, b, method, rng, max_proposals), n
                )
                row["empirical"] = stats.rate
                row["std_error"] = stats.std_error
                row["proposals"] = stats.proposals
            rows.append(row)
    return rows


def cmd_tables(args) -> int:
    seed = _resolve_seed(args.seed)
    rng = RandomStream(seed)
    out = Path(args.out)
    if args.which == "2.1":
        rows = _one_sided_table_rows(args.empirical, args.n, rng, args.max_proposals)
        header = ["mu_minus", "alpha_star", "analytic"]
    else:
        rows = _two_sided_table_rows(args.empirical, args.n, rng, args.max_proposals)
        header = ["mu_minus", "width", "method", "analytic"]
    if args.empirical:
        header += ["empirical", "std_error", "proposals"]

    csv_rows = []
    for row in rows:
        csv_rows.append(
            [row[k] if isinstance(row[k], str) else (_fmt(row[k]) if isinstance(row[k], float) else str(row[k])) for k in header]
        )
    _write_csv(out, header, csv_rows)

    parameters = {
        "which": args.which,
        "empirical": args.empirical,
        "n": args.n,
        "out": str(out),
        "plot": str(args.plot) if args.plot else None,
    }
    outputs = [out]
    if args.plot:
        from .figures import save_one_sided_table_figure, save_two_sided_table_figure

        if args.which == "2.1":
            save_one_sided_table_figure(rows, args.plot)
        else:
            save_two_sided_table_figure(rows, args.plot)
        outputs.append(Path(args.plot))
    _finish_outputs("tables", parameters, seed, outputs)
    print(f"wrote table {args.which} ({len(rows)} rows) to {out}")
    return 0


# --------------------------------------------------------------------------
# bound-curve


def cmd_bound_curve(args) -> int:
    if args.a_min < 0.0:
        raise CliError(f"--a-min must be >= 0, got {args.a_min}")
    if not args.a_max > args.a_min:
        raise CliError("--a-max must exceed --a-min")
    if args.steps < 2:
        raise CliError("--steps must be >= 2")
    grid = np.linspace(args.a_min, args.a_max, args.steps)
    rows = [{"mu_minus": float(a), "bound": eq21_bound(float(a))} for a in grid]
    for row in rows:
        row["gap"] = row["bound"] - row["mu_minus"]
    out = Path(args.out)
    _write_csv(
        out,
        ["mu_minus", "bound", "gap"],
        [[_fmt(r["mu_minus"]), _fmt(r["bound"]), _fmt(r["gap"])] for r in rows],
    )
    parameters = {
        "a_min": args.a_min,
        "a_max": args.a_max,
        "steps": args.steps,
        "out": str(out),
        "plot": str(args.plot) if args.plot else None,
    }
    outputs = [out]
    if args.plot:
        from .figures import save_bound_curve_figure

        save_bound_curve_figure(rows, args.plot)
        outputs.append(Path(args.plot))
    _finish_outputs("bound-curve", parameters, seed=0, outputs=outputs)
    print(f"wrote {len(rows)} bound-curve points to {out}")
    return 0


# --------------------------------------------------------------------------
# sample-mvn


def _build_region(args, p: int):
    if args.region == "ball":
        if args.radius is None:
            raise CliError("--radius is required for --region ball")
        center = (
            _parse_vector(args.center, "--center") if args.center else np.zeros(p)
        )
        if center.shape[0] != p:
            raise CliError(f"--center has length {center.shape[0]}, expected {p}")
        return Ball(center, args.radius)
    if args.region == "box":
        if args.box_lower is None or args.box_upper is None:
            raise CliError("--box-lower and --box-upper are required for --region box")
        lower = _parse_vector(args.box_lower, "--box-lower")
        upper = _parse_vector(args.box_upper, "--box-upper")
        if lower.shape[0] != p or upper.shape[0] != p:
            raise CliError(f"box bounds must have length {p}")
        return Box(lower, upper)
    return OrderCone(
        lower=args.order_lower if args.order_lower is not None else -INF,
        upper=args.order_upper if args.order_upper is not None else INF,
    )


def _parse_indicators(texts, p: int):
    indicators = []
    for text in texts or ():
        m = _INDICATOR_RE.match(text)
        if not m:
            raise CliError(f"indicator must look like '1>0' or '2<0.5', got {text!r}")
        idx = int(m.group(1)) - 1
        if not 0 <= idx < p:
            raise CliError(f"indicator coordinate {idx + 1} out of range for p={p}")
        op = m.group(2)
        threshold = float(m.group(3))
        label = f"theta{idx + 1}{op}{threshold:g}"

        def fn(row, idx=idx, op=op, threshold=threshold):
            value = row[idx]
            return 1.0 if (value > threshold if op == ">" else value < threshold) else 0.0

        indicators.append((label, fn))
    return indicators


def cmd_sample_mvn(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.summary_only and args.format != "json":
        raise CliError("--summary-only requires --format json")
    if args.chains < 1:
        raise CliError("--chains must be >= 1")
    mean = _parse_vector(args.mean, "--mean")
    cov = _parse_covariance(args.cov)
    spec = MvnSpec(mean, cov)
    p = spec.p
    region = _build_region(args, p)
    indicators = _parse_indicators(args.indicator, p)

    initial = (
        _parse_vector(args.initial, "--initial") if args.initial else region.initial_point(p)
    )
    if initial.shape[0] != p:
        raise CliError(f"--initial has length {initial.shape[0]}, expected {p}")

    chain_seeds = [seed] if args.chains == 1 else [derive_seed(seed, c) for c in range(args.chains)]
    chain_draws = []
    total_proposals = 0
    if args.engine == "gibbs":
        for chain_seed in chain_seeds:
            config = ChainConfig(
                initial=initial,
                n_keep=args.n,
                burn_in=args.burnin,
                thin=args.thin,
                seed=chain_seed,
            )
            output = run_chain(spec, region, config, args.max_proposals)
            chain_draws.append(output.draws)
            total_proposals += output.univariate_trials
        accepted = args.chains * args.n * args.thin * p + args.chains * args.burnin * p
        acceptance = accepted / total_proposals if total_proposals else 1.0
    else:
        if not region.contains(initial):
            raise CliError(f"initial point {initial.tolist()} lies outside the region")
        chol = np.linalg.cholesky(spec.covariance)
        for chain_seed in chain_seeds:
            rng = RandomStream(chain_seed)
            draws = np.empty((args.n, p))
            for k in range(args.n):
                res = mvn_rejection(spec, region, rng, args.max_proposals, chol)
                draws[k] = res.value
                total_proposals += res.trials
            chain_draws.append(draws)
        acceptance = (args.chains * args.n) / total_proposals

    all_draws = np.vstack(chain_draws)
    summary = {
        "engine": args.engine,
        "chains": args.chains,
        "n_per_chain": args.n,
        "burn_in": args.burnin if args.engine == "gibbs" else 0,
        "thin": args.thin if args.engine == "gibbs" else 1,
        "proposals": total_proposals,
        "acceptance": acceptance,
        "ergodic_mean": {f"theta{j + 1}": float(all_draws[:, j].mean()) for j in range(p)},
    }
    if indicators:
        summary["indicators"] = {
            label: float(np.mean([fn(row) for row in all_draws])) for label, fn in indicators
        }
    if args.chains > 1:
        summary["spread_ratio"] = {
            f"theta{j + 1}": multi_chain_spread([d[:, j] for d in chain_draws]).ratio
            for j in range(p)
        }

    columns = [f"theta{j + 1}" for j in range(p)]
    if args.chains > 1:
        columns = ["chain"] + columns
    summary["columns"] = columns

    parameters = {
        "mean": args.mean,
        "cov": args.cov,
        "region": args.region,
        "center": args.center,
        "radius": args.radius,
        "box_lower": args.box_lower,
        "box_upper": args.box_upper,
        "order_lower": args.order_lower,
        "order_upper": args.order_upper,
        "n": args.n,
        "burnin": args.burnin,
        "thin": args.thin,
        "engine": args.engine,
        "chains": args.chains,
        "initial": args.initial,
        "indicator": list(args.indicator or ()),
        "format": args.format,
        "max_proposals": args.max_proposals,
        "summary_only": args.summary_only,
        "out": str(args.out),
        "plot": str(args.plot) if args.plot else None,
    }
    embedded = RunManifest("sample-mvn", parameters, seed)

    out = Path(args.out)
    if args.chains > 1:
        tagged_rows = []
        for c, draws in enumerate(chain_draws):
            for row in draws:
                tagged_rows.append([float(c)] + row.tolist())
    else:
        tagged_rows = [row.tolist() for row in all_draws]

    if args.format == "csv":
        if args.chains > 1:
            csv_rows = [[str(int(r[0]))] + [_fmt(v) for v in r[1:]] for r in tagged_rows]
        else:
            csv_rows = [[_fmt(v) for v in r] for r in tagged_rows]
        _write_csv(out, columns, csv_rows)
    else:
        _write_json(out, embedded, summary, None if args.summary_only else tagged_rows)

    outputs = [out]
    if args.plot:
        from .figures import save_mvn_figure

        save_mvn_figure(all_draws, region, args.plot)
        outputs.append(Path(args.plot))
    _finish_outputs("sample-mvn", parameters, seed, outputs)
    print(
        f"wrote {all_draws.shape[0]} draws ({args.engine}, {args.chains} chain(s)) to {out}"
        f" (acceptance {acceptance:.4f})"
    )
    return 0


# --------------------------------------------------------------------------
# parser


def _add_common_output_flags(sp, with_format: bool = True):
    sp.add_argument("--out", required=True, help="output file path")
    if with_format:
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument(
            "--summary-only",
            action="store_true",
            help="omit draws from JSON output (summary and manifest only)",
        )
    sp.add_argument("--plot", default=None, help="also render a figure to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truncsim",
        description="Samplers for truncated normal distributions and convex-restricted "
        "multivariate normals, with acceptance tables and reproducibility manifests.",
    )
    sub = parser.add_subparsers(dest="command")

    uni = sub.add_parser("sample-uni", help="draw univariate truncated normal samples")
    uni.add_argument("--mu", type=float, default=0.0)
    uni.add_argument("--sigma", type=float, default=1.0)
    uni.add_argument("--lower", type=float, default=-INF, help="lower bound (accepts -inf)")
    uni.add_argument("--upper", type=float, default=INF, help="upper bound (accepts inf)")
    uni.add_argument("--n", type=int, default=1000)
    uni.add_argument("--seed", type=int, default=None)
    uni.add_argument(
        "--method",
        choices=("auto", "normal", "inversion", "exp-ar", "uniform-ar"),
        default="auto",
    )
    uni.add_argument("--max-proposals", type=int, default=DEFAULT_MAX_PROPOSALS)
    _add_common_output_flags(uni)
    uni.set_defaults(func=cmd_sample_uni)

    tables = sub.add_parser("tables", help="emit the acceptance-probability tables")
    tables.add_argument("--which", choices=("2.1", "2.2"), required=True)
    mode = tables.add_mutually_exclusive_group()
    mode.add_argument("--analytic", dest="empirical", action="store_false", default=False)
    mode.add_argument("--empirical", dest="empirical", action="store_true")
    tables.add_argument("--n", type=int, default=1_000_000, help="proposals per cell (empirical mode)")
    tables.add_argument("--seed", type=int, default=None)
    tables.add_argument("--max-proposals", type=int, default=DEFAULT_MAX_PROPOSALS)
    _add_common_output_flags(tables, with_format=False)
    tables.set_defaults(func=cmd_tables)

    curve = sub.add_parser("bound-curve", help="emit the method-crossover bound curve")
    curve.add_argument("--a-min", type=float, default=0.0)
    curve.add_argument("--a-max", type=float, default=5.0)
    curve.add_argument("--steps", type=int, default=501)
    _add_common_output_flags(curve, with_format=False)
    curve.set_defaults(func=cmd_bound_curve)

    mvn = sub.add_parser("sample-mvn", help="sample a convex-restricted multivariate normal")
    mvn.add_argument("--mean", required=True, help="comma-separated mean vector")
    mvn.add_argument("--cov", required=True, help="covariance: inline [[...]] or CSV file path")
    mvn.add_argument("--region", choices=("ball", "box", "order"), required=True)
    mvn.add_argument("--center", default=None, help="ball center (comma list, default zeros)")
    mvn.add_argument("--radius", type=float, default=None)
    mvn.add_argument("--box-lower", default=None, help="box lower bounds (comma list)")
    mvn.add_argument("--box-upper", default=None, help="box upper bounds (comma list)")
    mvn.add_argument("--order-lower", type=float, default=None, help="order-cone lower cap")
    mvn.add_argument("--order-upper", type=float, default=None, help="order-cone upper cap")
    mvn.add_argument("--n", type=int, default=1000, help="kept draws per chain")
    mvn.add_argument("--burnin", type=int, default=1000)
    mvn.add_argument("--thin", type=int, default=1)
    mvn.add_argument("--seed", type=int, default=None)
    mvn.add_argument("--engine", choices=("gibbs", "rejection"), default="gibbs")
    mvn.add_argument("--chains", type=int, default=1)
    mvn.add_argument("--initial", default=None, help="chain start (comma list; default per region)")
    mvn.add_argument(
        "--indicator",
        action="append",
        help="indicator functional like '1>0' (1-based coordinate); repeatable",
    )
    mvn.add_argument("--max-proposals", type=int, default=DEFAULT_MAX_PROPOSALS)
    _add_common_output_flags(mvn)
    mvn.set_defaults(func=cmd_sample_mvn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except SamplingCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TruncsimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
