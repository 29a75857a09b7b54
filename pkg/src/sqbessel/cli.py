"""Command-line interface: coefficient generation, sampling and pricing runs.

Every command that produces a table writes CSV (default) or JSON with floats
at full round-trip precision, and report-style commands render a PNG figure
next to the data file unless --no-plot is given.  Identical invocations with
identical seeds write byte-identical data files apart from the elapsed_s
timing column.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import chebfit, plots, pricing, processes
from .sampler import RngStream, central_chi2_inverse, sample_noncentral_extra
from .specfun import NoncentralParams

DEFAULT_SEED = 20240914

# benchmark experiment defaults: exchange-rate CIR put
DEFAULT_ASSET = dict(a=0.045, b=-0.5, c=1.0, x0=0.09)
DEFAULT_STRIKE = 0.09
DEFAULT_MATURITY = 10.0

BASKET_CASES = {
    1: dict(deltas=(0.18,) * 5, bs=(-0.5,) * 5, cs=(0.8, 0.9, 1.0, 1.1, 1.2)),
    2: dict(deltas=(0.18,) * 5, bs=(-0.4, -0.45, -0.5, -0.55, -0.6),
            cs=(0.8, 0.9, 1.0, 1.1, 1.2)),
    3: dict(deltas=(0.1152, 0.1458, 0.18, 0.2178, 0.2592), bs=(-0.5,) * 5,
            cs=(1.0,) * 5),
    4: dict(deltas=(0.225, 0.2, 0.18, 0.1636, 0.15), bs=(-0.5,) * 5,
            cs=(0.8, 0.9, 1.0, 1.1, 1.2)),
}


def basket_case_spec(case: int, x0: float = 0.09, strike: float = DEFAULT_STRIKE,
                     maturity: float = DEFAULT_MATURITY) -> pricing.OptionSpec:
    params = BASKET_CASES[case]
    assets = tuple(
        processes.CirParams.from_delta(d, b, c, x0)
        for d, b, c in zip(params["deltas"], params["bs"], params["cs"])
    )
    return pricing.OptionSpec(
        kind=pricing.OptionKind.BASKET_PUT, strike=strike, maturity=maturity,
        assets=assets, weights=(1.0 / len(assets),) * len(assets),
    )


def _fmt_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_rows(path: Path, rows: list[dict], fmt: str) -> None:
    if not rows:
        raise click.ClickException("nothing to write")
    fields = list(rows[0].keys())
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for row in rows:
                writer.writerow([_fmt_value(row[f]) for f in fields])
    elif fmt == "json":
        payload = {"rows": [
            {f: (format(v, ".17g") if isinstance(v, float) else v)
             for f, v in row.items()} for row in rows
        ]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    else:
        raise click.ClickException(f"unknown format {fmt!r}")
    click.echo(f"wrote {path}")


def _load_collection(coeff_paths) -> chebfit.PatchCollection:
    if coeff_paths:
        return chebfit.PatchCollection.load(list(coeff_paths))
    return chebfit.default_collection()


def _parse_interval(text: str) -> tuple[float, float]:
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise click.ClickException(
            f"expected an interval like 0.1:0.2, got {text!r}")
    if not lo < hi:
        raise click.ClickException(
            f"interval must satisfy lo < hi, got {lo} >= {hi}")
    return lo, hi


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise click.ClickException(f"could not parse float list {text!r}")


@click.group()
def main() -> None:
    """Squared Bessel / CIR exact simulation via Chebyshev direct inversion."""


@main.command("gen-coeffs")
@click.option("--delta", "interval", required=True,
              help="degrees-of-freedom interval, e.g. 0.1:0.2")
@click.option("--acc", type=float, default=1e-8, show_default=True,
              help="target accuracy of the expansion")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--order-cap", type=int, default=chebfit.ORDER_CAP_DEFAULT,
              show_default=True)
def cmd_gen_coeffs(interval: str, acc: float, out: str, order_cap: int) -> None:
    """Fit and persist the three-region coefficient tables for one interval."""
    lo, hi = _parse_interval(interval)
    if acc <= 0:
        raise click.ClickException("--acc must be positive")
    try:
        ps = chebfit.fit_interval(lo, hi, acc, order_cap=order_cap)
    except RuntimeError as exc:
        raise click.ClickException(f"fit failed: {exc}")
    chebfit.save_patches(ps, out)
    for rid in chebfit.Region:
        patch = ps.patches[rid]
        click.echo(
            f"{rid.value:6s} region: orders (M, N) = "
            f"({patch.order_delta}, {patch.order_u}), trailing "
            f"{patch.trailing_max():.2e}"
        )
    click.echo(f"wrote {out}")


@main.command("validate-coeffs")
@click.argument("paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
def cmd_validate_coeffs(paths) -> None:
    """Load patch files, verify schema, checksum and invariants."""
    for path in paths:
        try:
            ps = chebfit.load_patches(path)
        except (ValueError, KeyError) as exc:
            raise click.ClickException(f"{path}: {exc}")
        orders = ", ".join(
            f"{rid.value}=({ps.patches[rid].order_delta},{ps.patches[rid].order_u})"
            for rid in chebfit.Region
        )
        click.echo(
            f"{path}: OK  delta in [{ps.delta_lo}, {ps.delta_hi}], "
            f"target {ps.target_accuracy:g}, {orders}"
        )


@main.command("sample")
@click.option("--delta", type=float, required=True)
@click.option("--lam", type=float, default=0.0, show_default=True,
              help="non-centrality")
@click.option("--n", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--coeffs", multiple=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def cmd_sample(delta, lam, n, seed, coeffs, out, fmt, plot) -> None:
    """Draw non-central chi-square samples and write them out.

    Output columns: sample.
    """
    coll = _load_collection(coeffs)
    params = NoncentralParams(delta, lam)
    stream = RngStream(seed, (0,))
    extra = sample_noncentral_extra(params.lam, stream, n)
    central = central_chi2_inverse(coll, params.delta,
                                   np.atleast_1d(stream.uniform(n)))
    draws = extra + central
    rows = [{"sample": float(v)} for v in draws]
    _write_rows(Path(out), rows, fmt)
    if plot:
        png = Path(out).with_suffix(".png")
        plots.plot_sample_histogram(draws, delta, lam, str(png))
        click.echo(f"wrote {png}")


@main.command("moments")
@click.option("--delta", type=float, required=True)
@click.option("--lam", type=float, default=0.0, show_default=True)
@click.option("--n", type=int, default=1_000_000, show_default=True)
@click.option("--k-max", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--coeffs", multiple=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def cmd_moments(delta, lam, n, k_max, seed, coeffs, out, fmt, plot) -> None:
    """Compare the first k sample moments against the analytic values.

    Output columns: k, analytic, sample, rel_error, jackknife_se, elapsed_s.
    """
    coll = _load_collection(coeffs)
    params = NoncentralParams(delta, lam)
    report = pricing.moment_report(coll, params, n, seed, k_max=k_max)
    rows = [
        {
            "k": k + 1,
            "analytic": report.analytic[k],
            "sample": report.sample[k],
            "rel_error": report.rel_errors[k],
            "jackknife_se": report.jackknife_se[k],
            "elapsed_s": report.elapsed,
        }
        for k in range(k_max)
    ]
    _write_rows(Path(out), rows, fmt)
    if plot:
        png = Path(out).with_suffix(".png")
        plots.plot_moment_errors(report, str(png))
        click.echo(f"wrote {png}")


@main.command("price")
@click.argument("kind", type=click.Choice(["put", "asian", "basket"]))
@click.option("--a", type=float, default=DEFAULT_ASSET["a"], show_default=True)
@click.option("--b", type=float, default=DEFAULT_ASSET["b"], show_default=True)
@click.option("--c", type=float, default=DEFAULT_ASSET["c"], show_default=True)
@click.option("--x0", type=float, default=DEFAULT_ASSET["x0"], show_default=True)
@click.option("--strike", type=float, default=DEFAULT_STRIKE, show_default=True)
@click.option("--maturity", type=float, default=DEFAULT_MATURITY,
              show_default=True)
@click.option("--fixings", type=int, default=10, show_default=True,
              help="monitoring dates (asian)")
@click.option("--basket-case", type=click.IntRange(1, 4), default=1,
              show_default=True, help="parameter case (basket)")
@click.option("--coupling", type=click.Choice(["common", "independent"]),
              default="common", show_default=True)
@click.option("--scheme", type=click.Choice(["exact", "fte"]),
              default="exact", show_default=True)
@click.option("--h", "fte_step", type=float, default=0.1, show_default=True,
              help="Euler substep (fte scheme)")
@click.option("--n-paths", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--coeffs", multiple=True, type=click.Path(exists=True))
@click.option("--coeffs-alt", multiple=True, type=click.Path(exists=True),
              help="second coefficient set for --sweep-paths")
@click.option("--sweep-h", default=None,
              help="comma list of Euler steps; emits error-vs-h rows")
@click.option("--sweep-paths", default=None,
              help="comma list of path counts; emits accuracy/CPU rows")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def cmd_price(kind, a, b, c, x0, strike, maturity, fixings, basket_case,
              coupling, scheme, fte_step, n_paths, seed, coeffs, coeffs_alt,
              sweep_h, sweep_paths, out, fmt, plot) -> None:
    """Price one of the benchmark options by Monte Carlo.

    Output columns: scheme, h, price, std_error, std_error_x1e3, n_paths,
    [reference, rel_error (put)], [fixings | basket_case, coupling],
    [coeffs (--sweep-paths)], elapsed_s.
    """
    coll = _load_collection(coeffs)
    asset = processes.CirParams(a=a, b=b, c=c, x0=x0)
    out_path = Path(out)

    if sweep_h is not None and sweep_paths is not None:
        raise click.ClickException("--sweep-h and --sweep-paths are exclusive")

    if kind == "put" and sweep_h is not None:
        reference = pricing.put_price_exact(asset, strike, maturity)
        rows = []
        res = pricing.price_put_mc(coll, asset, strike, maturity, n_paths,
                                   seed, scheme="exact")
        rows.append(_price_row("exact", None, res, reference))
        for h in _parse_floats(sweep_h):
            res = pricing.price_put_mc(coll, asset, strike, maturity, n_paths,
                                       seed, scheme="fte", fte_step=h)
            rows.append(_price_row("fte", h, res, reference))
        _write_rows(out_path, rows, fmt)
        if plot:
            png = out_path.with_suffix(".png")
            plots.plot_sweep_h([r for r in rows if r["h"] is not None],
                               str(png))
            click.echo(f"wrote {png}")
        return

    if kind == "put" and sweep_paths is not None:
        reference = pricing.put_price_exact(asset, strike, maturity)
        alt = chebfit.PatchCollection.load(list(coeffs_alt)) if coeffs_alt \
            else chebfit.default_collection(accuracy=1e-4)
        labeled = [("primary", coll), ("alternate", alt)]
        rows = []
        for n_text in _parse_floats(sweep_paths):
            n = int(n_text)
            for label, collection in labeled:
                res = pricing.price_put_mc(collection, asset, strike,
                                           maturity, n, seed, scheme="exact")
                row = _price_row("exact", None, res, reference)
                row["coeffs"] = label
                rows.append(row)
        _write_rows(out_path, rows, fmt)
        if plot:
            png = out_path.with_suffix(".png")
            plots.plot_sweep_paths(rows, str(png))
            click.echo(f"wrote {png}")
        return

    if kind == "put":
        reference = pricing.put_price_exact(asset, strike, maturity)
        res = pricing.price_put_mc(coll, asset, strike, maturity, n_paths,
                                   seed, scheme=scheme, fte_step=fte_step)
        rows = [_price_row(scheme, fte_step if scheme == "fte" else None,
                           res, reference)]
    elif kind == "asian":
        res = pricing.price_asian_mc(coll, asset, strike, maturity, fixings,
                                     n_paths, seed, scheme=scheme,
                                     fte_step=fte_step)
        rows = [_price_row(scheme, fte_step if scheme == "fte" else None, res)]
        rows[0]["fixings"] = fixings
    else:
        spec = basket_case_spec(basket_case, x0=x0, strike=strike,
                                maturity=maturity)
        res = pricing.price_basket_mc(
            coll, spec, n_paths, seed, scheme=scheme, fte_step=fte_step,
            coupling=pricing.Coupling(coupling),
        )
        rows = [_price_row(scheme, fte_step if scheme == "fte" else None, res)]
        rows[0]["basket_case"] = basket_case
        rows[0]["coupling"] = coupling
    _write_rows(out_path, rows, fmt)
    for row in rows:
        se3 = row["std_error"] * 1e3
        click.echo(
            f"{kind} [{row['scheme']}]: price {row['price']:.6f} "
            f"(std x 1e3 = {se3:.4f}, n = {row['n_paths']})"
        )


def _price_row(scheme: str, h, res: pricing.McResult,
               reference: float | None = None) -> dict:
    row = {
        "scheme": scheme,
        "h": h,
        "price": res.price,
        "std_error": res.std_error,
        "std_error_x1e3": res.std_error * 1e3,
        "n_paths": res.n_paths,
    }
    if reference is not None:
        row["reference"] = reference
        row["rel_error"] = pricing.relative_error(reference, res.price)
    row["elapsed_s"] = res.elapsed
    return row


if __name__ == "__main__":
    sys.exit(main())
