"""Command-line entry point wiring the pipeline end to end.

Subcommands: ingest (quotes to panel), estimate (fit and export a factor
model), forecast (one curve at the configured horizon), toy (closed-form
two-dimensional example), synth (simulated panel), backtest (expanding
window evaluation). Every run that writes files also writes a
run_manifest.json next to them echoing the resolved configuration and
the library version, so outputs are reproducible from the manifest
alone. Module errors map to distinct exit codes (see _EXIT_CODES);
usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    BacktestSpec,
    parse_method,
    run_backtest,
    write_eigenvalues_csv,
    write_rmse_csv,
)
from .estimators import export_factor_model
from .exceptions import (
    BacktestError,
    EigenSolverError,
    EstimationError,
    FarcastError,
    GridMismatchError,
    IngestError,
    SimulationError,
)
from .grid import Grid
from .ingest import (
    CurvePanel,
    build_panel,
    parse_quotes,
    read_panel_csv,
    write_panel_csv,
)
from .operators import write_kernel_csv
from .simulate import (
    SimSpec,
    default_noise,
    make_gaussian_kernel,
    simulate_far,
)
from .toy import ToyParams, toy_first_factor, toy_grid, toy_losses, toy_population

_EXIT_CODES = (
    (IngestError, 3),
    (GridMismatchError, 4),
    (EigenSolverError, 5),
    (EstimationError, 6),
    (BacktestError, 7),
    (SimulationError, 8),
    (FarcastError, 9),
)


class _UsageError(Exception):
    """Bad flag combination detected after argparse; exits with code 2."""


def _iso_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad date {text!r}: {exc}") from None


def _split_value(text: str):
    """A split is either a fraction in (0,1) or an explicit last training date."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad split {text!r}: expected a fraction or an ISO date"
        ) from None


def _method_value(text: str):
    try:
        return parse_method(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _filter_panel(panel: CurvePanel, start, end) -> CurvePanel:
    keep = [
        i
        for i, d in enumerate(panel.dates)
        if (start is None or d >= start) and (end is None or d <= end)
    ]
    if not keep:
        raise IngestError("date filter leaves no panel rows")
    if len(keep) == panel.n:
        return panel
    return CurvePanel(
        grid=panel.grid,
        dates=tuple(panel.dates[i] for i in keep),
        rows=panel.rows[keep],
    )


def _jsonable(value):
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "label") and hasattr(value, "kind"):  # MethodSpec
        return value.label
    return value


def _write_manifest(anchor: Path, command: str, args: argparse.Namespace) -> None:
    config = {
        k: _jsonable(v) for k, v in sorted(vars(args).items()) if k != "func"
    }
    target = anchor if anchor.is_dir() else anchor.parent
    payload = {
        "tool": "farcast",
        "version": __version__,
        "command": command,
        "config": config,
    }
    with open(target / "run_manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    with open(args.input, newline="") as fh:
        quotes = parse_quotes(fh)
    if args.start or args.end:
        quotes = {
            d: q
            for d, q in quotes.items()
            if (args.start is None or d >= args.start)
            and (args.end is None or d <= args.end)
        }
    if not quotes:
        raise IngestError("no quotes remain after the date filter")
    panel, dropped = build_panel(
        quotes, window=(args.min_days, args.max_days), spacing=args.spacing
    )
    out = Path(args.out)
    write_panel_csv(panel, out)
    _write_manifest(out, "ingest", args)
    print(
        f"panel: {panel.n} dates x {panel.grid.count} maturities "
        f"[{panel.grid.origin:g}, {panel.grid.terminal:g}] -> {out}"
    )
    if dropped:
        print(f"dropped {len(dropped)} date(s):")
        for d in dropped:
            print(f"  {d.date.isoformat()}: {d.reason}")
    return 0


def _load_panel(args) -> CurvePanel:
    panel = read_panel_csv(args.input)
    return _filter_panel(panel, getattr(args, "start", None), getattr(args, "end", None))


def cmd_estimate(args) -> int:
    method = args.method
    if method.kind not in ("pf", "pca"):
        raise _UsageError(
            f"estimate supports factor methods (pf, pca), not {method.kind!r}; "
            "benchmark methods appear in `farcast backtest`"
        )
    panel = _load_panel(args)
    est = method.build(args.lag).fit(panel)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    export_factor_model(est, outdir)
    write_kernel_csv(est.rho_, outdir / "rho_kernel.csv")
    _write_manifest(outdir, "estimate", args)
    print(f"fitted {method.label} on {panel.n} dates at lag {args.lag}")
    print("rank  eigenvalue")
    for j, v in enumerate(est.eigenvalues_, start=1):
        print(f"{j:>4}  {float(v)!r}")
    print(f"model written to {outdir}")
    return 0


def cmd_forecast(args) -> int:
    panel = _load_panel(args)
    if args.origin is not None:
        try:
            t = panel.dates.index(args.origin)
        except ValueError:
            raise _UsageError(
                f"origin {args.origin.isoformat()} is not a panel date"
            ) from None
    else:
        t = panel.n - 1
    train = CurvePanel(
        grid=panel.grid, dates=panel.dates[: t + 1], rows=panel.rows[: t + 1]
    )
    est = args.method.build(args.lag).fit(train)
    forecast = est.predict(panel.row_fn(t))
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        fh.write("maturity_days,value\n")
        for m, v in zip(panel.grid.points, forecast.values):
            fh.write(f"{float(m)!r},{float(v)!r}\n")
    _write_manifest(out, "forecast", args)
    print(
        f"{args.method.label} forecast from {panel.dates[t].isoformat()} "
        f"({args.lag} rows ahead) -> {out}"
    )
    return 0


def cmd_toy(args) -> int:
    try:
        params = ToyParams(
            a=args.a, b=args.b, var_eps=args.var_eps, var_eta=args.var_eta
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    pop = toy_population(params)
    losses = toy_losses(params)
    first = toy_first_factor(params)
    lines = [
        f"var_x={params.var_x!r}",
        f"var_y={params.var_y!r}",
        f"rho=diag({params.a!r}, {params.b!r})",
        f"predictable_var_x={params.predictable_var_x!r}",
        f"predictable_var_y={params.predictable_var_y!r}",
        f"loss_pca={losses.pca!r}",
        f"loss_cca={losses.cca!r}",
        f"branch={first.which}",
        f"factor=({float(first.factor[0])!r}, {float(first.factor[1])!r})",
        f"loading=({float(first.loading[0])!r}, {float(first.loading[1])!r})",
    ]
    print("\n".join(lines))
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        record = {
            "params": dict(vars(params)),
            "gamma11_diag": [float(pop.gamma11[0, 0]), float(pop.gamma11[1, 1])],
            "rho_diag": [params.a, params.b],
            "loss_pca": losses.pca,
            "loss_cca": losses.cca,
            "branch": first.which,
            "factor": [float(v) for v in first.factor],
            "loading": [float(v) for v in first.loading],
        }
        with open(outdir / "toy.json", "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(outdir, "toy", args)
    return 0


def cmd_synth(args) -> int:
    try:
        grid = Grid(origin=args.origin, spacing=args.spacing, count=args.m)
        rho = make_gaussian_kernel(grid, args.kernel_norm, args.bandwidth)
        noise = default_noise(grid, count=args.noise_count, scale=args.noise_scale)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    spec = SimSpec(
        grid=grid,
        rho=rho,
        noise=noise,
        n=args.n,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    panel = simulate_far(spec)
    out = Path(args.out)
    write_panel_csv(panel, out)
    _write_manifest(out, "synth", args)
    print(
        f"simulated {panel.n} dates x {grid.count} maturities "
        f"(hs_norm(rho)={rho.hs_norm():.6g}, seed={args.seed}) -> {out}"
    )
    return 0


def cmd_backtest(args) -> int:
    panel = _load_panel(args)
    spec = BacktestSpec(
        panel=panel,
        methods=tuple(args.method),
        horizon=args.horizon,
        split=args.split,
        refit_every=args.refit_every,
    )
    report = run_backtest(spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_rmse_csv(report, outdir / "rmse.csv")
    if report.eigenvalues:
        write_eigenvalues_csv(report, outdir / "eigenvalues.csv")
    _write_manifest(outdir, "backtest", args)
    print(
        f"{report.n_forecasts} forecasts per method, horizon {report.horizon}, "
        f"origins {report.origins[0].isoformat()}..{report.origins[-1].isoformat()}"
    )
    print("mean RMSE by method:")
    width = max(len(lab) for lab in report.labels)
    for lab in report.labels:
        print(f"  {lab:<{width}}  {report.mean_rmse(lab):.8g}")
    print(f"report written to {outdir}")
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="farcast",
        description=(
            "Forward-curve forecasting by predictive-factor functional "
            "autoregression, with benchmark methods and a backtest harness."
        ),
    )
    parser.add_argument("--version", action="version", version=f"farcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="quotes CSV to interpolated panel CSV")
    p.add_argument("--input", required=True, help="CSV with date,days_to_expiry,rate")
    p.add_argument("--out", required=True, help="panel CSV to write")
    p.add_argument("--min-days", type=float, default=90.0)
    p.add_argument("--max-days", type=float, default=3480.0)
    p.add_argument("--spacing", type=float, default=30.0)
    p.add_argument("--start", type=_iso_date, default=None, help="keep dates >= this")
    p.add_argument("--end", type=_iso_date, default=None, help="keep dates <= this")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate", help="fit a factor model and export it")
    p.add_argument("--input", required=True, help="panel CSV")
    p.add_argument("--method", type=_method_value, default=parse_method("pf"))
    p.add_argument("--lag", type=int, default=252, help="forecast horizon in rows")
    p.add_argument("--out", required=True, help="directory for the model export")
    p.add_argument("--start", type=_iso_date, default=None)
    p.add_argument("--end", type=_iso_date, default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("forecast", help="one forecast curve from a panel")
    p.add_argument("--input", required=True, help="panel CSV")
    p.add_argument("--method", type=_method_value, default=parse_method("pf"))
    p.add_argument("--lag", type=int, default=252)
    p.add_argument(
        "--origin", type=_iso_date, default=None, help="forecast origin date (default: last)"
    )
    p.add_argument("--out", required=True, help="forecast CSV to write")
    p.add_argument("--start", type=_iso_date, default=None)
    p.add_argument("--end", type=_iso_date, default=None)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("toy", help="closed-form two-dimensional example")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--var-eps", type=float, required=True)
    p.add_argument("--var-eta", type=float, required=True)
    p.add_argument("--out", default=None, help="optional directory for toy.json")
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("synth", help="simulate a functional AR(1) panel")
    p.add_argument("--out", required=True, help="panel CSV to write")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--m", type=int, default=30, help="grid size")
    p.add_argument("--origin", type=float, default=90.0)
    p.add_argument("--spacing", type=float, default=30.0)
    p.add_argument("--kernel-norm", type=float, default=0.5)
    p.add_argument("--bandwidth", type=float, default=600.0)
    p.add_argument("--noise-count", type=int, default=8)
    p.add_argument("--noise-scale", type=float, default=0.02)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("backtest", help="expanding-window forecast evaluation")
    p.add_argument("--input", required=True, help="panel CSV")
    p.add_argument(
        "--method",
        type=_method_value,
        action="append",
        required=True,
        help="repeatable: pf:k=3,alpha=0.1  pca:k=3  rw  mean  dl:lambda=0.0609",
    )
    p.add_argument("--horizon", type=int, default=252)
    p.add_argument("--split", type=_split_value, default=0.5)
    p.add_argument("--refit-every", type=int, default=1)
    p.add_argument("--out", required=True, help="directory for rmse.csv etc.")
    p.add_argument("--start", type=_iso_date, default=None)
    p.add_argument("--end", type=_iso_date, default=None)
    p.set_defaults(func=cmd_backtest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FarcastError as exc:
        for klass, code in _EXIT_CODES:
            if isinstance(exc, klass):
                print(f"error: {exc}", file=sys.stderr)
                return code
        raise AssertionError("unreachable")  # pragma: no cover
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
