"""Command-line interface.

Subcommands:
  scf           correlation lag table (and optional matrix export) for one end
  channel-gen   draw channel realizations into a binary record
  mi-mono       deterministic and Monte-Carlo mutual information, one setup
  mi-multi      multi-user downlink at a single tilt
  validate      run the oracle/invariant suite (exit 1 on any failure)
  run NAME      one of the named experiments

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import channel as ch
from . import experiments as xp
from . import infotheory as it
from . import scf
from .config import ConfigError, load_config, overrides_for, split_control_keys
from .experiments import DEFAULT_SEED, ExperimentSpec, ResultTable


def _parse_sets(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _gather_overrides(args, name):
    overrides = {}
    seed = args.seed
    draws = args.draws
    if args.config:
        section, cfg_seed, cfg_draws = split_control_keys(
            overrides_for(load_config(args.config), name)
        )
        overrides.update(section)
        seed = seed if args.seed is not None else cfg_seed
        draws = draws if args.draws is not None else cfg_draws
    overrides.update(_parse_sets(args.set))
    return overrides, (DEFAULT_SEED if seed is None else seed), draws


def _emit(table: ResultTable, out, units, figure=True):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, units=units)
    print(f"wrote {out}")
    if figure:
        from . import plots

        png = out.with_suffix(".png")
        plots.render(table, png)
        print(f"wrote {png}")


def _units(args):
    return "bits" if args.bits else "nats"


def _cmd_run(args) -> int:
    overrides, seed, draws = _gather_overrides(args, args.experiment)
    spec = ExperimentSpec(args.experiment, overrides, draws, seed)
    table = xp.run(spec)
    out = args.out or f"results/{args.experiment}.csv"
    _emit(table, out, _units(args), figure=not args.no_figure)
    return 0


def _cmd_scf(args) -> int:
    name = f"scf-{args.end}"
    overrides, seed, draws = _gather_overrides(args, name)
    params = xp._merge(xp.experiment_defaults(name), overrides)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scf.TruncationWarning)
        az_t, el_t = xp._tx_spectra(params)
        az_r, el_r = xp._rx_spectra(params)
        azimuth, elevation = (az_t, el_t) if args.end == "tx" else (az_r, el_r)
        config = scf.ScfConfig(
            params["spacing_over_lambda"], params["ports"], azimuth, elevation, params["truncation"]
        )
        rows = []
        for lag in range(params["ports"]):
            value = scf.rho(config, lag)
            rows.append((lag, params["spacing_over_lambda"], value.real, value.imag, abs(value)))
        table = ResultTable(
            name,
            ["lag", "d_over_lambda", "re_theory", "im_theory", "abs_theory"],
            rows,
            [f"seed = {seed}", f"parameter_set = correlation-validation ({args.end})"],
        )
        out = args.out or f"results/scf-{args.end}-table.csv"
        _emit(table, out, _units(args), figure=False)
        if args.matrix_out:
            matrix = scf.correlation_matrix(config, auto_truncation=args.auto_truncation)
            matrix.to_csv(args.matrix_out)
            print(f"wrote {args.matrix_out}")
    return 0


def _cmd_channel_gen(args) -> int:
    overrides, seed, draws = _gather_overrides(args, "det-mi-verify")
    draws = draws or 100
    params = xp._merge(xp.experiment_defaults("det-mi-verify"), overrides)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scf.TruncationWarning)
        if args.model == "kronecker":
            r_bs, r_ms = xp._mi_matrices(params)
            batch = ch.draw_kronecker_batch(r_ms, r_bs, seed, draws)
        else:
            flat = args.model == "parametric-2d"
            pcfg = xp._parametric_config(params, params["n_bs"], params["n_ms"], flat=flat)
            batch = ch.draw_parametric_batch(pcfg, seed, draws)
    out = Path(args.out or f"results/channels-{args.model}.bin")
    out.parent.mkdir(parents=True, exist_ok=True)
    ch.save_realizations(out, batch, seed, args.model)
    print(f"wrote {out} ({draws} realizations of {batch.shape[1]}x{batch.shape[2]})")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(f"# model={args.model}, seed={seed}, count={draws}\n")
            fh.write("# rows are matrix rows as re,im pairs; realizations separated by comments\n")
            for index, matrix in enumerate(batch):
                fh.write(f"# realization {index}\n")
                for row in matrix:
                    fh.write(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")
        print(f"wrote {args.csv}")
    return 0


def _cmd_mi_mono(args) -> int:
    overrides, seed, draws = _gather_overrides(args, "det-mi-verify")
    draws = draws or 2000
    params = xp._merge(xp.experiment_defaults("det-mi-verify"), overrides)
    snr_db = params["snr_db"] if args.snr_db is None else args.snr_db
    noise = 10.0 ** (-snr_db / 10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scf.TruncationWarning)
        r_bs, r_ms = xp._mi_matrices(params)
        solution = it.deterministic_mi(r_bs, r_ms, noise)
        kron = ch.draw_kronecker_batch(r_ms, r_bs, seed, draws)
        pcfg = xp._parametric_config(params, params["n_bs"], params["n_ms"])
        param = ch.draw_parametric_batch(pcfg, seed, draws)
    mi_kron = np.array([it.mutual_information(m, noise) for m in kron])
    mi_param = np.array([it.mutual_information(m, noise) for m in param])
    n_bs = params["n_bs"]
    table = ResultTable(
        "mi-mono",
        [
            "snr_db",
            "v_nats",
            "mc_kronecker_nats",
            "mc_parametric_nats",
            "fixed_point_kappa",
            "fixed_point_kappa_bar",
            "fixed_point_iterations",
        ],
        [
            (
                snr_db,
                solution.mi_per_antenna,
                mi_kron.mean() / n_bs,
                mi_param.mean() / n_bs,
                solution.kappa,
                solution.kappa_bar,
                solution.iterations,
            )
        ],
        [f"seed = {seed}", f"draws = {draws}", "per-antenna mutual information", "parameter_set = mono-user-mi"],
    )
    _emit(table, args.out or "results/mi-mono.csv", _units(args), figure=False)
    return 0


def _cmd_mi_multi(args) -> int:
    overrides, seed, draws = _gather_overrides(args, "multiuser-tilt-sweep")
    draws = draws or 500
    params = xp._merge(xp.experiment_defaults("multiuser-tilt-sweep"), overrides)
    tilt = params["tilt_min_deg"] if args.tilt_deg is None else args.tilt_deg
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scf.TruncationWarning)
        radii, theta_los, scales = xp.multiuser_geometry(params, seed)
        config = xp.multiuser_config_at_tilt(params, tilt, theta_los, scales)
        roots = config.roots()
        sinrs = np.zeros((draws, config.n_users))
        for i in range(draws):
            sinrs[i] = it.multiuser_mi_draw(config, seed, i, roots=roots)
    mi = np.log1p(sinrs)
    rows = [
        (
            k,
            radii[k],
            theta_los[k] / xp.DEG,
            10.0 * np.log10(scales[k]),
            10.0 * np.log10(np.mean(sinrs[:, k])),
            mi[:, k].mean(),
        )
        for k in range(config.n_users)
    ]
    table = ResultTable(
        "mi-multi",
        ["user", "radius_m", "theta_los_deg", "large_scale_db", "mean_sinr_db", "mean_mi_nats"],
        rows,
        [
            f"seed = {seed}",
            f"draws = {draws}",
            f"tilt_deg = {tilt}",
            f"regularization = {config.regularization:.6g}",
            f"mi_per_user_nats = {mi.mean(axis=1).mean():.12g}",
            "parameter_set = multi-user",
        ],
    )
    _emit(table, args.out or "results/mi-multi.csv", _units(args), figure=False)
    return 0


def _cmd_validate(args) -> int:
    from .validate import run_checks

    results = run_checks(draws=args.draws, stream=sys.stdout)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo3d",
        description="3D MIMO spatial correlation, channel synthesis and mutual information",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_draws=True):
        p.add_argument("--config", help="key = value config file with per-experiment sections")
        p.add_argument("--seed", type=int, default=None, help="base seed (default 1)")
        if with_draws:
            p.add_argument("--draws", type=int, default=None, help="Monte-Carlo draw count")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="parameter override")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--bits", action="store_true", help="mutual information in bits")
        group.add_argument("--nats", action="store_true", help="mutual information in nats (default)")

    p = sub.add_parser("run", help="run a named experiment")
    p.add_argument("experiment", choices=xp.EXPERIMENT_NAMES)
    common(p)
    p.add_argument("--no-figure", action="store_true", help="skip the png next to the csv")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("scf", help="correlation lag table for one link end")
    p.add_argument("--end", choices=("tx", "rx"), default="tx")
    common(p, with_draws=False)
    p.add_argument("--matrix-out", help="also export the correlation matrix CSV")
    p.add_argument("--auto-truncation", action="store_true", help="raise the series order for wide arrays")
    p.set_defaults(func=_cmd_scf, draws=None)

    p = sub.add_parser("channel-gen", help="draw channel realizations to a binary record")
    p.add_argument("--model", choices=("parametric-3d", "parametric-2d", "kronecker"), default="parametric-3d")
    common(p)
    p.add_argument("--csv", help="also write the first realization as CSV")
    p.set_defaults(func=_cmd_channel_gen)

    p = sub.add_parser("mi-mono", help="mono-user mutual information at one SNR")
    common(p)
    p.add_argument("--snr-db", type=float, default=None)
    p.set_defaults(func=_cmd_mi_mono)

    p = sub.add_parser("mi-multi", help="multi-user downlink at one tilt")
    common(p)
    p.add_argument("--tilt-deg", type=float, default=None)
    p.set_defaults(func=_cmd_mi_multi)

    p = sub.add_parser("validate", help="run the oracle/invariant suite")
    p.add_argument("--draws", type=int, default=None, help="scale Monte-Carlo draw counts")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
