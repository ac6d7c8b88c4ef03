"""Command-line surface: codebook export, sweep simulation, analysis, surrogate.

Exit codes: 0 success, 1 runtime or analysis failure (unreadable data,
truncated lobe, diverged fit, bad model file), 2 usage or config mistakes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, surrogate, svgplot
from .array_model import Direction
from .chamber import sweep_absorption, sweep_beampattern
from .codebook import build_codebook, read_codebook, write_codebook
from .config import CampaignConfig, load_campaign_config
from .datasets import (
    AbsorptionTable,
    BeampatternTable,
    load_column_mapping,
    read_table,
    write_absorption,
    write_beampattern,
)
from .errors import (
    ConfigError,
    DomainError,
    FitDivergenceError,
    LobeTruncatedError,
    ModelFormatError,
    NotFoundError,
    ParseError,
)

__all__ = ["main"]

_RUNTIME_ERRORS = (
    DomainError,
    ParseError,
    NotFoundError,
    LobeTruncatedError,
    FitDivergenceError,
    ModelFormatError,
    OSError,
)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _load_config(args) -> CampaignConfig:
    return load_campaign_config(args.config)


def _out_path(config: CampaignConfig, explicit, default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    return config.output_dir / default_name


def _cmd_codebook(args) -> int:
    config = _load_config(args)
    codebook = build_codebook(config.array, config.geometry.tx_dir, config.grid,
                              config.mode)
    path = _out_path(config, args.out, "codebook.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_codebook(codebook, path)
    print(f"{len(codebook)} entries")
    print(f"wrote {path}")
    return 0


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    codebook = build_codebook(config.array, config.geometry.tx_dir, config.grid,
                              config.mode)
    if args.dataset == "beampattern":
        table = sweep_beampattern(config.array, codebook, config.geometry,
                                  config.budget, seed=config.seed)
        path = _out_path(config, args.out, "beampattern.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        write_beampattern(table, path)
        shape = table.power_dbm.shape
    else:
        table = sweep_absorption(config.array, codebook, config.geometry,
                                 config.budget, seed=config.seed)
        path = _out_path(config, args.out, "absorption.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        write_absorption(table, path)
        shape = table.power_dbm.shape
    print(f"{shape[0]} rows x {shape[1]} columns")
    print(f"wrote {path}")
    return 0


def _parse_beam(text: str) -> Direction:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--beam wants 'AZ,EL', got {text!r}")
    try:
        return Direction(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"--beam {text!r}: {exc}") from exc


def _beam_row(table, beam: Direction | None) -> tuple[int, Direction]:
    if beam is None:
        row = int(np.argmax(table.power_dbm.max(axis=1)))
        return row, Direction(*table.beams[row])
    hits = np.flatnonzero(
        (table.beams[:, 0] == beam.azimuth_deg)
        & (table.beams[:, 1] == beam.elevation_deg)
    )
    if hits.size == 0:
        raise NotFoundError(
            f"beam ({beam.azimuth_deg:g}, {beam.elevation_deg:g}) not in table"
        )
    return int(hits[0]), beam


def _analyze_beampattern(args, table: BeampatternTable, outdir: Path) -> None:
    sg = analysis.SgFilterSpec(window=args.sg_window, order=args.sg_order)
    row, beam = _beam_row(table, args.beam)
    angles = table.rotations
    cut = table.power_dbm[row]
    label = f"beam ({beam.azimuth_deg:g}, {beam.elevation_deg:g})"

    if args.smooth:
        smoothed = np.vstack([analysis.savitzky_golay(r, sg) for r in table.power_dbm])
        out = outdir / "smoothed.csv"
        _write_csv(
            out,
            ["theta_n", "phi_n"] + ["rot_%g" % r for r in table.rotations],
            [
                [("%g" % b[0]), ("%g" % b[1])] + ["%.6f" % v for v in rowvals]
                for b, rowvals in zip(table.beams, smoothed)
            ],
        )
        print(f"smooth: wrote {out}")

    if args.hpbw:
        width = analysis.hpbw(angles, cut)
        out = outdir / "hpbw.csv"
        _write_csv(out, ["beam_azimuth_deg", "beam_elevation_deg", "hpbw_deg"],
                   [["%g" % beam.azimuth_deg, "%g" % beam.elevation_deg,
                     "%.6f" % width]])
        print(f"hpbw: {width:.4f} deg for {label} -> {out}")

    if args.localize:
        estimates = analysis.localize_aoa(table)
        out = outdir / "localization.csv"
        _write_csv(
            out,
            ["theta_r", "theta_n_hat", "phi_n_hat", "row"],
            [["%g" % e.rotation_deg, "%g" % e.azimuth_deg,
              "%g" % e.elevation_deg, e.row] for e in estimates],
        )
        exact = sum(1 for e in estimates if e.azimuth_deg == e.rotation_deg)
        print(f"localize: {exact}/{len(estimates)} columns with "
              f"matching azimuth label -> {out}")

    if args.reconstruct:
        pattern = analysis.hpi_reconstruct(angles, cut, args.tilt)
        out = outdir / "pattern3d.csv"
        _write_csv(
            out,
            ["azimuth_deg"] + ["el_%g" % e for e in pattern.elevation_deg],
            [["%g" % a] + ["%.6f" % v for v in rowvals]
             for a, rowvals in zip(pattern.azimuth_deg, pattern.power_dbm)],
        )
        print(f"reconstruct: {pattern.power_dbm.shape[0]}x"
              f"{pattern.power_dbm.shape[1]} grid at tilt {args.tilt:g} -> {out}")

    if args.fit:
        raise DomainError("--fit needs an absorption table "
                          "(half-power width vs subarray side)")

    if args.svg:
        series = [(angles, cut, label)]
        if args.smooth:
            series.append((angles, analysis.savitzky_golay(cut, sg), "smoothed"))
        out = outdir / "beampattern.svg"
        svgplot.line_plot(series, out, title="Reflection pattern",
                          x_label="rotation (deg)", y_label="RSRP (dBm)")
        print(f"svg: wrote {out}")


def _analyze_absorption(args, table: AbsorptionTable, outdir: Path) -> None:
    if args.smooth or args.localize or args.reconstruct:
        raise DomainError(
            "smooth/localize/reconstruct need a beampattern table"
        )
    elevation = args.elevation
    sel = table.beams[:, 1] == elevation
    if not np.any(sel):
        raise NotFoundError(f"no beams at elevation {elevation:g} in table")
    order = np.argsort(table.beams[sel, 0])
    azimuths = table.beams[sel, 0][order]

    widths = []
    for j in range(table.active_counts.size):
        widths.append(analysis.hpbw(azimuths, table.power_dbm[sel, j][order]))
    sides = np.sqrt(table.active_counts.astype(float))

    if args.hpbw or args.fit:
        out = outdir / "hpbw.csv"
        _write_csv(out, ["side", "active_count", "hpbw_deg"],
                   [["%g" % s, "%d" % n, "%.6f" % w]
                    for s, n, w in zip(sides, table.active_counts, widths)])
        print("hpbw:", ", ".join("n=%d -> %.3f deg" % (n, w)
                                 for n, w in zip(table.active_counts, widths)))
        print(f"hpbw: wrote {out}")

    if args.fit:
        fit = analysis.fit_exponential(sides, np.asarray(widths))
        out = outdir / "fit.csv"
        _write_csv(out, ["a", "b", "c", "residual_norm", "iterations"],
                   [["%.10g" % fit.a, "%.10g" % fit.b, "%.10g" % fit.c,
                     "%.10g" % fit.residual_norm, fit.iterations]])
        print(f"fit: a={fit.a:.4f} b={fit.b:.4f} c={fit.c:.4f} "
              f"residual={fit.residual_norm:.4g} -> {out}")

    if args.svg:
        out = outdir / "hpbw.svg"
        svgplot.line_plot(
            [(sides, np.asarray(widths), "half-power width")],
            out, title="Beamwidth vs active side", x_label="side length",
            y_label="HPBW (deg)",
        )
        print(f"svg: wrote {out}")


def _cmd_analyze(args) -> int:
    if not (args.smooth or args.hpbw or args.fit or args.localize
            or args.reconstruct):
        print("analyze: pick at least one of --smooth --hpbw --fit "
              "--localize --reconstruct", file=sys.stderr)
        return 2
    if args.reconstruct and args.tilt is None:
        print("analyze: --reconstruct needs --tilt", file=sys.stderr)
        return 2
    mapping = load_column_mapping(args.mapping) if args.mapping else None
    table = read_table(args.table, mapping)
    outdir = Path(args.out_dir) if args.out_dir else Path(args.table).parent
    outdir.mkdir(parents=True, exist_ok=True)
    if isinstance(table, BeampatternTable):
        _analyze_beampattern(args, table, outdir)
    else:
        _analyze_absorption(args, table, outdir)
    return 0


def _cmd_train(args) -> int:
    mapping = load_column_mapping(args.mapping) if args.mapping else None
    table = read_table(args.table, mapping)
    if not isinstance(table, BeampatternTable):
        raise DomainError("training expects a beampattern table")
    records = surrogate.flatten_table(table)
    train_spec = surrogate.TrainSpec(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        split_fraction=args.split_fraction,
        seed=args.seed,
    )
    model, train_nmse, val_nmse = surrogate.train(
        records, surrogate.MlpSpec(), train_spec
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    surrogate.save_model(model, out)
    print(f"train NMSE {train_nmse * 100:.4f}%  val NMSE {val_nmse * 100:.4f}%")
    print(f"wrote {out}")
    return 0


def _cmd_predict(args) -> int:
    model = surrogate.load_model(args.model)
    rows = []
    if args.at:
        for spec3 in args.at:
            parts = spec3.split(",")
            if len(parts) != 3:
                print(f"predict: --at wants 'AZ,EL,ROT', got {spec3!r}",
                      file=sys.stderr)
                return 2
            az, el, rot = (float(p) for p in parts)
            rows.append((az, el, rot))
    if args.table:
        table = read_table(args.table)
        if not isinstance(table, BeampatternTable):
            raise DomainError("predictions need beampattern-style inputs")
        rows.extend(
            (r[0], r[1], r[2]) for r in surrogate.flatten_table(table)[:, :3]
        )
    if not rows:
        print("predict: give --at AZ,EL,ROT (repeatable) and/or --table",
              file=sys.stderr)
        return 2
    inputs = np.asarray(rows, dtype=float)
    predictions = model.predict_batch(inputs)
    if args.out:
        out = Path(args.out)
        _write_csv(
            out,
            ["theta_n", "phi_n", "theta_r", "rsrp_dbm_pred"],
            [["%g" % a, "%g" % e, "%g" % r, "%.6f" % p]
             for (a, e, r), p in zip(rows, predictions)],
        )
        print(f"wrote {out}")
    else:
        for (a, e, r), p in zip(rows, predictions):
            print(f"{a:g},{e:g},{r:g} -> {p:.6f} dBm")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbeam",
        description="Beam-steering measurement campaigns on a desk: codebooks, "
                    "sweeps, analysis, and a learned surrogate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook", help="build and export the codebook")
    p.add_argument("--config", help="campaign INI file")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=_cmd_codebook)

    p = sub.add_parser("simulate", help="run a sweep and write the dataset")
    p.add_argument("--config", help="campaign INI file")
    p.add_argument("--dataset", choices=("beampattern", "absorption"),
                   default="beampattern")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="run analyses on a dataset table")
    p.add_argument("table", help="dataset CSV")
    p.add_argument("--mapping", help="column-name mapping file")
    p.add_argument("--smooth", action="store_true")
    p.add_argument("--hpbw", action="store_true")
    p.add_argument("--fit", action="store_true")
    p.add_argument("--localize", action="store_true")
    p.add_argument("--reconstruct", action="store_true")
    p.add_argument("--tilt", type=float, help="pattern peak elevation (deg)")
    p.add_argument("--beam", type=_parse_beam,
                   help="beam row as 'AZ,EL' (default: strongest row)")
    p.add_argument("--elevation", type=float, default=-3.0,
                   help="elevation slice for absorption widths")
    p.add_argument("--sg-window", type=int, default=7)
    p.add_argument("--sg-order", type=int, default=4)
    p.add_argument("--out-dir", help="where analysis CSVs go")
    p.add_argument("--svg", action="store_true", help="also render SVG plots")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("train", help="fit the MLP surrogate to a table")
    p.add_argument("table", help="beampattern CSV")
    p.add_argument("--mapping", help="column-name mapping file")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--epochs", type=int, default=750)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--split-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="evaluate a saved surrogate model")
    p.add_argument("model", help="model file from train")
    p.add_argument("--at", action="append",
                   help="point as 'AZ,EL,ROT' (repeatable)")
    p.add_argument("--table", help="predict at every cell of this table")
    p.add_argument("--out", help="predictions CSV")
    p.set_defaults(func=_cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
