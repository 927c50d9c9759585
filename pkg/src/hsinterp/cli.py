"""``hsinterp`` command line: synth, split, train, eval, classify, ndvi, interpret."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import indices, interpret, lda, mlp, render, split, synth
from .spectra_io import (class_mean_spectra, load_cube, load_dataset_csv, write_cube,
                         write_dataset_csv)


class CliError(Exception):
    pass


def _f4(v: float) -> str:
    return f"{v:.4f}"


def _need_files(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise CliError(f"file not found: {p}")


def _header_for(raster, header):
    if header:
        return header
    candidates = [Path(str(raster) + ".hdr"), Path(raster).with_suffix(".hdr")]
    for c in candidates:
        if c.is_file():
            return c
    raise CliError(f"no header found for {raster}; pass --header")


def _counts(text, n):
    try:
        counts = [int(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"--counts must be comma-separated integers, got {text!r}") from None
    if len(counts) != n or min(counts) < 1:
        raise CliError(f"--counts needs {n} positive integers")
    return counts


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args):
    if not args.out and not args.cube_out:
        raise CliError("synth needs --out and/or --cube-out")
    if args.materials:
        _need_files(args.materials)
    factory, grid, default_counts = synth.PRESETS[args.preset]
    models = synth.load_materials(args.materials) if args.materials else factory()
    if args.noise is not None:
        if args.noise < 0:
            raise CliError("--noise must be >= 0")
        models = [synth.MaterialModel(m.name, m.baseline, m.red_edge, m.absorptions, args.noise)
                  for m in models]
    counts = (_counts(args.counts, len(models)) if args.counts
              else list(default_counts.values()))
    if len(counts) != len(models):
        raise CliError(f"{len(models)} materials need --counts")
    if args.cube_out and (args.lines < 1 or args.samples < 1):
        raise CliError("--lines and --samples must be positive")
    if args.save_materials:
        synth.save_materials(models, args.save_materials)
    if args.out:
        ds = synth.generate_dataset(models, counts, grid, args.seed)
        write_dataset_csv(ds, args.out)
        print(f"wrote {ds.n_samples} spectra x {ds.bands} bands to {args.out}")
    if args.cube_out:
        scene = synth.stripe_scene(args.lines, args.samples, len(models))
        cube, truth = synth.generate_cube(scene, models, grid, args.seed)
        header = args.cube_out + ".hdr"
        write_cube(cube, args.cube_out, header, interleave=args.interleave)
        print(f"wrote cube {cube.lines}x{cube.samples}x{cube.bands} to {args.cube_out}")
        if args.truth_out:
            render.write_class_map(truth, render.default_palette(len(models)), args.truth_out)


def cmd_split(args):
    if not 0.0 < args.fraction < 1.0:
        raise CliError("--fraction must be in (0, 1)")
    _need_files(args.dataset)
    ds = load_dataset_csv(args.dataset)
    res = split.stratified_split(ds, args.fraction, args.seed)
    write_dataset_csv(res.train, args.out_train)
    write_dataset_csv(res.test, args.out_test)
    if args.indices_out:
        split.write_partition_csv(res, args.indices_out)
    print(f"train {res.train.n_samples} test {res.test.n_samples}")


def _mlp_config(args) -> mlp.MlpConfig:
    try:
        return mlp.MlpConfig(hidden_units=args.hidden, dropout_rate=args.dropout,
                             epochs=args.epochs, batch_size=args.batch_size,
                             learning_rate=args.learning_rate, seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_train(args):
    cfg = _mlp_config(args)
    _need_files(args.train)
    ds = load_dataset_csv(args.train)
    model, report = mlp.train(ds, cfg)
    mlp.save_model(model, args.model_out)
    print(f"epoch {cfg.epochs} loss {_f4(report.epoch_loss[-1])}")
    print(f"train_accuracy {_f4(report.train_accuracy)}")


def cmd_eval(args):
    if not 0.0 <= args.lda_shrinkage <= 1.0:
        raise CliError("--lda-shrinkage must be in [0, 1]")
    _need_files(args.model, args.test, args.lda_train)
    model = mlp.load_model(args.model)
    ds = load_dataset_csv(args.test)
    print(f"accuracy {_f4(mlp.accuracy(model, ds))}")
    if args.lda_train:
        lda_model = lda.fit_lda(load_dataset_csv(args.lda_train), args.lda_shrinkage)
        lookup = {n: i for i, n in enumerate(lda_model.class_names)}
        y = np.array([lookup[ds.class_names[c]] for c in ds.labels])
        acc = float(np.mean(lda.predict_lda(lda_model, ds.spectra) == y))
        print(f"lda_accuracy {_f4(acc)}")


def cmd_classify(args):
    _need_files(args.model, args.cube, args.header, args.palette)
    header = _header_for(args.cube, args.header)
    model = mlp.load_model(args.model)
    cube = load_cube(args.cube, header)
    if cube.bands != model.bands:
        raise CliError(f"{args.cube} has {cube.bands} bands; model expects {model.bands}")
    palette = (render.load_palette(args.palette) if args.palette
               else render.default_palette(model.n_classes))
    labels = mlp.predict(model, cube.pixels()).reshape(cube.lines, cube.samples)
    render.write_class_map(labels, palette, args.map_out)
    counts = np.bincount(labels.ravel(), minlength=model.n_classes)
    for name, c in zip(model.class_names, counts):
        print(f"{name} {c}")


def cmd_ndvi(args):
    if not args.map_out and not args.csv_out:
        raise CliError("ndvi needs --map-out and/or --csv-out")
    _need_files(args.cube, args.header, args.index_file)
    if args.index_file:
        specs = indices.load_index_specs(args.index_file)
        if args.index not in specs:
            raise CliError(f"index {args.index!r} not in {args.index_file}")
        spec = specs[args.index]
    elif args.index in indices.PRESETS:
        spec = indices.PRESETS[args.index]
    else:
        raise CliError(f"unknown index preset {args.index!r}; choose from {sorted(indices.PRESETS)}")
    cube = load_cube(args.cube, _header_for(args.cube, args.header))
    values = indices.index_map(cube, spec)
    if args.map_out:
        render.write_index_map(values, args.map_out)
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write("line,sample,value\n")
            for (i, j), v in np.ndenumerate(values):
                fh.write(f"{i},{j},{'nan' if np.isnan(v) else repr(float(v))}\n")
    finite = values[np.isfinite(values)]
    print(f"{spec.name} mean {_f4(finite.mean()) if finite.size else 'nan'} "
          f"undefined {values.size - finite.size}")


def cmd_interpret(args):
    if args.k < 1:
        raise CliError("--k must be >= 1")
    if not 0.0 <= args.lda_shrinkage <= 1.0:
        raise CliError("--lda-shrinkage must be in [0, 1]")
    _need_files(args.model, args.dataset, args.lda_train)
    model = mlp.load_model(args.model)
    ds = load_dataset_csv(args.dataset)
    if args.k > model.hidden_units:
        raise CliError(f"--k {args.k} exceeds {model.hidden_units} hidden units")
    if ds.bands != model.bands:
        raise CliError(f"{args.dataset} has {ds.bands} bands; model expects {model.bands}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # class means follow the model's class order
    ds_means = class_mean_spectra(ds)
    name_to_ds = {n: i for i, n in enumerate(ds.class_names)}
    summary = {"k": args.k, "classes": []}
    for c, name in enumerate(model.class_names):
        prof = interpret.top_k_profile(model, c, args.k)
        mean_spec = ds_means[name_to_ds[name]] if name in name_to_ds else np.full(model.bands, np.nan)
        interpret.export_profile_csv(prof, mean_spec, model.wavelengths,
                                     out / f"profile_{c:02d}_{_safe_name(name)}.csv")
        summary["classes"].append({
            "class_index": c,
            "class_name": name,
            "top_k_neurons": list(prof.neuron_indices),
            "top_k_assigned_fraction": interpret.topk_assignment_overlap(model, c, args.k),
            "red_nir_contrast": interpret.contrast_score(
                prof, model.wavelengths, indices.NDVI_LANDSAT8.low_window_nm,
                indices.NDVI_LANDSAT8.high_window_nm),
        })
    interpret.export_assignments_csv(model, out / "assignments.csv")
    render.write_weight_heatmap(model.w1, interpret.sort_neurons_for_display(model),
                                out / "heatmap.ppm")

    pred = mlp.predict(model, ds.spectra)
    summary["geometry_nn"] = _geometry(pred, ds, model.class_names, args)
    if args.scatter:
        render.export_scatter_csv(ds.spectra, pred, ds.wavelengths, args.red_nm, args.nir_nm,
                                  out / "scatter_nn.csv", model.class_names)
    if args.lda_train:
        lda_model = lda.fit_lda(load_dataset_csv(args.lda_train), args.lda_shrinkage)
        lda_pred = lda.predict_lda(lda_model, ds.spectra)
        summary["geometry_lda"] = _geometry(lda_pred, ds, lda_model.class_names, args)
        if args.scatter:
            render.export_scatter_csv(ds.spectra, lda_pred, ds.wavelengths, args.red_nm,
                                      args.nir_nm, out / "scatter_lda.csv",
                                      lda_model.class_names)
    (out / "geometry.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    for entry in summary["classes"]:
        print(f"{entry['class_name']} contrast {_f4(entry['red_nir_contrast'])}")
    for pair in summary["geometry_nn"]:
        print(f"{pair['class_a']}/{pair['class_b']} separation {_f4(pair['fraction'])} "
              f"slope {_f4(pair['slope'])}")


def _geometry(pred, ds, class_names, args):
    report = interpret.ndvi_geometry_check(pred, ds.spectra, ds.wavelengths,
                                           args.red_nm, args.nir_nm)
    return [{"class_a": class_names[r.class_a], "class_b": class_names[r.class_b],
             "fraction": r.fraction, "slope": r.slope,
             "upper_class": class_names[r.upper_class], "n_points": r.n_points}
            for r in report]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hsinterp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic dataset and/or cube")
    s.add_argument("--preset", choices=sorted(synth.PRESETS), default="vegetation")
    s.add_argument("--materials", help="JSON material list overriding the preset curves")
    s.add_argument("--save-materials", help="write the material list used to JSON")
    s.add_argument("--counts", help="comma-separated samples per class")
    s.add_argument("--noise", type=float, help="override per-material noise std")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", help="dataset CSV path")
    s.add_argument("--cube-out", help="raster path; header is written next to it as .hdr")
    s.add_argument("--lines", type=int, default=60)
    s.add_argument("--samples", type=int, default=90)
    s.add_argument("--interleave", choices=("bsq", "bil", "bip"), default="bsq")
    s.add_argument("--truth-out", help="ground-truth class map PPM for --cube-out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("split", help="stratified train/test split")
    s.add_argument("--dataset", required=True)
    s.add_argument("--fraction", type=float, default=0.5)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out-train", required=True)
    s.add_argument("--out-test", required=True)
    s.add_argument("--indices-out", help="CSV of index,partition for audit")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("train", help="train the shallow network")
    s.add_argument("--train", required=True)
    s.add_argument("--model-out", required=True)
    s.add_argument("--epochs", type=int, default=50)
    s.add_argument("--hidden", type=int, default=128)
    s.add_argument("--dropout", type=float, default=0.2)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--learning-rate", type=float, default=1e-3)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="test accuracy of a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--lda-train", help="also fit LDA on this CSV and report its accuracy")
    s.add_argument("--lda-shrinkage", type=float, default=0.1)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("classify", help="per-pixel class map of a cube")
    s.add_argument("--model", required=True)
    s.add_argument("--cube", required=True, help="raster path")
    s.add_argument("--header", help="header path (default: <raster>.hdr)")
    s.add_argument("--palette", help="JSON palette")
    s.add_argument("--map-out", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("ndvi", help="per-pixel index map of a cube")
    s.add_argument("--cube", required=True)
    s.add_argument("--header")
    s.add_argument("--index", default="ndvi")
    s.add_argument("--index-file", help="JSON index definitions")
    s.add_argument("--map-out")
    s.add_argument("--csv-out")
    s.set_defaults(func=cmd_ndvi)

    s = sub.add_parser("interpret", help="weight profiles, neuron table, heatmap, geometry check")
    s.add_argument("--model", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--red-nm", type=float, default=656.0)
    s.add_argument("--nir-nm", type=float, default=802.0)
    s.add_argument("--lda-train", help="fit LDA on this CSV for the geometry comparison")
    s.add_argument("--lda-shrinkage", type=float, default=0.1)
    s.add_argument("--scatter", action="store_true", help="also write red/NIR scatter tables")
    s.set_defaults(func=cmd_interpret)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, KeyError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hsinterp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
