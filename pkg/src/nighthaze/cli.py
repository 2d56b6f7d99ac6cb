"""Command-line entry point: ``nighthaze {dehaze,decompose,synth,eval,bench}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, illum, imageio, metrics, pipeline, synth
from .bench import SIZE_LADDER, bench_pipeline, parse_size
from .config import ConfigError, SynthConfig, load_config
from .errors import DimensionError, ImageIOError

log = logging.getLogger("nighthaze")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONFIG = 4
EXIT_DIMENSION = 5


def _common(parser):
    parser.add_argument("--config", metavar="PATH", help="key = value config file (default: $NIGHTHAZE_CONFIG)")
    parser.add_argument("--dump-intermediates", action="store_true", help="also write intermediate maps")
    parser.add_argument("-o", "--output", metavar="PATH", help="output file or directory")
    parser.add_argument("--threads", type=int, default=0, metavar="N", help="worker threads for batches (0: all cores)")
    parser.add_argument("--seed", type=int, default=0, metavar="N", help="seed for benchmark noise images")
    parser.add_argument("--no-figures", action="store_true", help="skip matplotlib report figures")
    parser.add_argument("-v", "--verbose", action="store_true")


def _pipeline_options(parser):
    g = parser.add_argument_group("pipeline overrides")
    g.add_argument("--gamma", type=float)
    g.add_argument("--gamma0", type=float)
    g.add_argument("--omega", type=float)
    g.add_argument("--patch-radius", type=int)
    g.add_argument("--gf-radius", type=int)
    g.add_argument("--gf-epsilon", type=float)
    g.add_argument("--t-floor", type=float)
    g.add_argument("--no-stretch", dest="stretch_enabled", action="store_const", const=False)
    g.add_argument("--unit-eta", dest="force_unit_eta", action="store_const", const=True,
                   help="skip light-color estimation (eta = 1)")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="any config key")


def build_parser():
    parser = argparse.ArgumentParser(prog="nighthaze", description=__doc__)
    parser.add_argument("--version", action="version", version=f"nighthaze {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dehaze", help="restore nighttime hazy images")
    p.add_argument("inputs", nargs="+", metavar="INPUT")
    _common(p)
    _pipeline_options(p)

    p = sub.add_parser("decompose", help="write illumination and surrogate reflectance")
    p.add_argument("inputs", nargs="+", metavar="INPUT")
    _common(p)
    _pipeline_options(p)

    p = sub.add_parser("synth", help="generate a synthetic nighttime hazy scene")
    p.add_argument("clear")
    p.add_argument("disparity")
    p.add_argument("--beta", type=float, default=SynthConfig.beta)
    p.add_argument("--alpha", type=float, default=SynthConfig.alpha)
    p.add_argument("--light-color", default="1,1,0.3", metavar="R,G,B")
    p.add_argument("--env-patch-radius", type=int, default=SynthConfig.env_patch_radius)
    p.add_argument("--env-gf-epsilon", type=float, default=SynthConfig.env_gf_epsilon)
    p.add_argument("--focal-scale", type=float, default=SynthConfig.focal_scale)
    p.add_argument("--fit-degree", type=int, default=3, help="degree of the illumination curve fit")
    _common(p)

    p = sub.add_parser("eval", help="compute metrics for result/reference pairs")
    p.add_argument("--pair", nargs=2, action="append", default=[], metavar=("RESULT", "REFERENCE"))
    p.add_argument("--image", action="append", default=[], metavar="PATH",
                   help="no-reference image (visual measure only)")
    p.add_argument("--metrics", default="psnr,ssim,rmse,visual")
    p.add_argument("--patch", type=int, default=50, help="visual-measure tile size")
    _common(p)

    p = sub.add_parser("bench", help="time the pipeline across image sizes")
    p.add_argument("--sizes", default=",".join(f"{w}x{h}" for h, w in SIZE_LADDER), metavar="WxH,...")
    p.add_argument("--repeat", type=int, default=3)
    _common(p)
    _pipeline_options(p)
    return parser


def config_from_args(args):
    overrides = {}
    for key in ("gamma", "gamma0", "omega", "patch_radius", "gf_radius", "gf_epsilon", "t_floor",
                "stretch_enabled", "force_unit_eta"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return load_config(args.config, overrides)


def _workers(args, n_jobs):
    n = args.threads or os.cpu_count() or 1
    return max(1, min(n, n_jobs))


def _outputs_for(inputs, output, suffix=".png"):
    if len(inputs) == 1 and output and Path(output).suffix:
        return [Path(output)]
    out_dir = Path(output) if output else Path(".")
    return [out_dir / f"{Path(p).stem}_dehazed{suffix}" for p in inputs]


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _dehaze_one(src, dst, cfg, dump):
    img = imageio.read_image(src)
    if img.ndim != 3:
        raise DimensionError(f"{src}: expected a color image")
    result = pipeline.run(img, cfg, keep=dump)
    imageio.write_image(dst, result.output)
    written = {"output": str(dst)}
    if dump:
        for name in pipeline.INTERMEDIATES:
            path = dst.with_name(f"{dst.stem}.{name}.png")
            imageio.write_image(path, result.intermediates[name])
            written[name] = str(path)
    manifest = {
        "tool": f"nighthaze {__version__}",
        "command": "dehaze",
        "input": str(src),
        "outputs": written,
        "config": cfg.as_dict(),
        "stage_ms": {k: round(v, 3) for k, v in result.timings_ms.items()},
    }
    _write_json(dst.with_name(f"{dst.stem}.manifest.json"), manifest)
    return dst


def cmd_dehaze(args):
    cfg = config_from_args(args)
    dsts = _outputs_for(args.inputs, args.output)
    for d in dsts:
        d.parent.mkdir(parents=True, exist_ok=True)
    jobs = list(zip(args.inputs, dsts))
    with ThreadPoolExecutor(_workers(args, len(jobs))) as pool:
        for dst in pool.map(lambda j: _dehaze_one(j[0], j[1], cfg, args.dump_intermediates), jobs):
            print(dst)
    return EXIT_OK


def cmd_decompose(args):
    cfg = config_from_args(args)
    out_dir = Path(args.output or ".")
    for src in args.inputs:
        img = imageio.read_image(src)
        if img.ndim != 3:
            raise DimensionError(f"{src}: expected a color image")
        dec = illum.decompose(img, cfg)
        stem = Path(src).stem
        a = imageio.write_image(out_dir / f"{stem}.illumination.png", dec.illumination)
        b = imageio.write_image(out_dir / f"{stem}.reflectance.png", dec.surrogate_reflectance)
        print(a)
        print(b)
    return EXIT_OK


def _parse_triple(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"expected R,G,B, got {text!r}") from None
    if len(vals) != 3:
        raise ConfigError(f"expected three values, got {text!r}")
    return vals


def cmd_synth(args):
    cfg = SynthConfig(
        beta=args.beta,
        alpha=args.alpha,
        light_color=_parse_triple(args.light_color),
        env_patch_radius=args.env_patch_radius,
        env_gf_epsilon=args.env_gf_epsilon,
        focal_scale=args.focal_scale,
    )
    clear = imageio.read_image(args.clear)
    if clear.ndim != 3:
        raise DimensionError(f"{args.clear}: expected a color image")
    disparity = imageio.read_disparity(args.disparity)
    if disparity.shape != clear.shape[:2]:
        raise DimensionError(f"disparity {disparity.shape} does not match image {clear.shape[:2]}")
    scene = synth.generate(clear, disparity, cfg)
    out_dir = Path(args.output or "scene")
    manifest = synth.save_scene(scene, out_dir, cfg)
    if not args.no_figures:
        from . import plotting

        plotting.plot_scene(scene, out_dir / "scene.png")
        try:
            dec = illum.decompose(scene.hazy)
            coeffs = synth.fit_illumination_poly(dec.illumination, scene.illumination, args.fit_degree)
            plotting.plot_illumination_curves(dec.illumination, scene.illumination, coeffs,
                                              1.0 / 3.0, out_dir / "illumination_fit.png")
        except ValueError as exc:
            log.warning("skipping illumination fit figure: %s", exc)
    print(manifest)
    return EXIT_OK


def cmd_eval(args):
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for m in wanted:
        if m not in ("psnr", "ssim", "rmse", "visual"):
            raise ConfigError(f"unknown metric: {m}", keys=[m])
    if not args.pair and not args.image:
        raise ConfigError("nothing to evaluate: give --pair RESULT REFERENCE or --image PATH")
    report = metrics.EvalReport()
    for result_path, ref_path in args.pair:
        result = imageio.read_image(result_path)
        reference = imageio.read_image(ref_path)
        if result.shape != reference.shape:
            raise DimensionError(f"{result_path} {result.shape} vs {ref_path} {reference.shape}")
        report.add(Path(result_path).name, metrics.evaluate(result, reference, wanted, args.patch))
    for path in args.image:
        report.add(Path(path).name, metrics.evaluate(imageio.read_image(path), None, ["visual"], args.patch))
    prefix = Path(args.output or "eval")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    prefix.with_suffix(".csv").write_text(report.to_csv())
    prefix.with_suffix(".json").write_text(report.to_json() + "\n")
    if not args.no_figures:
        from . import plotting

        if any("visual_mean" in row for row in report.images.values()):
            plotting.plot_visual_measures(report, prefix.with_name(prefix.name + "_visual.png"))
        if any("psnr" in row for row in report.images.values()):
            plotting.plot_metric_bars(report, prefix.with_name(prefix.name + "_psnr.png"))
    sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_bench(args):
    try:
        sizes = [parse_size(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not sizes:
        raise ConfigError("no sizes given")
    cfg = config_from_args(args)
    rows = bench_pipeline(sizes, repeat=args.repeat, seed=args.seed, cfg=cfg)
    fields = ["width", "height", "pixels", "repeats", "median_ms", "min_ms"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    prefix = Path(args.output or "bench")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    prefix.with_suffix(".csv").write_text(buf.getvalue())
    _write_json(prefix.with_suffix(".json"), {"tool": f"nighthaze {__version__}", "rows": rows})
    if not args.no_figures:
        from . import plotting

        plotting.plot_bench(rows, prefix.with_name(prefix.name + "_time.png"))
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "dehaze": cmd_dehaze,
    "decompose": cmd_decompose,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"nighthaze: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionError as exc:
        print(f"nighthaze: dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (ImageIOError, OSError) as exc:
        print(f"nighthaze: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
