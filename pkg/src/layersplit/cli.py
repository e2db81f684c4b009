"""Command-line front end.

Four subcommands cover the pipeline: `separate` runs the full
decomposition, `simulate` renders a synthetic scene with ground truth,
`surface` exports the calibration error grid, `evaluate` scores a
recovered raster against its truth.

Every flag mirrors a key in the optional `--config` JSON file (flag
names with dashes turned into underscores); explicit flags win over the
file.  Exit codes are stable: 0 success, 2 bad arguments or
configuration, 3 a violated data invariant (the message names it),
4 an I/O failure (the message names the path).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .calibrate import best_weights, error_surface
from .core import RegionSpec, bounding_window, crop
from .errors import ConfigError, LayerSplitError
from .fileio import (
    read_image,
    read_json,
    read_mask,
    write_image,
    write_json,
    write_mask,
    write_surface_csv,
)
from .inpaint import InpaintConfig, initialize_layers
from .simulate import SceneSpec, metrics_between, simulate_overlap
from .solve import SolveConfig, render_layers, separate, virtual_overlap

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

# marks a parameter that may stay unset without being required
_ABSENT = object()

# per-subcommand parameter schema: key -> (type, default); None = required
_SPECS: dict[str, dict[str, tuple[type, object]]] = {
    "separate": {
        "image": (str, None),
        "overlap_mask": (str, None),
        "n1_mask": (str, None),
        "n2_mask": (str, None),
        "out": (str, None),
        "seed": (int, 0),
        "alpha": (float, 0.1),
        "epsilon": (float, 1e-10),
        "max_iters": (int, 10_000),
        "grid_step": (float, 0.01),
        "patch_size": (int, 7),
    },
    "surface": {
        "image": (str, None),
        "overlap_mask": (str, None),
        "n1_mask": (str, None),
        "n2_mask": (str, None),
        "out": (str, None),
        "seed": (int, 0),
        "grid_step": (float, 0.01),
        "patch_size": (int, 7),
    },
    "simulate": {
        "scene": (str, None),
        "out": (str, None),
        "seed": (int, _ABSENT),
    },
    "evaluate": {
        "recovered": (str, None),
        "truth": (str, None),
        "mask": (str, None),
        "out": (str, None),
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layersplit",
        description="Separate a two-tissue overlap into per-layer reflectances.",
    )
    parser.add_argument(
        "--version", action="version", version=f"layersplit {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "--config",
            help="JSON file of parameters; keys mirror the flags, flags win",
        )
        for key, (typ, _default) in _SPECS[name].items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, type=typ if typ is not str else None, default=None)
        return p

    add("separate", "run the full separation pipeline on one image")
    add("simulate", "render a synthetic scene with exact ground truth")
    add("surface", "export the weight-calibration error grid")
    add("evaluate", "score a recovered raster against ground truth")
    return parser


def _resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge flags over the optional config file over defaults."""
    spec = _SPECS[command]
    file_cfg: dict = {}
    if args.config is not None:
        file_cfg = read_json(args.config)
        unknown = sorted(set(file_cfg) - set(spec))
        if unknown:
            raise ConfigError(
                f"{args.config}: unknown config keys {', '.join(unknown)}"
            )
    params: dict = {}
    for key, (typ, default) in spec.items():
        value = getattr(args, key, None)
        if value is None and key in file_cfg:
            value = file_cfg[key]
        if value is None:
            value = default
        if value is None:
            raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")
        if value is _ABSENT:
            params[key] = None
            continue
        if typ is int and isinstance(value, bool):
            raise ConfigError(f"parameter {key} must be an integer, got {value!r}")
        try:
            params[key] = typ(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key}: {exc}") from exc
    return params


def _manifest(command: str, params: dict) -> dict:
    serializable = {
        k: (v if not isinstance(v, Path) else str(v)) for k, v in params.items()
    }
    return {
        "tool": "layersplit",
        "version": __version__,
        "command": command,
        "parameters": serializable,
    }


def _load_regions(params: dict) -> tuple:
    image = read_image(params["image"])
    regions = RegionSpec(
        overlap=read_mask(params["overlap_mask"]),
        n1=read_mask(params["n1_mask"]),
        n2=read_mask(params["n2_mask"]),
    )
    return image, regions


def cmd_separate(args: argparse.Namespace) -> int:
    params = _resolve(args, "separate")
    image, regions = _load_regions(params)
    inpaint_cfg = InpaintConfig(
        patch_size=params["patch_size"], rng_seed=params["seed"]
    )
    solve_cfg = SolveConfig(
        alpha=params["alpha"],
        epsilon=params["epsilon"],
        max_iterations=params["max_iters"],
    )
    layers, report, _surface = separate(
        image,
        regions,
        inpaint_config=inpaint_cfg,
        solve_config=solve_cfg,
        grid_step=params["grid_step"],
    )
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_image(out / "layer_x.png", layers.top)
    write_image(out / "layer_y.png", layers.bottom)
    left, right = render_layers(image, regions, layers)
    write_image(out / "rendered_left.png", left)
    write_image(out / "rendered_right.png", right)
    write_image(out / "virtual_overlap.png", virtual_overlap(image, regions, layers))
    payload = {
        "final_objective": report.final_objective,
        "iterations_run": report.iterations_run,
        "objective_evaluations": report.objective_evaluations,
        "objective_trace": list(report.objective_trace),
        "stop_reason": report.stop_reason.value,
        "weights": {"w1": report.weights.w1, "w2": report.weights.w2},
        "manifest": _manifest("separate", params),
    }
    write_json(out / "report.json", payload)
    print(
        f"separate: {report.stop_reason.value} after {report.iterations_run} "
        f"iterations, objective {report.final_objective:.6e}, "
        f"weights ({report.weights.w1:.2f}, {report.weights.w2:.2f})"
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    params = _resolve(args, "simulate")
    scene = SceneSpec.from_dict(read_json(params["scene"]))
    if params["seed"] is not None:
        scene = replace(scene, rng_seed=params["seed"])
    case = simulate_overlap(scene)
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_image(out / "composite.png", case.composite)
    write_mask(out / "mask_overlap.png", case.regions.overlap)
    write_mask(out / "mask_n1.png", case.regions.n1)
    write_mask(out / "mask_n2.png", case.regions.n2)
    write_image(out / "truth_x.png", case.truth_top)
    write_image(out / "truth_y.png", case.truth_bottom)
    manifest = _manifest("simulate", params)
    manifest["scene"] = scene.to_dict()
    write_json(out / "manifest.json", manifest)
    print(f"simulate: wrote scene {scene.width}x{scene.height} to {out}")
    return EXIT_OK


def cmd_surface(args: argparse.Namespace) -> int:
    params = _resolve(args, "surface")
    image, regions = _load_regions(params)
    inpaint_cfg = InpaintConfig(
        patch_size=params["patch_size"], rng_seed=params["seed"]
    )
    guess = initialize_layers(image, regions, inpaint_cfg)
    observed = crop(image, bounding_window(regions.overlap))
    surface = error_surface(guess, observed, grid_step=params["grid_step"])
    w = best_weights(surface)
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_surface_csv(out / "surface.csv", surface)
    write_json(
        out / "best_weights.json",
        {
            "w1": w.w1,
            "w2": w.w2,
            "error": float(surface.values.min()),
            "manifest": _manifest("surface", params),
        },
    )
    print(f"surface: best weights ({w.w1:.2f}, {w.w2:.2f})")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    params = _resolve(args, "evaluate")
    recovered = read_image(params["recovered"])
    truth = read_image(params["truth"])
    mask = read_mask(params["mask"])
    if mask.shape != recovered.shape:
        # window-sized rasters against a full-size mask: use the mask's
        # own bounding window when the shapes agree
        win = bounding_window(mask)
        if win.shape == recovered.shape:
            mask = crop(mask, win)
    metrics = metrics_between(recovered, truth, mask)
    payload = metrics.to_dict()
    payload["manifest"] = _manifest("evaluate", params)
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "metrics.json", payload)
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return EXIT_OK


_COMMANDS = {
    "separate": cmd_separate,
    "simulate": cmd_simulate,
    "surface": cmd_surface,
    "evaluate": cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except LayerSplitError as exc:
        if isinstance(exc, ConfigError):
            print(f"error: ConfigError: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
