"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 I/O
error. ``--json`` switches logging to one JSON object per line;
``--dump-config`` echoes the resolved run configuration as JSON before
executing.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import ValidationError
from .evalsynth import SynthSpec, iou, sweep_w, synth_generate, threshold_predict
from .grid import Grid, normalize_intensity
from .losses import (
    ImagePresence,
    ObjectnessTarget,
    PointLabels,
    image_level_loss,
    objectness_loss,
    point_loss,
)
from .objectness import ObjectnessConfig, generate_objectness
from .preprocess import DiffusionParams, anisotropic_diffusion, channel_normalize, histogram_equalize
from .tensorio import (
    _seed_rows,
    read_image,
    read_labels,
    read_objectness,
    read_seeds,
    read_tensor,
    write_labels,
    write_objectness,
    write_seeds,
    write_tensor,
)


class UsageError(Exception):
    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self)


class EventLog:
    """Either human-readable lines or one JSON object per event."""

    def __init__(self, as_json: bool):
        self.as_json = as_json

    def event(self, kind: str, text: str, **fields):
        if self.as_json:
            print(json.dumps({"event": kind, **fields}, sort_keys=True))
        else:
            print(f"{kind}: {text}")

    def error(self, message: str):
        if self.as_json:
            print(json.dumps({"event": "error", "message": message}), file=sys.stderr)
        else:
            print(f"error: {message}", file=sys.stderr)


def _nonneg_float(s: str) -> float:
    v = float(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _pos_float(s: str) -> float:
    v = float(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
    return v


def _pos_int(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {s!r}")


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable JSON log lines")
    p.add_argument(
        "--dump-config",
        action="store_true",
        help="echo the resolved run configuration as JSON before executing",
    )


def _preprocess_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("preprocessing (applied as: channel-normalize, equalize, diffusion)")
    g.add_argument("--target-means", type=_float_list, default=None, metavar="M1,M2,...")
    g.add_argument("--target-stds", type=_float_list, default=None, metavar="S1,S2,...")
    g.add_argument("--equalize", action="store_true", help="256-bin histogram equalization")
    g.add_argument("--diffusion", action="store_true", help="edge-preserving smoothing")
    g.add_argument("--kappa", type=_pos_float, default=0.05, help="diffusion edge threshold")
    g.add_argument("--step", type=_pos_float, default=0.15, help="diffusion time step")
    g.add_argument("--iterations", type=_nonneg_int, default=10, help="diffusion iterations")


def _chain_from_flags(ns) -> list:
    chain = []
    if ns.target_means is not None or ns.target_stds is not None:
        if ns.target_means is None or ns.target_stds is None:
            raise UsageError("--target-means and --target-stds must be given together")
        tm, tsd = ns.target_means, ns.target_stds
        chain.append(lambda g: channel_normalize(g, tm, tsd))
    if ns.equalize:
        chain.append(histogram_equalize)
    if ns.diffusion:
        params = DiffusionParams(kappa=ns.kappa, step=ns.step, iterations=ns.iterations)
        chain.append(lambda g: anisotropic_diffusion(g, params))
    return chain


def _build_parser() -> _Parser:
    parser = _Parser(prog="seedprior", description=__doc__)
    parser.add_argument("--version", action="version", version=f"seedprior {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser(
        "objectness",
        help="image + seeds -> objectness tensor + background mask",
    )
    p.add_argument("-i", "--image", action="append", required=True, metavar="PATH")
    p.add_argument("-s", "--seeds", action="append", required=True, metavar="CSV")
    p.add_argument("-o", "--output", action="append", required=True, metavar="TNS")
    p.add_argument("-w", type=_nonneg_float, default=50.0, help="objectness decay rate")
    p.add_argument("--connectivity", choices=("faces", "full"), default="faces")
    p.add_argument(
        "--no-boundary-background",
        action="store_true",
        help="keep soft labels at region boundaries instead of hard background",
    )
    p.add_argument("--classes", type=_pos_int, default=None, help="total class count C")
    p.add_argument("--jobs", type=_pos_int, default=1, help="process input files concurrently")
    _preprocess_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_objectness)

    p = sub.add_parser("preprocess", help="normalize + condition an image, write f32 tensor")
    p.add_argument("-i", "--image", required=True, metavar="PATH")
    p.add_argument("-o", "--output", required=True, metavar="TNS")
    _preprocess_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("synth", help="generate a synthetic blob image with ground truth")
    p.add_argument("--shape", type=_int_list, default=[256, 256], metavar="Y,X[,Z-first]")
    p.add_argument("--objects", type=_pos_int, default=20)
    p.add_argument("--classes", type=_pos_int, default=2)
    p.add_argument("--contrast", type=_nonneg_float, default=0.3)
    p.add_argument("--bg-mean", type=_nonneg_float, default=0.35)
    p.add_argument("--sigma", type=_nonneg_float, default=0.05, help="noise std")
    p.add_argument("--radius", type=_float_list, default=[8.0, 20.0], metavar="LO,HI")
    p.add_argument("--rng-seed", type=_nonneg_int, default=0)
    p.add_argument("--out-image", required=True, metavar="TNS")
    p.add_argument("--out-labels", required=True, metavar="TNS")
    p.add_argument("--out-seeds", required=True, metavar="CSV")
    _common_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("eval", help="score an objectness tensor against ground truth")
    p.add_argument("--pred", required=True, metavar="TNS", help="objectness tensor (with .bg sibling)")
    p.add_argument("--gt", required=True, metavar="TNS", help="ground-truth label tensor")
    _common_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="pick the best decay rate by mean IoU")
    p.add_argument("-i", "--image", required=True, metavar="PATH")
    p.add_argument("-s", "--seeds", required=True, metavar="CSV")
    p.add_argument("--gt", required=True, metavar="TNS")
    p.add_argument("--w-list", type=_float_list, default=[5, 10, 20, 50, 100, 200], metavar="W1,W2,...")
    p.add_argument("--connectivity", choices=("faces", "full"), default="faces")
    p.add_argument("--classes", type=_pos_int, default=None)
    _preprocess_flags(p)
    _common_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("losses", help="loss kernel evaluation")
    lsub = p.add_subparsers(dest="losses_command", metavar="SUBCOMMAND")
    q = lsub.add_parser("eval", help="evaluate loss kernels on saved tensors")
    q.add_argument("--pred", required=True, metavar="TNS", help="prediction probabilities (C, *spatial)")
    q.add_argument("--points", default=None, metavar="CSV", help="annotated foreground points")
    q.add_argument("--background", default=None, metavar="TNS", help="generated background mask (u8)")
    q.add_argument("--alpha-foreground", type=_pos_float, default=1.0)
    q.add_argument("--alpha-background", type=_pos_float, default=0.1)
    q.add_argument("--objectness", default=None, metavar="TNS", help="objectness target tensor")
    q.add_argument("--beta", type=_float_list, default=None, metavar="B0,B1,...")
    q.add_argument("--beta-background", type=_pos_float, default=1.0)
    q.add_argument("--present", type=_int_list, default=None, metavar="C1,C2,...")
    q.add_argument("--absent", type=_int_list, default=None, metavar="C1,C2,...")
    q.add_argument("--lambdas", type=_float_list, default=[1.0, 1.0, 1.0], metavar="L1,L2,L3")
    _common_flags(q)
    q.set_defaults(func=_cmd_losses_eval)

    return parser


def _dump_config(ns) -> None:
    cfg = {k: v for k, v in sorted(vars(ns).items()) if k != "func" and not k.startswith("_")}
    print(json.dumps({"event": "config", "config": cfg}, sort_keys=True, default=str))


def _cmd_objectness(ns, log: EventLog) -> int:
    if not (len(ns.image) == len(ns.seeds) == len(ns.output)):
        raise UsageError(
            f"-i/-s/-o must be repeated in matching triples, got "
            f"{len(ns.image)}/{len(ns.seeds)}/{len(ns.output)}"
        )
    cfg = ObjectnessConfig(
        w=ns.w,
        connectivity=ns.connectivity,
        boundary_as_background=not ns.no_boundary_background,
    )
    chain = _chain_from_flags(ns)

    def one(img_path, seed_path, out_path):
        g = normalize_intensity(read_image(img_path))
        s = read_seeds(seed_path, g, ns.classes)
        m = generate_objectness(g, s, cfg, chain)
        write_objectness(m, out_path)
        return out_path, m

    triples = list(zip(ns.image, ns.seeds, ns.output))
    if ns.jobs > 1 and len(triples) > 1:
        with ThreadPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(lambda t: one(*t), triples))
    else:
        results = [one(*t) for t in triples]
    for out_path, m in results:
        log.event(
            "written",
            f"wrote {out_path} and {out_path}.bg "
            f"(classes {m.num_classes}, shape {'x'.join(map(str, m.background_mask.shape))})",
            path=str(out_path),
            classes=m.num_classes,
            shape=list(m.background_mask.shape),
            background_pixels=int(m.background_mask.sum()),
        )
    return 0


def _cmd_preprocess(ns, log: EventLog) -> int:
    g = normalize_intensity(read_image(ns.image))
    for step in _chain_from_flags(ns):
        g = step(g)
    write_tensor(ns.output, g.data, "f32")
    log.event(
        "written",
        f"wrote {ns.output} (channels {g.channels}, shape {'x'.join(map(str, g.shape))})",
        path=str(ns.output),
        channels=g.channels,
        shape=list(g.shape),
    )
    return 0


def _cmd_synth(ns, log: EventLog) -> int:
    if len(ns.radius) != 2:
        raise UsageError(f"--radius needs LO,HI, got {ns.radius}")
    C = ns.classes
    if C < 2:
        raise UsageError("--classes must be >= 2")
    fg_means = tuple(
        min(1.0, ns.bg_mean + ns.contrast * (c / (C - 1))) for c in range(1, C)
    )
    spec = SynthSpec(
        shape=tuple(ns.shape),
        n_objects=ns.objects,
        n_classes=C,
        radius_range=(ns.radius[0], ns.radius[1]),
        fg_means=fg_means,
        bg_mean=ns.bg_mean,
        noise_sigma=ns.sigma,
        rng_seed=ns.rng_seed,
    )
    g, labels, seeds = synth_generate(spec)
    write_tensor(ns.out_image, g.data, "f32")
    write_labels(ns.out_labels, labels)
    write_seeds(ns.out_seeds, seeds, g.rank)
    log.event(
        "written",
        f"wrote {ns.out_image}, {ns.out_labels}, {ns.out_seeds} "
        f"({len(seeds)} objects, {C} classes)",
        image=str(ns.out_image),
        labels=str(ns.out_labels),
        seeds=str(ns.out_seeds),
        objects=len(seeds),
        classes=C,
    )
    return 0


def _metric_rows(per_class: np.ndarray, miou: float):
    rows = []
    for c, v in enumerate(per_class):
        rows.append((str(c), None if np.isnan(v) else float(v)))
    return rows, float(miou)


def _print_metrics(log: EventLog, per_class, miou, extra=None):
    rows, miou = _metric_rows(per_class, miou)
    if log.as_json:
        payload = {"event": "metrics", "per_class": dict(rows), "miou": miou}
        if extra:
            payload.update(extra)
        print(json.dumps(payload, sort_keys=True))
    else:
        print("class  iou")
        for name, v in rows:
            print(f"{name:>5}  {'excluded' if v is None else f'{v:.4f}'}")
        print(f" mIoU  {miou:.4f}  (classes absent from both maps excluded)")
        if extra:
            for k, v in extra.items():
                print(f"{k}: {v}")


def _cmd_eval(ns, log: EventLog) -> int:
    m = read_objectness(ns.pred)
    gt = read_labels(ns.gt)
    pred = threshold_predict(m)
    per_class, miou = iou(pred, gt, m.num_classes)
    _print_metrics(log, per_class, miou)
    return 0


def _cmd_sweep(ns, log: EventLog) -> int:
    g = normalize_intensity(read_image(ns.image))
    s = read_seeds(ns.seeds, g, ns.classes)
    gt = read_labels(ns.gt)
    chain = _chain_from_flags(ns)
    best_w, table = sweep_w(
        g, s, gt, ns.w_list, connectivity=ns.connectivity, preprocess=chain
    )
    if log.as_json:
        print(
            json.dumps(
                {
                    "event": "sweep",
                    "table": [{"w": w, "miou": v} for w, v in table],
                    "best_w": best_w,
                },
                sort_keys=True,
            )
        )
    else:
        print("     w   mIoU")
        for w, v in table:
            marker = " *" if w == best_w else ""
            print(f"{w:>6.1f}  {v:.4f}{marker}")
        print(f"best w: {best_w}")
    return 0


def _cmd_losses_eval(ns, log: EventLog) -> int:
    S = read_tensor(ns.pred).astype(np.float64)
    shape = S.shape[1:]
    results: dict[str, float] = {}

    if ns.points is not None or ns.background is not None:
        idx, classes, alphas = [], [], []
        if ns.points is not None:
            locations, class_ids = _seed_rows(ns.points, shape)
            for loc, c in zip(locations, class_ids):
                idx.append(int(np.ravel_multi_index(loc, shape)))
                classes.append(c)
                alphas.append(ns.alpha_foreground)
        if ns.background is not None:
            bg = read_tensor(ns.background)
            if bg.shape[1:] != shape:
                raise ValidationError(
                    f"{ns.background}: mask shape {bg.shape[1:]} does not match "
                    f"prediction shape {shape}"
                )
            for i in np.flatnonzero(bg[0].ravel()):
                idx.append(int(i))
                classes.append(0)
                alphas.append(ns.alpha_background)
        pts = PointLabels(np.array(idx), np.array(classes), np.array(alphas))
        results["point"] = point_loss(S, pts)

    if ns.objectness is not None:
        P = read_tensor(ns.objectness).astype(np.float64)
        if ns.beta is not None:
            beta = np.asarray(ns.beta, np.float64)
        else:
            beta = np.ones(P.shape[0])
            beta[0] = ns.beta_background
        results["objectness"] = objectness_loss(S, ObjectnessTarget(P, beta))

    if ns.present is not None or ns.absent is not None:
        pres = ImagePresence(
            frozenset(ns.present or ()), frozenset(ns.absent or ())
        )
        results["image_level"] = image_level_loss(S, pres)

    if not results:
        raise UsageError(
            "nothing to evaluate: give --points/--background, --objectness, "
            "or --present/--absent"
        )
    if len(ns.lambdas) != 3:
        raise UsageError(f"--lambdas needs L1,L2,L3, got {ns.lambdas}")
    l1, l2, l3 = ns.lambdas
    total = (
        l1 * results.get("point", 0.0)
        + l2 * results.get("objectness", 0.0)
        + l3 * results.get("image_level", 0.0)
    )
    results["total"] = total
    if log.as_json:
        print(json.dumps({"event": "losses", **results}, sort_keys=True))
    else:
        for k in ("point", "objectness", "image_level", "total"):
            if k in results:
                print(f"{k:>11}  {results[k]:.9f}")
    return 0


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        (e.parser or parser).print_usage(sys.stderr)
        return 1
    except SystemExit as e:  # --help / --version
        return 0 if e.code in (None, 0) else 1
    if not getattr(ns, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    log = EventLog(getattr(ns, "json", False))
    try:
        if getattr(ns, "dump_config", False):
            _dump_config(ns)
        return ns.func(ns, log)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        (e.parser or parser).print_usage(sys.stderr)
        return 1
    except ValidationError as e:
        log.error(str(e))
        return 2
    except OSError as e:
        log.error(str(e))
        return 3


def main() -> None:
    sys.exit(run())
