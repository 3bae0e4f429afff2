"""Command-line entry point: one subcommand per library operation.

Exit codes: 0 success, 1 usage error, 2 domain error (the mathematics refused
the input).  Every run echoes its resolved configuration as JSON on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import bubbles, dynamics, model, multiangle, render, rotation, siegel
from .errors import DomainError
from .multiangle import IllegalMultiAngle

SUBCOMMANDS = ("render-param", "render-dyn", "siegel-series", "bubble-tree", "trace-ray", "phi", "pi-orbit", "validate-ma")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _complex(text: str) -> complex:
    try:
        re_, im = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(re_, im)


def _resolution(text: str) -> tuple[int, int]:
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'WxH', got {text!r}")
    return w, h


def _rot(text: str):
    try:
        return rotation.parse_rotation(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _gaps(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        _atomic_write(args.out, text.encode())
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _region(p, center=None, width=None):
    p.add_argument("--center", type=_complex, default=center)
    p.add_argument("--width", type=float, default=width)
    p.add_argument("--height", type=float, default=None)
    p.add_argument("--res", type=_resolution, default=(512, 512))
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--escape-radius", type=float, default=100.0)
    p.add_argument("--threads", type=int, default=1)


def _family(p):
    p.add_argument("--family", choices=("q", "cubic", "figone"), default="q")
    p.add_argument("--rot", type=_rot, default=rotation.parse_rotation("golden"))
    p.add_argument("--c", type=_complex, default=None)
    p.add_argument("--a", type=_complex, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zakeri", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("render-param", help="escape-time picture of a parameter plane (PPM)")
    p.add_argument("--rot", type=_rot, default=rotation.parse_rotation("sqrt2over2"))
    p.add_argument("--plane", choices=("a", "c"), default="a")
    _region(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("render-dyn", help="escape-time picture of a dynamical plane (PPM)")
    _family(p)
    _region(p, center=None, width=4.0)
    p.add_argument("--overlay", action="append", choices=("siegel", "bubbles"), default=[])
    p.add_argument("--bubble-gen", type=int, default=4)
    p.add_argument("--out", required=True)

    p = sub.add_parser("siegel-series", help="linearizer coefficients and boundary samples (JSON, CSV)")
    _family(p)
    p.add_argument("--N", type=int, default=200)
    p.add_argument("--K", type=int, default=2000)
    p.add_argument("--Kb", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.add_argument("--boundary-csv", default=None)

    p = sub.add_parser("bubble-tree", help="bubble tree to a generation (JSON)")
    _family(p)
    p.add_argument("--max-gen", type=int, default=4)
    p.add_argument("--min-diam", type=float, default=0.0)
    p.add_argument("--max-points", type=int, default=256)
    p.add_argument("--out", default=None)

    p = sub.add_parser("trace-ray", help="bubble ray along a periodic gap pattern (JSON)")
    _family(p)
    p.add_argument("--gaps", type=_gaps, default=[1])
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--depth", type=int, default=bubbles.MAX_RAY_BUBBLES)
    p.add_argument("--out", default=None)

    p = sub.add_parser("phi", help="the parameter map at a cubic parameter c (JSON)")
    p.add_argument("--c", type=_complex, required=True)
    p.add_argument("--rot", type=_rot, default=rotation.parse_rotation("golden"))
    p.add_argument("--max-gen", type=int, default=6)
    p.add_argument("--out", default=None)

    p = sub.add_parser("pi-orbit", help="iterate the shift on a multi-angle (JSON)")
    p.add_argument("--ma", required=True)

    p = sub.add_parser("validate-ma", help="check multi-angle legality")
    p.add_argument("--ma", required=True)
    return parser


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, complex):
            v = [v.real, v.imag]
        elif isinstance(v, rotation.RotationNumber):
            v = v.to_cf_string()
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def argv_from_config(config: dict) -> list[str]:
    """Rebuild a command line from an echoed configuration."""
    argv = [config["command"]]
    for k, v in config.items():
        if k == "command" or v is None:
            continue
        flag = "--" + k.replace("_", "-")
        if flag in ("--n", "--k", "--kb"):
            flag = {"--n": "--N", "--k": "--K", "--kb": "--Kb"}[flag]
        if k == "res":
            argv.append(f"{flag}={v[0]}x{v[1]}")
        elif k == "overlay":
            for item in v:
                argv.append(f"{flag}={item}")
        elif k == "gaps":
            argv.append(f"{flag}={','.join(str(g) for g in v)}")
        elif isinstance(v, list):
            argv.append(f"{flag}={v[0]!r},{v[1]!r}")
        else:
            argv.append(f"{flag}={v}")
    return argv


def _make_map(args):
    if args.family == "cubic" and args.c is None:
        raise UsageError("--family cubic needs --c")
    if args.family == "figone" and args.a is None:
        raise UsageError("--family figone needs --a")
    return dynamics.make_family(args.family, args.rot, c=args.c, a=args.a)


def _render_cfg(args, overlays=None) -> render.RenderConfig:
    try:
        return render.RenderConfig(center=args.center, width=args.width, height=args.height, resolution=args.res,
                                   max_iter=args.max_iter, escape_radius=args.escape_radius,
                                   overlays=overlays or {}, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc))


def _tree(f, rot, max_gen, K=2000, Kb=2000):
    m = siegel.build_model(f, rot, K=K, Kb=Kb)
    crit = f.c if isinstance(f, dynamics.CubicMap) else None
    tree = bubbles.BubbleTree(f, m, critical=crit)
    return m, tree, tree.build(max_gen) if max_gen else []


def cmd_render_param(args):
    if args.center is None:
        args.center = render.FIG1_VIEWPORT["center"] if args.plane == "a" else 0j
    if args.width is None:
        args.width = render.FIG1_VIEWPORT["width"] if args.plane == "a" else 6.0
    cfg = _render_cfg(args)
    _log(args)
    render.write_ppm(render.render_parameter_plane(args.rot, args.plane, cfg), args.out)


def cmd_render_dyn(args):
    f = _make_map(args)
    if args.center is None:
        args.center = 1 + 0j if args.family == "q" else 0j
    overlays = {"siegel_boundary": "siegel" in args.overlay,
                "bubbles_to_gen": args.bubble_gen if "bubbles" in args.overlay else 0}
    cfg = _render_cfg(args, overlays)
    _log(args)
    m = tree = None
    if args.overlay:
        m, tree, _ = _tree(f, args.rot, overlays["bubbles_to_gen"])
    render.write_ppm(render.render_dynamical_plane(f, cfg, m, tree), args.out)


def cmd_siegel_series(args):
    f = _make_map(args)
    _log(args)
    m = siegel.build_model(f, args.rot, N=args.N, K=args.K, Kb=args.Kb)
    d = m.to_dict()
    d.update(siegel.radius_diagnostics(m))
    d["functional_residual"] = siegel.functional_residual(m)
    _emit(args, json.dumps(d))
    if args.boundary_csv:
        _atomic_write(args.boundary_csv, siegel.boundary_csv(m).encode())


def cmd_bubble_tree(args):
    f = _make_map(args)
    _log(args)
    _, tree, found = _tree(f, args.rot, args.max_gen)
    found = [b for b in found if b.diameter >= args.min_diam]
    _emit(args, bubbles.tree_to_json(tree, found, max_points=args.max_points))


def cmd_trace_ray(args):
    f = _make_map(args)
    _log(args)
    stream = multiangle.MultiAngleStream.from_periodic_gaps(args.gaps, start=args.start)
    _, tree, _ = _tree(f, args.rot, 0)
    period = sum(args.gaps) if args.start == 0 else None
    ray = bubbles.trace_bubble_ray(tree, stream, depth=args.depth, period=period)
    _emit(args, json.dumps(ray.to_dict()))


def cmd_phi(args):
    _log(args)
    trees = model.ModelTrees(args.rot, max_gen=args.max_gen)
    mp = model.phi(args.c, args.rot, trees)
    _emit(args, json.dumps(mp.to_dict()))


def _parse_ma(text):
    try:
        return multiangle.parse_multiangle(text)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, IllegalMultiAngle):
            raise
        raise UsageError(f"cannot parse multi-angle {text!r}: {exc}")


def cmd_pi_orbit(args):
    _log(args)
    ma = _parse_ma(args.ma)
    print(json.dumps([list(x.ms) for x in multiangle.pi_orbit(ma)]))


def cmd_validate_ma(args):
    _log(args)
    ma = _parse_ma(args.ma)
    print(json.dumps({"legal": True, "ma": list(ma.ms)}))


COMMANDS = {
    "render-param": cmd_render_param,
    "render-dyn": cmd_render_dyn,
    "siegel-series": cmd_siegel_series,
    "bubble-tree": cmd_bubble_tree,
    "trace-ray": cmd_trace_ray,
    "phi": cmd_phi,
    "pi-orbit": cmd_pi_orbit,
    "validate-ma": cmd_validate_ma,
}


def _log(args):
    print(json.dumps(_config(args)), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except IllegalMultiAngle as exc:
        print(f"illegal multi-angle: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
