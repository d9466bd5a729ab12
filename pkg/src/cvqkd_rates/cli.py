"""Command-line front end emitting machine-readable CSV/JSON.

Numbers are serialized with 12 significant digits, '.' decimal separator,
LF line endings; identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import DomainError, EmptyRegion, NoPositiveRate
from .keyrates import (
    SearchSettings,
    key_rate_at,
    protocol_key_rate,
)
from .protocols import (
    ChannelParams,
    PQuadObservation,
    ProtocolConfig,
    Variant,
    physicality_parabola,
)
from ._pool import map_ordered
from .regions import (
    key_rate_vs_cp,
    key_rate_vs_loss,
    max_tolerable_noise,
    scan_region,
    _loss_axis,
)

_VARIANT_CHOICES = [v.value for v in Variant]
_DEFAULT_FORMATS = {
    "keyrate": "json",
    "region": "csv",
    "sweep-loss": "csv",
    "sweep-cp": "csv",
    "tolerable-noise": "json",
    "figure": "csv",
}


@dataclass
class RunConfig:
    """Echo of one resolved invocation, embedded in JSON output."""

    command: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {"command": self.command, **self.parameters}


def format_number(value: float) -> str:
    return format(float(value), ".12g")


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, tuple):
        return "|".join(f"{format_number(lo)}:{format_number(hi)}" for lo, hi in value)
    text = str(value)
    if any(ch in text for ch in (",", '"', "\n")):
        return '"' + text.replace('"', '""') + '"'
    return text


def _render_csv(rows: list[dict[str, Any]]) -> str:
    if not rows:
        return "\n"
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[key]) for key in header))
    return "\n".join(lines) + "\n"


def _json_text(value: Any, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {_json_text(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            return "[]"
        items = [f"{inner}{_json_text(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _render_json(
    config: RunConfig, rows: list[dict[str, Any]], summary: dict[str, Any] | None
) -> str:
    payload: dict[str, Any] = {"config": config.as_dict()}
    if summary is not None:
        payload["summary"] = summary
    payload["results"] = rows
    return _json_text(payload) + "\n"


def _render(
    fmt: str,
    config: RunConfig,
    rows: list[dict[str, Any]],
    summary: dict[str, Any] | None = None,
) -> str:
    if fmt == "json":
        return _render_json(config, rows, summary)
    return _render_csv(rows)


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="ascii", newline="") as handle:
            handle.write(text)


def _channel_from_args(args: argparse.Namespace) -> ChannelParams:
    eta_p = args.eta_p if args.eta_p is not None else args.eta_x
    eps_p = args.eps_p if args.eps_p is not None else args.eps_x
    return ChannelParams(eta_x=args.eta_x, eps_x=args.eps_x, eta_p=eta_p, eps_p=eps_p)


def _settings_from_args(args: argparse.Namespace) -> SearchSettings:
    grid = getattr(args, "grid_points", None)
    return SearchSettings(grid_points=grid) if grid else SearchSettings()


def _cmd_keyrate(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    variant = Variant(args.variant)
    config = ProtocolConfig(args.vm, variant)
    channel = _channel_from_args(args)
    settings = _settings_from_args(args)
    v_p_b = args.vpb if args.vpb is not None else 1.0 + channel.eta_p * channel.eps_p
    if args.cp is not None:
        if variant is Variant.GG02:
            raise DomainError("--cp applies only to the single-quadrature variants")
        result = key_rate_at(config, channel, PQuadObservation(v_p_b, args.cp))
    else:
        result = protocol_key_rate(config, channel, v_p_b=v_p_b, settings=settings)
    run = RunConfig("keyrate", {
        "vm": args.vm, "eta_x": channel.eta_x, "eps_x": channel.eps_x,
        "eta_p": channel.eta_p, "eps_p": channel.eps_p, "vpb": v_p_b,
        "cp": args.cp, "variant": variant.value, "grid_points": settings.grid_points,
    })
    rows = [{
        "i_ab": result.i_ab,
        "chi_be": result.chi_be,
        "key_rate": result.key_rate,
        "c_p_evaluated": result.c_p_evaluated,
        "worst_case": result.worst_case,
    }]
    return run, rows, None


def _region_rows(region_map) -> list[dict]:
    return [{
        "v_p_b": record.v_p_b,
        "c_lo": record.c_lo,
        "c_hi": record.c_hi,
        "worst_case_c_p": record.worst_case_c_p,
        "worst_case_key_rate": record.worst_case_key_rate,
        "secure_intervals": record.secure_intervals,
    } for record in region_map.records]


def _cmd_region(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    config = ProtocolConfig(args.vm)
    channel = _channel_from_args(args)
    settings = _settings_from_args(args)
    vertex = physicality_parabola(config, channel).v0
    vpb_min = args.vpb_min if args.vpb_min is not None else vertex
    region_map = scan_region(
        config, channel, (vpb_min, args.vpb_max), args.resolution, settings
    )
    run = RunConfig("region", {
        "vm": args.vm, "eta_x": channel.eta_x, "eps_x": channel.eps_x,
        "vpb_min": vpb_min, "vpb_max": args.vpb_max, "resolution": args.resolution,
    })
    return run, _region_rows(region_map), {"max_secure_v_p_b": region_map.max_secure_v_p_b}


def _cmd_sweep_loss(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    variants = [Variant(v) for v in args.variant] if args.variant else [
        Variant.GG02, Variant.UD_P_ESTIMATED, Variant.UD_PESSIMISTIC,
    ]
    config = ProtocolConfig(args.vm)
    settings = _settings_from_args(args)
    loss_range = (args.loss_db_min, args.loss_db_max, args.loss_db_step)
    curves = key_rate_vs_loss(config, args.eps, loss_range, variants, settings)
    axis = curves[0].abscissa
    rows = []
    for i, loss_db in enumerate(axis):
        row: dict[str, Any] = {"loss_db": float(loss_db)}
        for curve in curves:
            row["k_" + curve.label.replace("-", "_")] = float(curve.ordinate[i])
        rows.append(row)
    run = RunConfig("sweep-loss", {
        "vm": args.vm, "eps": args.eps,
        "loss_db_min": args.loss_db_min, "loss_db_max": args.loss_db_max,
        "loss_db_step": args.loss_db_step,
        "variants": [v.value for v in variants],
        "grid_points": settings.grid_points,
    })
    return run, rows, None


def _cmd_sweep_cp(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    config = ProtocolConfig(args.vm)
    channel = _channel_from_args(args)
    curve = key_rate_vs_cp(config, channel, args.vpb, args.resolution)
    rows = [
        {"c_p": float(c), "key_rate": float(k)}
        for c, k in zip(curve.abscissa, curve.ordinate)
    ]
    run = RunConfig("sweep-cp", {
        "vm": args.vm, "eta_x": channel.eta_x, "eps_x": channel.eps_x,
        "vpb": args.vpb, "resolution": args.resolution,
    })
    return run, rows, None


def _cmd_tolerable_noise(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    variant = Variant(args.variant)
    config = ProtocolConfig(args.vm, variant)
    settings = _settings_from_args(args)
    eps_max = max_tolerable_noise(config, args.loss_db, variant, settings)
    run = RunConfig("tolerable-noise", {
        "vm": args.vm, "loss_db": args.loss_db, "variant": variant.value,
        "grid_points": settings.grid_points,
    })
    return run, [{"loss_db": args.loss_db, "variant": variant.value, "eps_max": eps_max}], None


_FIGURE_DEFAULT_VM = {2: 10.0, 3: 10.0, 4: 100.0, 5: 100.0}
_FIGURE_CHANNEL_X = (0.1, 0.05)      # transmittance and excess noise of figures 2-3
_FIGURE_EPS_SYMMETRIC = 0.05         # symmetric excess noise of figure 4
_FIGURE_VPB_MAX = 1.01               # figure-2 scan cap, beyond the security crossing
_FIGURE_VPB_LINES = (0.996, 1.004, 1.006, 1.00535)  # figure-3 output variances


def _cmd_figure(args: argparse.Namespace) -> tuple[RunConfig, list[dict], dict | None]:
    fig_id = args.id
    vm = args.vm if args.vm is not None else _FIGURE_DEFAULT_VM[fig_id]
    loss_range = (args.loss_db_min, args.loss_db_max, args.loss_db_step)
    run = RunConfig("figure", {"id": fig_id, "vm": vm})
    config = ProtocolConfig(vm)

    if fig_id == 2:
        eta_x, eps_x = _FIGURE_CHANNEL_X
        channel = ChannelParams(eta_x=eta_x, eps_x=eps_x)
        vertex = physicality_parabola(config, channel).v0
        region_map = scan_region(
            config, channel, (vertex, _FIGURE_VPB_MAX), args.resolution
        )
        run.parameters.update({
            "eta_x": eta_x, "eps_x": eps_x,
            "vpb_min": vertex, "vpb_max": _FIGURE_VPB_MAX,
            "resolution": args.resolution,
        })
        return run, _region_rows(region_map), {
            "max_secure_v_p_b": region_map.max_secure_v_p_b
        }

    if fig_id == 3:
        eta_x, eps_x = _FIGURE_CHANNEL_X
        channel = ChannelParams(eta_x=eta_x, eps_x=eps_x)
        rows = []
        for v_p_b in _FIGURE_VPB_LINES:
            curve = key_rate_vs_cp(config, channel, v_p_b, args.resolution)
            rows.extend(
                {"v_p_b": v_p_b, "c_p": float(c), "key_rate": float(k)}
                for c, k in zip(curve.abscissa, curve.ordinate)
            )
        run.parameters.update({
            "eta_x": eta_x, "eps_x": eps_x,
            "vpb_lines": list(_FIGURE_VPB_LINES), "resolution": args.resolution,
        })
        return run, rows, None

    if fig_id == 4:
        variants = [Variant.GG02, Variant.UD_P_ESTIMATED, Variant.UD_PESSIMISTIC]
        curves = key_rate_vs_loss(config, _FIGURE_EPS_SYMMETRIC, loss_range, variants)
        rows = []
        for i, loss_db in enumerate(curves[0].abscissa):
            row = {"loss_db": float(loss_db)}
            for curve in curves:
                row["k_" + curve.label.replace("-", "_")] = float(curve.ordinate[i])
            rows.append(row)
        run.parameters.update({
            "eps": _FIGURE_EPS_SYMMETRIC,
            "loss_db_min": loss_range[0], "loss_db_max": loss_range[1],
            "loss_db_step": loss_range[2],
        })
        return run, rows, None

    # Figure 5: tolerable noise for all four variants; a variant with no
    # positive noiseless rate contributes a zero threshold.
    order = [
        Variant.GG02,
        Variant.UD_P_ESTIMATED,
        Variant.UD_PESSIMISTIC,
        Variant.UD_OPTIMISTIC_CP_MAX,
    ]
    axis = _loss_axis(loss_range)

    def thresholds(loss_db: float) -> tuple[float, ...]:
        values = []
        for variant in order:
            try:
                values.append(max_tolerable_noise(config, float(loss_db), variant))
            except NoPositiveRate:
                values.append(0.0)
        return tuple(values)

    rows = []
    for loss_db, values in zip(axis, map_ordered(thresholds, axis)):
        row = {"loss_db": float(loss_db)}
        for variant, value in zip(order, values):
            row["eps_max_" + variant.value.replace("-", "_")] = value
        rows.append(row)
    run.parameters.update({
        "loss_db_min": loss_range[0], "loss_db_max": loss_range[1],
        "loss_db_step": loss_range[2],
    })
    return run, rows, None


_COMMANDS: dict[str, Callable] = {
    "keyrate": _cmd_keyrate,
    "region": _cmd_region,
    "sweep-loss": _cmd_sweep_loss,
    "sweep-cp": _cmd_sweep_cp,
    "tolerable-noise": _cmd_tolerable_noise,
    "figure": _cmd_figure,
}


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["csv", "json"], default=None,
                        help="output format (default depends on the command)")
    parser.add_argument("--out", default=None, metavar="PATH",
                        help="write output to PATH instead of stdout")


def _add_channel_x_flags(parser: argparse.ArgumentParser, require_eta: bool = True) -> None:
    parser.add_argument("--eta-x", type=float, required=require_eta,
                        help="channel transmittance in x, in (0, 1]")
    parser.add_argument("--eps-x", type=float, default=0.0,
                        help="excess noise in x, SNU at channel input (default 0)")


def _add_channel_p_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta-p", type=float, default=None,
                        help="channel transmittance in p (default: same as --eta-x)")
    parser.add_argument("--eps-p", type=float, default=None,
                        help="excess noise in p (default: same as --eps-x)")


def _add_loss_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--loss-db-min", type=float, default=0.0)
    parser.add_argument("--loss-db-max", type=float, default=30.0)
    parser.add_argument("--loss-db-step", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvqkd-rates",
        description="Key rates and security regions of the single-quadrature "
                    "coherent-state protocol against collective attacks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keyrate", help="key-rate lower bound at one parameter point")
    p.add_argument("--vm", type=float, required=True, help="modulation variance, SNU")
    _add_channel_x_flags(p)
    _add_channel_p_flags(p)
    p.add_argument("--vpb", type=float, default=None,
                   help="measured output variance in p (default 1 + eta_p*eps_p)")
    p.add_argument("--cp", type=float, default=None,
                   help="evaluate at this fixed correlation instead of the variant rule")
    p.add_argument("--variant", choices=_VARIANT_CHOICES, default="ud-pessimistic")
    p.add_argument("--grid-points", type=int, default=None)
    _add_output_flags(p)

    p = sub.add_parser("region", help="physicality and security map over V_p^B")
    p.add_argument("--vm", type=float, required=True)
    _add_channel_x_flags(p)
    _add_channel_p_flags(p)
    p.add_argument("--vpb-min", type=float, default=None,
                   help="scan start (default: parabola vertex)")
    p.add_argument("--vpb-max", type=float, required=True)
    p.add_argument("--resolution", type=int, default=101)
    p.add_argument("--grid-points", type=int, default=None)
    _add_output_flags(p)

    p = sub.add_parser("sweep-loss", help="key rate vs loss on a symmetric channel")
    p.add_argument("--vm", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.0,
                   help="symmetric excess noise, SNU (decimal; 5%% means 0.05)")
    _add_loss_flags(p)
    p.add_argument("--variant", action="append", choices=_VARIANT_CHOICES, default=None,
                   help="repeatable; default gg02, ud-estimated, ud-pessimistic")
    p.add_argument("--grid-points", type=int, default=None)
    _add_output_flags(p)

    p = sub.add_parser("sweep-cp", help="key rate across the physical correlation interval")
    p.add_argument("--vm", type=float, required=True)
    _add_channel_x_flags(p)
    _add_channel_p_flags(p)
    p.add_argument("--vpb", type=float, required=True)
    p.add_argument("--resolution", type=int, default=2001)
    _add_output_flags(p)

    p = sub.add_parser("tolerable-noise", help="maximal excess noise with positive rate")
    p.add_argument("--vm", type=float, required=True)
    p.add_argument("--loss-db", type=float, required=True)
    p.add_argument("--variant", choices=_VARIANT_CHOICES, default="ud-pessimistic")
    p.add_argument("--grid-points", type=int, default=None)
    _add_output_flags(p)

    p = sub.add_parser("figure", help="regenerate the data behind a reference figure")
    p.add_argument("--id", type=int, choices=[2, 3, 4, 5], required=True)
    p.add_argument("--vm", type=float, default=None,
                   help="override the figure's modulation variance")
    p.add_argument("--resolution", type=int, default=None)
    _add_loss_flags(p)
    _add_output_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = _DEFAULT_FORMATS[args.command]
    if args.command == "figure" and args.resolution is None:
        args.resolution = 101 if args.id == 2 else 2001
    try:
        run, rows, summary = _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except (EmptyRegion, NoPositiveRate) as exc:
        run = RunConfig(args.command, {})
        record = {"error_type": type(exc).__name__, "error_message": str(exc)}
        if args.format == "json":
            text = _json_text({"config": run.as_dict(), "error": record}) + "\n"
        else:
            text = _render_csv([record])
        _write_output(text, args.out)
        print(f"computation reported {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    _write_output(_render(args.format, run, rows, summary), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
