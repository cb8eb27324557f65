"""
Command-line interface.

    uecoverage eval --design edge --scheme mrc
    uecoverage eval --design face --scheme cbk --blockage portrait --model 2 --seed 7
    uecoverage compare --designs face edge --scheme cbk --blockage portrait --model 2 --seed 7
    uecoverage report --design face
    uecoverage codebook --design edge
    uecoverage sls --design face --drops 10000 --seed 1

Every command writes its outputs below ``--out`` (default: ``$UECOVERAGE_OUT``
or the current directory). Outputs are written atomically; on failure no
partial file is left behind.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import blockage as blk
from .antenna import build_design, design_from_spec
from .beamforming import SCHEMES, evaluate_design
from .codebook import acquisition_overhead, export_codebook, generate_design_codebook, refinement_overhead
from .coverage import compare, percentile, spherical_cdf
from .designs import PRESETS
from .geometry import make_grid
from .sls import LinkBudget, run_drops

OUT_ENV = "UECOVERAGE_OUT"
REPORT_PERCENTILES = (0.95, 0.75, 0.50, 0.30, 0.05)
# Published solid-angle loss figures, shown next to the closed form.
REFERENCE_CDF_LOSS = {"portrait": 21.07, "landscape": 26.00}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    design: Optional[str] = "face"
    design_file: Optional[str] = None
    scheme: str = "cbk"
    blockage: str = "none"
    model: str = "1"
    seed: Optional[int] = None
    grid_step: float = 1.0
    combining: str = "subarray"
    phase_bits: int = 5
    label: Optional[str] = None
    out: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.design_file is None and self.design not in PRESETS:
            raise ConfigError(f"unknown design {self.design!r}; choose from {sorted(PRESETS)}")
        if self.design_file is not None and not Path(self.design_file).is_file():
            raise ConfigError(f"design file {self.design_file!r} not found")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {list(SCHEMES)}")
        if self.blockage not in ("none", *blk.REGIONS):
            raise ConfigError(f"unknown blockage {self.blockage!r}")
        if self.model not in ("1", "2", "2-mean"):
            raise ConfigError(f"unknown blockage model {self.model!r}")
        if self.blockage != "none" and self.model == "2" and self.seed is None:
            raise ConfigError("blockage model 2 requires --seed")
        if self.combining not in ("subarray", "module"):
            raise ConfigError(f"unknown combining mode {self.combining!r}")
        try:
            make_grid(self.grid_step, self.grid_step)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def tag(self) -> str:
        name = self.label or (Path(self.design_file).stem if self.design_file else self.design)
        parts = [name, self.scheme]
        if self.blockage != "none":
            parts += [self.blockage, f"m{self.model}"]
            if self.model == "2":
                parts.append(f"s{self.seed}")
        return "_".join(parts)


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def load_config_file(path) -> dict:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    if "model" in data:
        data["model"] = str(data["model"])
    return data


def parse_overrides(text: str) -> dict:
    """``key=value,key=value`` as used by ``compare --run``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_FIELDS:
            raise ConfigError(f"bad run override {item!r}")
        if key == "seed":
            out[key] = int(val)
        elif key in ("grid_step",):
            out[key] = float(val)
        elif key == "phase_bits":
            out[key] = int(val)
        else:
            out[key] = val.strip()
    return out


def resolve_config(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        base.update(load_config_file(args.config))
    for name in _CONFIG_FIELDS:
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    if base.get("design_file"):
        base.setdefault("design", None)
    if base.get("out") is None:
        base["out"] = os.environ.get(OUT_ENV, ".")
    return RunConfig(**base).validate()


# ---------------------------------------------------------------------------
# Pipeline


def build_from_config(cfg: RunConfig):
    grid = make_grid(cfg.grid_step, cfg.grid_step)
    if cfg.design_file:
        path = Path(cfg.design_file)
        spec = json.loads(path.read_text())
        return design_from_spec(spec, grid, base_dir=path.parent)
    return build_design(cfg.design, grid)


def gain_map_for(cfg: RunConfig, design=None):
    design = design or build_from_config(cfg)
    codebook = generate_design_codebook(design, cfg.phase_bits) if cfg.scheme == "cbk" else None
    gmap = evaluate_design(design, cfg.scheme, codebook, cfg.combining)
    if cfg.blockage != "none":
        gmap = blk.apply_blockage(gmap, blk.REGIONS[cfg.blockage], cfg.model, cfg.seed)
    return gmap


def cdf_for(cfg: RunConfig):
    return spherical_cdf(gain_map_for(cfg), label=cfg.label or cfg.tag)


@contextmanager
def atomic_outputs():
    """Collect output files; write them only if the whole command succeeds."""
    pending: list[tuple[Path, str]] = []
    yield pending
    written = []
    try:
        for path, text in pending:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
            written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def _echo_config(cfg: RunConfig, out=None):
    out = out or sys.stdout
    print("config: " + json.dumps(asdict(cfg), sort_keys=True), file=out)


def cmd_eval(cfg: RunConfig, out=None) -> Path:
    out = out or sys.stdout
    cdf = cdf_for(cfg)
    path = Path(cfg.out) / f"cdf_{cfg.tag}.csv"
    with atomic_outputs() as pending:
        pending.append((path, cdf.to_csv()))
    _echo_config(cfg, out)
    print(f"{'percentile':>10}  {'gain_dbi':>9}", file=out)
    for p in REPORT_PERCENTILES:
        print(f"{100 * p:>10.0f}  {percentile(cdf, p):>9.3f}", file=out)
    print(f"wrote {path}", file=out)
    return path


def cmd_compare(cfgs: list[RunConfig], out=None) -> Path:
    out = out or sys.stdout
    if len(cfgs) < 2:
        raise ConfigError("compare needs at least two runs")
    steps = {c.grid_step for c in cfgs}
    if len(steps) > 1:
        raise ConfigError(f"mismatched metrics: runs use different grid steps {sorted(steps)}")
    comb = {c.combining for c in cfgs if c.scheme in ("mrc", "egc")}
    if len(comb) > 1:
        raise ConfigError("mismatched metrics: runs mix subarray and module combining")
    labels = [c.label or c.tag for c in cfgs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate run labels {labels}; add label= to --run")
    table = compare([cdf_for(c) for c in cfgs], labels)
    path = Path(cfgs[0].out) / ("compare_" + "_vs_".join(labels) + ".csv")
    with atomic_outputs() as pending:
        pending.append((path, table.to_csv()))
    for c in cfgs:
        _echo_config(c, out)
    print(table.to_csv(), end="", file=out)
    for lab, cross in zip(labels[1:], table.crossovers):
        where = ", ".join(f"{100 * p:.0f}" for p in cross) or "none"
        print(f"crossovers {labels[0]} vs {lab}: {where}", file=out)
    print(f"wrote {path}", file=out)
    return path


def cmd_report(cfg: RunConfig, out=None) -> str:
    out = out or sys.stdout
    design = build_from_config(cfg)
    cb = generate_design_codebook(design, cfg.phase_bits)
    lines = [
        f"design {design.name}: {len(design.modules)} modules, {design.num_elements} elements, "
        f"{len(design.subarrays)} subarray feeds",
        f"codebook {len(cb)} beams, acquisition {acquisition_overhead(design):g} ms",
        f"refinement csi-rs {refinement_overhead(4, 'csirs'):.2f} ms, ssb {refinement_overhead(4, 'ssb'):g} ms",
    ]
    for name, region in blk.REGIONS.items():
        lines.append(
            f"{name}: physical {blk.physical_angle_fraction(region):.2f}%, "
            f"solid-angle {blk.cdf_loss_fraction(region):.2f}% "
            f"(reference value {REFERENCE_CDF_LOSS[name]:.2f}%)"
        )
    text = "\n".join(lines) + "\n"
    print(text, end="", file=out)
    return text


def cmd_codebook(cfg: RunConfig, out=None) -> Path:
    out = out or sys.stdout
    design = build_from_config(cfg)
    cb = generate_design_codebook(design, cfg.phase_bits)
    path = Path(cfg.out) / f"codebook_{cfg.label or design.name}.txt"
    with atomic_outputs() as pending:
        tmp = tempfile.NamedTemporaryFile("w", delete=False, suffix=".txt")
        tmp.close()
        try:
            export_codebook(cb, tmp.name)
            pending.append((path, Path(tmp.name).read_text()))
        finally:
            os.unlink(tmp.name)
    print(f"codebook {len(cb)} beams; wrote {path}", file=out)
    return path


def cmd_sls(cfg: RunConfig, drops: int, budget: LinkBudget, ue_mode: str = "codebook",
            out=None) -> Path:
    out = out or sys.stdout
    design = build_from_config(cfg)
    cb = generate_design_codebook(design, cfg.phase_bits)
    seed = 0 if cfg.seed is None else cfg.seed
    res = run_drops(design, cb, budget, drops, seed, ue_mode=ue_mode)
    path = Path(cfg.out) / f"sls_{cfg.label or design.name}_{ue_mode}_s{seed}.csv"
    with atomic_outputs() as pending:
        pending.append((path, res.to_csv()))
    _echo_config(cfg, out)
    print("budget: " + json.dumps(asdict(budget), sort_keys=True), file=out)
    se = res.se.ravel()
    for p in REPORT_PERCENTILES:
        print(f"SE {100 * p:>3.0f}th percentile: {np.quantile(se, p):.3f} bps/Hz", file=out)
    print(f"wrote {path}", file=out)
    return path


# ---------------------------------------------------------------------------
# Argument parsing


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--design", choices=sorted(PRESETS))
    p.add_argument("--design-file", help="custom design description (JSON)")
    p.add_argument("--grid-step", type=float, help="grid step in degrees (default 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--phase-bits", type=int)
    p.add_argument("--label")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")


def _run_flags(p: argparse.ArgumentParser):
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--blockage", choices=("none", *blk.REGIONS))
    p.add_argument("--model", choices=("1", "2", "2-mean"))
    p.add_argument("--combining", choices=("subarray", "module"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uecoverage", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="spherical coverage CDF of one design/scheme")
    _common(p)
    _run_flags(p)

    p = sub.add_parser("compare", help="percentile deltas between runs")
    _common(p)
    _run_flags(p)
    p.add_argument("--designs", nargs="+", choices=sorted(PRESETS))
    p.add_argument("--run", action="append", default=[], metavar="KEY=VAL,...",
                   help="one run, as overrides of the shared flags (repeatable)")

    p = sub.add_parser("report", help="closed-form loss fractions and overheads")
    _common(p)

    p = sub.add_parser("codebook", help="export a design codebook")
    _common(p)

    p = sub.add_parser("sls", help="single-link spectral-efficiency Monte Carlo")
    _common(p)
    p.add_argument("--drops", type=int, default=10_000)
    p.add_argument("--ue-mode", choices=("codebook", "mrc"), default="codebook")
    for f in fields(LinkBudget):
        p.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), dest=f"budget_{f.name}")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            base = resolve_config(args)
            runs = [parse_overrides(r) for r in args.run]
            runs += [{"design": d} for d in (args.designs or [])]
            cfgs = []
            for r in runs:
                if "design_file" in r:
                    r.setdefault("design", None)
                cfgs.append(replace(base, **r).validate())
            cmd_compare(cfgs)
        elif args.command == "eval":
            cmd_eval(resolve_config(args))
        elif args.command == "report":
            cmd_report(resolve_config(args))
        elif args.command == "codebook":
            cmd_codebook(resolve_config(args))
        elif args.command == "sls":
            budget = LinkBudget(**{f.name: getattr(args, f"budget_{f.name}") for f in fields(LinkBudget)
                                   if getattr(args, f"budget_{f.name}") is not None})
            cmd_sls(resolve_config(args), args.drops, budget, args.ue_mode)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
