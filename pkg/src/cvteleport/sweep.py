"""Parameter sweeps: JSON config in, one CSV per (target, deformation) out."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .charfun import InputSpec
from .errors import ConfigError, CVTeleportError
from .fock import Cutoff, DeformationFn
from .states import ResourceSpec, default_cutoff, make_resource

log = logging.getLogger(__name__)

SCHEMA = "cvteleport.sweep/1"
TARGETS = ("fidelity_coherent", "fidelity_squeezed", "fidelity_vs_z", "entanglement", "epr_variance")
OUTDIR_ENV = "CVTELEPORT_OUTDIR"
_TOP_KEYS = {"schema", "name", "description", "target", "curves", "grid", "deformation", "axis",
             "fixed", "method", "quantity", "variant", "cutoff", "output"}
_SUB_KEYS = {
    "fixed": {"alpha", "alpha0", "r", "zeta"},
    "cutoff": {"nmax", "tail_tol", "check_tail"},
    "output": {"dir", "prefix"},
}


@dataclass(frozen=True)
class Curve:
    n: int
    k: int
    operation: str

    @property
    def label(self) -> str:
        return f"n{self.n}_k{self.k}_{self.operation}"


@dataclass(frozen=True)
class Axis:
    variable: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [float(f"{self.start + i * self.step:.12g}") for i in range(count)]


@dataclass(frozen=True)
class SweepConfig:
    name: str
    target: str
    curves: tuple[Curve, ...]
    deformations: tuple[DeformationFn, ...]
    axis: Axis
    alpha: float = 1.0
    alpha0: complex = 0.0
    r: float = 1.0
    zeta: float = 0.0
    variant: str = "prime"
    method: str = "quadrature"
    quantity: str = "var_xminus"
    nmax: int | None = None
    tail_tol: float = 1e-12
    check_tail: bool = True
    outdir: str | None = None
    prefix: str | None = None
    extra: dict = field(default_factory=dict)


def _need(doc, key, kind, path):
    if key not in doc:
        raise ConfigError(f"{path}: missing required field '{key}'")
    val = doc[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _curves(doc) -> tuple[Curve, ...]:
    if "curves" in doc:
        raw = doc["curves"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("curves: must be a non-empty list")
        out = []
        for i, c in enumerate(raw):
            path = f"curves[{i}]"
            if not isinstance(c, dict):
                raise ConfigError(f"{path}: expected an object")
            n, k = _need(c, "n", int, path), _need(c, "k", int, path)
            op = c.get("operation", "none" if k == 0 else None)
            if op is None:
                raise ConfigError(f"{path}: missing required field 'operation'")
            out.append(Curve(n, k, op))
    elif "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict):
            raise ConfigError("grid: expected an object with lists n, k, operation")
        lists = []
        for key in ("n", "k", "operation"):
            val = g.get(key)
            if not isinstance(val, list) or not val:
                raise ConfigError(f"grid.{key}: must be a non-empty list")
            lists.append(val)
        out, seen = [], set()
        for n, k, op in itertools.product(*lists):
            if k == 0:
                op = "none"  # the k = 0 state does not depend on the operation
            key = (n, k, op)
            if key not in seen:
                seen.add(key)
                out.append(Curve(n, k, op))
    else:
        raise ConfigError("config needs either 'curves' or 'grid'")
    for c in out:
        try:
            ResourceSpec(c.n, c.k, c.operation)
        except ValueError as exc:
            raise ConfigError(f"curve {c.label}: {exc}") from None
    return tuple(out)


def parse_config(text: str, source: str = "<config>") -> SweepConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be an object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{source}: unknown field '{key}' (expected one of {sorted(_TOP_KEYS)})")
    schema = doc.get("schema")
    if schema != SCHEMA:
        raise ConfigError(f"{source}: field 'schema' must be '{SCHEMA}', got {schema!r}")
    target = _need(doc, "target", str, source)
    if target not in TARGETS:
        raise ConfigError(f"{source}.target: must be one of {TARGETS}, got {target!r}")
    ax = _need(doc, "axis", dict, source)
    axis = Axis(
        _need(ax, "variable", str, "axis"),
        _need(ax, "start", float, "axis"),
        _need(ax, "stop", float, "axis"),
        _need(ax, "step", float, "axis"),
    )
    want = "z" if target == "fidelity_vs_z" else "alpha"
    if axis.variable != want:
        raise ConfigError(f"axis.variable: target {target} sweeps '{want}', got '{axis.variable}'")
    if axis.step <= 0:
        raise ConfigError("axis.step: must be > 0")
    if axis.start > axis.stop:
        raise ConfigError("axis.start: must be <= axis.stop")
    if axis.variable == "z" and axis.start < 0:
        raise ConfigError("axis.start: squeezing modulus must be >= 0")
    defs = doc.get("deformation", ["identity"])
    if isinstance(defs, str):
        defs = [defs]
    if not isinstance(defs, list) or not defs:
        raise ConfigError("deformation: must be a non-empty list")
    try:
        deformations = tuple(DeformationFn.parse(d) for d in defs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"deformation: {exc}") from None
    fixed = doc.get("fixed", {})
    cut = doc.get("cutoff", {})
    out = doc.get("output", {})
    for name, obj in (("fixed", fixed), ("cutoff", cut), ("output", out)):
        if not isinstance(obj, dict):
            raise ConfigError(f"{name}: expected an object")
        for key in obj:
            if key not in _SUB_KEYS[name]:
                raise ConfigError(f"{name}.{key}: unknown field (expected one of {sorted(_SUB_KEYS[name])})")
    for key in ("alpha", "r", "zeta"):
        if key in fixed and (isinstance(fixed[key], bool) or not isinstance(fixed[key], (int, float))):
            raise ConfigError(f"fixed.{key}: expected a number")
    if "r" in fixed and fixed["r"] < 0:
        raise ConfigError("fixed.r: squeezing modulus must be >= 0")
    a0 = fixed.get("alpha0", 0.0)
    a0 = complex(*a0) if isinstance(a0, list) else complex(a0)
    method = doc.get("method", "quadrature")
    if method not in ("series", "quadrature"):
        raise ConfigError(f"method: must be 'series' or 'quadrature', got {method!r}")
    quantity = doc.get("quantity", "var_xminus")
    if quantity not in ("var_xminus", "var_pplus"):
        raise ConfigError(f"quantity: must be 'var_xminus' or 'var_pplus', got {quantity!r}")
    variant = doc.get("variant", "prime")
    if variant not in ("prime", "double_prime"):
        raise ConfigError(f"variant: must be 'prime' or 'double_prime', got {variant!r}")
    nmax = cut.get("nmax")
    if nmax is not None and (not isinstance(nmax, int) or nmax < 1):
        raise ConfigError("cutoff.nmax: must be an integer >= 1 or null")
    return SweepConfig(
        name=doc.get("name", Path(source).stem),
        target=target,
        curves=_curves(doc),
        deformations=deformations,
        axis=axis,
        alpha=float(fixed.get("alpha", 1.0)),
        alpha0=a0,
        r=float(fixed.get("r", 1.0)),
        zeta=float(fixed.get("zeta", 0.0)),
        variant=variant,
        method=method,
        quantity=quantity,
        nmax=nmax,
        tail_tol=float(cut.get("tail_tol", 1e-12)),
        check_tail=bool(cut.get("check_tail", True)),
        outdir=out.get("dir"),
        prefix=out.get("prefix"),
    )


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(path))


# ------------------------------------------------------------------ evaluation


def evaluate_point(cfg: SweepConfig, f: DeformationFn, curve: Curve, x: float) -> float:
    """Value of one curve at one axis point (raises on computation errors)."""
    from .correlations import correlation_report
    from .teleport import fidelity

    alpha = cfg.alpha if cfg.axis.variable == "z" else x
    spec = ResourceSpec(curve.n, curve.k, curve.operation, alpha, f, cfg.variant)
    c = default_cutoff(spec, cfg.tail_tol)
    c = Cutoff(cfg.nmax or c.nmax, cfg.tail_tol, cfg.check_tail)
    if cfg.target == "fidelity_coherent":
        return fidelity(InputSpec.coherent(cfg.alpha0), spec, cfg.method, c).value
    if cfg.target == "fidelity_squeezed":
        return fidelity(InputSpec.squeezed(cfg.r, cfg.zeta), spec, cfg.method, c).value
    if cfg.target == "fidelity_vs_z":
        return fidelity(InputSpec.squeezed(x, cfg.zeta), spec, cfg.method, c).value
    rep = correlation_report(make_resource(spec, c))
    if cfg.target == "entanglement":
        return rep.entropy_nats
    return getattr(rep, cfg.quantity)


def _task(args):
    cfg, f, curve, x = args
    try:
        return evaluate_point(cfg, f, curve, x), None
    except (CVTeleportError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def fmt(v: float) -> str:
    return format(v, ".12g")


def _slug(f: DeformationFn) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", f.label)


def resolve_outdir(cfg: SweepConfig, override=None) -> Path:
    return Path(override or cfg.outdir or os.environ.get(OUTDIR_ENV) or "out")


def run_sweep(cfg: SweepConfig, jobs: int | None = None, outdir=None) -> list[Path]:
    """Evaluate every (deformation, curve, axis point) and write the CSVs.

    Points are fanned out to ``jobs`` worker processes and gathered in axis
    order, so the output bytes do not depend on scheduling. Failed points
    become empty cells and are listed in a sidecar ``.errors.log``.
    """
    jobs = jobs or os.cpu_count() or 1
    xs = cfg.axis.values()
    dest = resolve_outdir(cfg, outdir)
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for f in cfg.deformations:
        tasks = [(cfg, f, curve, x) for x in xs for curve in cfg.curves]
        if jobs == 1:
            results = [_task(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([cfg.axis.variable] + [c.label for c in cfg.curves])
        errors = []
        ncol = len(cfg.curves)
        for i, x in enumerate(xs):
            row = [fmt(x)]
            for j, curve in enumerate(cfg.curves):
                val, err = results[i * ncol + j]
                if err is None:
                    row.append(fmt(val))
                else:
                    row.append("")
                    errors.append(f"{cfg.axis.variable}={fmt(x)} {curve.label}: {err}")
            w.writerow(row)
        stem = f"{cfg.prefix or cfg.name}_{cfg.target}_{_slug(f)}"
        path = dest / f"{stem}.csv"
        path.write_bytes(buf.getvalue().encode("utf-8"))
        errpath = dest / f"{stem}.errors.log"
        if errors:
            errpath.write_text("\n".join(errors) + "\n", encoding="utf-8")
            log.warning("%s: %d point(s) failed, see %s", path.name, len(errors), errpath.name)
        elif errpath.exists():
            errpath.unlink()
        written.append(path)
    return written
