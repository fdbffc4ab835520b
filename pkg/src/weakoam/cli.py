"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a numerical check fails and 2
for configuration or guard errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checks, scenarios
from .algebra import load_observable, weak_moment, weak_value
from .errors import BadAxis, WeakMeasurementError
from .evolution import (
    CouplingConfig,
    MomentReport,
    conditioned_moments,
    evolve,
    postselect,
    simulate,
)
from .extraction import (
    assemble_weak_value,
    extract_im_second_moment,
    extract_re_second_moment,
)
from .perturbation import closed_form_x_gaussian, closed_form_xy, convergence_report
from .pointer import GridSpec, PointerSpec, write_field_csv

COMMANDS = ("example", "verify", "sweep", "converge", "field-dump")
DEFAULT_OUT = {"example": "example.csv", "verify": "verify.json", "sweep": "sweep.csv",
               "converge": "converge.csv", "field-dump": "field.csv"}

# same thresholds as the acceptance suite
XY_REL_TOL = 0.05
X_REL_TOL = 0.02
EXTRACT_REL_TOL = 0.05
NULL_ABS_TOL = 1e-6
XY_NULL_TOL = 1e-8
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class RunConfig:
    command: str = "example"
    observable_path: str | None = None
    l: int = 1
    sigma: float = 1.0
    delta: float = 0.01
    epsilon: float = 0.1
    grid_n: int = 256
    grid_extent: float = 8.0
    output_path: str | None = None
    seed: int = 0
    axis: str | None = None
    start: float | None = None
    stop: float | None = None
    count: int = 5
    spacing: str = "linear"

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.grid_n, self.grid_extent)

    @property
    def out(self) -> Path:
        return Path(self.output_path or DEFAULT_OUT[self.command])

    def observable(self):
        if self.observable_path:
            return load_observable(self.observable_path)
        return scenarios.example_observable()

    def validate(self):
        if self.sigma <= 0:
            raise ValueError("--sigma must be positive")
        if self.grid_extent <= 0:
            raise ValueError("--grid-extent must be positive")
        if self.delta < 0:
            raise ValueError("--delta must be non-negative")


def default_grid_n() -> int:
    return int(os.environ.get("WP_DEFAULT_GRID_N", "256"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="weakoam",
        description="Weak measurements with Gaussian and OAM pointer states.")
    p.add_argument("--command", choices=COMMANDS, default="example")
    p.add_argument("--observable", dest="observable_path", default=None,
                   help='JSON file {"re": [[..]], "im": [[..]]}; defaults to the 2x2 example')
    p.add_argument("--l", type=int, default=1, help="winding number of the OAM pointer")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.01, help="coupling shift g_A t")
    p.add_argument("--epsilon", type=float, default=0.1, help="post-selection angle")
    p.add_argument("--grid-n", type=int, default=None,
                   help="points per axis (default 256, or $WP_DEFAULT_GRID_N)")
    p.add_argument("--grid-extent", type=float, default=8.0, help="grid half extent L")
    p.add_argument("--out", dest="output_path", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--axis", choices=("delta", "epsilon", "l"), default=None)
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="linear")
    return p


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = vars(ns)
    if values["grid_n"] is None:
        values["grid_n"] = default_grid_n()
    return RunConfig(**values)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path: Path, header, rows, trailer=()):
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        for line in trailer:
            fh.write(f"# {line}\n")


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n",
                    encoding="utf-8")


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# example ------------------------------------------------------------------

def _row(quantity, l, measured, predicted, rel_tol, abs_tol):
    err = abs(measured - predicted)
    rel = err / abs(predicted) if predicted != 0 else None
    passed = err <= max(rel_tol * abs(predicted), abs_tol)
    return {"quantity": quantity, "l": l, "measured": measured, "predicted": predicted,
            "relative_error": rel, "tolerance": rel_tol, "passed": passed}


def _short(v):
    return "-" if v is None else f"{v:.2e}"


def cmd_example(cfg: RunConfig) -> int:
    A = cfg.observable()
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(cfg.epsilon)
    grid, d = cfg.grid, cfg.delta
    coupling = CouplingConfig(A, d)
    winds = (0, cfg.l) if cfg.l != 0 else (0, 1)
    rows, info = [], []
    a_w = weak_value(A, i, f).value
    a2_w = weak_moment(A, 2, i, f).value
    for wind in winds:
        pointer = PointerSpec.for_winding(wind, cfg.sigma)
        report = simulate(i, coupling, pointer, grid, f)
        if abs(wind) <= 1:
            closed = closed_form_xy(A, None, i, f, wind, d)
            if wind == 0:
                rows.append(_row("xy", wind, report.xy, closed, 0.0, XY_NULL_TOL))
            else:
                rows.append(_row("xy", wind, report.xy, closed, XY_REL_TOL, XY_NULL_TOL))
                info.append({"quantity": "xy_symmetric_form", "l": wind,
                             "value": closed_form_xy(A, None, i, f, wind, d, variant="symmetric"),
                             "note": "l-term sign opposite to the exact evolution"})
        if wind == 0:
            rows.append(_row("x_gaussian", 0, report.x, closed_form_x_gaussian(A, i, f, d),
                             X_REL_TOL, 1e-9))
    est = assemble_weak_value(A, i, f, d, grid, cfg.sigma)
    rows.append(_row("re_weak_value", 0, est.real, a_w.real, EXTRACT_REL_TOL, NULL_ABS_TOL))
    rows.append(_row("im_weak_value", 0, est.imag, a_w.imag, EXTRACT_REL_TOL, NULL_ABS_TOL))
    oam = PointerSpec.for_winding(winds[1], cfg.sigma)
    if abs(oam.l) == 1:
        im2 = extract_im_second_moment(A, i, f, oam, d, grid)
        re2 = extract_re_second_moment(A, i, f, oam, d, grid)
        rows.append(_row("im_second_moment", oam.l, im2.estimated, im2.reference,
                         EXTRACT_REL_TOL, NULL_ABS_TOL))
        rows.append(_row("re_second_moment", oam.l, re2.estimated, re2.reference,
                         EXTRACT_REL_TOL, NULL_ABS_TOL))

    header = ("quantity", "l", "measured", "predicted", "relative_error", "tolerance", "passed")
    out = cfg.out
    _write_csv(out, header, [[r[k] for k in header] for r in rows])
    doc = {"config": _config_doc(cfg), "weak_value": a_w, "second_moment_weak_value": a2_w,
           "checks": rows, "notes": info}
    _write_json(out.with_suffix(".json"), doc)

    print(f"weak value <A>_w      = {a_w.real:+.6f} {a_w.imag:+.6f}i")
    print(f"weak value <A^2>_w    = {a2_w.real:+.6f} {a2_w.imag:+.6f}i")
    print(f"{'quantity':<18}{'l':>3}  {'measured':>14}  {'predicted':>14}  {'rel.err':>9}  ok")
    for r in rows:
        print(f"{r['quantity']:<18}{r['l']:>3}  {r['measured']:>14.6e}  {r['predicted']:>14.6e}"
              f"  {_short(r['relative_error']):>9}  {'yes' if r['passed'] else 'NO'}")
    for note in info:
        print(f"{note['quantity']:<18}{note['l']:>3}  {note['value']:>14.6e}  ({note['note']})")
    return 0 if all(r["passed"] for r in rows) else 1


def _config_doc(cfg: RunConfig) -> dict:
    doc = {k: getattr(cfg, k) for k in ("command", "observable_path", "l", "sigma", "delta",
                                        "epsilon", "grid_n", "grid_extent", "seed")}
    return doc


# verify -------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    results = checks.run_all(cfg.grid, cfg.sigma, cfg.l, cfg.delta, cfg.epsilon, cfg.seed)
    failing = [c.name for c in results if not c.passed]
    doc = {"config": _config_doc(cfg), "passed": not failing, "failing": failing,
           "checks": [c.to_dict() for c in results]}
    _write_json(cfg.out, doc)
    for c in results:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<36} {c.measured:.3e} (tol {c.tolerance:.0e})")
    if failing:
        print("failing invariants: " + ", ".join(failing), file=sys.stderr)
        return 1
    return 0


# sweep --------------------------------------------------------------------

def sweep_values(start, stop, count, spacing):
    if count < 2:
        raise BadAxis("a sweep needs at least two points")
    if spacing == "geometric":
        if start <= 0 or stop <= 0:
            raise BadAxis("geometric spacing needs positive endpoints")
        return list(np.geomspace(start, stop, count))
    return list(np.linspace(start, stop, count))


SWEEP_COLUMNS = ("delta", "epsilon", "l") + MomentReport.CSV_COLUMNS + (
    "closed_xy", "residual_xy", "closed_x_gaussian")


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.axis not in ("delta", "epsilon", "l"):
        raise BadAxis(f"sweep axis must be delta, epsilon or l, got {cfg.axis!r}")
    if cfg.start is None or cfg.stop is None:
        raise BadAxis("--start and --stop are required for a sweep")
    values = sweep_values(cfg.start, cfg.stop, cfg.count, cfg.spacing)
    if cfg.axis == "l":
        if any(abs(v - round(v)) > 1e-9 for v in values):
            raise BadAxis("winding-number sweeps must land on integers")
        values = [int(round(v)) for v in values]
    A = cfg.observable()
    i = scenarios.horizontal()
    rows, points = [], []
    for v in values:
        delta = v if cfg.axis == "delta" else cfg.delta
        eps = v if cfg.axis == "epsilon" else cfg.epsilon
        wind = v if cfg.axis == "l" else cfg.l
        f = scenarios.near_orthogonal(eps)
        report = simulate(i, CouplingConfig(A, delta), PointerSpec.for_winding(wind, cfg.sigma),
                          cfg.grid, f)
        closed = closed_form_xy(A, None, i, f, wind, delta) if abs(wind) <= 1 else None
        residual = report.xy - closed if closed is not None else None
        rows.append([delta, eps, wind, *report.csv_values(), closed, residual,
                     closed_form_x_gaussian(A, i, f, delta)])
        points.append((delta, report.xy, closed))

    trailer = []
    if cfg.axis == "delta" and all(d > 0 for d, _, _ in points) and len(points) >= 3:
        series = [(d, xy) for d, xy, _ in points]
        trailer.append(_fit_line("abs_xy", convergence_report(0.0, series)))
        if all(c is not None for _, _, c in points):
            fit = convergence_report([c for _, _, c in points], series)
            trailer.append(_fit_line("residual_xy", fit))
    _write_csv(cfg.out, SWEEP_COLUMNS, rows, trailer)
    print(f"{'delta':>12} {'epsilon':>12} {'l':>3} {'xy':>14} {'closed_xy':>14}")
    for delta, eps, wind, *rest in rows:
        closed = rest[-3]
        print(f"{delta:>12.5g} {eps:>12.5g} {wind:>3} {rest[3]:>14.6e} "
              f"{'' if closed is None else format(closed, '.6e'):>14}")
    for line in trailer:
        print(line)
    return 0


def _fit_line(name, report):
    if report.exact_agreement:
        return f"{name}_exact_agreement=true"
    return f"slope_{name}={_fmt(report.slope)}"


# converge -----------------------------------------------------------------

def cmd_converge(cfg: RunConfig) -> int:
    """Worked-example moments at n/2, n and 2n points per axis."""
    A = cfg.observable()
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(cfg.epsilon)
    pointer = PointerSpec.for_winding(cfg.l, cfg.sigma)
    sizes = [n for n in (cfg.grid_n // 2, cfg.grid_n, 2 * cfg.grid_n) if n >= 16 and n % 2 == 0]
    reports = {n: simulate(i, CouplingConfig(A, cfg.delta), pointer,
                           GridSpec(n, cfg.grid_extent), f) for n in sizes}
    rows = [[n, *reports[n].csv_values()] for n in sizes]
    base, fine = reports[cfg.grid_n].csv_values(), reports[2 * cfg.grid_n].csv_values()
    change = max(abs(a - b) for a, b in zip(base[1:], fine[1:]))
    _write_csv(cfg.out, ("grid_n",) + MomentReport.CSV_COLUMNS, rows,
               [f"max_change_n_to_2n={_fmt(change)}"])
    print(f"max moment change between n = {cfg.grid_n} and {2 * cfg.grid_n}: {change:.3e}")
    return 0 if change < CONVERGENCE_TOL else 1


# field-dump ---------------------------------------------------------------

def cmd_field_dump(cfg: RunConfig) -> int:
    A = cfg.observable()
    i, f = scenarios.horizontal(), scenarios.near_orthogonal(cfg.epsilon)
    pointer = PointerSpec.for_winding(cfg.l, cfg.sigma)
    phi_f = postselect(evolve(i, CouplingConfig(A, cfg.delta), pointer, cfg.grid), f)
    report = conditioned_moments(phi_f)
    field = phi_f.normalized()
    write_field_csv(field, cfg.out, {"config": _config_doc(cfg), "moments": report.to_dict()})
    print(f"wrote {cfg.out} (p_post = {report.p_post:.6e}, xy = {report.xy:.6e})")
    return 0


HANDLERS = {"example": cmd_example, "verify": cmd_verify, "sweep": cmd_sweep,
            "converge": cmd_converge, "field-dump": cmd_field_dump}


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except (WeakMeasurementError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
