"""Command-line front end (``uptradeoff``).

Exit codes: 0 success, 2 invalid input, 3 a size cap was exceeded,
4 an internal invariant failed.  Errors are reported on stderr as a JSON
object.  ``UPT_THREADS`` bounds the worker threads used by the curve
builders.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fixtures, full, oracle, public
from .config import use_tolerances
from .envelope import (TradeoffCurve, TradeoffPoint, PiecewiseLinear, evaluate_envelope,
                       sanity_band)
from .errors import UptError, ValidationError
from .io import (atomic_write, curve_csv, dumps, joint_to_dict, load_joint,
                 mechanism_to_dict, oracle_report)
from .prob import FULL, PUBLIC, JointPmf, entropy, evaluate_mechanism, mutual_information, random_joint

COMMANDS = ("bound", "mechanism", "curve", "oracle", "reproduce", "random")
REPRODUCIBLE = ("example1", "example3", "cyclic", "bec", "figure4", "figure5", "figure6")


@dataclasses.dataclass
class RunConfig:
    command: str
    model: str = FULL
    method: Optional[str] = None
    input: Optional[str] = None
    seed: Optional[int] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    target: Optional[str] = None
    epsilon_grid: Optional[str] = None
    cap: Optional[int] = None
    limit: Optional[int] = None
    tolerances: dict = dataclasses.field(default_factory=dict)
    out: Optional[str] = None
    format: str = "json"


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _source(cfg: RunConfig) -> JointPmf:
    seeded = cfg.seed is not None
    if bool(cfg.input) == seeded:
        raise ValidationError("give exactly one input source: --input or --seed/--nx/--ny")
    if cfg.input:
        try:
            return load_joint(cfg.input)
        except OSError as exc:
            raise ValidationError(f"cannot read {cfg.input}: {exc.strerror}") from None
    if cfg.nx is None or cfg.ny is None:
        raise ValidationError("--seed needs --nx and --ny")
    return random_joint(cfg.seed, cfg.nx, cfg.ny)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)


def _evaluation(j, m):
    ev = evaluate_mechanism(j, m)
    return {"leakage_bits": ev.leakage_bits, "utility_bits": ev.utility_bits}


def _grid(text: Optional[str], hi: float):
    if not text:
        return None
    text = text.strip()
    if "," not in text and text.isdigit():
        n = int(text)
        if n < 2:
            raise ValidationError("--epsilon-grid count must be at least 2")
        return np.linspace(0.0, hi, n).tolist()
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad --epsilon-grid {text!r}") from None


def _sampled(curve: TradeoffCurve, grid):
    """Replace envelope breakpoints by samples on ``grid``."""
    if grid is None:
        return curve
    lo, hi = curve.envelope.domain
    xs = sorted({min(max(x, lo), hi) for x in grid})
    bps = tuple(TradeoffPoint(x, evaluate_envelope(curve.envelope, x), "grid") for x in xs)
    return dataclasses.replace(curve, envelope=PiecewiseLinear(bps))


def _curve_json(curve: TradeoffCurve) -> dict:
    lower, upper = curve.band
    pts = lambda seq: [[p.leakage, p.utility, p.tag] for p in seq]
    return {"model": curve.model, "method": curve.method, "truncated": curve.truncated,
            "points": pts(curve.points), "envelope": pts(curve.envelope.breakpoints),
            "band_upper": pts(upper.breakpoints), "band_lower": pts(lower.breakpoints),
            "meta": curve.meta}


def _with_rank_band(curve: TradeoffCurve, j: JointPmf) -> TradeoffCurve:
    """Band whose lower chord starts at the rank bound, as in the figures."""
    g0l, big_g0l = public.rank_bounds(j)
    return dataclasses.replace(curve, band=sanity_band(j, big_g0l if curve.model == FULL else g0l))


def _build_curve(j: JointPmf, model: str, method: str, cap, limit) -> TradeoffCurve:
    if model == FULL:
        if method == "exhaustive":
            return full.curve_full_exhaustive(j, cap=cap or 4096)
        if method == "greedy":
            return full.curve_full_greedy(j)
        if method in ("nonalgorithmic", "nonalgorithmic-exhaustive"):
            return full.curve_full_nonalgorithmic(j, "exhaustive", cap=cap or 4096)
        if method == "nonalgorithmic-greedy":
            return full.curve_full_nonalgorithmic(j, "greedy")
    else:
        if method == "exhaustive":
            return public.curve_public_exhaustive(j, cap=cap or 720, limit=limit)
        if method == "greedy":
            return public.curve_public_greedy(j)
    raise ValidationError(f"unknown method {method!r} for the {model} model")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_bound(cfg: RunConfig) -> int:
    j = _source(cfg)
    g0l, big_g0l = public.rank_bounds(j)
    doc = {"model": cfg.model, "I_XY_bits": mutual_information(j), "H_Y_bits": entropy(j.p_y)}
    if cfg.model == FULL:
        doc.update(lower_bound_bits=full.g0_full_lower_bound(j),
                   upper_bound_bits=full.g0_full_upper_bound(j),
                   rank_lower_bound_bits=big_g0l,
                   algorithm_utility_bits=_evaluation(j, full.algorithm1_joint(j))["utility_bits"])
        if j.nx == 2:
            doc["closed_form_bits"] = full.g0_full_closed_binary(j)
        elif (j.nx, j.ny) == (3, 2):
            doc["closed_form_bits"] = full.g0_full_closed_3x2(j)
    else:
        doc["rank_lower_bound_bits"] = g0l
        if j.nx == 2:
            m, trace = public.algorithm3(j)
            doc["algorithm_utility_bits"] = _evaluation(j, m)["utility_bits"]
            doc["formula_bound_bits"] = public.g0_public_formula_bound(trace, j)
    _emit(cfg, dumps(doc))
    return 0


def _perfect_mechanism(j: JointPmf, model: str):
    if model == FULL:
        return full.algorithm1_joint(j)
    if j.nx == 2:
        return public.algorithm3(j)[0]
    plan = public.greedy_plan(j)
    return plan.stages[-1].mechanism if plan.stages else public.identity_mechanism(j)


def cmd_mechanism(cfg: RunConfig) -> int:
    j = _source(cfg)
    if cfg.method == "oracle":
        res = (oracle.exact_g0_full(j, cfg.cap or 10 ** 6) if cfg.model == FULL
               else oracle.exact_g0_public(j, cfg.cap or 2 ** 16))
        m = res.mechanism
    else:
        m = _perfect_mechanism(j, cfg.model)
    doc = mechanism_to_dict(m, j)
    doc["evaluation"] = _evaluation(j, m)
    _emit(cfg, dumps(doc))
    return 0


def cmd_curve(cfg: RunConfig) -> int:
    j = _source(cfg)
    curve = _build_curve(j, cfg.model, cfg.method or "greedy", cfg.cap, cfg.limit)
    curve = _sampled(curve, _grid(cfg.epsilon_grid, mutual_information(j)))
    _emit(cfg, curve_csv(curve) if cfg.format == "csv" else dumps(_curve_json(curve)))
    return 0


def cmd_oracle(cfg: RunConfig) -> int:
    j = _source(cfg)
    res = (oracle.exact_g0_full(j, cfg.cap or 10 ** 6) if cfg.model == FULL
           else oracle.exact_g0_public(j, cfg.cap or 2 ** 16))
    _emit(cfg, dumps(oracle_report(res, j)))
    return 0


def cmd_random(cfg: RunConfig) -> int:
    if cfg.seed is None or cfg.nx is None or cfg.ny is None:
        raise ValidationError("random needs --seed, --nx and --ny")
    _emit(cfg, dumps(joint_to_dict(random_joint(cfg.seed, cfg.nx, cfg.ny))))
    return 0


def _reproduce_example1():
    ch = fixtures.example1_channel()
    m, trace = full.algorithm1(ch)
    links = [{"u": m.u_labels[u], "p_u": float(trace.masses[u]),
              "links": [f"{ch.input_labels[x]}-{ch.output_labels[int(trace.links[u, x])]}"
                        for x in range(3)]} for u in range(m.n_u)]
    j = fixtures.example1_joint()
    return {"example": "example1", "realizations": links,
            "iterations": trace.iterations,
            "mass_beyond_common_set": float(trace.masses[len(trace.common_support_set):].sum()),
            "uniform_p_x": {"evaluation": _evaluation(j, m),
                            "lower_bound_bits": full.g0_full_lower_bound(j),
                            "exact_bits": oracle.exact_g0_full(j).value_bits}}


def _reproduce_example3():
    j = fixtures.example3_joint()
    m, trace = public.algorithm3(j)
    ev = _evaluation(j, m)
    exact = oracle.exact_g0_public(j)
    return {"example": "example3", "mechanism": mechanism_to_dict(m, j),
            "p_u": trace.p_u.tolist(),
            "links": [[j.y_labels[a], j.y_labels[b]] for a, b in trace.links],
            "mix_weights": list(trace.mix_weights), "evaluation": ev,
            "formula_bound_bits": public.g0_public_formula_bound(trace, j),
            "oracle_bits": exact.value_bits,
            "oracle_gap_bits": exact.value_bits - ev["utility_bits"],
            "printed_value_bits": 0.9063}


def _reproduce_cyclic():
    rows = []
    for K in range(3, 7):
        j = fixtures.cyclic_joint(K)
        rows.append({"K": K, "algorithm_bits": _evaluation(j, full.algorithm1_joint(j))["utility_bits"],
                     "exact_bits": oracle.exact_g0_full(j).value_bits,
                     "closed_form_bits": fixtures.cyclic_g0(K)})
    return {"example": "cyclic", "rows": rows}


def _reproduce_bec():
    from .prob import binary_entropy
    rows = []
    for e in (0.1, 0.25, 0.5):
        j = fixtures.bec_joint(e)
        rows.append({"e": e, "H_b_bits": binary_entropy(e),
                     "full": _evaluation(j, full.algorithm1_joint(j)),
                     "public": _evaluation(j, public.algorithm3(j)[0]),
                     "closed_form_bits": full.g0_full_closed_binary(j)})
    return {"example": "bec", "rows": rows}


def _reproduce_figure(name: str, cfg: RunConfig):
    j = fixtures.numerical_joint()
    if name == "figure4":
        curves = {"algorithmic": full.curve_full_exhaustive(j, cap=cfg.cap or 4096),
                  "nonalgorithmic": full.curve_full_nonalgorithmic(j, "exhaustive")}
    elif name == "figure5":
        curves = {"algorithmic": full.curve_full_greedy(j),
                  "nonalgorithmic": full.curve_full_nonalgorithmic(j, "greedy")}
    else:
        curves = {"exhaustive": public.curve_public_exhaustive(
                      j, cap=cfg.cap or math.factorial(j.nx), limit=cfg.limit),
                  "greedy": public.curve_public_greedy(j)}
    out = Path(cfg.out or name)
    summary = {"figure": name, "files": {}}
    grid = _grid(cfg.epsilon_grid, mutual_information(j))
    for fam, c in curves.items():
        c = _sampled(_with_rank_band(c, j), grid)
        path = out / f"{name}_{fam}.csv"
        atomic_write(path, curve_csv(c))
        summary["files"][fam] = str(path)
        summary[fam] = {"points": len(c.points), "envelope_breakpoints": len(c.envelope.breakpoints),
                        "truncated": c.truncated}
    atomic_write(out / f"{name}_summary.json", dumps(summary))
    return summary


def cmd_reproduce(cfg: RunConfig) -> int:
    name = cfg.target
    if name not in REPRODUCIBLE:
        raise ValidationError(f"unknown target {name!r}; choose from {', '.join(REPRODUCIBLE)}")
    if name.startswith("figure"):
        sys.stdout.write(dumps(_reproduce_figure(name, cfg)))
        return 0
    doc = {"example1": _reproduce_example1, "example3": _reproduce_example3,
           "cyclic": _reproduce_cyclic, "bec": _reproduce_bec}[name]()
    _emit(cfg, dumps(doc))
    return 0


HANDLERS = {"bound": cmd_bound, "mechanism": cmd_mechanism, "curve": cmd_curve,
            "oracle": cmd_oracle, "reproduce": cmd_reproduce, "random": cmd_random}


def run(cfg: RunConfig) -> int:
    with use_tolerances(**cfg.tolerances):
        return HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--input", help="joint pmf JSON file")
    src.add_argument("--seed", type=int, help="seed for a random instance")
    src.add_argument("--nx", type=int)
    src.add_argument("--ny", type=int)
    common.add_argument("--model", choices=(FULL, PUBLIC), default=FULL)
    common.add_argument("--method")
    common.add_argument("--epsilon-grid", help="comma list of epsilons, or a point count")
    common.add_argument("--cap", type=int, help="size cap for exhaustive enumeration")
    common.add_argument("--limit", type=int, help="cover only this many orderings")
    common.add_argument("--out", help="output file (directory for figures); stdout if absent")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    for name in ("pmf", "eq", "lp", "num", "pivot"):
        common.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name}")

    p = _Parser(prog="uptradeoff",
                description="Utility-privacy trade-off bounds, mechanisms and curves.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("bound", parents=[common], help="closed-form bounds on G_0 / g_0")
    sub.add_parser("mechanism", parents=[common], help="perfect-privacy mechanism as JSON")
    sub.add_parser("curve", parents=[common], help="achievable points, envelope and band")
    sub.add_parser("oracle", parents=[common], help="exact G_0 / g_0 by vertex LP")
    rp = sub.add_parser("reproduce", parents=[common], help="worked examples and figure data")
    rp.add_argument("target", choices=REPRODUCIBLE)
    sub.add_parser("random", parents=[common], help="write a seeded random joint pmf")
    return p


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    tols = {k[4:]: v for k, v in vars(ns).items() if k.startswith("tol_") and v is not None}
    return RunConfig(command=ns.command, model=ns.model, method=ns.method, input=ns.input,
                     seed=ns.seed, nx=ns.nx, ny=ns.ny, target=getattr(ns, "target", None),
                     epsilon_grid=ns.epsilon_grid, cap=ns.cap, limit=ns.limit,
                     tolerances=tols, out=ns.out, format=ns.format)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(config_from_args(argv))
    except UptError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except OSError as exc:
        err = {"error": "OSError", "message": str(exc), "exit_code": 2}
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
