"""Batch experiment runner: ``intrinsic-holder {validate,run,report} --config FILE``.

Exit status is 0 when every assertion passes, 1 when one fails and 2 for
configuration errors (in which case nothing is written).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .errors import ConfigParseError, IntrinsicHolderError
from .functions import abs_power, bump, smooth_product, time_power
from .group import BlockStructure, HomogeneousGroup, build_group
from .holder import SamplingPlan, holder_norm
from .interp import (curve_shape_defects, increment_diagnostics,
                     interpolation_inequality_check, k_functional_curve, rate_fit)
from .mollify import (BumpProfile, MollifiedFunction, QuadratureSpec, build_mollifier,
                      normalization_integral)
from .oracle import CombinationOracle, DerivativeOracle, FunctionOracle
from .poly import PolyFunction

SUITES = ("group-axioms", "taylor-identities", "approx-rates", "k-functional", "interpolation-inequality")
PROFILES = ("polynomial", "bump", "abs_power", "time_power", "smooth_product")
SUMMARY = "summary.json"


# ----- configuration -------------------------------------------------------------

@dataclass
class CorpusItem:
    id: str
    function: object
    order: int
    n: int | None = None
    alpha: float | None = None
    spec: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    suite: str
    seed: int
    structure: BlockStructure
    group: HomogeneousGroup
    corpus: list
    sampling: dict
    quadrature: dict
    mollifier: dict
    params: dict
    out: Path | None
    threads: int = 1
    raw: dict = field(default_factory=dict)

    def plan(self) -> SamplingPlan:
        return build_plan(self.sampling, self.group, self.seed)


def _need(cfg: dict, key: str, where: str):
    if not isinstance(cfg, dict) or key not in cfg:
        raise ConfigParseError(f"{where} needs '{key}'")
    return cfg[key]


def build_plan(sampling: dict, group: HomogeneousGroup, seed: int) -> SamplingPlan:
    cfg = dict(sampling)
    box = cfg.get("base_box") or [[-1.0, 1.0]] * (group.d + 1)
    if len(box) != group.d + 1:
        raise ConfigParseError(f"sampling.base_box needs {group.d + 1} intervals")
    anchors = cfg.get("anchors", [])
    if isinstance(anchors, dict):
        anchors = _anchor_ladder(anchors, group.d)
    return SamplingPlan.from_dict({**cfg, "base_box": box, "anchors": anchors, "seed": seed})


def _anchor_ladder(spec: dict, d: int) -> list:
    """Points on a coordinate axis at ``0`` and ``+-max * 2^{-k/per_octave}`` down to ``min``."""
    coord = int(spec.get("coord", 0))
    hi, lo = float(spec.get("max", 0.25)), float(spec.get("min", 1e-6))
    per = int(spec.get("per_octave", 4))
    if not 0 <= coord < d or not 0 < lo < hi or per < 1:
        raise ConfigParseError(f"bad anchor ladder {spec}")
    count = int(np.floor(per * np.log2(hi / lo))) + 1
    rows = [[0.0] * (d + 1)]
    for k in range(count):
        v = hi * 2.0 ** (-k / per)
        for sign in (1.0, -1.0):
            row = [0.0] * (d + 1)
            row[coord + 1] = sign * v
            rows.append(row)
    return rows


def build_function(item: dict, d: int):
    profile = _need(item, "profile", "corpus entry")
    radius = item.get("radius", 2.0)
    if profile == "polynomial":
        return PolyFunction.from_terms(_need(item, "terms", "polynomial entry"), d), 64
    if profile == "bump":
        return bump(d, radius), 8
    if profile == "abs_power":
        power = float(_need(item, "power", "abs_power entry"))
        return abs_power(d, power, int(item.get("coord", 0)), radius), int(np.floor(power))
    if profile == "time_power":
        power = float(_need(item, "power", "time_power entry"))
        return time_power(d, power, radius), 2 * int(np.floor(power))
    if profile == "smooth_product":
        return smooth_product(d, str(_need(item, "factor", "smooth_product entry")), radius), 8
    raise ConfigParseError(f"unknown profile {profile!r}; choose from {PROFILES}")


def load_config(path, seed: int | None = None, out: str | None = None, threads: int = 1) -> ExperimentConfig:
    """Parse and fully validate a config file; raises :class:`ConfigParseError`."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw, seed=seed, out=out, threads=threads)


def parse_config(raw: dict, seed: int | None = None, out: str | None = None, threads: int = 1) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigParseError("config must be a JSON object")
    suite = _need(raw, "suite", "config")
    if suite not in SUITES:
        raise ConfigParseError(f"unknown suite {suite!r}; choose from {SUITES}")
    seed = raw.get("seed") if seed is None else seed
    if seed is None or isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigParseError("a nonnegative integer 'seed' is mandatory (config or --seed)")
    if not isinstance(threads, int) or threads < 1:
        raise ConfigParseError("--threads must be a positive integer")
    try:
        structure = BlockStructure.from_config(_need(raw, "group", "config"))
        group = build_group(structure)
        corpus = []
        for j, item in enumerate(raw.get("corpus", [])):
            f, order = build_function(item, group.d)
            corpus.append(CorpusItem(str(item.get("id", f"f{j}")), f, int(item.get("order", order)),
                                     item.get("n"), item.get("alpha"), dict(item)))
        cfg = ExperimentConfig(
            suite=suite, seed=int(seed), structure=structure, group=group, corpus=corpus,
            sampling=dict(raw.get("sampling", {})), quadrature=dict(raw.get("quadrature", {})),
            mollifier=dict(raw.get("mollifier", {})), params=dict(raw.get("params", {})),
            out=Path(out) if out else (Path(raw["output"]["dir"]) if "output" in raw else None),
            threads=threads, raw=raw,
        )
        cfg.plan()
        _quadrature(cfg)
        _profile(cfg)
        budget = cfg.mollifier.get("budget")
        if budget is not None and (len(budget) != group.d + 1 or min(budget) <= 0):
            raise ConfigParseError(f"mollifier.budget needs {group.d + 1} positive weights")
    except ConfigParseError:
        raise
    except (IntrinsicHolderError, ValueError, TypeError, KeyError) as exc:
        raise ConfigParseError(f"invalid config: {exc}") from exc
    if suite in ("approx-rates", "k-functional"):
        for item in corpus:
            if item.n is None or item.alpha is None:
                raise ConfigParseError(f"corpus entry {item.id!r} needs 'n' and 'alpha' for {suite}")
    if suite in ("approx-rates", "k-functional", "interpolation-inequality") and not corpus:
        raise ConfigParseError(f"suite {suite} needs a nonempty corpus")
    return cfg


def _quadrature(cfg: ExperimentConfig) -> QuadratureSpec:
    if not cfg.quadrature:
        return QuadratureSpec.default_for(cfg.group)
    return QuadratureSpec.from_dict(cfg.quadrature)


def _profile(cfg: ExperimentConfig) -> BumpProfile:
    m = cfg.mollifier
    return BumpProfile(m.get("profile", "poly"), int(m.get("power", 8)))


# ----- results -------------------------------------------------------------------

class Results:
    def __init__(self):
        self.assertions = []
        self.files = {}

    def check(self, name: str, value, tolerance, passed: bool, invariant: str):
        self.assertions.append({"name": name, "value": _clean(value), "tolerance": _clean(tolerance),
                                "passed": bool(passed), "invariant": invariant})

    def table(self, name: str, header: list, rows: list):
        self.files[name] = (header, rows)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


# ----- suites --------------------------------------------------------------------

def suite_group_axioms(cfg: ExperimentConfig, res: Results):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    g = cfg.group
    tol = float(p.get("tolerance", 1e-10))
    axioms = checks.group_axiom_errors(g, rng, int(p.get("n_triples", 10_000)))
    for k, v in axioms.items():
        res.check(k, v, tol, v < tol, f"group axiom: {k}")
    integer = all(np.array_equal(b, np.round(b)) for b in cfg.structure.blocks)
    nil = checks.nilpotency_residual(g)
    res.check("nilpotency", nil, 0.0 if integer else tol, nil == 0 if integer else nil < tol,
              "B^(r+1) = 0" + (" exactly" if integer else ""))
    det = checks.determinant_error(g, rng, int(p.get("n_det", 1000)), float(p.get("delta_max", 10.0)))
    res.check("determinant", det, tol, det < tol, "det exp(delta B) = 1")
    lay = checks.layerwise_flow_error(g, rng, int(p.get("n_layerwise", 1000)))
    res.check("layerwise_flow", lay, tol, lay < tol, "layerwise exponential matches the series")
    lem = checks.flow_identity_errors(g, rng, int(p.get("n_flow", 10_000)))
    for k, v in lem.items():
        res.check(k, v, tol, v < tol, f"flow identity: {k}")
    rtol = float(p.get("norm_rtol", 1e-12))
    hom = checks.quasi_norm_homogeneity_error(g, rng, int(p.get("n_norm", 10_000)))
    res.check("quasi_norm_homogeneity", hom, rtol, hom < rtol, "||D_lam z|| = lam ||z|| (relative)")
    if checks.is_langevin(g):
        inc = checks.langevin_increment_error(g, rng, int(p.get("n_norm", 10_000)))
        res.check("langevin_increment", inc, 1e-12, inc < 1e-12, "Langevin increment formula")
    rows = [[a["name"], a["value"], a["tolerance"], a["passed"]] for a in res.assertions]
    res.table("group-axioms.csv", ["check", "max_error", "tolerance", "passed"], rows)


def suite_taylor_identities(cfg: ExperimentConfig, res: Results):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    g = cfg.group
    tol = float(p.get("tolerance", 1e-9))
    max_order = int(p.get("max_order", 6))
    per_order = checks.exchange_discrepancy(g, rng, int(p.get("n_polys", 102)), max_order)
    res.table("exchange.csv", ["order", "max_discrepancy"], [[n, v] for n, v in per_order.items()])
    worst = max(per_order.values())
    res.check("exchange_identities", worst, tol, worst < tol, "d_i T_n = T_(n-1) d_i and Y T_n = T_(n-2) Y")
    rep = checks.reproduction_error(g, rng, int(p.get("n_reproduction", 30)), max_order)
    res.check("polynomial_reproduction", rep, 0.0, rep == 0.0, "T_n p = p for deg p <= n")
    n = int(p.get("remainder_order", 1))
    bounds = p.get("remainder_bounds", {})
    rows = []
    for item in cfg.corpus:
        if item.order < n + 1:
            continue
        w = checks.remainder_witness(g, DerivativeOracle(g, n, function=item.function), n, rng,
                                     int(p.get("n_pairs", 10_000)))
        rows.append([item.id, n, w["witness"], w["pairs"], w["at_norm"]])
        ok = np.isfinite(w["witness"])
        limit = bounds.get(item.id)
        if limit is not None:
            ok = ok and w["witness"] <= float(limit)
        res.check(f"remainder_{item.id}", w["witness"], limit if limit is not None else "finite", ok,
                  "|u - T_n u| / ||zeta^-1 z||^(n+1) bounded")
    res.table("remainder.csv", ["id", "n", "witness", "pairs", "argmax_norm"], rows)


def _mollifier(cfg: ExperimentConfig):
    quad = _quadrature(cfg)
    return build_mollifier(cfg.group, quad, _profile(cfg), cfg.mollifier.get("budget")), quad


def suite_approx_rates(cfg: ExperimentConfig, res: Results):
    p = cfg.params
    g = cfg.group
    phi, quad = _mollifier(cfg)
    plan = cfg.plan()
    rng = np.random.default_rng(cfg.seed)
    norm_tol = float(p.get("normalization_tol", 1e-6))
    nrows = []
    worst = 0.0
    for eps in p.get("normalization_eps", [1.0, 0.5, 0.25]):
        for _ in range(int(p.get("normalization_points", 4))):
            z = g.random_points(rng, 1, 1.0)[0]
            val = normalization_integral(g, phi, float(eps), z)
            worst = max(worst, abs(val - 1))
            nrows.append([float(eps), float(z.t)] + [float(v) for v in z.x] + [val])
    res.table("normalization.csv", ["eps", "t"] + [f"x{i + 1}" for i in range(g.d)] + ["integral"], nrows)
    res.check("mollifier_normalization", worst, norm_tol, worst < norm_tol, "transformed-variable integral = 1")
    eps_grid = [float(e) for e in p.get("eps_grid", [2.0 ** -k for k in range(2, 8)])]
    slope_tol = float(p.get("slope_tol", 0.1))
    smooth_tol = float(p.get("smooth_slope_tol", 0.15))
    for item in cfg.corpus:
        n, alpha = int(item.n), float(item.alpha)
        oracle = DerivativeOracle(g, max(n, item.order), function=item.function)
        rows = []
        for eps in eps_grid:
            ue = MollifiedFunction(g, oracle, n, eps, phi, quad)
            row = [eps]
            for l in range(n + 1):
                row.append(holder_norm(g, CombinationOracle(g, [(1.0, oracle), (-1.0, ue)], l), l, 0.0, plan,
                                       threads=cfg.threads))
            row.append(holder_norm(g, FunctionOracle(g, ue, n + 1), n + 1, 0.0, plan, threads=cfg.threads))
            rows.append(row)
        header = ["eps"] + [f"error_C{l}" for l in range(n + 1)] + [f"smooth_C{n + 1}"]
        res.table(f"approx-rates-{item.id}.csv", header, rows)
        for l in range(n + 1):
            fit = rate_fit([(r[0], r[1 + l]) for r in rows])
            want = n + alpha - l
            res.check(f"{item.id}_error_slope_C{l}", fit.slope, [want, slope_tol],
                      abs(fit.slope - want) <= slope_tol, f"||u - u_eps||_C{l} ~ eps^{want}")
        fit = rate_fit([(r[0], r[-1]) for r in rows])
        res.check(f"{item.id}_smooth_slope_C{n + 1}", fit.slope, [alpha - 1, smooth_tol],
                  abs(fit.slope - (alpha - 1)) <= smooth_tol, f"||u_eps||_C{n + 1} ~ eps^{alpha - 1}")


def _grid(spec, default):
    if spec is None:
        spec = default
    if isinstance(spec, dict):
        return list(np.logspace(np.log10(spec["min"]), np.log10(spec["max"]), int(spec["count"])))
    return [float(v) for v in spec]


def suite_k_functional(cfg: ExperimentConfig, res: Results):
    p = cfg.params
    g = cfg.group
    phi, quad = _mollifier(cfg)
    plan = cfg.plan()
    lams = _grid(p.get("lambda_grid"), {"min": 1e-3, "max": 10.0, "count": 25})
    eps_grid = _grid(p.get("eps_grid"), [2.0 ** -k for k in range(0, 15)])
    lo, hi = p.get("fit_range", [1e-3, 1e-1])
    slope_tol = float(p.get("slope_tol", 0.1))
    bound = float(p.get("scaled_bound", 10.0))
    shape_tol = float(p.get("shape_tol", 1e-9))
    slack = float(p.get("increment_slack", 1.0))
    for item in cfg.corpus:
        n, alpha = int(item.n), float(item.alpha)
        oracle = DerivativeOracle(g, max(n, item.order), function=item.function)
        curve = k_functional_curve(g, oracle, lams, (n, n + 1), eps_grid, plan, phi=phi, quad=quad,
                                   threads=cfg.threads)
        res.table(f"k-functional-{item.id}.csv", ["lambda", "K_hat", "choice", "scaled"], curve.rows(alpha))
        res.table(f"k-norms-{item.id}.csv", ["eps", "rough_norm", "smooth_norm"],
                  [[e, a, b] for e, a, b in zip(curve.eps_grid, curve.rough_norms, curve.smooth_norms)])
        scaled = curve.values / np.asarray(curve.lambdas) ** alpha
        res.check(f"{item.id}_scaled_bounded", float(np.max(scaled)), bound, float(np.max(scaled)) <= bound,
                  "sup lambda^-alpha K_hat bounded")
        mask = (curve.lambdas >= lo * (1 - 1e-12)) & (curve.lambdas <= hi * (1 + 1e-12))
        fit = rate_fit(list(zip(curve.lambdas[mask], curve.values[mask])))
        res.check(f"{item.id}_k_slope", fit.slope, [alpha, slope_tol], abs(fit.slope - alpha) <= slope_tol,
                  f"K_hat ~ lambda^{alpha} on [{lo}, {hi}]")
        defects = curve_shape_defects(curve)
        for k, v in defects.items():
            res.check(f"{item.id}_{k}", v, shape_tol, v <= shape_tol, f"K_hat {k}")
        if n == 0:
            diag = increment_diagnostics(g, item.function, curve, plan, threads=cfg.threads)
            for k, v in diag.items():
                res.check(f"{item.id}_increment_{k}", v, slack, v <= slack, "increment <= 2 K_hat (slack)")


def suite_interpolation_inequality(cfg: ExperimentConfig, res: Results):
    p = cfg.params
    g = cfg.group
    n1, n, n2 = (int(v) for v in p.get("orders", [0, 1, 2]))
    plan = cfg.plan()
    oracles = [DerivativeOracle(g, max(n2, item.order), function=item.function) for item in cfg.corpus]
    base = interpolation_inequality_check(g, oracles, n1, n, n2, plan, threads=cfg.threads)
    finer = interpolation_inequality_check(g, oracles, n1, n, n2, plan.refined(2), threads=cfg.threads)
    c = float(p.get("scale", 4.0))
    scaled_oracles = [DerivativeOracle(g, o.order, function=item.function * c)
                      for o, item in zip(oracles, cfg.corpus)]
    scaled = interpolation_inequality_check(g, scaled_oracles, n1, n, n2, plan, threads=cfg.threads)
    rows = [[item.id, r0, r1, r2] + nm for item, r0, r1, r2, nm in
            zip(cfg.corpus, base.ratios, finer.ratios, scaled.ratios, base.norms)]
    res.table("interpolation-inequality.csv",
              ["id", "ratio", "ratio_refined", "ratio_scaled", f"norm_C{n1}", f"norm_C{n}", f"norm_C{n2}"], rows)
    tol = float(p.get("stability_tol", 0.10))
    change = abs(finer.witness_constant / base.witness_constant - 1)
    res.check("witness_constant", base.witness_constant, "finite", bool(np.isfinite(base.witness_constant)),
              "multiplicative interpolation inequality")
    res.check("witness_stability", change, tol, change <= tol, "witness constant stable under refinement")
    diff = max(abs(a / b - 1) for a, b in zip(scaled.ratios, base.ratios))
    res.check("scaling_invariance", diff, float(p.get("scaling_tol", 1e-12)), diff <= float(p.get("scaling_tol", 1e-12)),
              "ratio invariant under u -> c u")


RUNNERS = {
    "group-axioms": suite_group_axioms,
    "taylor-identities": suite_taylor_identities,
    "approx-rates": suite_approx_rates,
    "k-functional": suite_k_functional,
    "interpolation-inequality": suite_interpolation_inequality,
}


def run(cfg: ExperimentConfig, out: Path) -> Results:
    """Execute the configured suite and write ``summary.json`` plus CSV tables into ``out``."""
    res = Results()
    RUNNERS[cfg.suite](cfg, res)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in res.files.items():
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    summary = {
        "suite": cfg.suite,
        "seed": cfg.seed,
        "group": cfg.structure.to_config(),
        "passed": res.passed,
        "assertions": res.assertions,
        "artifacts": sorted(res.files),
    }
    (out / SUMMARY).write_text(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")
    return res


# ----- command line --------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="intrinsic-holder", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("validate", "check a config without running it"),
                        ("run", "run the configured suite"),
                        ("report", "print the verdicts stored in an output directory")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=name != "report")
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, default=1)
    return ap


def _report(out: Path) -> int:
    path = out / SUMMARY
    try:
        summary = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return 2
    for a in summary["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}: value={a['value']} tolerance={a['tolerance']}"
              f"  ({a['invariant']})")
    print(f"suite {summary['suite']}: {'passed' if summary['passed'] else 'FAILED'}")
    return 0 if summary["passed"] else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "report":
        if not args.out and not args.config:
            print("error: report needs --out (or --config with an output dir)", file=sys.stderr)
            return 2
        if args.out:
            return _report(Path(args.out))
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out, threads=args.threads)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"config ok: suite={cfg.suite} d={cfg.group.d} corpus={len(cfg.corpus)}")
        return 0
    if cfg.out is None:
        print("error: no output directory (use --out or output.dir)", file=sys.stderr)
        return 2
    if args.command == "report":
        return _report(cfg.out)
    try:
        res = run(cfg, cfg.out)
    except IntrinsicHolderError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for a in res.assertions:
        if not a["passed"]:
            print(f"FAIL {a['name']}: measured {a['value']} against {a['tolerance']} ({a['invariant']})",
                  file=sys.stderr)
    print(f"suite {cfg.suite}: {'passed' if res.passed else 'FAILED'} -> {cfg.out / SUMMARY}")
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
