"""Acceptance criteria 1-12, one verdict line each.

Every suite is run through the command-line entry point on the shipped
configs; the verdict lines are printed at the end of the pytest session (and
by running this file directly).
"""
import json
import sys
from pathlib import Path

import numpy as np
import pytest

from intrinsic_holder import (DegenerateAlpha, InterpolationQuery, build_mollifier, langevin, theta_alpha_map)
from intrinsic_holder.cli import main
from intrinsic_holder.mollify import normalization_integral

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
VERDICTS: dict = {}

CRITERIA = {
    1: ("group axioms", [("langevin-group-axioms", ("associativity", "identity", "inverse")),
                         ("r2-group-axioms", ("associativity", "identity", "inverse"))]),
    2: ("structure facts", [("langevin-group-axioms", ("nilpotency", "determinant")),
                            ("r2-group-axioms", ("nilpotency", "determinant"))]),
    3: ("flow identities and left invariance", [("langevin-group-axioms", ("dilation_flow", "left_invariance")),
                                                ("r2-group-axioms", ("dilation_flow", "left_invariance"))]),
    4: ("quasi-norm homogeneity and Langevin increment",
        [("langevin-group-axioms", ("quasi_norm_homogeneity", "langevin_increment")),
         ("r2-group-axioms", ("quasi_norm_homogeneity",))]),
    5: ("exchange identities", [("langevin-taylor", ("exchange_identities",)),
                                ("r2-taylor", ("exchange_identities",))]),
    6: ("Taylor reproduction and remainder", [("langevin-taylor", ("polynomial_reproduction", "remainder_")),
                                              ("r2-taylor", ("polynomial_reproduction", "remainder_"))]),
    8: ("approximation rates", [("langevin-approx-rates", ("",))]),
    9: ("K-functional scaling", [("langevin-k-functional", ("scaled_bounded", "k_slope"))]),
    10: ("interpolation inequality", [("langevin-interpolation", ("witness_stability", "scaling_invariance"))]),
}


@pytest.fixture(scope="module")
def summaries(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    names = {name for _, runs in CRITERIA.values() for name, _ in runs}
    out = {}
    for name in sorted(names):
        main(["run", "--config", str(CONFIGS / f"{name}.json"), "--out", str(root / name)])
        out[name] = json.loads((root / name / "summary.json").read_text())
    return out


def _record(number: int, title: str, passed: bool, detail: str):
    VERDICTS[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    assert passed, VERDICTS[number]


def _matching(summary: dict, prefixes) -> list:
    return [a for a in summary["assertions"] if any(p in a["name"] for p in prefixes)]


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_suite_criterion(number, summaries):
    title, runs = CRITERIA[number]
    picked = []
    for name, prefixes in runs:
        found = _matching(summaries[name], prefixes)
        assert found, f"{name} has no assertions matching {prefixes}"
        picked += [(name, a) for a in found]
    failed = [f"{n}:{a['name']}={a['value']}" for n, a in picked if not a["passed"]]
    worst = "; ".join(failed) if failed else f"{len(picked)} assertions, e.g. " + ", ".join(
        f"{a['name']}={a['value']:.3g}" if isinstance(a["value"], float) else f"{a['name']}={a['value']}"
        for _, a in picked[:3])
    _record(number, title, not failed, worst)


def test_criterion_7_normalization():
    g = langevin()
    phi = build_mollifier(g)
    rng = np.random.default_rng(7)
    errs = []
    for eps in (1.0, 0.5, 0.25):
        for _ in range(5):
            z = g.random_points(rng, 1, 2.0)
            errs.append(abs(normalization_integral(g, phi, eps, z) - 1.0))
    worst = max(errs)
    _record(7, "mollifier normalization", worst < 1e-6, f"max |integral - 1| = {worst:.2e} over 15 (eps, z)")


def test_criterion_11_theta_alpha_map():
    ok = True
    for n in range(4):
        for alpha in (0.125, 0.25, 0.5, 0.75, 0.9):
            ok &= theta_alpha_map(InterpolationQuery(n, 0.0, n + 1, 0.0, alpha)) == (n, alpha)
    ok &= theta_alpha_map(InterpolationQuery(0, 0, 2, 0, 0.75)) == (1, 0.5)
    raised = 0
    for q in [(0, 0, 2, 0, 0.5), (0, 0.5, 1, 0.5, 0.5), (1, 0, 3, 0, 0.5)]:
        try:
            theta_alpha_map(InterpolationQuery(*q))
        except DegenerateAlpha:
            raised += 1
    _record(11, "theta_alpha_map", ok and raised == 3, f"endpoint identities exact, DegenerateAlpha {raised}/3")


def test_criterion_12_determinism(tmp_path):
    blobs = {}
    for name in ("langevin-group-axioms", "langevin-taylor"):
        runs = []
        for k in range(2):
            out = tmp_path / f"{name}-{k}"
            main(["run", "--config", str(CONFIGS / f"{name}.json"), "--out", str(out)])
            runs.append((out / "summary.json").read_bytes())
        blobs[name] = runs[0] == runs[1]
    _record(12, "determinism", all(blobs.values()),
            ", ".join(f"{n} {'identical' if same else 'DIFFERENT'}" for n, same in blobs.items()))


def verdict_lines() -> list:
    return [VERDICTS.get(n, f"criterion {n:2d} FAIL  not evaluated") for n in range(1, 13)]


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:terminal"] if "--quiet" in sys.argv else [__file__, "-q"])
    sys.exit(code)
