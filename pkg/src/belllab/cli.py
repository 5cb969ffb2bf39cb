"""Command-line front end.

Exit codes: 0 success, 1 verification failed (report still printed),
2 usage error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import relatedness as rel
from .bellsim import (
    ExperimentConfig,
    correlation_sweep,
    empirical_pmfs,
    enumerate_deterministic_strategies,
    estimate_chsh,
    feasibility_for_pmfs,
    no_signaling_test,
    optimize_angles,
    run_protocol,
)
from .errors import BellLabError, VerificationFailed
from .models import SettingsQuad, StrategyEnsemble, model_pmfs
from .qmath import random_unitary
from .spin import spin_component_operator, verify_eta_spectrum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
DEFAULT_ANGLES = "0,90,45,315"


class UsageError(Exception):
    pass


def _sig9(obj):
    """Round every float to 9 significant digits; non-finite floats become null."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.9g}") if math.isfinite(x) else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _sig9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig9(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_sig9(obj), indent=2, sort_keys=False)


def _default_seed() -> int:
    env = os.environ.get("BELLLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BELLLAB_SEED must be an integer, got {env!r}") from None


def _settings(text: str) -> SettingsQuad:
    try:
        return SettingsQuad.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _model(args):
    embedded = getattr(args, "strategies", None)
    if embedded is not None:
        return StrategyEnsemble.from_json(embedded)
    if args.model != "lhv-table":
        if getattr(args, "strategy_file", None):
            raise UsageError("--strategy-file only applies to --model lhv-table")
        return args.model
    if not args.strategy_file:
        raise UsageError("--model lhv-table needs --strategy-file")
    try:
        with open(args.strategy_file) as fh:
            return StrategyEnsemble.from_json(json.load(fh))
    except OSError as exc:
        raise OSError(f"cannot read strategy file: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad strategy file: {exc}") from None


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    seed = args.seed if args.seed is not None else _default_seed()
    settings = _settings(args.angles)
    model = _model(args)
    config = ExperimentConfig(model=model, settings=settings, rounds=args.rounds, seed=seed)
    log = run_protocol(config, workers=args.workers)

    est = estimate_chsh(log)
    ns = no_signaling_test(log)
    feas = feasibility_for_pmfs(empirical_pmfs(log))
    summary = {
        "model": config.tag,
        "settings_deg": list(settings.as_tuple()),
        "rounds": config.rounds,
        "E": est.E,
        "S": est.S,
        "SE": est.SE,
        "sigma_above_2": est.sigma_above_2,
        "feasible": feas.feasible,
        "max_deterministic_S": enumerate_deterministic_strategies().max_S,
        "no_signaling_p": {"alice": ns.alice_p, "bob": ns.bob_p},
    }
    out = Path(args.out)
    # paths relative to the output directory, so a replay elsewhere yields the same manifest
    outputs = {"trials": "trials.csv", "summary": "summary.json"}
    _write(out / "trials.csv", log.csv_text())
    _write(out / "summary.json", dumps(summary) + "\n")
    if args.sweep:
        if config.tag == "lhv-table":
            raise UsageError("--sweep needs --model qm or lhv-cos")
        thetas = np.linspace(0.0, 180.0, args.sweep)
        rows = correlation_sweep(config.tag, thetas, args.rounds, seed)
        lines = ["theta_deg,E_model,E_empirical"]
        lines += [f"{r['theta_deg']!r},{r['E_model']!r},{r['E_empirical']!r}" for r in rows]
        _write(out / "sweep.csv", "\n".join(lines) + "\n")
        outputs["sweep"] = "sweep.csv"
    manifest = {
        "command": "simulate",
        "version": __version__,
        "seed": seed,
        "config": config.to_json(),
        "options": {"angles": args.angles, "workers": args.workers, "sweep": args.sweep,
                    "strategy_file": args.strategy_file},
        "outputs": outputs,
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(dumps(summary))
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read manifest: {exc}") from exc
    if manifest.get("command") != "simulate":
        raise UsageError("only simulate manifests can be replayed")
    cfg = manifest["config"]
    opts = manifest["options"]
    ns = argparse.Namespace(
        model=cfg["model"], rounds=cfg["rounds"], seed=manifest["seed"], angles=opts["angles"],
        out=args.out, strategy_file=opts.get("strategy_file"), workers=opts.get("workers", 1),
        sweep=opts.get("sweep"), strategies=cfg.get("strategies"),
    )
    return cmd_simulate(ns)


# -- verify -------------------------------------------------------------------

def _verify_spectrum(args) -> tuple[dict, bool]:
    try:
        return verify_eta_spectrum(tol=1e-9), True
    except VerificationFailed as exc:
        return {"pass": False, "error": str(exc), "discrepancy": exc.discrepancy}, False


def _grid_variables(settings: SettingsQuad, m: int = 360) -> list[rel.MaximalVariable]:
    s = settings
    try:
        # Bob's particle carries -phi, i.e. his variable sits at b + 180 deg
        specs = [("A", s.a), ("A'", s.a_prime), ("B", s.b + 180.0), ("B'", s.b_prime + 180.0)]
        return [rel.circle_sign_cos_variable(rel.angle_to_steps(d, m), m, name) for name, d in specs]
    except ValueError as exc:
        raise UsageError(f"relatedness check needs whole-degree angles: {exc}") from None


def _verify_relatedness(args) -> tuple[dict, bool]:
    settings = _settings(args.angles)
    G = rel.TransformationGroup.cyclic(360)
    variables = _grid_variables(settings)
    pairs = []
    for i in range(4):
        for j in range(i + 1, 4):
            g = rel.variables_related_under_group(variables[i], variables[j], G)
            pairs.append({"names": [variables[i].name, variables[j].name],
                          "related": g is not None, "witness": g})
    dirs = {"A": settings.alice(0), "A'": settings.alice(1), "B": settings.bob(0), "B'": settings.bob(1)}
    names = list(dirs)
    op_pairs = []
    for i in range(4):
        for j in range(i + 1, 4):
            pair = rel.OperatorPair(spin_component_operator(dirs[names[i]]), spin_component_operator(dirs[names[j]]))
            W = rel.relating_unitary(pair)
            op_pairs.append({"names": [names[i], names[j]], "related": rel.operators_related(pair),
                             "residual": rel.conjugation_residual(pair.A_theta, pair.A_lambda, W)})
    t1 = rel.theorem1_witness(variables[0], variables[1], variables[2], G)
    ok = all(p["related"] for p in pairs) and all(p["related"] for p in op_pairs) and t1["pass"]
    return {"pairs": pairs, "operator_pairs": op_pairs, "theorem1": t1, "pass": ok}, ok


def _operator_composition_search(trials: int, rng: np.random.Generator) -> dict:
    """Randomized check that composed relating unitaries relate the third pair."""
    worst = 0.0
    bad = 0
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        spectrum = np.sort(rng.normal(size=d))
        ops = [U @ np.diag(spectrum) @ U.conj().T for U in (random_unitary(d, rng) for _ in range(3))]
        W_k = rel.relating_unitary(rel.OperatorPair(ops[0], ops[1]))
        W_s = rel.relating_unitary(rel.OperatorPair(ops[0], ops[2]))
        res = rel.conjugation_residual(ops[1], ops[2], rel.compose_relating_unitaries(W_k, W_s))
        worst = max(worst, res)
        bad += res > rel.RESIDUAL_TOL
    return {"trials": trials, "counterexamples": bad, "max_residual": worst}


def _verify_theorem1(args) -> tuple[dict, bool]:
    rng = np.random.default_rng(args.seed if args.seed is not None else _default_seed())
    variables = rel.theorem1_random_search(args.trials, rng)
    if not variables["counterexamples"]:
        del variables["examples"]
    operators = _operator_composition_search(max(1, args.trials // 5), rng)
    ok = variables["counterexamples"] == 0 and operators["counterexamples"] == 0
    return {"variables": variables, "operators": operators, "counterexamples":
            variables["counterexamples"] + operators["counterexamples"], "pass": ok}, ok


def _verify_theorem2(args) -> tuple[dict, bool]:
    v = rel.theorem2_variables()
    table = [{"point": list(p), "C": int(v["C"].values[k]), "D": int(v["D"].values[k])}
             for k, p in enumerate(rel.HYPERCUBE)]
    groups = {}
    for G in (rel.hypercube_sign_flip_group(), rel.hypercube_signed_permutation_group()):
        base = ["A", "A'", "B", "B'"]
        pair_rel = {f"{x}~{y}": rel.variables_related_under_group(v[x], v[y], G) is not None
                    for i, x in enumerate(base) for y in base[i + 1:]}
        groups[G.name] = {
            "order": len(G),
            "pairs_related": pair_rel,
            "D~A'": rel.variables_related_under_group(v["A'"], v["D"], G) is not None,
        }
    d_plus = int(np.sum(v["D"].values == 1))
    ok = d_plus == 8 and set(v["D"].values.tolist()) == {-1, 1}
    report = {
        "table": table,
        "D_plus_count": d_plus,
        "groups": groups,
        "D_A'_value_multisets_equal": rel.value_multisets_equal(v["A'"], v["D"]),
        "pass": ok,
    }
    return report, ok


VERIFIERS = {
    "spectrum": _verify_spectrum,
    "relatedness": _verify_relatedness,
    "theorem1": _verify_theorem1,
    "theorem2": _verify_theorem2,
}


def cmd_verify(args) -> int:
    report, ok = VERIFIERS[args.target](args)
    print(dumps(report))
    return EXIT_OK if ok else EXIT_FAIL


# -- enumerate / optimize / feasibility --------------------------------------

def cmd_enumerate(args) -> int:
    print(dumps(enumerate_deterministic_strategies().to_json()))
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    res = optimize_angles(args.model, _settings(args.start), tol=args.tol)
    print(dumps({"model": args.model, **res.to_json()}))
    return EXIT_OK


def cmd_feasibility(args) -> int:
    model = _model(args)
    res = feasibility_for_pmfs(model_pmfs(model, _settings(args.angles)))
    print(dumps({"model": args.model, "settings_deg": list(_settings(args.angles).as_tuple()),
                 **res.to_json()}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="belllab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"belllab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the protocol and write trials, summary and manifest")
    s.add_argument("--model", choices=("qm", "lhv-cos", "lhv-table"), required=True)
    s.add_argument("--rounds", type=int, required=True)
    s.add_argument("--seed", type=int, default=None, help="default: $BELLLAB_SEED or 0")
    s.add_argument("--angles", default=DEFAULT_ANGLES, help="a,a',b,b' in degrees")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--strategy-file", default=None, help="JSON list of {table, weight}")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--sweep", type=int, default=None, metavar="K",
                   help="also write sweep.csv with K angles in [0, 180]")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("replay", help="re-run a simulate manifest")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_replay)

    v = sub.add_parser("verify", help="operator and relatedness checks")
    v.add_argument("target", choices=sorted(VERIFIERS))
    v.add_argument("--angles", default=DEFAULT_ANGLES)
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate", help="all 16 deterministic strategies")
    e.set_defaults(func=cmd_enumerate)

    o = sub.add_parser("optimize", help="maximize |S| over the angles")
    o.add_argument("--model", choices=("qm", "lhv-cos"), required=True)
    o.add_argument("--start", default="0,90,40,310")
    o.add_argument("--tol", type=float, default=1e-12)
    o.set_defaults(func=cmd_optimize)

    f = sub.add_parser("feasibility", help="joint-distribution feasibility of a model's pmfs")
    f.add_argument("--model", choices=("qm", "lhv-cos", "lhv-table"), required=True)
    f.add_argument("--angles", default=DEFAULT_ANGLES)
    f.add_argument("--strategy-file", default=None)
    f.set_defaults(func=cmd_feasibility)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"belllab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"belllab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BellLabError as exc:
        print(f"belllab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
