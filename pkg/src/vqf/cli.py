"""Command line experiment runner.

    vqf encode 91 [--prior] [--no-preprocess] [--out DIR]
    vqf optimize 91 --ansatz cx --ansatz qaoa --layers 1:5 --restarts 100 --out DIR
    vqf resources 25 49 91 247 --out DIR
    vqf manifold 25 49 91 247 --out DIR

Exit status: 0 success, 1 usage or configuration error, 2 infeasible instance.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

from .analysis import build_manifold, manifold_energy_stats
from .encoding import build_clauses, build_instance
from .errors import AlreadySolved, ConfigError, InfeasibleInstance
from .hamiltonian import dense_table, grad_variance, haar_mean, haar_variance, quantize, write_dense
from .optimizer import BFGSConfig, multistart
from .preprocess import reduce
from .resources import REGIMES, estimate, extrapolate_qubits, qubit_counts, true_factors
from .simulator import CX, KINDS, QAOA, T, build_cx_ansatz, build_qaoa_ansatz, build_t_ansatz
from .validation import check_positive_int, check_target, parse_layer_policy, resolve_layers

CONFIG_VERSION = 1
EXTRAPOLATION_TARGET = 2048


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class ExperimentConfig:
    m: list = field(default_factory=list)
    ansatz: list = field(default_factory=lambda: [CX])
    layers: list = field(default_factory=lambda: ["n"])
    restarts: int = 100
    seed: int = 0
    jobs: int = 1
    out: str = "results"
    prior: bool = False
    preprocess: bool = True
    bfgs: BFGSConfig = field(default_factory=BFGSConfig)


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}
_BFGS_KEYS = {"grad_tol": float, "max_iters": int, "wolfe_c1": float, "wolfe_c2": float,
              "max_line_search_steps": int}


def _split_list(text: str) -> list:
    return [t for t in (s.strip() for s in text.replace(" ", ",").split(",")) if t]


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; ``version`` is required."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val
    version = values.pop("version", None)
    if version is None:
        raise ConfigError(f"{path}: missing version key")
    if version != str(CONFIG_VERSION):
        raise ConfigError(f"{path}: unsupported config version {version}")
    return values


def _apply(cfg: ExperimentConfig, values: dict) -> ExperimentConfig:
    bfgs = {}
    for key, val in values.items():
        try:
            if key == "m":
                cfg.m = [check_target(int(x)) for x in _split_list(val)]
            elif key == "ansatz":
                cfg.ansatz = [_kind(x) for x in _split_list(val)]
            elif key == "layers":
                cfg.layers = parse_layer_policy(val)
            elif key in ("restarts", "jobs"):
                setattr(cfg, key, check_positive_int(key, int(val)))
            elif key == "seed":
                cfg.seed = check_positive_int(key, int(val), minimum=0)
            elif key == "out":
                cfg.out = val
            elif key in ("prior", "preprocess"):
                setattr(cfg, key, _BOOL[val.lower()])
            elif key in _BFGS_KEYS:
                bfgs[key] = _BFGS_KEYS[key](val)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except (ValueError, KeyError, TypeError) as exc:
            if isinstance(exc, InfeasibleInstance):
                raise
            raise ConfigError(f"bad value for {key!r}: {val!r} ({exc})") from exc
    if bfgs:
        try:
            cfg.bfgs = BFGSConfig(**{**cfg.bfgs.__dict__, **bfgs})
        except ValueError as exc:
            raise ConfigError(f"bad BFGS settings: {exc}") from exc
    return cfg


def _kind(text: str) -> str:
    k = text.strip().lower()
    if k not in KINDS:
        raise ConfigError(f"unknown ansatz {text!r}; choose from {', '.join(KINDS)}")
    return k


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_dat(path: str, header: list, rows: list) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def _prior_bits(m: int):
    p, q = true_factors(m)
    return p.bit_length(), q.bit_length()


def _reduced(m: int, prior: bool, preprocess: bool):
    inst = build_instance(m, _prior_bits(m) if prior else None, preprocess)
    return reduce(build_clauses(inst))


def _regime(prior: bool, preprocess: bool) -> str:
    return ("pre" if preprocess else "no_pre") + ("_prior" if prior else "_no_prior")


# ---------------------------------------------------------------- commands

def cmd_encode(args) -> int:
    m = check_target(args.m)
    preprocess = not args.no_preprocess
    reduced = _reduced(m, args.prior, preprocess)
    original = build_clauses(build_instance(m, _prior_bits(m) if args.prior else None, preprocess))
    doc = {"system": reduced.to_dict(),
           "report": {"m": m, "regime": _regime(args.prior, preprocess),
                      "n": reduced.qubit_count, "original_variables": len(original.variables),
                      "n_p": reduced.instance.n_p, "n_q": reduced.instance.n_q}}
    H = None
    try:
        H = quantize(reduced)
        doc["hamiltonian"] = H.to_dict()
    except AlreadySolved as done:
        doc["report"]["solved_factors"] = list(done.factors)
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"encode_{m}.json"), "w") as fh:
            fh.write(text + "\n")
        if H is not None:
            write_dense(os.path.join(args.out, f"energies_{m}.bin"), dense_table(H))
    else:
        print(text)
    print(f"m={m} regime={doc['report']['regime']} n={reduced.qubit_count}", file=sys.stderr)
    return 0


def _circuits(H, kinds, layers):
    for kind in kinds:
        for policy in layers:
            L = resolve_layers(policy, H.n)
            if kind == QAOA:
                if L < 1:
                    continue
                yield kind, L, build_qaoa_ansatz(H, L)
            elif kind == CX:
                yield kind, L, build_cx_ansatz(H.n, L)
            else:
                yield kind, L, build_t_ansatz(H.n, L)


def cmd_optimize(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.m:
        raise UsageError("no targets given")
    os.makedirs(cfg.out, exist_ok=True)
    runs, stats_rows = [], []
    for m in cfg.m:
        reduced = _reduced(m, cfg.prior, cfg.preprocess)
        try:
            H = quantize(reduced)
        except AlreadySolved as done:
            print(f"m={m}: solved by preprocessing as {done.factors}; nothing to optimize", file=sys.stderr)
            continue
        for kind, L, circuit in _circuits(H, cfg.ansatz, cfg.layers):
            st = multistart(circuit, H, cfg.restarts, cfg.seed, cfg.bfgs, jobs=cfg.jobs)
            for r in st.records:
                runs.append([m, kind, L, r.seed, r.final_energy, r.gradient_evals, r.converged])
            stats_rows.append([m, kind, L, st.mean, st.q05, st.q95, st.mean_grad_evals])
            print(f"m={m} {kind} L={L}: mean={st.mean:.4f} q05={st.q05:.4f} q95={st.q95:.4f} "
                  f"grads={st.mean_grad_evals:.1f}", file=sys.stderr)
    _write_csv(os.path.join(cfg.out, "runs.csv"),
               ["m", "kind", "L", "seed", "final_energy", "gradient_evals", "converged"], runs)
    _write_csv(os.path.join(cfg.out, "stats.csv"),
               ["m", "kind", "L", "mean", "q05", "q95", "mean_grad_evals"], stats_rows)
    return 0


def cmd_resources(args) -> int:
    ms = _targets(args)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    qrows, qdat, rrows, hdat, points = [], [], [], [], []
    for m in ms:
        counts = qubit_counts(m)
        n_m = m.bit_length()
        for regime, n in zip(REGIMES, counts):
            qrows.append([m, n_m, regime, n])
        qdat.append([m, n_m, *counts])
        points.append((n_m, counts.pre_no_prior))
        H = quantize(_reduced(m, False, True))
        est = estimate(H, m)
        rrows.append([m, n_m, H.n, est.L, est.epsilon, est.shots_per_gradient, est.gates_per_gradient,
                      est.trial_division_bound, est.sqrt_m])
        hdat.append([m, H.n, haar_mean(H), haar_variance(H), grad_variance(H)])
    _write_csv(os.path.join(out, "qubits.csv"), ["m", "n_m", "regime", "n"], qrows)
    _write_csv(os.path.join(out, "resources.csv"),
               ["m", "n_m", "n", "L", "epsilon", "shots", "gates", "trial_bound", "sqrt_m"], rrows)
    _write_dat(os.path.join(out, "qubit_counts.dat"), ["m", "n_m", *REGIMES], qdat)
    _write_dat(os.path.join(out, "shots_gates.dat"),
               ["m", "sqrt_m", "trial_bound", "shots", "gates"],
               [[r[0], r[8], r[7], r[5], r[6]] for r in rrows])
    _write_dat(os.path.join(out, "hamiltonian_variance.dat"),
               ["m", "n", "haar_mean", "haar_variance", "grad_variance"], hdat)
    if len({p[0] for p in points}) >= 2:
        est = extrapolate_qubits(points, EXTRAPOLATION_TARGET)
        print(f"linear fit of preprocessed no-prior counts: n({EXTRAPOLATION_TARGET}-bit m) = {est:.0f}",
              file=sys.stderr)
    return 0


def cmd_manifold(args) -> int:
    ms = _targets(args)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    rows = []
    for m in ms:
        reduced = _reduced(m, args.prior, not args.no_preprocess)
        manifold = build_manifold(reduced, m)
        try:
            H = quantize(reduced)
            mean_in, mean_out = manifold_energy_stats(manifold, H)
        except AlreadySolved:
            mean_in, mean_out = 0.0, float("nan")
        rows.append([m, reduced.qubit_count, manifold.fraction, int(manifold.members.sum()), mean_in, mean_out])
    _write_csv(os.path.join(out, "manifold.csv"), ["m", "n", "fraction", "members", "mean_in", "mean_out"], rows)
    return 0


# ---------------------------------------------------------------- plumbing

def _targets(args) -> list:
    if not args.m:
        raise UsageError("at least one m is required")
    return [check_target(m) for m in args.m]


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        try:
            _apply(cfg, read_config(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    overrides = {}
    if args.m:
        overrides["m"] = ",".join(str(m) for m in args.m)
    if args.ansatz:
        overrides["ansatz"] = ",".join(args.ansatz)
    for key in ("layers", "restarts", "seed", "jobs", "out"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = str(val)
    if args.prior:
        overrides["prior"] = "true"
    if args.no_preprocess:
        overrides["preprocess"] = "false"
    return _apply(cfg, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqf", description="Biprime factoring experiments with variational circuits.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def regime_flags(p):
        p.add_argument("--prior", action="store_true", help="use the true factor bit-lengths")
        p.add_argument("--no-preprocess", action="store_true", help="skip classical simplification")

    p = sub.add_parser("encode", help="print the reduced clause system and Hamiltonian")
    p.add_argument("m", type=int)
    regime_flags(p)
    p.add_argument("--out", help="write encode_<m>.json and energies_<m>.bin here")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("optimize", help="multistart VQE/QAOA runs -> runs.csv, stats.csv")
    p.add_argument("m", type=int, nargs="*")
    p.add_argument("--config", help="flat key = value experiment file")
    p.add_argument("--ansatz", action="append", choices=KINDS)
    p.add_argument("--layers", help="int, 'n', range a:b, or comma list (QAOA: depth)")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    regime_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("resources", help="qubit regimes, shot/gate estimates, trial-division bound")
    p.add_argument("m", type=int, nargs="*")
    p.add_argument("--out")
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("manifold", help="solution-manifold fraction and energies")
    p.add_argument("m", type=int, nargs="*")
    p.add_argument("--out")
    regime_flags(p)
    p.set_defaults(func=cmd_manifold)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"vqf: error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleInstance as exc:
        print(f"vqf: infeasible instance: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"vqf: configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
