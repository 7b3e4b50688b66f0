"""Command-line front end.

Outcome keys are fixed-width binary strings written most significant bit
first; bit ``k`` counted from the right is record/readout position ``k``
(wire 0 is the least significant query bit).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import algorithms as alg
from . import oracles, protocols, refsim, stats
from .engine import Distribution, ExactIntractable, Experiment, distribution_from_mapping, \
    exact_distribution, sample
from .kernel import KernelError

ALGORITHMS = ("bv", "dj", "dj-decision", "dj3", "majority", "grover", "simon", "shor15")
DEMOS = ("bb84", "teleport", "superdense", "ghz", "singlet")


class ConfigError(ValueError):
    """Bad command-line or config-file input (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would call sys.exit itself
        raise ConfigError(f"{self.prog}: {message}\n{self.format_usage()}")


def _default_seed() -> int:
    raw = os.environ.get("QSL_SEED", "0")
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"QSL_SEED must be an integer, got {raw!r}") from None


def _num(v) -> float:
    return float(f"{float(v):.12g}")


def _frac(v) -> str:
    f = Fraction(v)
    return f"{f.numerator}/{f.denominator}"


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    algorithm: str
    params: dict = field(default_factory=dict)
    mode: str = "exact"
    trials: int | None = None
    seed: int = 0
    format: str = "json"

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.mode not in ("exact", "sample"):
            raise ConfigError(f"mode must be exact or sample, got {self.mode!r}")
        if self.mode == "exact" and self.trials is not None:
            raise ConfigError("exact mode does not take --trials")
        if self.mode == "sample":
            if self.trials is None:
                self.trials = 10_000
            if self.trials < 1:
                raise ConfigError("trials must be >= 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")


def parse_perm(spec, n: int) -> list[int] | None:
    """``identity``, ``reverse``, ``random:<seed>``, or an explicit list."""
    if spec is None or spec == "identity":
        return None
    if isinstance(spec, list):
        return [int(v) for v in spec]
    if spec == "reverse":
        return list(reversed(range(1 << n)))
    if spec.startswith("random:"):
        perm = list(range(1 << n))
        random.Random(int(spec.split(":", 1)[1], 0)).shuffle(perm)
        return perm
    try:
        return [int(v) for v in json.loads(spec if spec.startswith("[") else f"[{spec}]")]
    except (ValueError, TypeError):
        raise ConfigError(f"cannot parse permutation {spec!r}") from None


def _need(params: dict, key: str):
    if params.get(key) is None:
        raise ConfigError(f"missing parameter --{key.replace('_', '-')}")
    return params[key]


def build_oracle(algorithm: str, params: dict) -> oracles.OracleSpec | None:
    p = params
    if algorithm == "bv":
        return oracles.bv_oracle(str(_need(p, "s")))
    if algorithm == "dj":
        n = int(_need(p, "n"))
        return oracles.dj_promise_oracle(n, int(p.get("b0") or 0), int(p.get("b1") or 0),
                                         parse_perm(p.get("perm"), n))
    if algorithm == "dj-decision":
        n = int(_need(p, "n"))
        return oracles.dj_decision_oracle(n, int(_need(p, "a")), parse_perm(p.get("perm"), n))
    if algorithm == "dj3":
        fs = str(_need(p, "function"))
        for o in oracles.dj3_catalog():
            if o.params["function"] == fs:
                return o
        raise ConfigError(f"{fs!r} is not a constant or balanced 3-bit function string")
    if algorithm == "majority":
        return oracles.majority_oracle(str(_need(p, "variant")))
    if algorithm == "grover":
        xstar = str(_need(p, "xstar"))
        if p.get("n") is not None and int(p["n"]) != len(xstar):
            raise ConfigError(f"--n {p['n']} does not match the length of --xstar {xstar!r}")
        return oracles.grover_oracle(len(xstar), xstar)
    if algorithm == "simon":
        s = str(_need(p, "s"))
        n = len(s)
        return oracles.simon_oracle(n, s, int(_need(p, "b")), parse_perm(p.get("perm"), n),
                                    p.get("variant") or "zero_target")
    return None


def _experiment(cfg: RunConfig, oracle) -> tuple[Experiment, int]:
    a = cfg.algorithm
    if a == "bv":
        return alg.bv_experiment(oracle), 1
    if a in ("dj", "dj-decision", "dj3", "majority"):
        return alg.dj_experiment(oracle), 1
    if a == "grover":
        return alg.grover_round_experiment(oracle), 1
    if a == "simon":
        return alg.simon_experiment(oracle), 1
    if a == "shor15":
        return alg.shor15_experiment(int(_need(cfg.params, "a"))), 1
    raise ConfigError(a)  # pragma: no cover


def _verdict(cfg: RunConfig, oracle, dist: Distribution):
    support = dist.support()
    if cfg.algorithm in ("dj", "dj-decision", "dj3", "majority"):
        labels = (("not_balanced", "not_constant") if cfg.algorithm == "dj-decision"
                  else ("constant", "balanced"))
        if support == [0]:
            return labels[0]
        return labels[1] if 0 not in support else "undetermined"
    if cfg.algorithm == "bv":
        return dist.key(support[0]) if len(support) == 1 else "undetermined"
    if cfg.algorithm == "grover":
        best = max(dist.items(), key=lambda kv: kv[1])[0]
        return dist.key(best)
    return None


def _ideal(exp: Experiment) -> Distribution | None:
    try:
        return refsim.ideal_distribution(exp)
    except refsim.RefsimError:
        return None


def run_report(cfg: RunConfig) -> dict:
    cfg.validate()
    oracle = build_oracle(cfg.algorithm, cfg.params)
    exp, queries = _experiment(cfg, oracle)
    if cfg.algorithm == "simon" and oracle.params["variant"] == "deterministic":
        res = alg.simon_deterministic(oracle)
        report = _base(cfg, oracle.n)
        report["distribution"] = {"".join(reversed(res.vectors)): 1.0}
        report["verdict"] = res.kind if res.s is None else f"{res.kind}:{res.s}"
        return report
    if cfg.mode == "exact":
        dist = exact_distribution(exp)
    else:
        dist = sample(exp, cfg.trials, cfg.seed)
    report = _base(cfg, queries)
    report["distribution"] = {k: _num(v) for k, v in dist.as_strings().items()}
    if dist.exact:
        report["fractions"] = {k: _frac(v) for k, v in dist.as_strings().items()}
    verdict = _verdict(cfg, oracle, dist)
    if verdict is not None:
        report["verdict"] = verdict
    metrics = {}
    ideal = _ideal(exp)
    if ideal is not None:
        metrics["sso"] = _num(stats.sso(dist, ideal))
    metrics["entropy"] = _num(stats.entropy(dist))
    report["metrics"] = metrics
    return report


def _base(cfg: RunConfig, queries: int) -> dict:
    return {"algorithm": cfg.algorithm, "params": cfg.params, "mode": cfg.mode,
            "seed": cfg.seed, "queries": queries}


def _csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["outcome", "probability", "fraction"])
    fr = report.get("fractions", {})
    for k, v in report["distribution"].items():
        w.writerow([k, v, fr.get(k, "")])
    return buf.getvalue()


_RUN_PARAMS = ("n", "s", "b0", "b1", "a", "xstar", "variant", "perm", "b", "function")


def _cmd_run(args) -> str:
    conf: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    params = dict(conf.get("params", {}))
    for key in _RUN_PARAMS:
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    algorithm = args.algorithm or conf.get("algorithm")
    if algorithm is None:
        raise ConfigError("missing --algorithm")
    if algorithm == "shor15":
        _need(params, "a")
    params = {k: params[k] for k in _RUN_PARAMS if params.get(k) is not None}
    cfg = RunConfig(algorithm=algorithm, params=params,
                    mode=args.mode or conf.get("mode", "exact"),
                    trials=args.trials if args.trials is not None else conf.get("trials"),
                    seed=args.seed if args.seed is not None else conf.get("seed", _default_seed()),
                    format=args.format or conf.get("format", "json"))
    report = run_report(cfg)
    return _csv(report) if cfg.format == "csv" else _dump(report)


# --------------------------------------------------------------------------
# demo
# --------------------------------------------------------------------------

def _exact_map(dist: Distribution) -> dict:
    return {k: _frac(v) for k, v in dist.as_strings().items()}


def demo_report(name: str, rounds: int, eavesdrop: bool, seed: int) -> dict:
    if name == "bb84":
        sifted, errors = protocols.bb84_run(rounds, eavesdrop, seed)
        return {"demo": name, "rounds": rounds, "eavesdrop": eavesdrop, "seed": seed,
                "sifted": sifted, "errors": errors,
                "qber": _num(errors / sifted) if sifted else None,
                "exact_qber": _frac(protocols.bb84_exact_qber(eavesdrop))}
    if name == "teleport":
        rows = {}
        for label in range(4):
            dist = exact_distribution(protocols.teleport_experiment(("point", label)))
            bob = dist.marginal([3, 2])  # key "xp", matching the input label
            rows[format(label, "02b")] = _exact_map(bob)
        return {"demo": name, "bob_output_by_input": rows}
    if name == "superdense":
        rows = {}
        for m1 in (0, 1):
            for m0 in (0, 1):
                rows[f"{m1}{m0}"] = _exact_map(exact_distribution(protocols.superdense_experiment(m1, m0)))
        return {"demo": name, "decoded_by_message": rows}
    if name == "ghz":
        return {"demo": name,
                "conditional_entropy_bits": {c: _num(protocols.ghz_conditional_entropy(c))
                                             for c in ("toffoli", "cnot")}}
    if name == "singlet":
        return {"demo": name, "correlations": protocols.singlet_pauli_correlations()}
    raise ConfigError(f"unknown demo {name!r}")  # pragma: no cover


def _cmd_demo(args) -> str:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.rounds < 1:
        raise ConfigError("rounds must be >= 1")
    return _dump(demo_report(args.name, args.rounds, args.eavesdrop, seed))


# --------------------------------------------------------------------------
# catalog, sso, entropy, shor15
# --------------------------------------------------------------------------

def catalog_rows() -> list[dict]:
    rows = []
    for o in oracles.dj3_catalog():
        dist = exact_distribution(alg.dj_experiment(o, "allzero"))
        p_const = dist[1]
        verdict = "constant" if p_const == 1 else "balanced" if p_const == 0 else "undetermined"
        rows.append({"function": o.function_string(), "toffoli": o.circuit.count("Toffoli"),
                     "cnot": o.circuit.count("CNOT"), "verdict": verdict,
                     "correct": verdict == ("constant" if len(set(o.function_string())) == 1
                                            else "balanced")})
    return rows


def _cmd_catalog(args) -> str:
    rows = catalog_rows()
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    return _dump({"catalog": "dj3", "count": len(rows), "entries": rows})


def load_distribution(path: str) -> Distribution:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read distribution {path}: {exc}") from None
    if isinstance(data, dict) and "distribution" in data:
        data = data.get("fractions") or data["distribution"]
    if not isinstance(data, dict) or not data:
        raise ConfigError(f"{path} holds no distribution")
    widths = {len(k) for k in data}
    if len(widths) != 1:
        raise ConfigError(f"{path}: outcome keys have different widths")
    try:
        return distribution_from_mapping(widths.pop(), data)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_sso(args) -> str:
    p, q = load_distribution(args.observed), load_distribution(args.ideal)
    if p.width != q.width:
        raise ConfigError(f"outcome widths differ: {p.width} vs {q.width}")
    return _dump({"sso": _num(stats.sso(p, q)),
                  "statistical_overlap": _num(stats.statistical_overlap(p, q)),
                  "fidelity": _num(stats.fidelity(p, q))})


def _cmd_entropy(args) -> str:
    return _dump({"entropy": _num(stats.entropy(load_distribution(args.file)))})


def _cmd_shor15(args) -> str:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.a not in oracles.SHOR_ELEMENTS:
        raise ConfigError(f"--a must be one of {oracles.SHOR_ELEMENTS}")
    exp = alg.shor15_experiment(args.a)
    dist = exact_distribution(exp)
    ideal = refsim.ideal_distribution(exp)
    order = alg.shor_order(args.a)
    p_good = sum((v for y, v in dist.items() if alg.continued_fraction_r(y) == order), Fraction(0))
    out = alg.shor_factor15(args.a, seed, args.samples)
    return _dump({"a": args.a, "seed": seed, "order": order,
                  "distribution": {k: _num(v) for k, v in dist.as_strings().items()},
                  "fractions": _exact_map(dist),
                  "ideal": {k: _num(v) for k, v in ideal.as_strings().items()},
                  "metrics": {"sso": _num(stats.sso(dist, ideal)),
                              "p_correct_order": _num(p_good)},
                  "samples": list(out.samples), "r": out.r,
                  "factors": list(out.factors) if out.factors else None})


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsl", description="Quantum simulation logic: exact and sampled runs.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    r = sub.add_parser("run", help="run an algorithm and print its outcome distribution")
    r.add_argument("--config", help="JSON file with algorithm, params, mode, trials, seed, format")
    r.add_argument("--algorithm", choices=ALGORITHMS)
    r.add_argument("--mode", choices=("exact", "sample"))
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--format", choices=("json", "csv"))
    r.add_argument("--n", type=int)
    r.add_argument("--s")
    r.add_argument("--b0", type=int, choices=(0, 1))
    r.add_argument("--b1", type=int, choices=(0, 1))
    r.add_argument("--b", type=int, choices=(0, 1))
    r.add_argument("--a", type=int)
    r.add_argument("--xstar")
    r.add_argument("--variant")
    r.add_argument("--function", help="3-bit function string for --algorithm dj3")
    r.add_argument("--perm", help="identity, reverse, random:<seed> or a comma separated list")
    r.set_defaults(handler=_cmd_run)

    d = sub.add_parser("demo", help="protocol demonstrations")
    d.add_argument("name", choices=DEMOS)
    d.add_argument("--rounds", type=int, default=100_000)
    d.add_argument("--eavesdrop", action="store_true")
    d.add_argument("--seed", type=int)
    d.set_defaults(handler=_cmd_demo)

    c = sub.add_parser("catalog", help="list an oracle catalog")
    c.add_argument("which", choices=("dj3",))
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(handler=_cmd_catalog)

    s = sub.add_parser("sso", help="compare two distribution files")
    s.add_argument("--observed", required=True)
    s.add_argument("--ideal", required=True)
    s.set_defaults(handler=_cmd_sso)

    e = sub.add_parser("entropy", help="Shannon entropy of a distribution file")
    e.add_argument("file")
    e.set_defaults(handler=_cmd_entropy)

    h = sub.add_parser("shor15", help="factor 15 with a given base")
    h.add_argument("--a", type=int, required=True)
    h.add_argument("--seed", type=int)
    h.add_argument("--samples", type=int, default=16)
    h.set_defaults(handler=_cmd_shor15)
    return parser


def run_command(argv: Sequence[str] | None = None) -> tuple[int, str, str]:
    """Execute a command line; returns ``(exit code, stdout text, stderr text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "handler", None) is None:
            raise ConfigError(f"a subcommand is required\n{parser.format_usage()}")
        return 0, args.handler(args), ""
    except ConfigError as exc:
        return 2, "", f"error: {exc}\n"
    except (oracles.OracleError, KernelError, ExactIntractable, ValueError) as exc:
        return 2, "", f"error: {exc}\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, out, err = run_command(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
