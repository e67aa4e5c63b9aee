"""Command-line entry point: ``kronmimo {solve,equiv,outage,simulate,verify}``.

Every subcommand prints one JSON document on stdout. Exit codes: 0 ok,
2 usage / invalid profile, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import equivalents as eqv
from . import fixed_point, montecarlo, profile as prof, resolvent_diag
from .errors import KronMimoError

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
LN2 = math.log(2.0)

log = logging.getLogger("kronmimo")


class UsageError(KronMimoError):
    exit_code = EXIT_USAGE


@dataclass
class RunConfig:
    command: str
    profile_path: Optional[str] = None
    generator: Optional[str] = None
    big_n: Optional[int] = None
    n: Optional[int] = None
    t: Optional[float] = None
    rho: Optional[float] = None
    threshold: Optional[float] = None
    trials: int = 1000
    seed: int = 0
    threads: int = 1
    tol: float = fixed_point.DEFAULT_TOL
    out: Optional[str] = None
    bits: bool = False
    write_profile: Optional[str] = None
    family: Optional[str] = None
    ns: tuple = ()
    trials_per_n: int = 500
    ratio: float = 1.0
    scaling: str = "quadratic"
    control_order: Optional[int] = None

    def check(self):
        if self.command in ("solve", "equiv", "outage", "simulate"):
            if (self.profile_path is None) == (self.generator is None):
                raise UsageError("give exactly one of --profile or --generate")
            if self.generator is not None and (self.big_n is None or self.n is None):
                raise UsageError("--generate needs --N and --n")
        if self.rho is not None and self.rho < 0:
            raise UsageError(f"--rho must be >= 0, got {self.rho}")
        if self.t is not None and self.t < 0:
            raise UsageError(f"--t must be >= 0, got {self.t}")
        if self.trials < 1:
            raise UsageError(f"--trials must be >= 1, got {self.trials}")
        if self.tol <= 0:
            raise UsageError(f"--tol must be > 0, got {self.tol}")
        if self.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {self.threads}")
        if self.seed < 0:
            raise UsageError(f"--seed must be >= 0, got {self.seed}")
        return self


def _unit_scale(bits: bool) -> float:
    return 1.0 / LN2 if bits else 1.0


def load_profile(cfg: RunConfig) -> prof.ValidatedProfile:
    if cfg.profile_path is not None:
        p = prof.load(cfg.profile_path)
    else:
        kind, params = prof.parse_generator(cfg.generator)
        p = prof.generate(kind, cfg.big_n, cfg.n, params)
    p = prof.validate(p)
    if cfg.write_profile:
        prof.save(p, cfg.write_profile)
    return p


def _emit(doc: dict) -> None:
    print(json.dumps({"schema": SCHEMA, **doc}, indent=2))


def cmd_solve(cfg: RunConfig) -> dict:
    if cfg.t is None:
        raise UsageError("solve needs --t")
    p = load_profile(cfg)
    fp = fixed_point.solve(p, cfg.t, cfg.tol)
    return {
        "command": "solve",
        "N": p.big_n,
        "n": p.n,
        "t": fp.t,
        "delta": fp.delta,
        "delta_tilde": fp.delta_tilde,
        "gamma": fp.gamma,
        "gamma_tilde": fp.gamma_tilde,
        "one_minus_t2gg": fp.one_minus_t2gg,
    }


def _equiv_doc(cfg, eq):
    s = _unit_scale(cfg.bits)
    return {
        "N": eq.fp.profile.big_n,
        "n": eq.fp.profile.n,
        "rho": eq.rho,
        "unit": "bits" if cfg.bits else "nats",
        "v": eq.v * s,
        "sigma2": eq.sigma2 * s * s,
    }


def cmd_equiv(cfg: RunConfig) -> dict:
    if cfg.rho is None:
        raise UsageError("equiv needs --rho")
    eq = eqv.v_of_rho(load_profile(cfg), cfg.rho, cfg.tol)
    return {"command": "equiv", **_equiv_doc(cfg, eq)}


def cmd_outage(cfg: RunConfig) -> dict:
    if cfg.rho is None or cfg.threshold is None:
        raise UsageError("outage needs --rho and --threshold")
    if cfg.rho <= 0:
        raise UsageError("outage needs --rho > 0")
    eq = eqv.v_of_rho(load_profile(cfg), cfg.rho, cfg.tol)
    # threshold is read in the display unit
    threshold_nats = cfg.threshold / _unit_scale(cfg.bits)
    doc = {"command": "outage", **_equiv_doc(cfg, eq), "threshold": cfg.threshold}
    doc["outage"] = eqv.outage_from(eq, threshold_nats)
    return doc


def write_samples_csv(samples, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for x in samples:
            fh.write(f"{float(x)!r}\n")


def cmd_simulate(cfg: RunConfig) -> dict:
    if cfg.rho is None:
        raise UsageError("simulate needs --rho")
    p = load_profile(cfg)
    batch = montecarlo.run_batch(p, cfg.rho, cfg.trials, cfg.seed, cfg.threads)
    if cfg.out:
        write_samples_csv(batch.samples, cfg.out)
    s = _unit_scale(cfg.bits)
    doc = {
        "command": "simulate",
        "seed": cfg.seed,
        "trials": batch.trials,
        "threads": cfg.threads,
        "unit": "bits" if cfg.bits else "nats",
        "mean": batch.mean * s,
        "var": batch.var * s * s if batch.trials > 1 else None,
        "ks_stat": None,
        "ks_p": None,
        "var_ratio": None,
        "out": cfg.out,
    }
    if cfg.rho > 0:
        eq = eqv.v_of_rho(p, cfg.rho, cfg.tol)
        doc["v"] = eq.v * s
        doc["sigma2"] = eq.sigma2 * s * s
        if batch.trials >= montecarlo.MIN_NORMALITY_SAMPLES:
            rep = montecarlo.normality_test(batch, eq)
            doc.update(ks_stat=rep.ks_stat, ks_p=rep.ks_p, var_ratio=rep.var_ratio)
            doc["skewness"] = rep.skewness
            doc["excess_kurtosis"] = rep.excess_kurtosis
    return doc


def cmd_verify(cfg: RunConfig) -> dict:
    if cfg.family is None or cfg.rho is None or not cfg.ns:
        raise UsageError("verify needs --profile-family, --rho and --ns")
    kind, params = prof.parse_generator(cfg.family)
    report = resolvent_diag.rate_fit(
        (kind, params),
        cfg.rho,
        cfg.ns,
        cfg.trials_per_n,
        seed=cfg.seed,
        ratio=cfg.ratio,
        scaling=cfg.scaling,
        parallelism=cfg.threads,
        tol=cfg.tol,
        control_order=cfg.control_order,
    )
    deltas = [
        fixed_point.solve(prof.generate(kind, max(1, round(cfg.ratio * n)), n, params), cfg.rho, cfg.tol).delta
        for n in report.alpha_gap.ns
    ]
    return {"command": "verify", "family": cfg.family, "ratio": cfg.ratio, "delta": deltas, **report.to_dict()}


COMMANDS = {
    "solve": cmd_solve,
    "equiv": cmd_equiv,
    "outage": cmd_outage,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _ns(text):
    try:
        ns = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --ns {text!r}") from None
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
        raise argparse.ArgumentTypeError("--ns needs >= 3 strictly increasing positive ints")
    return ns


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kronmimo", description=__doc__, allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_profile(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--profile", dest="profile_path", metavar="PATH", help="profile JSON file")
        g.add_argument("--generate", dest="generator", metavar="KIND:PARAMS", help="e.g. constant:1")
        sp.add_argument("--N", dest="big_n", type=int, help="receive antennas (rows)")
        sp.add_argument("--n", dest="n", type=int, help="transmit antennas (columns)")
        sp.add_argument("--write-profile", metavar="PATH", help="also write the profile as JSON")
        sp.add_argument("--tol", type=float, default=fixed_point.DEFAULT_TOL)
        sp.add_argument("--bits", action="store_true", help="report information in bits")

    sp = sub.add_parser("solve", allow_abbrev=False, help="solve the canonical system at t")
    with_profile(sp)
    sp.add_argument("--t", type=float, required=True)

    sp = sub.add_parser("equiv", allow_abbrev=False, help="V and sigma^2 at rho")
    with_profile(sp)
    sp.add_argument("--rho", type=float, required=True)

    sp = sub.add_parser("outage", allow_abbrev=False, help="Gaussian outage probability")
    with_profile(sp)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--threshold", type=float, required=True)

    sp = sub.add_parser("simulate", allow_abbrev=False, help="Monte Carlo mutual information")
    with_profile(sp)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", metavar="CSV")

    sp = sub.add_parser("verify", allow_abbrev=False, help="resolvent approximation rate fit")
    sp.add_argument("--profile-family", dest="family", required=True, metavar="KIND:PARAMS")
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--ns", type=_ns, required=True)
    sp.add_argument("--trials-per-n", type=int, default=500, help="trials at the smallest n")
    sp.add_argument("--scaling", choices=("quadratic", "constant"), default="quadratic")
    sp.add_argument("--ratio", type=float, default=1.0, help="N/n")
    sp.add_argument("--control-order", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--tol", type=float, default=fixed_point.DEFAULT_TOL)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields and v is not None}).check()


def _error(exc: BaseException, code: int) -> int:
    doc = {"schema": SCHEMA, "error": type(exc).__name__, "module": type(exc).__module__, "message": str(exc)}
    print(json.dumps(doc), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = config_from_args(args)
        _emit(COMMANDS[cfg.command](cfg))
    except KronMimoError as exc:
        return _error(exc, exc.exit_code)
    except (OSError, json.JSONDecodeError) as exc:
        return _error(exc, EXIT_IO)
    except ValueError as exc:
        return _error(exc, EXIT_USAGE)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error(exc, EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
