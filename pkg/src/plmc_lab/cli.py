"""Command-line experiment runner.

    plmc-lab {sample,coupled-error,localtime,warmstart,w2,schedule}
             --config PATH [--out DIR] [--seed U64] [--threads N]

Exit status: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import theory
from ._validation import jsonable
from .chains import ChainConfig, run_ball_restricted, run_coupled, run_plmc, run_reflected_reference
from .config import Config, ConfigError
from .exceptions import HypothesisError, ScheduleInfeasible
from .geometry import WholeSpace, body_from_dict
from .metrics import EXACT_MAX_SIZE, SCHEMA_LINE, SampleSet, w2_1d, w2_exact, w2_sliced
from .oracles import (rejection_sample, sample_gaussian_warmstart, sample_truncated_exponential,
                      sample_uniform_ball)
from .potentials import Zero, potential_from_dict
from .rng import metadata

log = logging.getLogger("plmc_lab")

# coarse and fine chains add the same increments in different orders, so a
# coupling distance that is zero in exact arithmetic comes out near 1e-32
COUPLING_ROUNDOFF = 1e-24


class Study:
    """Shared state of one command invocation: config, output dir, summary."""

    def __init__(self, command: str, cfg: Config, out: Path, seed: int, threads: int):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.threads = threads
        self.summary: dict = {}
        self.outputs: list[str] = []
        self.resolved = cfg.resolved(seed=seed)

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write(f"{SCHEMA_LINE}\n")
            fh.write(f"# config: {json.dumps(jsonable(self.resolved), sort_keys=True)}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        self.outputs.append(name)
        return path

    def finish(self, started: float) -> Path:
        doc = {
            "schema": SCHEMA_LINE[2:],
            "command": self.command,
            "config": self.resolved,
            "seed": self.seed,
            "rng": metadata(self.seed),
            "outputs": self.outputs,
            **self.summary,
            "runtime_seconds": round(time.perf_counter() - started, 3),
        }
        path = self.out / "summary.json"
        path.write_text(json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n")
        return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _start_constants(chain: ChainConfig):
    if isinstance(chain.body, WholeSpace):
        return 0.0, math.inf, True
    return theory.sigma0_r0(chain.x0, chain.potential, chain.body)


def _chain_from_config(study: Study):
    """Build the chain (and schedule, when requested) described by the config."""
    cfg = study.cfg
    restrict = cfg.get("restrict")
    potential = cfg.potential()
    if restrict is not None:
        try:
            radius = float(restrict["radius"])
            beta = float(restrict["beta"])
        except (KeyError, TypeError, ValueError) as exc:
            raise cfg.error("restrict", "restrict needs numeric 'radius' and 'beta'") from exc
        eta = cfg.number("eta", positive=True)
        steps = cfg.number("steps", positive=True, integer=True)
        body = body_from_dict({"type": "ball", "center": [0.0] * potential.dim, "radius": radius})
        lipschitz = beta * (radius + 1.0)
        chain = cfg.chain(body, potential, eta, steps, study.seed, lipschitz)
        return chain, None, {"radius": radius, "beta": beta}
    body = cfg.body()
    schedule = None
    if cfg.get("schedule") is not None:
        probe = cfg.chain(body, potential, 1e-300, 1, study.seed)
        sigma0, r0, _ = _start_constants(probe)
        req = cfg.get("schedule")
        try:
            consts = theory.ProblemConstants(n=body.dim, L=probe.lipschitz, r0=r0, sigma0=sigma0,
                                             C_LS=float(req["C_LS"]), eps=float(req["eps"]))
            schedule = theory.schedule_logsob(consts, max_steps=req.get("max_steps"))
        except (KeyError, TypeError, ValueError, HypothesisError) as exc:
            raise cfg.error("schedule", f"invalid schedule request: {exc}") from exc
        eta, steps = schedule.eta, schedule.k
    else:
        eta = cfg.number("eta", positive=True)
        steps = cfg.number("steps", positive=True, integer=True)
    return cfg.chain(body, potential, eta, steps, study.seed), schedule, None


def cmd_sample(study: Study):
    cfg = study.cfg
    replicas = cfg.number("replicas", 1, positive=True, integer=True)
    stride = cfg.number("record_stride", 1, positive=True, integer=True)
    chain, schedule, restrict = _chain_from_config(study)
    if restrict is not None:
        traj = run_ball_restricted(chain.potential, restrict["radius"], restrict["beta"], chain.eta,
                                   chain.steps, study.seed, replicas=replicas, record_stride=stride,
                                   threads=study.threads)
    else:
        traj = run_plmc(chain, stride, replicas, threads=study.threads)
    n = chain.dim
    rows = []
    for r_idx, rid in enumerate(traj.replica_ids):
        for s_idx in range(1, len(traj.steps)):
            rows.append([int(traj.steps[s_idx]), traj.times[s_idx], int(rid), *traj.points[s_idx, r_idx]])
    study.write_csv("samples.csv", ["step", "time", "replica"] + [f"x_{j + 1}" for j in range(n)], rows)
    sigma0, r0, exact = _start_constants(chain)
    A, rhs = theory.discretization_bound(n, chain.steps, chain.eta, chain.lipschitz, sigma0, r0)
    study.summary["constants"] = {"n": n, "L": chain.lipschitz, "sigma0": sigma0, "r0": r0,
                                  "infimum_exact": exact, "A": A, "discretization_bound": rhs,
                                  "eta": chain.eta, "steps": chain.steps}
    if schedule is not None:
        study.summary["schedule"] = schedule._asdict()


def _horizon_steps(T: float, eta: float) -> int:
    return max(1, math.ceil(T / eta - 1e-9))


def cmd_coupled_error(study: Study):
    cfg = study.cfg
    body, potential = cfg.body(), cfg.potential()
    grid = cfg.get("eta_grid")
    if not isinstance(grid, list) or not grid:
        raise cfg.error("eta_grid", "eta_grid must be a nonempty list of step sizes")
    T = cfg.number("T", 1.0, positive=True)
    m = cfg.number("refinement", 32, positive=True, integer=True)
    replicas = cfg.number("replicas", 100, positive=True, integer=True)
    chains = [cfg.chain(body, potential, float(eta), _horizon_steps(T, float(eta)), study.seed)
              for eta in grid]
    sigma0, r0, exact = _start_constants(chains[0])
    n = body.dim
    rows, all_pass = [], True
    for chain in chains:
        curve = run_coupled(chain, m, replicas, threads=study.threads)
        for s in range(1, chain.steps + 1):
            _, bound = theory.discretization_bound(n, s, chain.eta, chain.lipschitz, sigma0, r0)
            mean, se = curve.mean[s] / n, curve.se[s] / n
            ok = theory.verdict(mean, se, bound, atol=COUPLING_ROUNDOFF)
            all_pass &= ok
            rows.append([chain.eta, chain.steps, s, s * chain.eta, mean, se, bound, ok])
    study.write_csv("coupled_error.csv",
                    ["eta", "k", "step", "time", "mean", "se", "bound", "verdict"], rows)
    study.summary["constants"] = {"n": n, "L": chains[0].lipschitz, "sigma0": sigma0, "r0": r0,
                                  "infimum_exact": exact}
    study.summary["all_pass"] = all_pass


def cmd_localtime(study: Study):
    cfg = study.cfg
    body, potential = cfg.body(), cfg.potential()
    eta = cfg.number("eta", positive=True)
    times = cfg.get("times", [0.25, 0.5, 1.0])
    if not isinstance(times, list) or not times or not all(isinstance(t, (int, float)) and t > 0 for t in times):
        raise cfg.error("times", "times must be a nonempty list of positive numbers")
    m = cfg.number("refinement", 32, positive=True, integer=True)
    replicas = cfg.number("replicas", 100, positive=True, integer=True)
    steps_at = [_horizon_steps(float(t), eta) for t in times]
    chain = cfg.chain(body, potential, eta, max(steps_at), study.seed)
    sigma0, r0, exact = _start_constants(chain)
    traj = run_reflected_reference(chain, m, replicas, record_stride=chain.steps, threads=study.threads)
    rows, all_pass = [], True
    for t, s in zip(times, steps_at):
        ell = traj.ledger.ell_at(s)
        est, se = root_mean_square(ell)
        bound = theory.local_time_bound(body.dim, sigma0, r0, s * eta)
        ok = theory.verdict(est, se, bound)
        all_pass &= ok
        rows.append([s * eta, s, est, se, bound, ok])
    study.write_csv("localtime.csv", ["t", "step", "sqrt_mean_ell2", "se", "bound", "verdict"], rows)
    study.summary["constants"] = {"n": body.dim, "sigma0": sigma0, "r0": r0, "infimum_exact": exact}
    study.summary["all_pass"] = all_pass


def root_mean_square(values: np.ndarray):
    """``sqrt(mean(v^2))`` and its delta-method standard error."""
    sq = np.asarray(values, dtype=float) ** 2
    ms = sq.mean()
    se_ms = sq.std(ddof=1) / math.sqrt(len(sq)) if len(sq) > 1 else 0.0
    est = math.sqrt(ms)
    return est, (se_ms / (2 * est) if est > 0 else 0.0)


def cmd_warmstart(study: Study):
    cfg = study.cfg
    n = cfg.number("n", positive=True, integer=True)
    L = cfg.number("L", positive=True)
    C_P = cfg.number("C_P", positive=True)
    sigma0 = cfg.number("sigma0", 0.0)
    draws = cfg.number("draws", 1000, positive=True, integer=True)
    ws = theory.chi2_warmstart_log_bound(n, L, C_P, sigma0)
    x0 = np.asarray(cfg.get("x0", [0.0] * n), dtype=float)
    body = cfg.body() if "body" in cfg.data else WholeSpace(n)
    potential = cfg.potential() if "potential" in cfg.data else Zero(n)
    starts = sample_gaussian_warmstart(x0, n, L, draws, study.seed).points
    mean_ratio, se_ratio, accepted = theory.expected_start_ratio(starts, potential, body)
    rows = [["covariance_scale", ws.covariance_scale],
            ["log_chi2_bound", ws.log_chi2_bound],
            ["mean_start_ratio", mean_ratio],
            ["mean_start_ratio_se", se_ratio],
            ["accepted_draws", accepted]]
    study.write_csv("warmstart.csv", ["quantity", "value"], rows)
    study.summary["warmstart"] = {"covariance_scale": ws.covariance_scale,
                                  "log_chi2_bound": ws.log_chi2_bound,
                                  "mean_start_ratio": mean_ratio, "mean_start_ratio_se": se_ratio,
                                  "mean_start_ratio_estimated": True}
    print(f"log chi2 bound: {ws.log_chi2_bound:.6g}  covariance scale: {ws.covariance_scale:.6g}")


def _oracle(study: Study, desc: dict, m: int, seed: int) -> SampleSet:
    cfg = study.cfg
    try:
        kind = desc["type"]
        if kind == "uniform_ball":
            return sample_uniform_ball(int(desc["n"]), float(desc.get("R", 1.0)), m, seed)
        if kind == "truncated_exponential":
            R = desc.get("R", "inf")
            return sample_truncated_exponential(float(desc["L"]), float(R), m, seed)
        if kind == "rejection":
            return rejection_sample(potential_from_dict(desc["potential"]),
                                    body_from_dict(desc["body"]), m, seed)[0]
        if kind == "gaussian_warmstart":
            return sample_gaussian_warmstart(desc["x0"], int(desc["n"]), float(desc["L"]), m, seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise cfg.error("oracle", f"invalid oracle: {exc}") from exc
    raise cfg.error("oracle", f"unknown oracle type {kind!r}")


def _distance(method: str, a: SampleSet, b: SampleSet, n_proj: int, seed: int) -> float:
    if method == "1d":
        return w2_1d(a, b)
    if method == "exact":
        return w2_exact(a, b)
    return w2_sliced(a, b, n_proj, seed)


def cmd_w2(study: Study):
    cfg = study.cfg
    mode = cfg.get("mode", "chain_vs_oracle")
    if mode not in ("chain_vs_oracle", "oracle_vs_oracle"):
        raise cfg.error("mode", "mode must be 'chain_vs_oracle' or 'oracle_vs_oracle'")
    m = cfg.number("samples", 500, positive=True, integer=True)
    desc = cfg.require("oracle")
    oracle_a = _oracle(study, desc, m, study.seed)
    oracle_b = _oracle(study, desc, m, study.seed + 1)
    method = cfg.get("method", "auto")
    if method == "auto":
        method = "1d" if oracle_a.dim == 1 else ("exact" if m <= EXACT_MAX_SIZE else "sliced")
    if method not in ("1d", "exact", "sliced"):
        raise cfg.error("method", "method must be auto, 1d, exact or sliced")
    n_proj = cfg.number("n_proj", 100, positive=True, integer=True)
    slack = cfg.number("slack", 0.05)
    floor = _distance(method, oracle_a, oracle_b, n_proj, study.seed)
    rows = [["oracle_vs_oracle", method, m, floor, "", ""]]
    study.summary["floor"] = floor
    if mode == "chain_vs_oracle":
        if "chain_samples" in cfg.data:
            chain_set = SampleSet.from_csv(cfg.get("chain_samples"))
            if chain_set.size != m:
                raise cfg.error("chain_samples", f"chain sample file has {chain_set.size} rows, expected {m}")
        else:
            chain, _, _ = _chain_from_config(study)
            chain_set = SampleSet(run_plmc(chain, chain.steps, m, threads=study.threads).final)
        dist = _distance(method, chain_set, oracle_a, n_proj, study.seed)
        threshold = 2 * floor + slack
        ok = dist <= threshold
        rows.append(["chain_vs_oracle", method, m, dist, threshold, ok])
        study.summary.update({"w2": dist, "threshold": threshold, "verdict": bool(ok)})
    study.write_csv("w2.csv", ["comparison", "method", "samples", "w2_squared", "threshold", "verdict"], rows)


def cmd_schedule(study: Study):
    cfg = study.cfg
    if "body" in cfg.data:
        probe = cfg.chain(cfg.body(), cfg.potential(), 1e-300, 1, study.seed)
        sigma0, r0, _ = _start_constants(probe)
        n, L = probe.dim, probe.lipschitz
    else:
        n = cfg.number("n", positive=True, integer=True)
        L = cfg.number("L", 0.0)
        r0 = cfg.number("r0", math.inf)
        sigma0 = cfg.number("sigma0", 0.0)
    C_LS = cfg.number("C_LS", positive=True)
    eps = cfg.number("eps", positive=True)
    consts = theory.ProblemConstants(n=n, L=L, r0=r0, sigma0=sigma0, C_LS=C_LS, eps=eps)
    max_steps = cfg.get("max_steps")
    sched = theory.schedule_logsob(consts, max_steps=max_steps)
    study.write_csv("schedule.csv", list(sched._fields), [list(sched)])
    study.summary["constants"] = consts.to_dict()
    study.summary["schedule"] = sched._asdict()
    print(f"eta={sched.eta:.6g} k={sched.k} bound={sched.bound:.6g} (eps={eps})")


COMMANDS = {
    "sample": cmd_sample,
    "coupled-error": cmd_coupled_error,
    "localtime": cmd_localtime,
    "warmstart": cmd_warmstart,
    "w2": cmd_w2,
    "schedule": cmd_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plmc-lab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="JSON experiment config")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    parser.add_argument("--threads", type=int, default=1, help="replica batches run concurrently")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    started = time.perf_counter()
    try:
        cfg = Config.load(args.config)
        seed = args.seed if args.seed is not None else cfg.number("seed", 0, integer=True)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"{args.config}: seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        args.out.mkdir(parents=True, exist_ok=True)
        study = Study(args.command, cfg, args.out, seed, args.threads)
        COMMANDS[args.command](study)
        summary = study.finish(started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ScheduleInfeasible, HypothesisError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to exit status 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s", summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
