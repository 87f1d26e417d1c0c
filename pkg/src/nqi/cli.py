"""Command-line front end.

Exit codes: 0 success, 2 infeasible verdict, 1 configuration or other error.
Set ``NQI_LOG`` (e.g. ``DEBUG``) for log output on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .atom import closed_form_witness
from .config import (
    RunConfig,
    atom_params_from,
    config_from_dict,
    decode_vector,
    load_config,
    resolve_system,
)
from .criterion import CriterionVerdict, check_theorem1, search_feasible_probe
from .errors import BadSweepRange, ConfigParseError, InfeasibleSystem, NQIError
from .model import build_interrogation_operator
from .protocol import construct_measurement, optimize_alpha, probability_at, simulate_single_shot
from .report import dumps, new_report, outcome_dict, plan_dict, render_text, setup_dict, verdict_dict
from .zeno import check_zeno_condition, plan_zeno, simulate_zeno

log = logging.getLogger("nqi")

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--config", help="JSON run configuration")
    g.add_argument("--format", choices=("json", "text"))
    g.add_argument("--output", "-o", help="write the report here instead of stdout")
    g.add_argument("--tol-rel", type=float)
    g.add_argument("--tol-lin", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--full-log", action="store_true", help="include every search record")
    s = p.add_argument_group("system")
    s.add_argument("--preset", choices=("atom", "atom-potting", "absorber"))
    for flag in ("p", "p-plus", "p-minus", "g-plus", "g-minus", "t", "omega"):
        s.add_argument(f"--{flag}", type=float, dest=flag.replace("-", "_"))
    q = p.add_argument_group("search")
    q.add_argument("--magnitude-points", type=int)
    q.add_argument("--phase-points", type=int)
    q.add_argument("--workers", type=int)
    r = p.add_argument_group("protocol")
    r.add_argument("--mode", choices=("single", "zeno"))
    r.add_argument("--alpha", type=float)
    r.add_argument("--N", type=int, dest="N")
    r.add_argument("--empty", action="store_true", help="only simulate the empty box")
    r.add_argument("--trials", type=int, help="also draw this many Monte Carlo samples")
    r.add_argument("--object", help="object state as JSON list of numbers or [re, im] pairs")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="nqi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="decide single-shot feasibility")
    sub.add_parser("construct", parents=[common], help="build the success projector")
    sub.add_parser("optimize", parents=[common], help="optimize the probe split")
    sub.add_parser("simulate", parents=[common], help="simulate single-shot or iterative runs")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep, JSON lines")
    sw.add_argument("--param", choices=("p", "N", "alpha"), required=True)
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--num", type=int)
    sw.add_argument("--values", help="comma-separated explicit values")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.preset is not None:
        cfg.system = replace(cfg.system, preset=args.preset, inline=None)
    params = dict(cfg.system.params)
    for key in ("p", "p_plus", "p_minus", "g_plus", "g_minus", "t", "omega"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    cfg.system = replace(cfg.system, params=params)
    if args.format:
        cfg.output_format = args.format
    if args.output:
        cfg.output_path = args.output
    if args.tol_rel is not None:
        cfg.tol_rel = args.tol_rel
    if args.tol_lin is not None:
        cfg.tol_lin = args.tol_lin
    if args.seed is not None:
        cfg.seed = args.seed
    search_over = {
        k: getattr(args, k) for k in ("magnitude_points", "phase_points", "workers") if getattr(args, k) is not None
    }
    if search_over:
        cfg.search = replace(cfg.search, **search_over)
    proto = cfg.protocol
    if args.mode:
        proto.mode = args.mode
    if args.alpha is not None:
        proto.alpha = args.alpha
    if args.N is not None:
        proto.N = args.N
    if args.empty:
        proto.empty = True
    if args.trials is not None:
        proto.trials = args.trials
    if args.object is not None:
        try:
            proto.object_state = json.loads(args.object)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(exc.msg, field="--object") from exc
    return cfg


class Session:
    """Resolved system plus the lazily computed pieces shared by commands."""

    def __init__(self, cfg: RunConfig, full_log: bool = False):
        self.cfg = cfg
        self.full_log = full_log
        self.spec, self.preset_witness, self.provenance = resolve_system(cfg)
        self.D = build_interrogation_operator(self.spec)
        self._verdict = None

    @property
    def psi_r(self) -> np.ndarray:
        if self.cfg.protocol.psi_r is not None:
            v = decode_vector(self.cfg.protocol.psi_r, "protocol.psi_r")
        else:
            v = np.zeros(self.spec.dim_r, dtype=complex)
            v[0] = 1.0
        return v / np.linalg.norm(v)

    @property
    def object_state(self) -> np.ndarray:
        if self.cfg.protocol.object_state is not None:
            v = decode_vector(self.cfg.protocol.object_state, "protocol.object_state")
            if v.shape[0] != self.spec.n:
                raise ConfigParseError(f"expected {self.spec.n} entries", field="protocol.object_state")
        else:
            v = np.ones(self.spec.n, dtype=complex)
        return v / np.linalg.norm(v)

    def report(self, command: str) -> dict:
        return new_report(command, self.cfg.echo(), self.provenance)

    def verdict(self) -> CriterionVerdict:
        if self._verdict is not None:
            return self._verdict
        if self.preset_witness is not None:
            self._verdict = CriterionVerdict(True, self.preset_witness)
        elif self.cfg.witness is not None:
            psi_d = decode_vector(self.cfg.witness["psi_d"], "witness.psi_d")
            chi = decode_vector(self.cfg.witness["chi"], "witness.chi")
            psi_d, chi = psi_d / np.linalg.norm(psi_d), chi / np.linalg.norm(chi)
            c = np.trace(self.D.sandwich(chi, psi_d)) / self.spec.n
            self._verdict = check_theorem1(self.D, psi_d, chi, c, self.cfg.tol_lin, self.cfg.tol_rel)
        else:
            self._verdict = search_feasible_probe(self.D, self.cfg.search_config())
        return self._verdict

    def closed_form(self, verdict: CriterionVerdict) -> dict | None:
        if self.cfg.system.preset != "atom" or not verdict.feasible:
            return None
        sol = closed_form_witness(atom_params_from(self.cfg.system.params), verdict.witness.psi_d)
        return None if sol is None else {"abs_c": float(sol[1])}

    def feasible_witness(self, rep: dict):
        verdict = self.verdict()
        rep["verdict"] = verdict_dict(verdict, self.full_log)
        if not verdict.feasible:
            raise InfeasibleSystem(f"no single-shot witness ({verdict.failure_reason.value})")
        return verdict.witness


def cmd_check(sess: Session, rep: dict) -> int:
    verdict = sess.verdict()
    rep["verdict"] = verdict_dict(verdict, sess.full_log)
    rep["closed_form"] = sess.closed_form(verdict)
    return EXIT_OK if verdict.feasible else EXIT_INFEASIBLE


def _alpha_and_setup(sess: Session, rep: dict):
    w = sess.feasible_witness(rep)
    alpha = sess.cfg.protocol.alpha
    if alpha is None:
        alpha, p_opt = optimize_alpha(w, sess.psi_r)
        rep["optimum"] = {"alpha_opt": alpha, "P_opt": p_opt}
    return w, construct_measurement(w, alpha, sess.psi_r)


def cmd_construct(sess: Session, rep: dict) -> int:
    _, setup = _alpha_and_setup(sess, rep)
    rep["setup"] = setup_dict(setup)
    return EXIT_OK


def cmd_optimize(sess: Session, rep: dict) -> int:
    w = sess.feasible_witness(rep)
    alpha, p_opt = optimize_alpha(w, sess.psi_r)
    rep["optimum"] = {"alpha_opt": alpha, "P_opt": p_opt}
    rep["closed_form"] = sess.closed_form(sess.verdict())
    return EXIT_OK


def _zeno_witness(sess: Session):
    found = check_zeno_condition(sess.D, sess.cfg.search_config())
    if found is None:
        raise InfeasibleSystem("no vector chi with <chi|D|chi> = c I and c != 1")
    return found


def cmd_simulate(sess: Session, rep: dict) -> int:
    proto = sess.cfg.protocol
    cases = [False] if proto.empty else [True, False]
    outcomes = {}
    if proto.mode == "single":
        _, setup = _alpha_and_setup(sess, rep)
        rep["setup"] = setup_dict(setup)
        for occ in cases:
            res = simulate_single_shot(sess.spec, setup, sess.object_state, occ, proto.trials, sess.cfg.seed)
            outcomes["occupied" if occ else "empty"] = outcome_dict(res)
    else:
        chi, c = _zeno_witness(sess)
        plan = plan_zeno(c, proto.N or 100)
        rep["zeno_witness"] = {"chi": [[float(z.real), float(z.imag)] for z in chi], "c": [c.real, c.imag]}
        rep["plan"] = plan_dict(plan)
        for occ in cases:
            res = simulate_zeno(
                sess.spec, plan, chi, sess.psi_r, sess.object_state, occ, proto.trials, sess.cfg.seed, D=sess.D
            )
            outcomes["occupied" if occ else "empty"] = outcome_dict(res)
    rep["outcomes"] = outcomes
    return EXIT_OK


def sweep_values(args) -> list[float]:
    if args.values:
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise BadSweepRange(f"bad --values: {exc}") from exc
    else:
        if args.start is None or args.stop is None or args.num is None:
            raise BadSweepRange("give --values or all of --start, --stop, --num")
        if args.num < 1 or args.stop < args.start:
            raise BadSweepRange("need --num >= 1 and --stop >= --start")
        vals = list(np.linspace(args.start, args.stop, args.num)) if args.num > 1 else [args.start]
    if not vals:
        raise BadSweepRange("empty sweep")
    if args.param == "p" and any(not -1.0 <= v <= 1.0 for v in vals):
        raise BadSweepRange("p values must lie in [-1, 1]")
    if args.param == "N" and any(v < 1 or v != int(v) for v in vals):
        raise BadSweepRange("N values must be positive integers")
    if args.param == "alpha" and any(not 0.0 <= v < 1.0 for v in vals):
        raise BadSweepRange("alpha values must lie in [0, 1)")
    return [float(v) for v in vals]


def cmd_sweep(sess_cfg: RunConfig, args):
    """Yield one report per sweep point, in input order."""
    values = sweep_values(args)
    param = args.param
    if param == "p" and sess_cfg.system.preset != "atom":
        raise BadSweepRange("p sweeps need --preset atom")

    if param == "p":
        def point(v):
            cfg = replace(sess_cfg, system=replace(sess_cfg.system, params={**sess_cfg.system.params, "p": v}))
            cfg.system.params.pop("p_plus", None)
            cfg.system.params.pop("p_minus", None)
            sess = Session(cfg)
            rep = sess.report("sweep")
            rep["point"] = {"p": v}
            verdict = sess.verdict()
            rep["verdict"] = verdict_dict(verdict)
            if verdict.feasible:
                alpha, p_opt = optimize_alpha(verdict.witness, sess.psi_r)
                rep["optimum"] = {"alpha_opt": alpha, "P_opt": p_opt}
            return rep
    else:
        sess = Session(sess_cfg)
        if param == "N":
            chi, c = _zeno_witness(sess)

            def point(v):
                rep = sess.report("sweep")
                rep["point"] = {"N": int(v)}
                try:
                    plan = plan_zeno(c, int(v))
                except NQIError as exc:
                    rep["error"] = str(exc)
                    return rep
                rep["plan"] = plan_dict(plan)
                res = simulate_zeno(sess.spec, plan, chi, sess.psi_r, sess.object_state, True, D=sess.D)
                rep["outcomes"] = {"occupied": outcome_dict(res)}
                return rep
        else:
            probe_rep = sess.report("sweep")
            w = sess.feasible_witness(probe_rep)

            def point(v):
                rep = sess.report("sweep")
                rep["point"] = {"alpha": v}
                rep["success_probability"] = probability_at(w, sess.psi_r, v)
                return rep

    workers = max(1, sess_cfg.search.workers)
    if workers == 1:
        for v in values:
            yield point(v)
    else:
        with ThreadPoolExecutor(workers) as pool:
            yield from pool.map(point, values)


COMMANDS = {"check": cmd_check, "construct": cmd_construct, "optimize": cmd_optimize, "simulate": cmd_simulate}


def _setup_logging() -> None:
    level = os.environ.get("NQI_LOG")
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")


def _emit(text: str, stream) -> None:
    stream.write(text + "\n")
    stream.flush()


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        cfg = config_from_args(args)
        if cfg.output_path:
            out = open(cfg.output_path, "w")
        if args.command == "sweep":
            try:
                for rep in cmd_sweep(cfg, args):
                    _emit(dumps(rep, indent=None) if cfg.output_format == "json" else render_text(rep), out)
            except InfeasibleSystem as exc:
                print(f"nqi: infeasible: {exc}", file=sys.stderr)
                return EXIT_INFEASIBLE
            return EXIT_OK
        sess = Session(cfg, args.full_log)
        rep = sess.report(args.command)
        try:
            code = COMMANDS[args.command](sess, rep)
        except InfeasibleSystem as exc:
            rep["error"] = f"InfeasibleSystem: {exc}"
            code = EXIT_INFEASIBLE
        _emit(dumps(rep) if cfg.output_format == "json" else render_text(rep), out)
        return code
    except (NQIError, ValueError, OSError) as exc:
        print(f"nqi: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
