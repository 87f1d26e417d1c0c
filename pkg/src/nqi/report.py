"""Versioned JSON reports and their plain-text rendering.

Complex numbers are ``[re, im]`` pairs, matrices row-major nested arrays.
All values are converted to built-in Python types so that a report survives
``json.dumps``/``json.loads`` unchanged.
"""

from __future__ import annotations

import json
from collections import Counter

from . import __version__
from .config import encode_array, encode_complex
from .criterion import CriterionVerdict
from .protocol import MeasurementSetup, OutcomeReport
from .zeno import ZenoPlan

SCHEMA = 1


def new_report(command: str, config_echo: dict, provenance: str | None = None) -> dict:
    return {
        "schema": SCHEMA,
        "tool": {"name": "nqi", "version": __version__},
        "command": command,
        "provenance": provenance,
        "config": config_echo,
    }


def verdict_dict(verdict: CriterionVerdict, full_log: bool = False) -> dict:
    out = {
        "feasible": verdict.feasible,
        "failure_reason": verdict.failure_reason.value if verdict.failure_reason else None,
        "witness": None,
    }
    if verdict.witness is not None:
        w = verdict.witness
        dec = w.decomposition
        out["witness"] = {
            "psi_d": encode_array(w.psi_d),
            "chi": encode_array(w.chi),
            "c": encode_complex(w.c),
            "abs_c": float(abs(w.c)),
            "l": int(dec.l),
            "chi_perp": [encode_array(dec.chi_perp[:, j]) for j in range(dec.chi_perp.shape[1])],
        }
    log = verdict.search_log
    if log:
        reasons = Counter(r.reason.value for r in log if r.reason is not None)
        out["search"] = {
            "grid_points": len(log),
            "feasible_points": sum(r.feasible for r in log),
            "failures": dict(sorted(reasons.items())),
        }
        if full_log:
            out["search"]["records"] = [
                {
                    "b": encode_array(r.b),
                    "c": None if r.c is None else encode_complex(r.c),
                    "rank_R": r.rank_R,
                    "rank_aug": r.rank_aug,
                    "feasible": r.feasible,
                }
                for r in log
            ]
    return out


def setup_dict(setup: MeasurementSetup) -> dict:
    return {
        "alpha": setup.alpha,
        "beta": setup.beta,
        "psi_I": encode_array(setup.psi_I),
        "p_e_vector": encode_array(setup.p_e_vector),
        "initial_probe": encode_array(setup.initial_probe),
        "delta": encode_complex(setup.delta_amp),
        "success_probability": float(setup.success_probability),
    }


def outcome_dict(rep: OutcomeReport) -> dict:
    out = {
        "mode": rep.mode,
        "occupied": rep.occupied,
        "probabilities": {k: float(v) for k, v in rep.probabilities.items()},
        "total": float(rep.total),
        "fidelity": None if rep.fidelity is None else float(rep.fidelity),
    }
    if rep.conditional_object_state is not None:
        out["conditional_object_state"] = encode_array(rep.conditional_object_state)
    if rep.counts is not None:
        out["counts"] = rep.counts
    for k, v in rep.extra.items():
        out[k] = None if v is None else float(v)
    return out


def plan_dict(plan: ZenoPlan) -> dict:
    return {
        "N": plan.N,
        "theta": plan.theta,
        "theta_prime": plan.theta_prime,
        "delta": plan.delta,
        "c": encode_complex(plan.c),
        "survival_probability": plan.survival_probability,
    }


def dumps(report: dict, indent: int | None = 2) -> str:
    return json.dumps(report, indent=indent, allow_nan=False)


def render_text(report: dict) -> str:
    """Human-readable summary of the fields that are present."""
    lines = [f"nqi {report['tool']['version']}  command: {report['command']}"]
    if report.get("provenance"):
        lines.append(f"system: {report['provenance']}")
    v = report.get("verdict")
    if v is not None:
        status = "FEASIBLE" if v["feasible"] else f"INFEASIBLE ({v['failure_reason']})"
        lines.append(f"verdict: {status}")
        if v.get("witness"):
            w = v["witness"]
            lines.append(f"  |c| = {w['abs_c']:.12g}   l = {w['l']}")
            lines.append(f"  psi_d = {_fmt_vec(w['psi_d'])}")
            lines.append(f"  chi   = {_fmt_vec(w['chi'])}")
        if v.get("search"):
            s = v["search"]
            lines.append(f"  searched {s['grid_points']} probe directions, {s['feasible_points']} feasible")
    if "closed_form" in report and report["closed_form"]:
        lines.append(f"closed form |c| = {report['closed_form']['abs_c']:.12g}")
    if "optimum" in report:
        o = report["optimum"]
        lines.append(f"alpha_opt = {o['alpha_opt']:.10f}   P_opt = {o['P_opt']:.10f}")
    if "setup" in report:
        s = report["setup"]
        lines.append(f"setup: alpha = {s['alpha']:.10f}  |Delta|^2 = {s['success_probability']:.10f}")
        lines.append(f"  psi_I = {_fmt_vec(s['psi_I'])}")
    if "plan" in report:
        p = report["plan"]
        lines.append(
            f"zeno plan: N = {p['N']}  theta = {p['theta']:.10f}  delta = {p['delta']:.10f}  "
            f"survival = {p['survival_probability']:.10f}"
        )
    for key in ("occupied", "empty"):
        o = report.get("outcomes", {}).get(key)
        if o is None:
            continue
        probs = "  ".join(f"{k}={val:.10f}" for k, val in o["probabilities"].items())
        fid = "" if o["fidelity"] is None else f"  fidelity={o['fidelity']:.12f}"
        lines.append(f"{key:>8}: {probs}{fid}")
    if "point" in report:
        lines.append(f"point: {report['point']}")
    if "success_probability" in report:
        lines.append(f"success probability = {report['success_probability']:.10f}")
    if "error" in report:
        lines.append(f"error: {report['error']}")
    return "\n".join(lines)


def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{re:+.6f}{im:+.6f}j" for re, im in v) + "]"
