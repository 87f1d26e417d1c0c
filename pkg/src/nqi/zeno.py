"""Iterative interrogation: repeated passages with inter-loop projection and
rotation, driving the probe to one of two orthogonal final directions.

Each loop applies the interaction window, projects the probe onto
``span{psi_r, chi}``, rotates that plane by ``+delta`` (``psi_r -> chi``)
and pre-compensates the next free probe evolution. With
``<chi|D|chi> = c I_S`` the occupied box shrinks the ``chi`` amplitude by
``c`` per loop, which the rotation undoes; the empty box accumulates a total
rotation of ``N delta = pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import linalg as la
from .criterion import SearchConfig, probe_grid
from .errors import NoSolution, NormViolation, PlanSpecMismatch
from .model import InterrogationOperator, JointState, SystemSpec, build_interrogation_operator, propagate
from .protocol import OutcomeReport, _branch, _fidelity, sample_counts

ZENO_TOL = 1e-10
PLAN_TOL = 1e-12


@dataclass(frozen=True)
class ZenoPlan:
    """Loop count, preparation angle and per-loop rotation.

    ``cos(theta_prime) = cos(theta) / sqrt(cos^2 theta + |c|^2 sin^2 theta)``
    and ``delta = theta - theta_prime`` with ``N * delta = pi/2``.
    """

    N: int
    theta: float
    theta_prime: float
    delta: float
    c: complex
    survival_probability: float


def _deviation(D: InterrogationOperator, chi: np.ndarray) -> tuple[complex, float]:
    mat = D.sandwich(chi, chi)
    c = complex(np.trace(mat) / D.n)
    return c, la.max_abs(mat - c * np.eye(D.n))


def _refine(D: InterrogationOperator, chi0: np.ndarray) -> np.ndarray:
    m, n = D.m, D.n
    eye = np.eye(n)

    def resid(x):
        chi = x[:m] + 1j * x[m:]
        chi = chi / np.linalg.norm(chi)
        mat = D.sandwich(chi, chi)
        r = (mat - np.trace(mat) / n * eye).reshape(-1)
        return np.concatenate([r.real, r.imag])

    x0 = np.concatenate([chi0.real, chi0.imag])
    sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    chi = sol.x[:m] + 1j * sol.x[m:]
    return chi / np.linalg.norm(chi)


def check_zeno_condition(
    D: InterrogationOperator,
    config: SearchConfig | None = None,
    tol: float = ZENO_TOL,
    refine: int = 8,
):
    """Find a unit ``chi`` in ``H_d`` with ``<chi|D|chi> = c I_S`` and ``c != 1``.

    Grid directions that already satisfy the condition are kept; the
    ``refine`` grid points with the smallest deviation are polished by
    nonlinear least squares. Among accepted candidates the smallest ``|c|``
    wins (it gives the fastest-converging iteration).

    Returns
    -------
    (chi, c) or None
    """
    config = config or SearchConfig()
    grid = probe_grid(D.m, config.magnitude_points, config.phase_points)
    scored = []
    for idx, chi in enumerate(grid):
        c, dev = _deviation(D, chi)
        scored.append((dev, idx, chi, c))

    candidates = [(idx, chi, c) for dev, idx, chi, c in scored if dev <= tol and abs(c - 1) > 1e-8]
    if D.n > 1:
        ranked = sorted((s for s in scored if abs(s[3] - 1) > 1e-3), key=lambda s: (s[0], s[1]))
        for dev, idx, chi, _ in ranked[:refine]:
            if dev <= tol:
                continue
            polished = _refine(D, chi)
            c, dev2 = _deviation(D, polished)
            if dev2 <= tol and abs(c - 1) > 1e-8:
                candidates.append((len(grid) + idx, polished, c))
    if not candidates:
        return None
    _, chi, c = min(candidates, key=lambda t: (round(abs(t[2]), 12), t[0]))
    return chi, c


def _delta(theta: float, cm: float) -> float:
    return theta - math.atan(cm * math.tan(theta))


def plan_zeno(c: complex, N: int, tol: float = PLAN_TOL, max_iter: int = 200) -> ZenoPlan:
    """Solve ``N * (theta - theta'(theta)) = pi/2`` for the preparation angle.

    The per-loop rotation ``delta(theta)`` rises from 0, peaks at
    ``tan(theta) = |c|^(-1/2)`` and falls back to 0 at ``pi/2`` (for
    ``c != 0``); bisection runs on the rising branch, which gives the smaller
    ``theta`` and hence the larger survival probability.

    Raises
    ------
    NoSolution
        If ``|c| >= 1`` or ``N`` is too small for ``pi/(2N)`` to be reachable.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    cm = abs(complex(c))
    if cm >= 1.0 - 1e-12:
        raise NoSolution(f"|c| = {cm:g}: the rotation per loop vanishes")
    target = math.pi / (2 * N)
    if cm == 0.0:
        if N < 2:
            raise NoSolution("N = 1 would need theta = pi/2")
        hi = math.pi / 2
    else:
        hi = math.atan(1.0 / math.sqrt(cm))
        if _delta(hi, cm) < target:
            raise NoSolution(
                f"N = {N} too small for |c| = {cm:g}: max rotation {_delta(hi, cm):.6f} < pi/(2N)"
            )
    lo = 0.0
    theta = 0.5 * (lo + hi)
    for _ in range(max_iter):
        theta = 0.5 * (lo + hi)
        err = N * _delta(theta, cm) - math.pi / 2
        if abs(err) <= tol:
            break
        if err < 0:
            lo = theta
        else:
            hi = theta
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    s2 = cos_t**2 + cm**2 * sin_t**2
    # same angle as acos(cos_t / sqrt(s2)), without the loss near 1
    theta_prime = math.atan(cm * math.tan(theta))
    return ZenoPlan(N, theta, theta_prime, theta - theta_prime, complex(c), s2**N)


def simulate_zeno(
    spec: SystemSpec,
    plan: ZenoPlan,
    chi,
    psi_r,
    object_state,
    occupied: bool,
    trials: int = 0,
    seed: int | None = None,
    D: InterrogationOperator | None = None,
) -> OutcomeReport:
    """Run ``plan.N`` loops with exact state-vector propagation.

    The rotation is real, so the predicted survival
    ``(cos^2 theta + |c|^2 sin^2 theta)^N`` is reached for real
    non-negative ``c``; a complex phase of ``c`` is left uncorrected.

    Outcomes: ``P_I`` is the final probe along
    ``e^{iH_D t}(cos theta psi_r + sin theta chi)`` (object found),
    ``P_e`` along ``e^{iH_D t}(cos(theta + pi/2) psi_r + sin(theta + pi/2) chi)``
    (box empty).

    Raises
    ------
    PlanSpecMismatch
        If ``<chi|D|chi>`` differs from ``plan.c * I`` by more than 1e-8.
    """
    chi_d = la.as_vector(chi, spec.m)
    psi_r = la.as_vector(psi_r, spec.dim_r)
    obj = la.as_vector(object_state, spec.n)
    for label, v in (("chi", chi_d), ("psi_r", psi_r), ("object", obj)):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise NormViolation(f"{label} must be normalized")
    D = D if D is not None else build_interrogation_operator(spec)
    dev = la.max_abs(D.sandwich(chi_d, chi_d) - plan.c * np.eye(spec.n))
    if dev > 1e-8:
        raise PlanSpecMismatch(f"<chi|D|chi> differs from plan.c * I by {dev:.3e}")

    r = spec.embed_probe_r(psi_r)
    x = spec.embed_probe_d(chi_d)
    back = spec.U_probe.conj().T
    plane = np.outer(r, r.conj()) + np.outer(x, x.conj())
    cd, sd = math.cos(plan.delta), math.sin(plan.delta)
    rotation = cd * plane + sd * (np.outer(x, r.conj()) - np.outer(r, x.conj()))
    loop_map = back @ rotation @ plane

    th = plan.theta
    state = JointState.product(spec, back @ (math.cos(th) * r + math.sin(th) * x), obj)
    discarded = 0.0
    for _ in range(plan.N):
        state = propagate(spec, state, occupied)
        amps = state.as_matrix()
        kept = plane @ amps
        lost = amps - kept
        discarded += float(np.vdot(lost, lost).real)
        state = state.replace((loop_map @ amps).reshape(-1))

    amps = state.as_matrix()[:, : spec.n]
    found_dir = back @ (math.cos(th) * r + math.sin(th) * x)
    empty_dir = back @ (math.cos(th + math.pi / 2) * r + math.sin(th + math.pi / 2) * x)
    branch_I = _branch(amps, found_dir)
    branch_e = _branch(amps, empty_dir)
    p_i = float(np.vdot(branch_I, branch_I).real)
    p_e = float(np.vdot(branch_e, branch_e).real)
    probs = {
        "decay": state.leaked_probability,
        "discarded": discarded,
        "P_e": p_e,
        "P_I": p_i,
        "other": max(state.norm2 - p_e - p_i, 0.0),
    }
    u_obj_N = np.linalg.matrix_power(spec.U_object, plan.N)
    fid = _fidelity(branch_I, u_obj_N @ obj)
    cond = branch_I / math.sqrt(p_i) if fid is not None else None
    counts = sample_counts(probs, trials, seed) if trials > 0 else None
    extra = {"predicted_survival": plan.survival_probability if occupied else None}
    return OutcomeReport("zeno", occupied, probs, fid, cond, counts, extra)
