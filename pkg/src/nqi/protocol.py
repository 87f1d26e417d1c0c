"""Single-shot interrogation: measurement construction, success probability,
probe-split optimization and exact outcome simulation.

Probe vectors here live on ``H_D = H_r (+) H_d`` (reference components
first). Phases of ``alpha`` and ``beta`` are fixed real and non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .criterion import CriterionVerdict, Witness
from .errors import DegenerateAlpha, InfeasibleWitness, NormViolation
from .model import JointState, SystemSpec, propagate

GS_TOL = 1e-10
ALPHA_MAX = 1.0 - 1e-9
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(eq=False)
class MeasurementSetup:
    """Probe split and final projectors for one witness.

    ``p_e_vector`` is the probe direction reached when the box is empty,
    ``alpha Psi_r' + beta Psi_d'``; ``psi_I`` the success direction. All
    probe-space vectors are embedded in ``H_D``.
    """

    alpha: float
    beta: float
    c: complex
    psi_r: np.ndarray
    psi_r_prime: np.ndarray
    psi_d_prime: np.ndarray
    chi: np.ndarray
    chi_perp: np.ndarray
    p_e_vector: np.ndarray
    psi_I: np.ndarray
    delta_amp: complex
    initial_probe: np.ndarray

    @property
    def success_probability(self) -> float:
        return abs(self.delta_amp) ** 2

    def projector_e(self, n: int) -> np.ndarray:
        return la.tensor(np.outer(self.p_e_vector, self.p_e_vector.conj()), np.eye(n))

    def projector_I(self, n: int) -> np.ndarray:
        return la.tensor(np.outer(self.psi_I, self.psi_I.conj()), np.eye(n))


def _as_witness(witness) -> Witness:
    if isinstance(witness, CriterionVerdict):
        if not witness.feasible:
            raise InfeasibleWitness(f"verdict is infeasible ({witness.failure_reason})")
        return witness.witness
    if witness is None:
        raise InfeasibleWitness("no witness")
    return witness


def _embed_d(dim_r: int, v: np.ndarray) -> np.ndarray:
    return np.concatenate([np.zeros(dim_r, dtype=complex), v])


def construct_measurement(witness, alpha: float, psi_r, spec: SystemSpec | None = None) -> MeasurementSetup:
    """Build the success projector by ordered Gram-Schmidt.

    The fixed set is ``{chi_j}``; the candidates are, in order,
    ``alpha Psi_r' + beta Psi_d'`` and then ``alpha Psi_r' + c beta chi``.
    The second one, once orthogonalized, is the success direction, and its
    overlap with the un-orthogonalized candidate is the success amplitude.

    Parameters
    ----------
    witness : Witness or feasible CriterionVerdict
    alpha : float
        Reference-branch amplitude in ``[0, 1)``.
    psi_r : array_like, (dim_r,)
        Unit reference-branch state before the interaction window.
    spec : SystemSpec, optional
        Source of the free probe evolution; defaults to the ``SystemSpec`` attached to
        the witness operator. Without one, the free evolution is the identity.

    Raises
    ------
    DegenerateAlpha
        When the success candidate depends linearly on the fixed set and the
        empty-box direction (zero success amplitude).
    """
    w = _as_witness(witness)
    alpha = float(alpha)
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    beta = math.sqrt(1.0 - alpha * alpha)
    psi_r = la.as_vector(psi_r)
    if abs(np.linalg.norm(psi_r) - 1.0) > 1e-10:
        raise NormViolation("psi_r must be normalized")
    dim_r = psi_r.shape[0]
    spec = spec if spec is not None else w.operator.spec

    if spec is not None:
        u_probe = spec.U_probe
        psi_r_prime = u_probe @ spec.embed_probe_r(psi_r)
    else:
        u_probe = np.eye(dim_r + w.operator.m, dtype=complex)
        psi_r_prime = np.concatenate([psi_r, np.zeros(w.operator.m, dtype=complex)])
    psi_d_prime = _embed_d(dim_r, w.psi_d)
    chi = _embed_d(dim_r, w.chi)
    chi_perp = np.vstack([np.zeros((dim_r, w.decomposition.chi_perp.shape[1])), w.decomposition.chi_perp])

    empty_dir = alpha * psi_r_prime + beta * psi_d_prime
    success_dir = alpha * psi_r_prime + w.c * beta * chi
    norm_s = np.linalg.norm(success_dir)
    cand = success_dir / norm_s if norm_s > GS_TOL else success_dir

    new, skipped = la.gram_schmidt_extend(chi_perp, [empty_dir, cand], tol=GS_TOL)
    if 1 in skipped:
        raise DegenerateAlpha(
            f"success candidate is dependent at alpha={alpha:g}; the success amplitude vanishes"
        )
    psi_I = new[-1]
    delta = complex(np.vdot(psi_I, success_dir))
    return MeasurementSetup(
        alpha=alpha,
        beta=beta,
        c=w.c,
        psi_r=psi_r,
        psi_r_prime=psi_r_prime,
        psi_d_prime=psi_d_prime,
        chi=chi,
        chi_perp=chi_perp,
        p_e_vector=empty_dir,
        psi_I=psi_I,
        delta_amp=delta,
        initial_probe=u_probe.conj().T @ empty_dir,
    )


def success_probability(setup: MeasurementSetup, witness=None) -> float:
    """``|<Psi_I|(alpha Psi_r' + c beta chi)>|^2``."""
    c = setup.c if witness is None else _as_witness(witness).c
    amp = np.vdot(setup.psi_I, setup.alpha * setup.psi_r_prime + c * setup.beta * setup.chi)
    return float(abs(amp) ** 2)


def probability_at(witness, psi_r, alpha: float, spec: SystemSpec | None = None) -> float:
    """Success probability at a given split; zero where the construction degenerates."""
    try:
        return construct_measurement(witness, alpha, psi_r, spec).success_probability
    except DegenerateAlpha:
        return 0.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    x1 = b - INVPHI * (b - a)
    x2 = a + INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INVPHI * (b - a)
            f2 = f(x2)
    best = max(((x1, f1), (x2, f2), (a, f(a)), (b, f(b))), key=lambda p: p[1])
    return best


def optimize_alpha(witness, psi_r, resolution: int = 64, spec: SystemSpec | None = None) -> tuple[float, float]:
    """Best probe split for a fixed witness.

    A coarse scan of ``resolution`` points over ``[0, 1 - 1e-9]`` brackets
    the maximum, which golden-section search then refines.

    Returns
    -------
    alpha_opt, P_opt : float
    """
    w = _as_witness(witness)

    def f(a):
        return probability_at(w, psi_r, a, spec)

    xs = np.linspace(0.0, ALPHA_MAX, resolution)
    vals = [f(x) for x in xs]
    k = int(np.argmax(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, resolution - 1)]
    x, fx = golden_section_max(f, lo, hi)
    if vals[k] > fx:
        x, fx = float(xs[k]), vals[k]
    return float(x), float(fx)


@dataclass(eq=False)
class OutcomeReport:
    """Exact outcome distribution of one protocol run.

    ``probabilities`` maps outcome labels to probabilities: ``decay`` (a
    decay signal during an interaction), ``P_e`` (empty-box signature),
    ``P_I`` (successful interrogation), ``other`` and, for iterative runs,
    ``discarded`` (inter-loop projection failures). ``fidelity`` compares the
    object state conditioned on ``P_I`` with its freely evolved initial
    state.
    """

    mode: str
    occupied: bool
    probabilities: dict[str, float]
    fidelity: float | None = None
    conditional_object_state: np.ndarray | None = None
    counts: dict[str, int] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(self.probabilities.values())


def _branch(amps: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Object-space vector ``(<direction| (x) I) |amps>`` for amps shaped (dim_D, n_ext)."""
    return direction.conj() @ amps


def _fidelity(branch: np.ndarray, target: np.ndarray) -> float | None:
    nrm2 = float(np.vdot(branch, branch).real)
    if nrm2 <= 1e-300:
        return None
    return float(abs(np.vdot(target, branch)) ** 2 / nrm2)


def sample_counts(probabilities: dict[str, float], trials: int, seed: int | None) -> dict[str, int]:
    labels = list(probabilities)
    p = np.clip(np.array([probabilities[k] for k in labels]), 0.0, None)
    draws = np.random.default_rng(seed).multinomial(trials, p / p.sum())
    return dict(zip(labels, (int(x) for x in draws)))


def simulate_single_shot(
    spec: SystemSpec,
    setup: MeasurementSetup,
    object_state,
    occupied: bool,
    trials: int = 0,
    seed: int | None = None,
) -> OutcomeReport:
    """Evolve the prepared probe with the object, apply the decay projection
    and read out ``{decay, P_e, P_I, other}`` exactly.

    With ``trials > 0`` multinomial counts are drawn from the exact
    distribution as well.
    """
    obj = la.as_vector(object_state, spec.n)
    if abs(np.linalg.norm(obj) - 1.0) > 1e-10:
        raise NormViolation("object state must be normalized")
    state = propagate(spec, JointState.product(spec, setup.initial_probe, obj), occupied)
    amps = state.as_matrix()[:, : spec.n]

    branch_e = _branch(amps, setup.p_e_vector)
    branch_I = _branch(amps, setup.psi_I)
    p_e = float(np.vdot(branch_e, branch_e).real)
    p_i = float(np.vdot(branch_I, branch_I).real)
    probs = {
        "decay": state.leaked_probability,
        "P_e": p_e,
        "P_I": p_i,
        "other": max(state.norm2 - p_e - p_i, 0.0),
    }
    target = spec.U_object @ obj
    fid = _fidelity(branch_I, target)
    cond = branch_I / math.sqrt(p_i) if fid is not None else None
    counts = sample_counts(probs, trials, seed) if trials > 0 else None
    return OutcomeReport("single", occupied, probs, fid, cond, counts)
