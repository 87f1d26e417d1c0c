"""Single-shot feasibility: witness equation, kernel compaction and the
linear-independence clause.

A *witness* is a pair of unit vectors ``(psi_d, chi)`` on ``H_d`` and a
scalar ``c`` with ``<chi|D|psi_d> = c * I_S``. Writing
``<chi| = sum_i a_i <i|`` and ``|psi_d> = sum_j b_j |j>`` turns the witness
equation into the linear system ``sum_i a_i R[i; k, l] = c delta_kl`` with
``R[i; k, l] = sum_j d[i, j; k, l] b_j``.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, WitnessEquationViolated
from .model import InterrogationOperator

log = logging.getLogger(__name__)

TOL_LIN = 1e-8
TOL_WITNESS = 1e-8


class FailureReason(str, Enum):
    NO_SOLUTION = "NoSolutionToLinearSystem"
    LINEAR_DEPENDENCE = "LinearDependenceClauseFailed"
    DEGENERATE_C = "DegenerateC"


@dataclass(frozen=True)
class SearchConfig:
    """Grid over probe directions ``b`` on the unit sphere of ``H_d``.

    Squared magnitudes run over a simplex lattice with ``magnitude_points``
    points per direction; every component after the first gets
    ``phase_points`` relative phases. ``extra_random`` adds seeded random
    directions after the lattice.
    """

    magnitude_points: int = 21
    phase_points: int = 8
    tol_rel: float = la.TOL_REL
    tol_lin: float = TOL_LIN
    tol_witness: float = TOL_WITNESS
    extra_random: int = 0
    seed: int = 0
    workers: int = 1


@dataclass(eq=False)
class CompactDecomposition:
    """``D|psi_d>|s> = c|chi>|s> + sum_j |chi_j> (M_j |s>)`` over the
    complement of the common kernel.

    ``chi_perp`` holds the ``chi_j`` as columns; ``m_S`` the operators
    ``M_j = <chi_j|D|psi_d>`` so that ``|m_S(j)> = M_j |s>``. ``kernel`` and
    ``kbar`` are orthonormal bases (columns) of the common kernel ``K`` of
    the ``Q`` operators and of its complement; ``l = kbar.shape[1]``.
    When ``c = 0`` the vector ``chi`` lies in ``K`` and ``chi_perp`` spans
    all of the complement.
    """

    psi_d: np.ndarray
    chi: np.ndarray
    c: complex
    chi_perp: np.ndarray
    m_S: list[np.ndarray]
    kernel: np.ndarray
    kbar: np.ndarray

    @property
    def l(self) -> int:
        return self.kbar.shape[1]

    def reconstruct(self, psi_s) -> np.ndarray:
        psi_s = la.as_vector(psi_s)
        out = self.c * la.tensor(self.chi, psi_s)
        for j in range(self.chi_perp.shape[1]):
            out = out + la.tensor(self.chi_perp[:, j], self.m_S[j] @ psi_s)
        return out


@dataclass(eq=False)
class Witness:
    psi_d: np.ndarray
    chi: np.ndarray
    c: complex
    decomposition: CompactDecomposition
    operator: InterrogationOperator

    @property
    def a(self) -> np.ndarray:
        """Coefficients with ``<chi| = sum_i a_i <i|``."""
        return self.chi.conj()


@dataclass(frozen=True)
class SearchRecord:
    b: np.ndarray
    c: complex | None
    rank_R: int
    rank_aug: int
    feasible: bool
    reason: FailureReason | None


@dataclass(eq=False)
class CriterionVerdict:
    feasible: bool
    witness: Witness | None = None
    failure_reason: FailureReason | None = None
    search_log: list[SearchRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.feasible and self.witness is None:
            raise ValueError("a feasible verdict needs a witness")


@dataclass(frozen=True)
class LinearSolve:
    """Outcome of the ``c != 0`` linear system for one probe direction."""

    a: np.ndarray | None
    c: complex | None
    rank_R: int
    rank_aug: int
    degenerate: bool = False


def response_matrix(D: InterrogationOperator, b) -> np.ndarray:
    """``R`` transposed: rows indexed by ``(k, l)``, columns by ``i``."""
    b = la.as_vector(b, D.m)
    return np.einsum("ikjl,j->kli", D.tensor4, b).reshape(D.n * D.n, D.m)


def compute_Q_operators(D: InterrogationOperator, psi_d) -> list[np.ndarray]:
    """``Q_i = Tr_S[D (|psi_d><psi_d| (x) |i><i|) D^+]`` for each object basis vector."""
    psi_d = la.as_vector(psi_d, D.m)
    qs = []
    for i in range(D.n):
        e = np.zeros(D.n, dtype=complex)
        e[i] = 1.0
        v = D.apply(psi_d, e)
        qs.append(la.partial_trace_S(np.outer(v, v.conj()), (D.m, D.n)))
    return qs


def kernel_intersection(qs: list[np.ndarray], tol_rel: float = la.TOL_REL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of ``K = intersection of ker(Q_i)`` and its complement.

    The kernel is narrowed one operator at a time by restricting each ``Q_i``
    to the current candidate subspace. Operators built from a unit probe
    state have trace at most one, so the tolerance scale is floored at 1.
    """
    if not qs:
        raise ValueError("need at least one Q operator")
    m = qs[0].shape[0]
    if any(q.shape != (m, m) for q in qs):
        raise DimensionMismatch("Q operators must all be m x m")
    scale = max(max(la.max_abs(q) for q in qs), 1.0)
    basis = np.eye(m, dtype=complex)
    for q in qs:
        if basis.shape[1] == 0:
            break
        restricted = q @ basis
        if la.max_abs(restricted) <= tol_rel * scale:
            continue
        coeffs = la.null_space(restricted, tol_rel, scale)
        basis = basis @ coeffs
    if basis.shape[1]:
        basis, _ = np.linalg.qr(basis)
    return basis, la.orthogonal_complement(basis, m, tol_rel)


def _solve_linear_system(D: InterrogationOperator, b, tol_rel: float) -> LinearSolve:
    rt = response_matrix(D, b)
    rhs = np.eye(D.n, dtype=complex).reshape(-1)
    # D is a contraction, so |vec I| sets the scale for both rank tests
    scale = float(np.linalg.norm(rhs))
    rank_r = la.rank(rt, tol_rel, scale)
    rank_aug = la.rank(np.column_stack([rt, rhs]), tol_rel, scale)
    if rank_r != rank_aug or rank_r == 0:
        return LinearSolve(None, None, rank_r, rank_aug)
    a, *_ = np.linalg.lstsq(rt, rhs, rcond=None)
    if np.linalg.norm(rt @ a - rhs) > 1e-8 * np.sqrt(D.n):
        return LinearSolve(None, None, rank_r, rank_aug)
    norm_a = np.linalg.norm(a)
    c = 1.0 / norm_a
    # c is fixed real positive; |c| <= 1 holds for any contraction
    degenerate = not np.isfinite(c) or c > 1.0 + 1e-9
    return LinearSolve(a / norm_a, complex(c), rank_r, rank_aug, degenerate)


def solve_chi_for_fixed_b(D: InterrogationOperator, b, tol_rel: float = la.TOL_REL):
    """Solve the witness equation for ``chi`` at a fixed probe direction ``b``.

    The system is homogeneous in ``(a, c)``; it is solved by least squares at
    ``c = 1`` after the rank test of the coefficient matrix against its
    augmentation, then rescaled so that ``chi`` is a unit vector. The
    minimum-norm solution is taken, which maximizes ``|c|`` when ``a`` is
    not unique.

    Returns
    -------
    (a, c) or None
        ``a`` unit-norm with ``<chi| = sum_i a_i <i|``; ``c`` real and
        positive. ``None`` when no solution with ``c != 0`` exists.
    """
    sol = _solve_linear_system(D, b, tol_rel)
    if sol.a is None or sol.degenerate:
        return None
    return sol.a, sol.c


def kernel_witness(D: InterrogationOperator, psi_d, tol_rel: float = la.TOL_REL, tol_lin: float = TOL_LIN):
    """``c = 0`` witness: ``chi`` along the part of ``psi_d`` inside the common kernel.

    Any ``chi`` in the kernel satisfies the witness equation with ``c = 0``;
    the component of ``psi_d`` there is the choice that can pass the
    independence clause. Returns ``None`` when that component is below
    ``tol_lin``.
    """
    psi_d = la.as_vector(psi_d, D.m)
    kernel, _ = kernel_intersection(compute_Q_operators(D, psi_d), tol_rel)
    if kernel.shape[1] == 0:
        return None
    proj = kernel @ (kernel.conj().T @ psi_d)
    nrm = np.linalg.norm(proj)
    if nrm <= tol_lin:
        return None
    return proj / nrm, 0j


def check_theorem1(
    D: InterrogationOperator,
    psi_d,
    chi,
    c: complex,
    tol_lin: float = TOL_LIN,
    tol_rel: float = la.TOL_REL,
    tol_witness: float = TOL_WITNESS,
) -> CriterionVerdict:
    """Build the compact decomposition for a witness and test independence.

    For ``c != 0`` the witness vector is first replaced by its normalized
    projection onto the complement of the common kernel (``c`` rescales
    accordingly); components inside the kernel never contribute to
    ``<chi|D|psi_d>``.

    The verdict is feasible iff ``psi_d - c chi`` keeps a component of norm
    above ``tol_lin`` after projecting out ``span{chi_j}``.

    Raises
    ------
    WitnessEquationViolated
        If ``<chi|D|psi_d>`` differs from ``c I`` by more than ``tol_witness``.
    """
    psi_d = la.as_vector(psi_d, D.m)
    chi = la.as_vector(chi, D.m)
    c = complex(c)
    dev = la.max_abs(D.sandwich(chi, psi_d) - c * np.eye(D.n))
    if dev > tol_witness:
        raise WitnessEquationViolated(f"<chi|D|psi_d> deviates from c*I by {dev:.3e}")

    kernel, kbar = kernel_intersection(compute_Q_operators(D, psi_d), tol_rel)
    if abs(c) > tol_lin:
        proj = kbar @ (kbar.conj().T @ chi)
        s = np.linalg.norm(proj)
        chi, c = proj / s, c / s
    if abs(c) > 1.0 + 1e-9:
        return CriterionVerdict(False, failure_reason=FailureReason.DEGENERATE_C)

    new, _ = la.gram_schmidt_extend([chi], [kbar[:, j] for j in range(kbar.shape[1])], tol=1e-8)
    chi_perp = np.column_stack(new) if new else np.zeros((D.m, 0), dtype=complex)
    m_S = [D.sandwich(chi_perp[:, j], psi_d) for j in range(chi_perp.shape[1])]
    decomposition = CompactDecomposition(psi_d, chi, c, chi_perp, m_S, kernel, kbar)

    r = psi_d - c * chi
    r_perp = r - chi_perp @ (chi_perp.conj().T @ r)
    if np.linalg.norm(r_perp) <= tol_lin:
        return CriterionVerdict(False, failure_reason=FailureReason.LINEAR_DEPENDENCE)
    return CriterionVerdict(True, Witness(psi_d, chi, c, decomposition, D))


def probe_grid(m: int, magnitude_points: int = 21, phase_points: int = 8) -> list[np.ndarray]:
    """Deterministic unit vectors: simplex lattice of |b_j|^2 times a phase lattice.

    The first nonzero component is kept real and non-negative (global phase).
    """
    if magnitude_points < 2 or phase_points < 1:
        raise ValueError("need magnitude_points >= 2 and phase_points >= 1")
    steps = magnitude_points - 1
    out = []
    for comp in itertools.product(range(steps + 1), repeat=m):
        if sum(comp) != steps:
            continue
        mags = np.sqrt(np.array(comp, dtype=float) / steps)
        nz = [j for j in range(m) if comp[j] > 0]
        free = nz[1:]
        for phases in itertools.product(range(phase_points), repeat=len(free)):
            b = mags.astype(complex)
            for j, q in zip(free, phases):
                b[j] *= np.exp(2j * np.pi * q / phase_points)
            out.append(b)
    return out


def evaluate_probe(D: InterrogationOperator, b, config: SearchConfig) -> tuple[SearchRecord, CriterionVerdict]:
    b = la.as_vector(b, D.m)
    sol = _solve_linear_system(D, b, config.tol_rel)
    if sol.a is not None and sol.degenerate:
        verdict = CriterionVerdict(False, failure_reason=FailureReason.DEGENERATE_C)
    elif sol.a is not None:
        verdict = check_theorem1(D, b, sol.a.conj(), sol.c, config.tol_lin, config.tol_rel, config.tol_witness)
    else:
        kw = kernel_witness(D, b, config.tol_rel, config.tol_lin)
        if kw is None:
            verdict = CriterionVerdict(False, failure_reason=FailureReason.NO_SOLUTION)
        else:
            verdict = check_theorem1(D, b, kw[0], kw[1], config.tol_lin, config.tol_rel, config.tol_witness)
    c = verdict.witness.c if verdict.feasible else sol.c
    record = SearchRecord(b, c, sol.rank_R, sol.rank_aug, verdict.feasible, verdict.failure_reason)
    return record, verdict


def search_feasible_probe(D: InterrogationOperator, config: SearchConfig | None = None) -> CriterionVerdict:
    """Scan probe directions for a witness passing the independence clause.

    Every grid point is evaluated and logged. Among feasible points the one
    with the largest ``|c|`` is kept (earliest grid index on ties). The scan
    is a heuristic: an infeasible verdict means no grid point qualified.
    """
    config = config or SearchConfig()
    grid = probe_grid(D.m, config.magnitude_points, config.phase_points)
    if config.extra_random:
        rng = np.random.default_rng(config.seed)
        grid += [la.random_unit_vector(D.m, rng) for _ in range(config.extra_random)]

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(lambda b: evaluate_probe(D, b, config), grid))
    else:
        results = [evaluate_probe(D, b, config) for b in grid]

    records = [r for r, _ in results]
    best = None
    for _, verdict in results:
        if verdict.feasible and (best is None or abs(verdict.witness.c) > abs(best.witness.c) + 1e-12):
            best = verdict
    log.debug("searched %d probe directions, %d feasible", len(grid), sum(r.feasible for r in records))
    if best is not None:
        return CriterionVerdict(True, best.witness, None, records)

    reasons = {r.reason for r in records}
    for reason in (FailureReason.LINEAR_DEPENDENCE, FailureReason.DEGENERATE_C):
        if reason in reasons:
            return CriterionVerdict(False, failure_reason=reason, search_log=records)
    return CriterionVerdict(False, failure_reason=FailureReason.NO_SOLUTION, search_log=records)
