"""Physical setup of a probe/object interrogation and its restricted evolution.

Joint states live on ``H_D (x) H_ext`` with the probe as the major index.
The probe space is ``H_D = H_r (+) H_d``: the first ``dim_r`` probe basis
vectors are the reference branch, the remaining ``m`` the detecting branch.
The extended object space has ``n_ext`` basis vectors of which the first
``n`` span the metastable space ``H_S``; the trailing ``n_ext - n`` vectors
are short-lived levels whose population is counted as decay.

hbar = 1: Hamiltonian entries are angular frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, InvalidSystem, NormViolation

NORM_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Dimensions, Hamiltonians and interaction time of an interrogation.

    Attributes
    ----------
    n : int
        Dimension of the object space ``H_S``.
    n_ext : int
        Dimension of ``H_S (+) H_S^perp``; the last ``n_ext - n`` levels decay.
    m : int
        Dimension of the detecting branch ``H_d``.
    dim_r : int
        Dimension of the reference branch ``H_r``.
    H_S : ndarray, (n_ext, n_ext)
        Free object Hamiltonian.
    H_D : ndarray, (dim_r + m, dim_r + m)
        Free probe Hamiltonian.
    H_I : ndarray, ((dim_r + m) * n_ext, (dim_r + m) * n_ext)
        Interaction Hamiltonian; must vanish on the reference branch.
    t : float
        Interaction duration.
    name : str
        Free-form label carried into reports.
    """

    n: int
    n_ext: int
    m: int
    dim_r: int
    H_S: np.ndarray
    H_D: np.ndarray
    H_I: np.ndarray
    t: float
    name: str = "custom"
    herm_tol: float = field(default=la.TOL_HERM, repr=False)

    def __post_init__(self):
        for attr in ("H_S", "H_D", "H_I"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        if not (1 <= self.n <= self.n_ext):
            raise InvalidSystem(f"need 1 <= n <= n_ext, got n={self.n}, n_ext={self.n_ext}")
        if self.m < 1 or self.dim_r < 1:
            raise InvalidSystem(f"need m >= 1 and dim_r >= 1, got m={self.m}, dim_r={self.dim_r}")
        if not (np.isfinite(self.t) and self.t > 0):
            raise InvalidSystem(f"interaction time must be positive, got {self.t}")
        for attr, dim in (("H_S", self.n_ext), ("H_D", self.dim_D), ("H_I", self.dim_joint)):
            h = getattr(self, attr)
            if h.shape != (dim, dim):
                raise DimensionMismatch(f"{attr} must have shape {(dim, dim)}, got {h.shape}")
            la.check_hermitian(h, self.herm_tol, attr)

        tol = self.herm_tol * max(1.0, la.max_abs(self.H_I))
        hi = self.H_I.reshape(self.dim_D, self.n_ext, self.dim_D, self.n_ext)
        r = self.dim_r
        if la.max_abs(hi[:r]) > tol or la.max_abs(hi[:, :, :r]) > tol:
            raise InvalidSystem("H_I must act as zero on the reference branch H_r")
        if la.max_abs(self.H_D[:r, r:]) > self.herm_tol * max(1.0, la.max_abs(self.H_D)):
            raise InvalidSystem("H_D must not couple H_r and H_d")
        if la.max_abs(self.H_S[: self.n, self.n :]) > self.herm_tol * max(1.0, la.max_abs(self.H_S)):
            raise InvalidSystem("H_S must not couple H_S to its decaying complement")

    @property
    def dim_D(self) -> int:
        return self.dim_r + self.m

    @property
    def dim_joint(self) -> int:
        return self.dim_D * self.n_ext

    @cached_property
    def H_free(self) -> np.ndarray:
        return la.tensor(self.H_D, np.eye(self.n_ext)) + la.tensor(np.eye(self.dim_D), self.H_S)

    @cached_property
    def U_free(self) -> np.ndarray:
        """``exp(-i (H_D + H_S) t)`` on the joint space."""
        return la.expm_hermitian_propagator(self.H_free, self.t)

    @cached_property
    def U_full(self) -> np.ndarray:
        """``exp(-i (H_D + H_S + H_I) t)`` on the joint space."""
        return la.expm_hermitian_propagator(self.H_free + self.H_I, self.t)

    @cached_property
    def U_probe(self) -> np.ndarray:
        """``exp(-i H_D t)`` on the probe alone."""
        return la.expm_hermitian_propagator(self.H_D, self.t)

    @cached_property
    def U_object(self) -> np.ndarray:
        """``exp(-i H_S t)`` restricted to ``H_S``."""
        return la.expm_hermitian_propagator(self.H_S, self.t)[: self.n, : self.n]

    @cached_property
    def dS_indices(self) -> np.ndarray:
        """Joint-space indices of ``H_d (x) H_S``, probe-major."""
        return np.array(
            [p * self.n_ext + s for p in range(self.dim_r, self.dim_D) for s in range(self.n)],
            dtype=int,
        )

    @cached_property
    def DS_indices(self) -> np.ndarray:
        """Joint-space indices of ``H_D (x) H_S`` (the non-decayed subspace)."""
        return np.array(
            [p * self.n_ext + s for p in range(self.dim_D) for s in range(self.n)], dtype=int
        )

    def embed_probe_d(self, v) -> np.ndarray:
        """Lift a vector on ``H_d`` into ``H_D``."""
        out = np.zeros(self.dim_D, dtype=complex)
        out[self.dim_r :] = la.as_vector(v, self.m)
        return out

    def embed_probe_r(self, v) -> np.ndarray:
        """Lift a vector on ``H_r`` into ``H_D``."""
        out = np.zeros(self.dim_D, dtype=complex)
        out[: self.dim_r] = la.as_vector(v, self.dim_r)
        return out

    def embed_object(self, v) -> np.ndarray:
        out = np.zeros(self.n_ext, dtype=complex)
        out[: self.n] = la.as_vector(v, self.n)
        return out

    def with_time(self, t: float) -> "SystemSpec":
        return replace(self, t=t)


@dataclass(frozen=True, eq=False)
class InterrogationOperator:
    """Restricted interaction-picture evolution on ``H_d (x) H_S``.

    ``matrix[(i, k), (j, l)]`` is the coefficient of ``|i>|k><l|<j|`` with
    ``i, j`` indexing ``H_d`` and ``k, l`` indexing ``H_S``.
    """

    matrix: np.ndarray
    m: int
    n: int
    spec: SystemSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        if self.matrix.shape != (self.m * self.n, self.m * self.n):
            raise DimensionMismatch(
                f"operator shape {self.matrix.shape} inconsistent with m={self.m}, n={self.n}"
            )

    @property
    def source(self) -> str:
        return self.spec.name if self.spec is not None else "matrix"

    @cached_property
    def tensor4(self) -> np.ndarray:
        """``d[i, k, j, l]`` view of the matrix."""
        return self.matrix.reshape(self.m, self.n, self.m, self.n)

    def sandwich(self, bra, ket) -> np.ndarray:
        """``<bra|D|ket>`` as an operator on ``H_S`` (bra is not conjugated by caller)."""
        bra = la.as_vector(bra, self.m)
        ket = la.as_vector(ket, self.m)
        return np.einsum("i,ikjl,j->kl", bra.conj(), self.tensor4, ket)

    def apply(self, psi_d, psi_s) -> np.ndarray:
        """``D |psi_d>|psi_s>`` as a flat vector on ``H_d (x) H_S``."""
        return self.matrix @ la.tensor(la.as_vector(psi_d, self.m), la.as_vector(psi_s, self.n))

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    @classmethod
    def from_matrix(cls, matrix, m: int, n: int) -> "InterrogationOperator":
        return cls(np.asarray(matrix, dtype=complex), m, n)


def build_interrogation_operator(spec: SystemSpec) -> InterrogationOperator:
    """Restrict ``exp(-i(H0+H_I)t) exp(+i H0 t)`` to ``H_d (x) H_S``."""
    u0_inv = la.expm_hermitian_propagator(spec.H_free, spec.t, sign=-1)
    block = spec.U_full @ u0_inv
    idx = spec.dS_indices
    return InterrogationOperator(block[np.ix_(idx, idx)], spec.m, spec.n, spec)


@dataclass(frozen=True, eq=False)
class JointState:
    """Unnormalized non-decayed branch plus the probability already lost to decay.

    ``amplitudes`` is a flat vector on ``H_D (x) H_ext`` (probe-major).
    """

    amplitudes: np.ndarray
    leaked_probability: float
    dim_D: int
    n_ext: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(la.as_vector(self.amplitudes)))
        if self.amplitudes.shape[0] != self.dim_D * self.n_ext:
            raise DimensionMismatch("amplitude vector does not match dim_D * n_ext")

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def total_probability(self) -> float:
        return self.norm2 + self.leaked_probability

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``(dim_D, n_ext)``."""
        return self.amplitudes.reshape(self.dim_D, self.n_ext)

    def replace(self, amplitudes=None, leaked_probability=None) -> "JointState":
        return JointState(
            self.amplitudes if amplitudes is None else amplitudes,
            self.leaked_probability if leaked_probability is None else leaked_probability,
            self.dim_D,
            self.n_ext,
            self.n,
        )

    @classmethod
    def product(cls, spec: SystemSpec, probe, obj) -> "JointState":
        probe = la.as_vector(probe, spec.dim_D)
        obj = la.as_vector(obj)
        if obj.shape[0] == spec.n:
            obj = spec.embed_object(obj)
        elif obj.shape[0] != spec.n_ext:
            raise DimensionMismatch(f"object vector must have length {spec.n} or {spec.n_ext}")
        return cls(la.tensor(probe, obj), 0.0, spec.dim_D, spec.n_ext, spec.n)


def apply_nondecay_projection(state: JointState) -> JointState:
    """Zero the amplitude on decaying object levels and book it as leaked.

    The surviving branch is deliberately left unnormalized.
    """
    amps = state.as_matrix().copy()
    tail = amps[:, state.n :]
    lost = float(np.vdot(tail, tail).real)
    amps[:, state.n :] = 0.0
    return state.replace(amps.reshape(-1), state.leaked_probability + lost)


def propagate(spec: SystemSpec, state: JointState, occupied: bool) -> JointState:
    """One passage of the probe: free evolution if the box is empty, otherwise
    interaction followed by the non-decay projection."""
    if not occupied:
        return state.replace(spec.U_free @ state.amplitudes)
    evolved = state.replace(spec.U_full @ state.amplitudes)
    return apply_nondecay_projection(evolved)


def evolve_joint(spec: SystemSpec, probe, obj, occupied: bool) -> JointState:
    """Evolve ``|probe>|obj>`` through one interaction window.

    Parameters
    ----------
    probe : array_like, (dim_D,)
        Initial probe state on ``H_r (+) H_d``.
    obj : array_like, (n,)
        Initial object state on ``H_S``.
    occupied : bool
        Whether the object is in the box.
    """
    probe = la.as_vector(probe, spec.dim_D)
    obj = la.as_vector(obj, spec.n)
    for label, v in (("probe", probe), ("object", obj)):
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise NormViolation(f"{label} state must be normalized, |v| = {np.linalg.norm(v):.12f}")
    return propagate(spec, JointState.product(spec, probe, obj), occupied)
