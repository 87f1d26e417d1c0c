"""Resonant two-channel Jaynes-Cummings atom as a ready-made system.

An atom in a superposition of two degenerate metastable levels ``|m+>`` and
``|m->`` absorbs a ``+`` (``-``) circularly polarized photon into ``|e+>``
(``|e->``), which then decays. Only the one-excitation sector matters.

Embedding into the probe (x) object product used by :mod:`nqi.model`:

* probe basis ``[r, +, -]``: a reference mode that never meets the atom,
  then the two polarizations (``H_d``, ``m = 2``);
* object basis ``[m+, m-, e+, e-]`` (``n = 2``, ``n_ext = 4``);
* the absorbed state ``|e k>|0>`` is stored as ``|k> (x) |e k>``, i.e.
  labelled by the photon it came from.

With this labelling every state of the sector carries energy ``omega``,
placed on the probe as ``H_D = omega * I``; ``H_S = 0``. ``omega`` is then a
global phase only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .criterion import check_theorem1
from .model import SystemSpec, build_interrogation_operator

PROBE_LABELS = ("r", "+", "-")
OBJECT_LABELS = ("m+", "m-", "e+", "e-")
POTTING_P_OPT = 1.0 / 16.0


@dataclass(frozen=True)
class AtomParams:
    g_plus: float
    g_minus: float
    t: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if self.g_plus < 0 or self.g_minus < 0:
            raise ValueError("couplings must be non-negative")
        if not self.t > 0:
            raise ValueError("interaction time must be positive")

    @property
    def p_plus(self) -> float:
        return math.cos(self.g_plus * self.t)

    @property
    def p_minus(self) -> float:
        return math.cos(self.g_minus * self.t)

    @classmethod
    def from_p(cls, p_plus: float, p_minus: float | None = None, t: float = 1.0, omega: float = 0.0):
        """Couplings giving ``cos(g t) = p`` with ``g t`` in ``[0, pi]``."""
        p_minus = p_plus if p_minus is None else p_minus
        for p in (p_plus, p_minus):
            if not -1.0 <= p <= 1.0:
                raise ValueError(f"p must lie in [-1, 1], got {p}")
        return cls(math.acos(p_plus) / t, math.acos(p_minus) / t, t, omega)


def _joint(p: int, s: int) -> int:
    return p * 4 + s


def build_atom_spec(params: AtomParams) -> SystemSpec:
    h_i = np.zeros((12, 12), dtype=complex)
    for k, g in ((1, params.g_plus), (2, params.g_minus)):
        ground, excited = _joint(k, k - 1), _joint(k, k + 1)
        h_i[excited, ground] = h_i[ground, excited] = g
    return SystemSpec(
        n=2,
        n_ext=4,
        m=2,
        dim_r=1,
        H_S=np.zeros((4, 4)),
        H_D=params.omega * np.eye(3),
        H_I=h_i,
        t=params.t,
        name="atom",
    )


def expected_operator(params: AtomParams) -> np.ndarray:
    """Closed-form restricted evolution, basis ``|+,m+>, |+,m->, |-,m+>, |-,m->``."""
    return np.diag([params.p_plus, 1.0, 1.0, params.p_minus]).astype(complex)


def sector_propagator(params: AtomParams) -> np.ndarray:
    """Closed-form one-excitation propagator on the six-state sector.

    Basis order: ``|m+>|+>, |m->|+>, |m+>|->, |m->|->, |e+>|0>, |e->|0>``.
    """
    cp, sp = math.cos(params.g_plus * params.t), math.sin(params.g_plus * params.t)
    cm, sm = math.cos(params.g_minus * params.t), math.sin(params.g_minus * params.t)
    u = np.zeros((6, 6), dtype=complex)
    u[0, 0], u[4, 4], u[4, 0], u[0, 4] = cp, cp, -1j * sp, -1j * sp
    u[3, 3], u[5, 5], u[5, 3], u[3, 5] = cm, cm, -1j * sm, -1j * sm
    u[1, 1] = u[2, 2] = 1.0
    return np.exp(-1j * params.omega * params.t) * u


#: joint-space indices of the sector basis used by :func:`sector_propagator`
SECTOR_INDICES = np.array([_joint(1, 0), _joint(1, 1), _joint(2, 0), _joint(2, 1), _joint(1, 2), _joint(2, 3)])


def closed_form_witness(params: AtomParams, b, tol: float = 1e-12):
    """Closed-form ``a`` and ``|c|`` for probe direction ``b = (b+, b-)``.

    Uses the gauge ``c = |c|`` real positive. Returns ``None`` when
    ``p+ p- = 1`` or ``b+ b- = 0``.
    """
    b = la.as_vector(b, 2)
    bp, bm = b
    pp, pm = params.p_plus, params.p_minus
    if abs(pp * pm - 1.0) <= tol or abs(bp * bm) <= tol:
        return None
    c = abs(bp * bm) * (1.0 - pp * pm) / math.sqrt((pm - 1.0) ** 2 * abs(bm) ** 2 + (pp - 1.0) ** 2 * abs(bp) ** 2)
    a = np.array([(pm - 1.0) * c / ((pp * pm - 1.0) * bp), (pp - 1.0) * c / ((pp * pm - 1.0) * bm)])
    return a, c


def potting_configuration(omega: float = 0.0):
    """``p+ = p- = 0`` with ``chi = psi_d' = (|-> - |+>)/sqrt 2`` and ``c = 1/2``.

    Returns
    -------
    spec, witness, expected_P_opt
    """
    params = AtomParams.from_p(0.0, omega=omega)
    spec = build_atom_spec(params)
    D = build_interrogation_operator(spec)
    psi = np.array([-1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    c = complex(np.trace(D.sandwich(psi, psi)) / D.n)
    verdict = check_theorem1(D, psi, psi, c)
    return spec, verdict.witness, POTTING_P_OPT


def absorber_spec(t: float = 1.0) -> SystemSpec:
    """Single-channel total absorber (``g t = pi/2``): the opaque-object case.

    Probe ``[r, d]``, object ``[m, e]``; the restricted evolution is zero.
    """
    g = math.pi / (2 * t)
    h_i = np.zeros((4, 4), dtype=complex)
    h_i[3, 2] = h_i[2, 3] = g
    return SystemSpec(1, 2, 1, 1, np.zeros((2, 2)), np.zeros((2, 2)), h_i, t, name="absorber")
