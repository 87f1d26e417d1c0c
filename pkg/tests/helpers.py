"""Random system factories and the brute-force projector oracle shared by the
test modules."""

import math

import numpy as np

from nqi import linalg as la
from nqi.atom import AtomParams, build_atom_spec
from nqi.model import SystemSpec


def block_diag_hermitian(sizes, rng, scale=1.0):
    out = np.zeros((sum(sizes), sum(sizes)), dtype=complex)
    pos = 0
    for s in sizes:
        out[pos : pos + s, pos : pos + s] = la.random_hermitian(s, rng, scale)
        pos += s
    return out


def random_spec(rng, n=None, n_ext=None, m=None, dim_r=None, t=None, coupling=1.0):
    """Random system honouring the structural assumptions of ``SystemSpec``."""
    n = n if n is not None else int(rng.integers(1, 4))
    n_ext = n_ext if n_ext is not None else n + int(rng.integers(0, 3))
    m = m if m is not None else int(rng.integers(1, 4))
    dim_r = dim_r if dim_r is not None else int(rng.integers(1, 3))
    t = t if t is not None else float(rng.uniform(0.2, 2.0))
    dim_D = dim_r + m
    h_s = block_diag_hermitian([n, n_ext - n] if n_ext > n else [n], rng)
    h_d = block_diag_hermitian([dim_r, m], rng)
    h_i = np.zeros((dim_D * n_ext, dim_D * n_ext), dtype=complex)
    k = dim_r * n_ext
    h_i[k:, k:] = la.random_hermitian(m * n_ext, rng, coupling)
    return SystemSpec(n, n_ext, m, dim_r, h_s, h_d, h_i, t, name="random")


def rotated_atom_spec(params: AtomParams, v_d, w_s, w_e):
    """Atom system seen through local unitaries: ``v_d`` on the polarizations,
    ``w_s`` on the ground levels, ``w_e`` on the excited levels."""
    base = build_atom_spec(params)
    probe = np.eye(3, dtype=complex)
    probe[1:, 1:] = v_d
    obj = np.zeros((4, 4), dtype=complex)
    obj[:2, :2] = w_s
    obj[2:, 2:] = w_e
    u = np.kron(probe, obj)
    return SystemSpec(2, 4, 2, 1, base.H_S, base.H_D, u @ base.H_I @ u.conj().T, params.t, name="rotated-atom")


def random_rotated_atom(rng):
    p_plus, p_minus = rng.uniform(-0.9, 0.9, size=2)
    params = AtomParams.from_p(p_plus, p_minus, t=float(rng.uniform(0.5, 2.0)))
    return rotated_atom_spec(params, la.random_unitary(2, rng), la.random_unitary(2, rng), la.random_unitary(2, rng))


def oracle_grid(magnitude_points=21, phase_points=8):
    """Same lattice as the solver's search, written out independently."""
    out = []
    for k in range(magnitude_points):
        w = k / (magnitude_points - 1)
        if k in (0, magnitude_points - 1):
            out.append(np.array([math.sqrt(w), math.sqrt(1 - w)], dtype=complex))
            continue
        for q in range(phase_points):
            out.append(np.array([math.sqrt(w), math.sqrt(1 - w) * np.exp(2j * np.pi * q / phase_points)]))
    return out


def oracle_max_delta(d4, b, alpha):
    """Largest ``|Delta|`` over unit ``Psi_I`` solving the projector equations.

    With ``y = conj(Psi_I)`` on ``H_r (+) H_d`` (``dim_r = 1``) the conditions
    ``<Psi_I|e> = 0`` and ``(<Psi_I| (x) I)(alpha r + beta D b) = Delta I`` are
    linear in ``(y, Delta)``. ``Delta`` is then maximized over the null space.
    """
    m, n = d4.shape[0], d4.shape[1]
    beta = math.sqrt(1 - alpha**2)
    eye = np.eye(n)
    resp = np.einsum("ikjl,j->ikl", d4, b)  # (i, k, l)
    rows = np.zeros((n * n + 1, 1 + m + 1), dtype=complex)
    rows[:-1, 0] = alpha * eye.reshape(-1)
    for i in range(m):
        rows[:-1, 1 + i] = beta * resp[i].reshape(-1)
    rows[:-1, -1] = -eye.reshape(-1)
    rows[-1, :-1] = np.concatenate([[alpha], beta * b])
    _, s, vh = np.linalg.svd(rows)
    rank = int(np.count_nonzero(s > 1e-10 * max(s[0], 1.0)))
    null = vh[rank:].conj().T
    if null.shape[1] == 0:
        return 0.0
    y, delta = null[:-1], null[-1]
    gram = y.conj().T @ y
    return float(np.sqrt(max((delta.conj() @ np.linalg.solve(gram, delta)).real, 0.0)))
