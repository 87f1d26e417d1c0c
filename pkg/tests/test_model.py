import numpy as np
import pytest

from helpers import random_spec
from nqi import linalg as la
from nqi.errors import DimensionMismatch, InvalidSystem, NonHermitian, NormViolation
from nqi.model import (
    InterrogationOperator,
    JointState,
    SystemSpec,
    apply_nondecay_projection,
    build_interrogation_operator,
    evolve_joint,
)


def minimal_kwargs(**over):
    kw = dict(n=1, n_ext=2, m=1, dim_r=1, H_S=np.zeros((2, 2)), H_D=np.zeros((2, 2)), H_I=np.zeros((4, 4)), t=1.0)
    kw.update(over)
    return kw


def test_spec_arrays_are_read_only():
    spec = SystemSpec(**minimal_kwargs())
    with pytest.raises(ValueError):
        spec.H_I[0, 0] = 1.0


@pytest.mark.parametrize(
    "over, exc",
    [
        ({"n": 3}, InvalidSystem),
        ({"m": 0}, InvalidSystem),
        ({"t": 0.0}, InvalidSystem),
        ({"t": float("nan")}, InvalidSystem),
        ({"H_S": np.zeros((3, 3))}, DimensionMismatch),
        ({"H_D": np.array([[0, 1], [0, 0]])}, NonHermitian),
    ],
)
def test_spec_validation(over, exc):
    with pytest.raises(exc):
        SystemSpec(**minimal_kwargs(**over))


def test_interaction_on_reference_branch_rejected():
    h = np.zeros((4, 4))
    h[0, 1] = h[1, 0] = 1.0  # probe r, object levels 0 <-> 1
    with pytest.raises(InvalidSystem, match="reference"):
        SystemSpec(**minimal_kwargs(H_I=h))


def test_free_hamiltonians_must_respect_subspaces():
    with pytest.raises(InvalidSystem, match="H_D"):
        SystemSpec(**minimal_kwargs(H_D=np.array([[0, 1], [1, 0]])))
    with pytest.raises(InvalidSystem, match="H_S"):
        SystemSpec(**minimal_kwargs(H_S=np.array([[0, 1], [1, 0]])))


def test_no_interaction_gives_identity_operator():
    rng = np.random.default_rng(0)
    spec = random_spec(rng, n=2, n_ext=3, m=2, coupling=0.0)
    D = build_interrogation_operator(spec)
    np.testing.assert_allclose(D.matrix, np.eye(4), atol=1e-12)


def test_operator_tensor_layout():
    rng = np.random.default_rng(1)
    mat = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    D = InterrogationOperator.from_matrix(mat, m=2, n=3)
    i, k, j, l = 1, 2, 0, 1
    assert D.tensor4[i, k, j, l] == mat[i * 3 + k, j * 3 + l]
    bra, ket = la.random_unit_vector(2, rng), la.random_unit_vector(2, rng)
    direct = np.kron(bra, np.eye(3)).conj() @ mat @ np.kron(ket, np.eye(3)).T
    np.testing.assert_allclose(D.sandwich(bra, ket), direct, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        InterrogationOperator.from_matrix(mat, m=2, n=2)


@pytest.mark.parametrize("seed", range(10))
def test_operator_is_contraction(seed):
    spec = random_spec(np.random.default_rng(seed))
    assert build_interrogation_operator(spec).singular_values().max() <= 1 + 1e-12


def test_exact_leak_for_single_channel_rabi():
    # g t = pi/3: survival cos^2, leak sin^2(pi/3) = 3/4
    g, t = np.pi / 3, 1.0
    h = np.zeros((4, 4), dtype=complex)
    h[2, 3] = h[3, 2] = g
    spec = SystemSpec(1, 2, 1, 1, np.zeros((2, 2)), np.zeros((2, 2)), h, t)
    state = evolve_joint(spec, [0, 1], [1], occupied=True)
    assert state.leaked_probability == pytest.approx(0.75, abs=1e-14)
    assert state.norm2 == pytest.approx(0.25, abs=1e-14)
    D = build_interrogation_operator(spec)
    assert D.matrix[0, 0] == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_evolution_conserves_probability(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    probe = la.random_unit_vector(spec.dim_D, rng)
    obj = la.random_unit_vector(spec.n, rng)
    for occupied in (True, False):
        state = evolve_joint(spec, probe, obj, occupied)
        assert state.total_probability == pytest.approx(1.0, abs=1e-12)
        if occupied:
            assert la.max_abs(state.as_matrix()[:, spec.n :]) == 0.0


def test_empty_box_is_free_evolution():
    rng = np.random.default_rng(3)
    spec = random_spec(rng)
    probe = la.random_unit_vector(spec.dim_D, rng)
    obj = la.random_unit_vector(spec.n, rng)
    state = evolve_joint(spec, probe, obj, occupied=False)
    expected = np.kron(spec.U_probe @ probe, la.expm_hermitian_propagator(spec.H_S, spec.t) @ spec.embed_object(obj))
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)
    assert state.leaked_probability == 0.0


def test_restricted_block_matches_direct_evolution():
    rng = np.random.default_rng(4)
    spec = random_spec(rng, dim_r=1)
    D = build_interrogation_operator(spec)
    psi_d = la.random_unit_vector(spec.m, rng)
    obj = la.random_unit_vector(spec.n, rng)
    # interaction-picture input: pre-rotate by the inverse free evolution
    u0_inv = la.expm_hermitian_propagator(spec.H_free, spec.t, sign=-1)
    start = u0_inv @ np.kron(spec.embed_probe_d(psi_d), spec.embed_object(obj))
    out = (spec.U_full @ start)[spec.dS_indices]
    np.testing.assert_allclose(out, D.apply(psi_d, obj), atol=1e-12)


def test_norm_violation():
    spec = SystemSpec(**minimal_kwargs())
    with pytest.raises(NormViolation):
        evolve_joint(spec, [1, 1], [1], True)


def test_nondecay_projection_books_loss():
    state = JointState(np.array([0.6, 0.8, 0, 0], dtype=complex), 0.0, 2, 2, 1)
    out = apply_nondecay_projection(state)
    assert out.leaked_probability == pytest.approx(0.64)
    np.testing.assert_allclose(out.amplitudes, [0.6, 0, 0, 0])
    assert out.norm2 == pytest.approx(0.36)
