import math

import numpy as np
import pytest

from nqi import linalg as la
from nqi.atom import (
    SECTOR_INDICES,
    AtomParams,
    absorber_spec,
    build_atom_spec,
    closed_form_witness,
    expected_operator,
    potting_configuration,
    sector_propagator,
)
from nqi.criterion import check_theorem1
from nqi.model import build_interrogation_operator
from nqi.protocol import optimize_alpha


@pytest.mark.parametrize("seed", range(6))
def test_full_propagator_matches_sector_closed_form(seed):
    rng = np.random.default_rng(seed)
    params = AtomParams(*rng.uniform(0, 4, size=2), t=float(rng.uniform(0.3, 2)), omega=float(rng.normal()))
    spec = build_atom_spec(params)
    block = spec.U_full[np.ix_(SECTOR_INDICES, SECTOR_INDICES)]
    np.testing.assert_allclose(block, sector_propagator(params), atol=1e-12)
    assert la.is_unitary(sector_propagator(params))


@pytest.mark.parametrize("omega", [0.0, 1.3, -7.0])
def test_restricted_operator_is_diagonal_and_omega_free(omega):
    params = AtomParams(0.9, 2.1, t=1.4, omega=omega)
    D = build_interrogation_operator(build_atom_spec(params))
    np.testing.assert_allclose(D.matrix, expected_operator(params), atol=1e-12)


def test_from_p_roundtrip():
    params = AtomParams.from_p(0.25, -0.6, t=2.0)
    assert params.p_plus == pytest.approx(0.25)
    assert params.p_minus == pytest.approx(-0.6)
    assert AtomParams.from_p(0.4).p_minus == pytest.approx(0.4)


@pytest.mark.parametrize("kwargs", [dict(g_plus=-1, g_minus=0), dict(g_plus=1, g_minus=1, t=0)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        AtomParams(**kwargs)
    with pytest.raises(ValueError):
        AtomParams.from_p(1.5)


def test_closed_form_degenerate_cases():
    assert closed_form_witness(AtomParams.from_p(1.0), [0.6, 0.8]) is None
    assert closed_form_witness(AtomParams.from_p(0.2), [1.0, 0.0]) is None


def test_closed_form_solves_witness_equation():
    params = AtomParams.from_p(-0.2, 0.7)
    b = np.array([0.8, 0.6j])
    a, c = closed_form_witness(params, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    D = build_interrogation_operator(build_atom_spec(params))
    np.testing.assert_allclose(D.sandwich(a.conj(), b), c * np.eye(2), atol=1e-12)


def test_potting_configuration():
    spec, witness, p_opt = potting_configuration()
    psi = np.array([-1, 1]) / math.sqrt(2)
    assert p_opt == 1 / 16
    assert witness.c == pytest.approx(0.5)
    np.testing.assert_allclose(witness.chi, psi)
    np.testing.assert_allclose(witness.psi_d, psi)
    assert witness.decomposition.l == 2


def test_absorber_restricted_operator_vanishes():
    D = build_interrogation_operator(absorber_spec(t=0.5))
    assert la.max_abs(D.matrix) < 1e-15


def test_potting_sign_convention_is_immaterial():
    spec, witness, _ = potting_configuration()
    D = build_interrogation_operator(spec)
    flipped = -witness.psi_d
    other = check_theorem1(D, flipped, flipped, witness.c).witness
    assert optimize_alpha(other, [1.0])[1] == pytest.approx(optimize_alpha(witness, [1.0])[1], abs=1e-12)
