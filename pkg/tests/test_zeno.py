import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_rotated_atom, random_spec
from nqi import linalg as la
from nqi.atom import AtomParams, absorber_spec, build_atom_spec, potting_configuration
from nqi.errors import NoSolution, PlanSpecMismatch
from nqi.model import build_interrogation_operator
from nqi.zeno import check_zeno_condition, plan_zeno, simulate_zeno

PSI_R = np.array([1.0 + 0j])

# independent 30-digit evaluations (mpmath findroot on the rising branch)
SURVIVAL_C0_N100 = 0.975626914143900280917
SURVIVAL_C_HALF = {10: 0.456263944800727658749, 50: 0.862118966911889426041, 100: 0.928614445067893595059}
THETA_C_HALF_N100 = 0.0314236857653589011902


def test_plan_for_opaque_object():
    plan = plan_zeno(0.0, 100)
    assert plan.theta == pytest.approx(math.pi / 200, abs=1e-12)
    assert plan.theta_prime == pytest.approx(0.0, abs=1e-12)
    assert plan.survival_probability == pytest.approx(SURVIVAL_C0_N100, abs=1e-12)


@pytest.mark.parametrize("N", [10, 50, 100])
def test_plan_for_half_transparent_object(N):
    plan = plan_zeno(0.5, N)
    assert plan.survival_probability == pytest.approx(SURVIVAL_C_HALF[N], abs=1e-11)
    assert N * plan.delta == pytest.approx(math.pi / 2, abs=1e-11)
    if N == 100:
        assert plan.theta == pytest.approx(THETA_C_HALF_N100, abs=1e-12)


@given(st.floats(0.0, 0.95), st.integers(20, 400))
@settings(max_examples=60, deadline=None)
def test_plan_invariants(c, N):
    if c > 0 and math.atan(1 / math.sqrt(c)) - math.atan(math.sqrt(c)) < math.pi / (2 * N):
        with pytest.raises(NoSolution):
            plan_zeno(c, N)
        return
    plan = plan_zeno(c, N)
    assert N * plan.delta == pytest.approx(math.pi / 2, abs=1e-10)
    assert 0 < plan.theta < math.pi / 2
    # rising branch: theta below the turning point of delta(theta)
    if c > 0:
        assert plan.theta <= math.atan(1 / math.sqrt(c)) + 1e-12
    expected = (math.cos(plan.theta) ** 2 + c**2 * math.sin(plan.theta) ** 2) ** N
    assert plan.survival_probability == pytest.approx(expected, rel=1e-12)


def test_plan_failures():
    with pytest.raises(NoSolution):
        plan_zeno(1.0, 100)
    with pytest.raises(NoSolution):
        plan_zeno(0.0, 1)
    with pytest.raises(NoSolution):
        plan_zeno(0.5, 4)
    with pytest.raises(ValueError):
        plan_zeno(0.5, 0)
    assert plan_zeno(0.5, 5).N == 5


@pytest.mark.parametrize("p_plus, p_minus", [(0.0, 0.0), (0.3, -0.4), (0.8, 0.1), (-0.5, -0.5)])
def test_zeno_condition_on_atom(p_plus, p_minus):
    # <chi|D|chi> = c I forces |chi_+|^2 (1 - p+) = |chi_-|^2 (1 - p-),
    # hence c = (1 - p+ p-) / (2 - p+ - p-)
    D = build_interrogation_operator(build_atom_spec(AtomParams.from_p(p_plus, p_minus)))
    chi, c = check_zeno_condition(D)
    assert c.real == pytest.approx((1 - p_plus * p_minus) / (2 - p_plus - p_minus), abs=1e-10)
    np.testing.assert_allclose(D.sandwich(chi, chi), c * np.eye(2), atol=1e-10)


def test_zeno_condition_absent():
    assert check_zeno_condition(build_interrogation_operator(build_atom_spec(AtomParams.from_p(1.0)))) is None
    spec = random_spec(np.random.default_rng(2), n=2, n_ext=3, m=2, dim_r=1)
    assert check_zeno_condition(build_interrogation_operator(spec)) is None


def test_rotated_atom_zeno_condition_found_by_refinement():
    spec = random_rotated_atom(np.random.default_rng(11))
    D = build_interrogation_operator(spec)
    found = check_zeno_condition(D)
    assert found is not None
    chi, c = found
    np.testing.assert_allclose(D.sandwich(chi, chi), c * np.eye(2), atol=1e-10)


@pytest.mark.parametrize("N", [10, 50, 100])
def test_simulated_survival_matches_plan(N):
    spec, witness, _ = potting_configuration()
    plan = plan_zeno(0.5, N)
    rep = simulate_zeno(spec, plan, witness.chi, PSI_R, [0.6, 0.8], occupied=True)
    assert rep.probabilities["P_I"] == pytest.approx(SURVIVAL_C_HALF[N], abs=1e-10)
    assert rep.fidelity == pytest.approx(1.0, abs=1e-12)
    assert rep.total == pytest.approx(1.0, abs=1e-12)
    assert rep.probabilities["P_e"] < 1e-20
    empty = simulate_zeno(spec, plan, witness.chi, PSI_R, [0.6, 0.8], occupied=False)
    assert empty.probabilities["P_e"] == pytest.approx(1.0, abs=1e-12)


def test_opaque_object_survival():
    spec = absorber_spec()
    plan = plan_zeno(0.0, 100)
    rep = simulate_zeno(spec, plan, [1.0], PSI_R, [1.0], occupied=True)
    assert rep.probabilities["P_I"] == pytest.approx(SURVIVAL_C0_N100, abs=1e-12)
    assert rep.probabilities["discarded"] == pytest.approx(0.0, abs=1e-14)


def test_plan_chi_mismatch():
    spec, _, _ = potting_configuration()
    with pytest.raises(PlanSpecMismatch):
        simulate_zeno(spec, plan_zeno(0.5, 20), [1.0, 0.0], PSI_R, [1, 0], True)


def test_zeno_with_free_object_evolution():
    # level shifts commuting with the coupling: the found branch tracks U_S^N
    spec, _, _ = potting_configuration()
    spec = dataclasses.replace(spec, H_S=np.diag([0.3, -0.4, 0.3, -0.4]))
    D = build_interrogation_operator(spec)
    chi, c = check_zeno_condition(D)
    plan = plan_zeno(c, 40)
    rep = simulate_zeno(spec, plan, chi, PSI_R, la.random_unit_vector(2, np.random.default_rng(0)), True, D=D)
    assert rep.fidelity == pytest.approx(1.0, abs=1e-10)
    assert rep.probabilities["P_I"] == pytest.approx(plan.survival_probability, abs=1e-10)


def test_survival_grows_with_N():
    spec, witness, _ = potting_configuration()
    values = [
        simulate_zeno(spec, plan_zeno(0.5, N), witness.chi, PSI_R, [1, 0], True).probabilities["P_I"]
        for N in (5, 10, 20, 50, 100, 200)
    ]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("c", [0.0, 0.3, 0.5, 0.8])
def test_survival_converges_at_the_asymptotic_rate(c):
    values = []
    for N in (2**k for k in range(1, 9)):
        try:
            s = plan_zeno(c, N).survival_probability
        except NoSolution:
            assert not values  # only small N can be out of reach
            continue
        values.append(s)
        if N >= 64:
            rate = math.exp(-(math.pi**2) * (1 + c) / (4 * N * (1 - c)))
            assert 1 - s <= 1.1 * (1 - rate)
    assert all(b >= a for a, b in zip(values, values[1:]))
