import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetqkd import bounds
from hetqkd.attacks import build_entangling_cloner, eve_view_from
from hetqkd.errors import DomainError
from hetqkd.gaussian_core import (
    conditional_variance,
    input_covariance,
    propagate,
    symplectic_eigenvalues,
    symplectic_invariants,
)

from strategies import transmissions, variances

GRID_T = np.round(np.linspace(0.05, 0.95, 10), 6)
GRID_EPS = (0.001, 0.02, 0.1, 0.5, 1.0, 1.9)
GRID_V = (1.5, 5.0, 11.0, 40.0)
GRID = [(T, eps, V) for T in GRID_T for eps in GRID_EPS for V in GRID_V]


def cloner_homodyne_conditional(V, T, eps):
    # oracle: Bob's X conditioned on every X quadrature Eve holds
    S = build_entangling_cloner(T, eps).symplectic
    gamma = propagate(S, input_covariance(V, 3))
    return conditional_variance(gamma, 0, [1, 2])


def test_chi_total():
    assert bounds.chi_total(1, 0) == 0
    assert bounds.chi_total(0.25, 0.02) == pytest.approx(3.02)
    assert bounds.chi_total(0.5, 0.02) == pytest.approx(1.02)
    with pytest.raises(DomainError):
        bounds.chi_total(0, 0.1)


@pytest.mark.parametrize("T, chi, expected", [(0.25, 3.02, 1.28580), (0.5, 1.02, 1.80033)])
def test_homodyne_rr_bound(T, chi, expected):
    value = bounds.homodyne_rr_bound(11, T, chi)
    assert value == pytest.approx(expected, abs=5e-6)
    eps = chi - 1 / T + 1
    assert value == pytest.approx(cloner_homodyne_conditional(11, T, eps), abs=1e-9)


def test_homodyne_rr_bound_limits():
    assert bounds.homodyne_rr_bound(11, 1, 0) == 11
    with pytest.raises(DomainError):
        bounds.homodyne_rr_bound(0.5, 0.5, 1.0)


def test_homodyne_dr_chi():
    assert bounds.homodyne_dr_chi(1) == 1
    assert math.isinf(bounds.homodyne_dr_chi(0))
    assert bounds.homodyne_dr_chi(1.02) == pytest.approx(0.98039, abs=5e-6)


def test_hetero_chi_E_min():
    for T in (0.1, 0.5, 0.9):
        assert bounds.hetero_chi_E_min(T, 2) == 1
    assert math.isinf(bounds.hetero_chi_E_min(1, 0))
    assert bounds.hetero_chi_E_min(0.5, 0.02) == pytest.approx(2.49149, abs=5e-6)
    with pytest.raises(DomainError):
        bounds.hetero_chi_E_min(0.5, 2.5)


def test_hetero_chi_E_min_matches_beam_splitting():
    # pure loss: Eve heterodynes the reflected beam
    for T in (0.2, 0.5, 0.8):
        assert bounds.hetero_chi_E_min(T, 0) == pytest.approx((1 + T) / (1 - T), rel=1e-12)


def test_hetero_V_min():
    for V in (1.0, 3.0, 11.0):
        assert bounds.hetero_V_min(V, 1) == 1
        assert bounds.hetero_V_min(V, math.inf) == V
    assert bounds.hetero_V_min(11, 2.49149) == pytest.approx(2.10551, abs=1e-5)  # rounded input
    assert bounds.hetero_V_min(11, bounds.hetero_chi_E_min(0.5, 0.02)) == pytest.approx(2.10551, abs=5e-6)
    view = eve_view_from(build_entangling_cloner(0.5, 0.02).symplectic, 11)
    assert bounds.hetero_V_min(11, bounds.hetero_chi_E_min(0.5, 0.02)) == pytest.approx(view.V_XcondE, abs=1e-9)


def test_hetero_old_conditional():
    assert bounds.hetero_old_conditional(11, 1, 0) == 6
    assert bounds.hetero_old_conditional(11, 0.5, 1.02) == pytest.approx(1.40016, abs=5e-6)


@pytest.mark.parametrize("T, eps, V", GRID)
def test_bound_ordering(T, eps, V):
    chi = bounds.chi_total(T, eps)
    if 2 - 2 * T + T * eps < 0:
        return
    v_new = bounds.hetero_V_min(V, bounds.hetero_chi_E_min(T, eps))
    assert v_new >= bounds.homodyne_rr_bound(V, T, chi) - 1e-9
    new = bounds.mutual_informations(T, eps, V, "heterodyne_new", "RR")
    old = bounds.mutual_informations(T, eps, V, "heterodyne_old", "RR")
    assert old.I_EVE >= new.I_EVE - 1e-12


def test_limits_are_exact():
    assert bounds.hetero_chi_E_min(0.37, 2) == 1.0
    assert bounds.hetero_V_min(7.3, 1) == 1.0
    assert bounds.homodyne_rr_bound(7.3, 1, 0) == 7.3


# -- rates ---------------------------------------------------------------------------


def test_noiseless_heterodyne_rates():
    for protocol in ("heterodyne_new", "heterodyne_old"):
        for direction in bounds.DIRECTIONS:
            rep = bounds.mutual_informations(1, 0, 11, protocol, direction)
            assert rep.I_EVE == 0
            assert rep.dI == rep.I_AB == pytest.approx(math.log2(6))
    assert math.log2(6) == pytest.approx(2.58496, abs=5e-6)


def test_noiseless_homodyne_rate():
    rep = bounds.mutual_informations(1, 0, 11, "homodyne", "RR")
    assert rep.I_AB == pytest.approx(0.5 * math.log2(11))
    assert rep.I_AB == pytest.approx(1.72972, abs=5e-6)
    assert rep.I_EVE == pytest.approx(0, abs=1e-15)


def test_heterodyne_beats_homodyne_at_reference_point():
    new = bounds.mutual_informations(0.5, 0.02, 11, "heterodyne_new", "RR")
    hom = bounds.mutual_informations(0.5, 0.02, 11, "homodyne", "RR")
    assert new.dI > hom.dI > 0


def test_rate_report_relations():
    rep = bounds.mutual_informations(0.4, 0.05, 11, "heterodyne_new", "RR", beta=0.87)
    assert rep.dI == rep.I_AB - rep.I_EVE
    assert rep.dI_eff == pytest.approx(0.87 * rep.I_AB - rep.I_EVE)
    assert rep.I_AB >= 0 and rep.I_EVE >= 0


def test_rate_arguments_validated():
    with pytest.raises(DomainError):
        bounds.mutual_informations(0.5, 0.02, 11, "coherent", "RR")
    with pytest.raises(DomainError):
        bounds.mutual_informations(0.5, 0.02, 11, "homodyne", "both")
    with pytest.raises(DomainError):
        bounds.mutual_informations(0.5, 0.02, 11, "homodyne", "RR", beta=1.2)
    with pytest.raises(DomainError):
        bounds.mutual_informations(0.5, 0.02, 11, "heterodyne_new", "RR", V_cond=(-3.0, 1.0))


@pytest.mark.parametrize("T", np.round(np.linspace(0.05, 1.0, 20), 4))
def test_rate_ordering(T):
    new = bounds.mutual_informations(T, 0.02, 11, "heterodyne_new", "RR")
    old = bounds.mutual_informations(T, 0.02, 11, "heterodyne_old", "RR")
    hom = bounds.mutual_informations(T, 0.02, 11, "homodyne", "RR")
    assert new.dI >= old.dI - 1e-12
    assert new.dI >= hom.dI - 1e-12


# -- coincidence ---------------------------------------------------------------------


@pytest.mark.parametrize("T", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("V", [5.0, 11.0])
def test_rr_coincidence(T, V):
    chi = bounds.coincidence_chi(T, V, "RR")
    eps = chi - 1 / T + 1
    hetero = bounds.hetero_V_min(V, bounds.hetero_chi_E_min(T, eps))
    assert abs(hetero - bounds.homodyne_rr_bound(V, T, chi)) <= 1e-9


def test_rr_coincidence_reference():
    assert bounds.coincidence_chi(0.5, 11) == pytest.approx(1.32914, abs=5e-6)
    assert bounds.coincidence_chi(1.0, 1e8) == pytest.approx(0, abs=1e-7)


@pytest.mark.parametrize("T", [1.5, 2.0])
def test_dr_coincidence(T):
    chi = bounds.coincidence_chi(T, 11, "DR")
    assert chi == pytest.approx(math.sqrt(1 - 1 / T))
    assert abs(bounds.hetero_chi_E_min(T, chi - 1 / T + 1) - 1 / chi) <= 1e-9


def test_dr_coincidence_domain():
    with pytest.raises(DomainError):
        bounds.coincidence_chi(0.5, 11, "DR")


# -- invariant-based derivation -----------------------------------------------------


def test_invariant_solution_identity_channel():
    sol = bounds.invariant_solution(1.0, 0.0, 11.0)
    assert sol.c == 0
    assert sol.V_cond == pytest.approx(11)


def test_invariant_solution_reference():
    sol = bounds.invariant_solution(0.5, 1.02, 11)
    assert sol.V_cond == pytest.approx(2.10551, abs=5e-6)


@pytest.mark.parametrize("T, eps, V", GRID)
def test_invariant_solution_matches_closed_form(T, eps, V):
    if 2 - 2 * T + T * eps < 0:
        return
    chi = bounds.chi_total(T, eps)
    sol = bounds.invariant_solution(T, chi, V)
    assert abs(sol.V_cond - bounds.hetero_V_min(V, bounds.hetero_chi_E_min(T, eps))) <= 1e-9


@given(transmissions, st.floats(0.001, 1.9), variances, st.floats(0.2, 5.0))
def test_materialized_covariance_keeps_invariants(T, eps, V, scale):
    sol = bounds.invariant_solution(T, bounds.chi_total(T, eps), V)
    gamma = sol.covariance(V_Em=math.sqrt(sol.y) * scale)
    c_m, c_n, V_Em, V_En = sol.eve_split(math.sqrt(sol.y) * scale)
    assert c_m * c_n == pytest.approx(sol.x, rel=1e-9, abs=1e-9)
    assert V_Em * V_En == pytest.approx(sol.y, rel=1e-12)
    assert V_Em * c_n**2 + V_En * c_m**2 == pytest.approx(sol.z, rel=1e-8, abs=1e-8)
    expected = np.array([V * V + 2, 2 * V * V + 1, V * V])
    got = symplectic_invariants(gamma).as_array()
    assert np.all(np.abs(got - expected) <= 1e-8 * np.maximum(1, expected))


def test_materialized_covariance_reference():
    gamma = bounds.invariant_solution(0.5, 1.02, 11).covariance()
    np.testing.assert_allclose(symplectic_invariants(gamma).as_array(), [123, 243, 121], atol=1e-8)
    np.testing.assert_allclose(np.sort(symplectic_eigenvalues(gamma)), [1, 1, 11], atol=1e-8)


def test_upper_y_endpoint_is_minimal():
    T, chi, V = 0.5, 1.02, 11.0
    sol = bounds.invariant_solution(T, chi, V)
    lower = sol.c**2
    best = sol.V_cond
    admissible = []
    for y in np.linspace(lower, sol.y, 2001)[1:]:
        try:
            admissible.append((y, bounds.conditional_from_y(T, chi, V, y)))
        except DomainError:
            continue
    assert admissible
    assert all(v >= best - 1e-12 for _, v in admissible)


@pytest.mark.parametrize("T, chi, V", [(0.5, 1.02, 11.0), (0.1, 9.1, 2.0), (0.8, 0.5, 5.0)])
def test_conditional_decreases_towards_upper_endpoint(T, chi, V):
    # the admissible y values may form two intervals; check the one holding the endpoint
    sol = bounds.invariant_solution(T, chi, V)
    ys = np.linspace(sol.c**2, sol.y, 4001)[1:]
    values = []
    for y in ys[::-1]:
        try:
            values.append(bounds.conditional_from_y(T, chi, V, y))
        except DomainError:
            break
    values = np.array(values[::-1])
    assert len(values) > 10
    assert np.all(np.diff(values) <= 1e-12)
    assert values[-1] == pytest.approx(sol.V_cond)


@pytest.mark.parametrize("T, eps, V", [(0.3, 0.1, 11.0), (0.7, 0.5, 5.0), (0.5, 1.5, 40.0)])
def test_factored_discriminant_matches_direct_evaluation(T, eps, V):
    chi = bounds.chi_total(T, eps)
    sol = bounds.invariant_solution(T, chi, V)
    assert sol.V_cond == pytest.approx(bounds.conditional_from_y(T, chi, V, sol.y), rel=1e-10)
