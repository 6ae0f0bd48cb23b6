import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ghostosc.errors import DegenerateBranch, NotDegenerate, SingularDegeneracy
from ghostosc.params import (ALL_BRANCHES, AuxParams, Branch, ModelParams, classify_domain,
                             derive_aux, derive_aux_degenerate)


def test_model_params_rejects_nonfinite():
    with pytest.raises(ValueError):
        ModelParams(float("nan"), 1.0, 0.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, float("inf"), 0.0)


def test_branch_validation_and_parsing():
    assert Branch.parse("-1,+1") == Branch(-1, 1)
    assert Branch.parse("+-") == Branch(1, -1)
    assert str(Branch(-1, -1)) == "-1,-1"
    with pytest.raises(ValueError):
        Branch(0, 1)
    with pytest.raises(ValueError):
        Branch.parse("up")


def test_decoupled_limit():
    aux = derive_aux(ModelParams(4, -2, 0), Branch(-1, 1))
    assert aux.alpha == pytest.approx(4.0, abs=1e-14)
    assert aux.beta == pytest.approx(math.sqrt(2), abs=1e-14)
    assert aux.gamma == 0.0


def test_flagship_values(flagship):
    p, aux = flagship
    assert aux.alpha == pytest.approx(4.0047, abs=1e-4)
    assert aux.beta == pytest.approx(1.4275, abs=1e-4)
    assert aux.gamma == pytest.approx(-0.19401, abs=1e-5)
    assert max(abs(r) for r in aux.residuals(p)) < 1e-12


def test_flagship_domain_report():
    r = classify_domain(ModelParams(4, -2, 1), Branch(-1, 1))
    assert (r.e0_real, r.normalisable, r.gamma_map_valid, r.degenerate) == (True, True, True, False)


@pytest.mark.parametrize("g", np.linspace(-20, 20, 41))
@pytest.mark.parametrize("eta", [1, -1])
def test_plus_epsilon_never_normalisable(g, eta):
    p = ModelParams(4, -2, g)
    if p.is_degenerate():
        return
    assert not classify_domain(p, Branch(1, eta)).normalisable


@pytest.mark.parametrize("b", ALL_BRANCHES)
def test_degenerate_point_flagged(b):
    assert classify_domain(ModelParams(2, -1, 3), b).degenerate


def test_derive_aux_refuses_degenerate():
    with pytest.raises(DegenerateBranch):
        derive_aux(ModelParams(2, -1, 3), Branch(-1, 1))


def test_degenerate_closed_form():
    aux = derive_aux_degenerate(ModelParams(2, -1, 3), Branch(1, 1))
    r10 = 2 * math.sqrt(10)
    assert aux.alpha == pytest.approx(-13 / r10, rel=1e-14)
    assert aux.beta == pytest.approx(7 / r10, rel=1e-14)
    assert aux.gamma == pytest.approx(3 / r10, rel=1e-14)
    assert aux.kappa == 0
    assert max(abs(r) for r in aux.residuals(ModelParams(2, -1, 3))) < 1e-12


@pytest.mark.parametrize("nu,om", [(2, -1), (3, -4), (1.5, 0.5), (5, -20)])
@pytest.mark.parametrize("b", ALL_BRANCHES)
def test_degenerate_branch_properties(nu, om, b):
    p = ModelParams(nu, om, b.eta * (nu * nu + om))
    aux = derive_aux_degenerate(p, b)
    a, be, c = (complex(v) for v in (aux.alpha, aux.beta, aux.gamma))
    assert abs((a + be) ** 2 - 4 * c * c) < 1e-12
    assert not aux.is_normalisable()
    assert max(abs(r) for r in aux.residuals(p)) < 1e-12


def test_degenerate_errors():
    with pytest.raises(NotDegenerate):
        derive_aux_degenerate(ModelParams(4, -2, 1), Branch(-1, 1))
    with pytest.raises(NotDegenerate):
        derive_aux_degenerate(ModelParams(2, -1, -3), Branch(-1, 1))
    with pytest.raises(SingularDegeneracy):
        derive_aux_degenerate(ModelParams(1, 1, 2), Branch(-1, 1))


def test_kappa_definition():
    aux = AuxParams(3.0, 1.0, 0.5)
    assert aux.kappa == pytest.approx(math.sqrt(16 - 1))
    assert aux.ground_energy == 2.0
    assert AuxParams(1.0, 1.0, 2.0).kappa == pytest.approx(2j * math.sqrt(3))


def test_normalisability_predicate():
    assert AuxParams(2.0, 1.0, 1.0).is_normalisable()
    assert not AuxParams(2.0, 1.0, 1.5).is_normalisable()
    assert not AuxParams(-2.0, -1.0, 0.0).is_normalisable()
    assert not AuxParams(2.0 + 1e-3j, 1.0, 0.0).is_normalisable()


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(0.1, 6), om=st.floats(-10, 10), g=st.floats(-30, 30),
       b=st.sampled_from(ALL_BRANCHES))
def test_envelope_conditions_hold(nu, om, g, b):
    p = ModelParams(nu, om, g)
    assume(not p.is_degenerate(1e-6))
    aux = derive_aux(p, b)
    scale = max(1.0, p.nu2, abs(om), abs(g))
    assert max(abs(r) for r in aux.residuals(p)) < 1e-12 * scale * 10
    assert abs(aux.ground_energy - (aux.alpha - aux.beta)) == 0


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(0.1, 6), om=st.floats(-10, 10), g=st.floats(-30, 30),
       b=st.sampled_from(ALL_BRANCHES))
def test_report_matches_definitions(nu, om, g, b):
    p = ModelParams(nu, om, g)
    assume(not p.is_degenerate(1e-6))
    r = classify_domain(p, b)
    aux = derive_aux(p, b)
    assert r.normalisable == (aux.is_real and aux.alpha > 0 and aux.beta > 0 and aux.gamma**2 < aux.alpha * aux.beta)
    if r.normalisable:
        assert r.e0_real
    if r.gamma_map_valid:
        assert p.nu2 + om > g


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(0.1, 6), om=st.floats(-10, 10), g=st.floats(-30, 30))
def test_branch_regions_match_closed_inequalities(nu, om, g):
    p = ModelParams(nu, om, g)
    s = p.nu2 + om
    assume(not p.is_degenerate(1e-6))
    assume(min(abs(abs(g) - s), abs(abs(g) + s), abs(abs(g) - 2 * p.nu2),
               abs(g * g - 4 * p.nu2 * om)) > 1e-6)
    assert classify_domain(p, Branch(-1, 1)).normalisable == (
        abs(g) < s and abs(g) < 2 * p.nu2 and g * g > 4 * p.nu2 * om)
    assert classify_domain(p, Branch(-1, -1)).normalisable == (abs(g) < -s)


def _grid_region(b, need):
    hits = 0
    for g in np.arange(-20, 20.0001, 0.25):
        for nu2 in np.arange(0, 20.0001, 0.25):
            r = classify_domain(ModelParams(math.sqrt(nu2), -5.0, g), b)
            if all(getattr(r, k) for k in need):
                hits += 1
    return hits


def test_slice_region_nonempty_for_normalisable_branch():
    assert _grid_region(Branch(-1, 1), ("normalisable", "gamma_map_valid")) > 0


@pytest.mark.parametrize("b", [Branch(1, 1), Branch(1, -1)])
def test_slice_region_empty_for_plus_epsilon(b):
    assert _grid_region(b, ("normalisable", "gamma_map_valid")) == 0
