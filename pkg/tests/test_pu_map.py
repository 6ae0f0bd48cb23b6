import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from oracles import fd_fourth, fd_second, random_in_domain
from scipy.spatial import ConvexHull

from ghostosc.errors import ComplexFrequencies, MapUndefined, UnknownRegime
from ghostosc.params import ModelParams
from ghostosc.pu_map import (REGIMES, ModeAmplitudes, PhaseState, bracket_matrix, classical_state,
                             classify_regime, frequencies, full_bracket_matrix, hamiltonian,
                             invert_modes, mode_derivatives, omega, pu_constants, regime_frequencies,
                             surface_term_residual, trajectory)


def test_constants_flagship():
    pu = pu_constants(ModelParams(4, -2, 1))
    assert pu.zeta == 72 and pu.xi == 516
    assert pu.mu2 == -pu.nu2
    assert pu.kappa1 == pytest.approx(2 * math.sqrt(2) * math.sqrt(13))


def test_constants_trivial():
    pu = pu_constants(ModelParams(1, 0, 0))
    assert (pu.zeta, pu.xi) == (4, 0)
    assert pu.mu2 == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize("g", [3, 3.5])
def test_map_undefined(g):
    with pytest.raises(MapUndefined):
        pu_constants(ModelParams(2, -1, g))


def test_frequency_values():
    assert omega(72, 516, 1, 1) == pytest.approx(7.996, abs=1e-3)
    assert omega(72, 516, 1, -1) == pytest.approx(2.841, abs=1e-3)
    assert omega(5, 4, 1, 1) == pytest.approx(2.0, abs=1e-14)
    assert omega(5, 4, 1, -1) == pytest.approx(1.0, abs=1e-14)
    for eta in (1, -1):
        w2 = omega(72, 516, 1, eta) ** 2
        assert abs(w2 * w2 - 72 * w2 + 516) < 1e-10


def test_complex_frequencies_rejected():
    pu = pu_constants(ModelParams(4, -2, 1))
    from dataclasses import replace
    with pytest.raises(ComplexFrequencies):
        regime_frequencies(replace(pu, xi=pu.zeta**2 / 4), "I")
    with pytest.raises(ComplexFrequencies):
        regime_frequencies(replace(pu, zeta=-1.0), "I")


@pytest.mark.parametrize("regime", REGIMES)
def test_regime_patterns_round_trip(regime):
    pu = pu_constants(ModelParams(4, -2, 1))
    w1, w2, found = frequencies(pu, regime)
    assert found == regime
    assert w1 * w1 + w2 * w2 == pytest.approx(pu.zeta, rel=1e-12)
    assert w1 * w1 * w2 * w2 == pytest.approx(pu.xi, rel=1e-12)


def test_regime_one_ordering():
    w1, w2, _ = frequencies(pu_constants(ModelParams(4, -2, 1)), "I")
    assert w2 > w1 > 0
    assert classify_regime(-1.0, -2.0) == "VI"
    with pytest.raises(UnknownRegime):
        regime_frequencies(pu_constants(ModelParams(4, -2, 1)), "IX")


def test_bracket_identity_examples():
    for p in (ModelParams(4, -2, 1), ModelParams(1, 0, 0)):
        assert np.allclose(bracket_matrix(p), np.eye(2), atol=1e-12, rtol=0)


def test_position_and_momentum_brackets_vanish():
    B = full_bracket_matrix(ModelParams(4, -2, 1))
    assert abs(B[0, 1]) < 1e-12 and abs(B[2, 3]) < 1e-12


@settings(max_examples=100, deadline=None)
@given(nu=st.floats(0.3, 6), om=st.floats(-10, 5), g=st.floats(-30, 30))
def test_bracket_identity_property(nu, om, g):
    p = ModelParams(nu, om, g)
    assume(p.nu2 + om - g > 1e-3)
    B = bracket_matrix(p)
    scale = max(1.0, np.max(np.abs(full_bracket_matrix(p))))
    assert np.max(np.abs(B - np.eye(2))) < 1e-12 * scale


def _amps(rng):
    return ModeAmplitudes(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))


def test_zero_amplitudes_rest():
    pu = pu_constants(ModelParams(4, -1, 1))
    s = classical_state(ModeAmplitudes(0, 0), pu, 3.3)
    assert s.as_array().tolist() == [0, 0, 0, 0]
    m = invert_modes(PhaseState(0, 0, 0, 0, 1.0), pu)
    assert m.a == 0 and m.b == 0


def test_inverse_round_trip(rng):
    for p in random_in_domain(rng, 20):
        pu = pu_constants(p)
        m = _amps(rng)
        t = rng.uniform(0, 10)
        back = invert_modes(classical_state(m, pu, t), pu)
        assert abs(back.a - m.a) < 1e-10 and abs(back.b - m.b) < 1e-10


def test_amplitudes_constant_along_trajectory():
    pu = pu_constants(ModelParams(4, -1, 1))
    m = invert_modes(PhaseState(0.3, -0.2, 0.1, 0.4, 0.7), pu)
    for s in trajectory(m, pu, 0.7, 20, 100):
        mm = invert_modes(s, pu)
        assert abs(abs(mm.a) - abs(m.a)) < 1e-10 and abs(abs(mm.b) - abs(m.b)) < 1e-10


def test_trajectory_endpoints():
    pu = pu_constants(ModelParams(4, -1, 1))
    tr = trajectory(ModeAmplitudes(0.5, 0.5), pu, 0, 2, 2)
    assert [s.t for s in tr] == [0, 2]
    with pytest.raises(ValueError):
        trajectory(ModeAmplitudes(0.5, 0.5), pu, 0, 2, 1)


def test_energy_conserved(rng):
    for p in random_in_domain(rng, 10):
        pu = pu_constants(p)
        m = _amps(rng)
        es = [hamiltonian(p, s) for s in trajectory(m, pu, 0, 50, 200)]
        assert np.ptp(es) <= 1e-9 * max(1.0, np.max(np.abs(es)))


def test_mode_sum_solves_fourth_order_equation(rng):
    pu = pu_constants(ModelParams(4, -1, 1))
    m = _amps(rng)
    q = lambda t: mode_derivatives(m, pu, t, order=0)[0]
    for t in rng.uniform(0, 10, 5):
        resid = fd_fourth(q, t) + pu.zeta * fd_second(q, t) + pu.xi * q(t)
        assert abs(resid) < 1e-3 * pu.xi * max(abs(m.a), abs(m.b))
        d = mode_derivatives(m, pu, t)
        assert abs(d[4] + pu.zeta * d[2] + pu.xi * d[0]) < 1e-9 * pu.xi


def test_surface_term_identity(rng):
    for p in random_in_domain(rng, 10):
        pu = pu_constants(p)
        m = _amps(rng)
        for t in np.linspace(0, 20, 15):
            assert abs(surface_term_residual(m, pu, t)) < 1e-9 * max(1.0, pu.xi)


def test_phase_space_fill_grows_towards_boundary():
    # nu = 4, Omega = -1: the map boundary sits at g = 15
    areas = []
    for g in (0.5, 4, 8, 12, 14.9):
        pu = pu_constants(ModelParams(4, -1, g))
        pts = np.array([[s.x, s.px] for s in trajectory(ModeAmplitudes(0.5, 0.5), pu, 0, 150, 4000)])
        areas.append(ConvexHull(pts).volume)
    assert np.all(np.diff(areas) > 0)
