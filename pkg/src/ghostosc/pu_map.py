"""Symplectic map between the ghost oscillator and the Pais-Uhlenbeck oscillator.

    x = mu0 q + mu2 q'',   y = nu0 q + nu2 q''

turns both Euler-Lagrange equations of the ghost model into

    q'''' + zeta q'' + xi q = 0,   zeta = w1^2 + w2^2,  xi = w1^2 w2^2.

Everything here is closed form; no ODE integration is done.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (ComplexFrequencies, DegenerateFrequencies, MapUndefined,
                     SingularMapDeterminant, UnknownRegime)
from .params import ModelParams

REGIMES = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PUParams:
    model: ModelParams
    zeta: float
    xi: float
    mu0: float
    nu0: float
    mu2: float
    nu2: float
    kappa1: float
    omega1: float | None = None
    omega2: float | None = None
    regime: str | None = None

    def relabel(self, regime: str) -> PUParams:
        w1, w2 = regime_frequencies(self, regime)
        return replace(self, omega1=w1, omega2=w2, regime=regime)

    def mu_bar(self, w):
        return self.mu0 - self.mu2 * w * w

    def nu_bar(self, w):
        return self.nu0 - self.nu2 * w * w

    @property
    def det_map(self) -> float:
        return self.mu2 * self.nu0 - self.mu0 * self.nu2


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    px: float
    py: float
    t: float = 0.0

    def as_array(self):
        return np.array([self.x, self.y, self.px, self.py])


@dataclass(frozen=True)
class ModeAmplitudes:
    a: complex
    b: complex


def pu_constants(p: ModelParams, regime: str = "I") -> PUParams:
    """Map constants; frequencies are attached in ``regime`` labelling when real."""
    rad = p.nu2 + p.omega_cap - p.g
    if not rad > 0:
        raise MapUndefined(f"nu^2 + Omega - g = {rad} <= 0: the map is not real")
    s = math.sqrt(rad)
    pu = PUParams(
        model=p,
        zeta=4 * (p.nu2 - p.omega_cap),
        xi=4 * (p.g**2 - 4 * p.nu2 * p.omega_cap),
        mu0=math.sqrt(2) * (p.g - 2 * p.omega_cap) / s,
        nu0=math.sqrt(2) * (p.g - 2 * p.nu2) / s,
        mu2=1 / (math.sqrt(2) * s),
        nu2=-1 / (math.sqrt(2) * s),
        kappa1=2 * math.sqrt(2) * s,
    )
    try:
        return pu.relabel(regime)
    except ComplexFrequencies:
        return pu


def omega(zeta: float, xi: float, eps: int, eta: int):
    """Closed-form frequency eps/sqrt(2) * sqrt(zeta + eta sqrt(zeta^2 - 4 xi)).

    Returns a complex number when the radicands are negative.
    """
    inner = cmath.sqrt(complex(zeta * zeta - 4 * xi))
    w = eps / math.sqrt(2) * cmath.sqrt(zeta + eta * inner)
    return w.real if w.imag == 0 else w


def _check_real(zeta, xi):
    if not (zeta > 0 and 0 < xi < zeta * zeta / 4):
        if zeta > 0 and xi == zeta * zeta / 4:
            raise ComplexFrequencies("zeta^2 = 4 xi: degenerate frequencies")
        raise ComplexFrequencies(f"frequencies not real and distinct for zeta={zeta}, xi={xi}")


def regime_frequencies(pu: PUParams, regime: str):
    """(omega1, omega2) in the sign/order convention of ``regime``."""
    _check_real(pu.zeta, pu.xi)
    big = omega(pu.zeta, pu.xi, 1, 1)
    # w1^2 w2^2 = xi; the closed form for the small root cancels when xi << zeta^2
    small = math.sqrt(pu.xi) / big
    table = {
        "I": (small, big), "II": (big, small),
        "III": (-small, big), "IV": (-big, small),
        "V": (-big, -small), "VI": (-small, -big),
        "VII": (big, -small), "VIII": (small, -big),
    }
    try:
        return table[regime]
    except KeyError:
        raise UnknownRegime(f"unknown regime {regime!r}") from None


def classify_regime(w1: float, w2: float) -> str:
    if min(abs(w1), abs(w2)) < TIE_TOL or abs(abs(w1) - abs(w2)) < TIE_TOL * max(abs(w1), abs(w2)):
        raise DegenerateFrequencies(f"cannot order frequencies {w1}, {w2}")
    second_larger = abs(w2) > abs(w1)
    if w1 > 0 and w2 > 0:
        return "I" if second_larger else "II"
    if w1 < 0 < w2:
        return "III" if second_larger else "IV"
    if w1 < 0 and w2 < 0:
        return "VI" if second_larger else "V"
    return "VIII" if second_larger else "VII"


def frequencies(pu: PUParams, regime: str = "I"):
    """Return ``(omega1, omega2, regime)``; the regime is re-derived from the values."""
    w1, w2 = regime_frequencies(pu, regime)
    found = classify_regime(w1, w2)
    assert found == regime
    return w1, w2, found


def _require_frequencies(pu: PUParams):
    if pu.omega1 is None:
        _check_real(pu.zeta, pu.xi)
    return pu.omega1, pu.omega2


def classical_state(m: ModeAmplitudes, pu: PUParams, t: float) -> PhaseState:
    w1, w2 = _require_frequencies(pu)
    e1, e2 = m.a * cmath.exp(-1j * w1 * t), m.b * cmath.exp(-1j * w2 * t)
    c1, c2 = e1 + e1.conjugate(), e2 + e2.conjugate()
    d1, d2 = e1 - e1.conjugate(), e2 - e2.conjugate()
    x = pu.mu_bar(w1) * c1 + pu.mu_bar(w2) * c2
    y = pu.nu_bar(w1) * c1 + pu.nu_bar(w2) * c2
    px = -0.5j * (w1 * pu.mu_bar(w1) * d1 + w2 * pu.mu_bar(w2) * d2)
    py = 0.5j * (w1 * pu.nu_bar(w1) * d1 + w2 * pu.nu_bar(w2) * d2)
    return PhaseState(x.real, y.real, px.real, py.real, t)


def invert_modes(s: PhaseState, pu: PUParams) -> ModeAmplitudes:
    w1, w2 = _require_frequencies(pu)
    if abs(w1 * w1 - w2 * w2) < TIE_TOL or min(abs(w1), abs(w2)) < TIE_TOL:
        raise DegenerateFrequencies(f"omega1={w1}, omega2={w2}")
    det = pu.det_map
    if abs(det) < TIE_TOL:
        raise SingularMapDeterminant("mu2 nu0 - mu0 nu2 = 0")
    mb1, mb2, nb1, nb2 = pu.mu_bar(w1), pu.mu_bar(w2), pu.nu_bar(w1), pu.nu_bar(w2)
    split = w1 * w1 - w2 * w2
    a = ((w1 * mb2 * s.y - w1 * nb2 * s.x - 2j * (nb2 * s.px + mb2 * s.py))
         * cmath.exp(1j * w1 * s.t) / (2 * w1 * split * det))
    b = ((w2 * nb1 * s.x - w2 * mb1 * s.y + 2j * (nb1 * s.px + mb1 * s.py))
         * cmath.exp(1j * w2 * s.t) / (2 * w2 * split * det))
    return ModeAmplitudes(a, b)


def trajectory(m: ModeAmplitudes, pu: PUParams, t0: float, t1: float, steps: int):
    if steps < 2 or not t1 > t0:
        raise ValueError("need steps >= 2 and t1 > t0")
    return [classical_state(m, pu, t) for t in np.linspace(t0, t1, steps)]


def hamiltonian(p: ModelParams, s: PhaseState) -> float:
    return (s.px**2 - s.py**2 + p.nu2 * s.x**2 + p.omega_cap * s.y**2 + p.g * s.x * s.y)


def lagrangian(p: ModelParams, x, y, xdot, ydot):
    return 0.25 * (xdot**2 - ydot**2) - p.nu2 * x**2 - p.omega_cap * y**2 - p.g * x * y


def pu_lagrangian(pu: PUParams, q, qd, qdd):
    return 0.5 * qdd**2 - 0.5 * pu.zeta * qd**2 + 0.5 * pu.xi * q**2


def mode_derivatives(m: ModeAmplitudes, pu: PUParams, t: float, order: int = 4):
    """Exact time derivatives q, q', ..., q^(order) of the mode expansion."""
    w1, w2 = _require_frequencies(pu)
    out = []
    for k in range(order + 1):
        z = 0j
        for amp, w in ((m.a, w1), (m.b, w2)):
            e = amp * cmath.exp(-1j * w * t) * (-1j * w) ** k
            z += e + e.conjugate()
        out.append(z.real)
    return out


def surface_term_residual(m: ModeAmplitudes, pu: PUParams, t: float) -> float:
    """L(x(q), y(q)) - L_PU(q) + d/dt(q' q''), evaluated analytically."""
    q, qd, qdd, qddd, _ = mode_derivatives(m, pu, t)
    x, y = pu.mu0 * q + pu.mu2 * qdd, pu.nu0 * q + pu.nu2 * qdd
    xd, yd = pu.mu0 * qd + pu.mu2 * qddd, pu.nu0 * qd + pu.nu2 * qddd
    total = qdd**2 + qd * qddd
    return lagrangian(pu.model, x, y, xd, yd) - pu_lagrangian(pu, q, qd, qdd) + total


def _fundamental_brackets(zeta: float) -> np.ndarray:
    # rows/cols: q, q', q'', q'''; unlisted brackets vanish
    J = np.zeros((4, 4))
    J[1, 2], J[3, 0], J[2, 3] = 1.0, 1.0, zeta
    return J - J.T


def map_matrix(pu: PUParams) -> np.ndarray:
    """Rows: coefficients of x, y, p_x, p_y on (q, q', q'', q''')."""
    return np.array([
        [pu.mu0, 0, pu.mu2, 0],
        [pu.nu0, 0, pu.nu2, 0],
        [0, pu.mu0 / 2, 0, pu.mu2 / 2],
        [0, -pu.nu0 / 2, 0, -pu.nu2 / 2],
    ])


def full_bracket_matrix(p: ModelParams) -> np.ndarray:
    """All 4x4 induced brackets among (x, y, p_x, p_y)."""
    pu = pu_constants(p)
    A = map_matrix(pu)
    return A @ _fundamental_brackets(pu.zeta) @ A.T


def bracket_matrix(p: ModelParams) -> np.ndarray:
    """Induced {x_i, p_j}; equals the identity for a symplectic map."""
    return full_bracket_matrix(p)[:2, 2:]
