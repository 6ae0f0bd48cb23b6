"""Polynomial-times-Gaussian states and their exact observables.

A state is P(x, y) exp(-alpha x^2/2 - beta y^2/2 + gamma x y).  Derivatives,
the Hamiltonian and ladder operators all map this class to itself, and every
expectation value reduces to Gaussian moments, so nothing here integrates
numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotNormalisable, ShapeMismatch, UnexpectedSingularTower
from .params import AuxParams, ModelParams
from .recurrence import CoefficientTable, closed_spectrum, level_energy, solve_tower


class MomentKey(NamedTuple):
    p: int
    q: int


# ---------------------------------------------------------------------------
# plain polynomial helpers on {(i, j): coeff}

def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v != 0}


def _add(*terms) -> dict:
    """Sum of (scalar, poly) pairs."""
    out: dict = {}
    for c, poly in terms:
        if c == 0:
            continue
        for k, v in poly.items():
            out[k] = out.get(k, 0) + c * v
    return _clean(out)


def _mul_x(poly):
    return {(i + 1, j): v for (i, j), v in poly.items()}


def _mul_y(poly):
    return {(i, j + 1): v for (i, j), v in poly.items()}


def _dx(poly):
    return {(i - 1, j): i * v for (i, j), v in poly.items() if i > 0}


def _dy(poly):
    return {(i, j - 1): j * v for (i, j), v in poly.items() if j > 0}


def _mul(p1, p2):
    out: dict = {}
    for (i1, j1), v1 in p1.items():
        for (i2, j2), v2 in p2.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + v1 * v2
    return _clean(out)


def _conj(poly):
    return {k: np.conj(v) for k, v in poly.items()}


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyGauss:
    coeffs: dict
    aux: AuxParams

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    def max_coeff(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def _with(self, coeffs) -> PolyGauss:
        return PolyGauss(coeffs, self.aux)

    def __add__(self, other: PolyGauss) -> PolyGauss:
        return self._with(_add((1, self.coeffs), (1, other.coeffs)))

    def __sub__(self, other: PolyGauss) -> PolyGauss:
        return self._with(_add((1, self.coeffs), (-1, other.coeffs)))

    def scaled(self, c) -> PolyGauss:
        return self._with(_add((c, self.coeffs)))

    def times_x(self) -> PolyGauss:
        return self._with(_mul_x(self.coeffs))

    def times_y(self) -> PolyGauss:
        return self._with(_mul_y(self.coeffs))

    def d_x(self) -> PolyGauss:
        """d/dx of the full state: (P_x + P (-alpha x + gamma y)) e^phi."""
        P = self.coeffs
        return self._with(_add((1, _dx(P)), (-self.aux.alpha, _mul_x(P)), (self.aux.gamma, _mul_y(P))))

    def d_y(self) -> PolyGauss:
        P = self.coeffs
        return self._with(_add((1, _dy(P)), (self.aux.gamma, _mul_x(P)), (-self.aux.beta, _mul_y(P))))

    def first_order(self, cx, cy, dx, dy) -> PolyGauss:
        """(cx x + cy y + dx d/dx + dy d/dy) applied to the state."""
        return self._with(_add((cx, _mul_x(self.coeffs)), (cy, _mul_y(self.coeffs)),
                               (dx, self.d_x().coeffs), (dy, self.d_y().coeffs)))

    def polynomial(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (i, j), v in self.coeffs.items():
            total = total + v * x**i * y**j
        return total


def evaluate(s: PolyGauss, x, y):
    """psi(x, y); arrays broadcast. Real output when everything is real."""
    a = s.aux
    val = s.polynomial(x, y) * np.exp(-a.alpha * np.square(x) / 2 - a.beta * np.square(y) / 2
                                      + a.gamma * np.asarray(x) * np.asarray(y))
    if np.iscomplexobj(val) and np.all(np.imag(val) == 0):
        val = np.real(val)
    return val[()] if np.ndim(val) == 0 else val


def ground_state(aux: AuxParams) -> PolyGauss:
    return PolyGauss({(0, 0): 1.0}, aux)


def apply_hamiltonian(s: PolyGauss, p: ModelParams) -> PolyGauss:
    """-d^2/dx^2 + d^2/dy^2 + nu^2 x^2 + Omega y^2 + g x y, exactly."""
    kinetic = s.d_y().d_y() - s.d_x().d_x()
    P = s.coeffs
    potential = _add((p.nu2, _mul_x(_mul_x(P))), (p.omega_cap, _mul_y(_mul_y(P))),
                     (p.g, _mul_x(_mul_y(P))))
    return kinetic + s._with(potential)


def eigen_residual(s: PolyGauss, E, p: ModelParams) -> float:
    diff = apply_hamiltonian(s, p) - s.scaled(E)
    return diff.max_coeff() / s.max_coeff()


# ---------------------------------------------------------------------------
# eigenstates

def assemble(N: int, E, aux: AuxParams, table: CoefficientTable) -> PolyGauss:
    """Lay the coefficient table out as monomials: sigma[k, i] -> x^i y^(N-i-2k)."""
    if table.N != N or table.sigma.shape != (N // 2 + 1, N + 1):
        raise ShapeMismatch(f"table for N={table.N} with shape {table.sigma.shape} used for N={N}")
    coeffs = {}
    for k in range(N // 2 + 1):
        for i in range(N - 2 * k + 1):
            v = table.sigma[k, i]
            if v != 0:
                coeffs[(i, N - i - 2 * k)] = v.item() if hasattr(v, "item") else v
    return PolyGauss(coeffs, aux)


def hermite_like(n: int, a) -> dict:
    """Monic h_n with -h'' + 2 a t h' = 2 a n h, as {power: coeff}."""
    c = {n: 1.0}
    for m in range(n - 2, -1, -2):
        c[m] = (m + 2) * (m + 1) * c[m + 2] / (2 * a * (m - n))
    return c


def decoupled_state(i: int, j: int, aux: AuxParams) -> PolyGauss:
    """Product state h_i(x) h_j(y) for gamma = 0; energy alpha(2i+1) - beta(2j+1)."""
    if aux.gamma != 0:
        raise ValueError("decoupled states need gamma = 0")
    return _product_state(i, j, aux)


def _product_label(N: int, E, aux: AuxParams, rtol: float) -> int | None:
    """Index i of the product state x^i y^(N - i) whose energy matches E, if any."""
    for i in range(N + 1):
        e_ij = aux.alpha * (2 * i + 1) - aux.beta * (2 * (N - i) + 1)
        if abs(e_ij - E) <= rtol * max(1.0, abs(E)):
            return i
    return None


def _product_state(i: int, j: int, aux: AuxParams) -> PolyGauss:
    hx, hy = hermite_like(i, aux.alpha), hermite_like(j, aux.beta)
    coeffs = {(px, py): cx * cy for px, cx in hx.items() for py, cy in hy.items()}
    return PolyGauss(_clean(coeffs), aux)


def eigenstate(N: int, n: int, sign: str, aux: AuxParams,
               p: ModelParams | None = None) -> tuple[PolyGauss, complex | float]:
    """Level (N, n, sign) scaled to unit largest coefficient, and its energy.

    For |gamma| below ~1e-6 of alpha + beta, the tower can pass through
    O(gamma^2) pivots that rounding destroys. The product state is then also
    tried, and the candidate with the smaller residual kept (needs p).
    """
    E = level_energy(N, n, sign, aux)
    if aux.gamma == 0:
        i = _product_label(N, E, aux, 1e-9)
        if i is None:
            raise AssertionError("no product state matches a decoupled level")
        return decoupled_state(i, N - i, aux), E
    try:
        s = assemble(N, E, aux, solve_tower(N, aux, E))
        # the overall constant is free; unit largest coefficient keeps products finite as gamma -> 0
        s = s.scaled(1 / s.max_coeff())
    except UnexpectedSingularTower:
        s = None
    small = abs(aux.gamma) < 1e-6 * (abs(aux.alpha) + abs(aux.beta))
    if small and p is not None:
        i = _product_label(N, E, aux, 1e-6)
        if i is not None:
            alt = _product_state(i, N - i, aux)
            if s is None or not np.isfinite(s.max_coeff()) or eigen_residual(alt, E, p) < eigen_residual(s, E, p):
                return alt.scaled(1 / alt.max_coeff()), E
    if s is None:
        raise UnexpectedSingularTower(f"tower for level ({N}, {n}, {sign}) is singular")
    return s, E


def all_eigenstates(N: int, aux: AuxParams, p: ModelParams | None = None):
    return [(lv, *eigenstate(N, lv.n, lv.sign, aux, p)) for lv in closed_spectrum(N, aux)]


# ---------------------------------------------------------------------------
# moments and observables

def _require_normalisable(aux: AuxParams):
    if not aux.is_normalisable():
        raise NotNormalisable(
            f"envelope alpha={aux.alpha}, beta={aux.beta}, gamma={aux.gamma} is not square integrable")
    return float(np.real(aux.alpha)), float(np.real(aux.beta)), float(np.real(aux.gamma))


def moment_table(aux: AuxParams, pmax: int, qmax: int) -> np.ndarray:
    """m[p, q] = integral of x^p y^q exp(-(alpha x^2 + beta y^2 - 2 gamma x y))."""
    a, b, c = _require_normalisable(aux)
    det = a * b - c * c
    cxx, cyy, cxy = b / (2 * det), a / (2 * det), c / (2 * det)
    m = np.zeros((pmax + 1, qmax + 1))
    m[0, 0] = math.pi / math.sqrt(det)
    for q in range(2, qmax + 1):
        m[0, q] = (q - 1) * cyy * m[0, q - 2]
    for p in range(1, pmax + 1):
        for q in range(qmax + 1):
            val = (p - 1) * cxx * m[p - 2, q] if p >= 2 else 0.0
            if q >= 1:
                val += q * cxy * m[p - 1, q - 1]
            m[p, q] = val
    return m


def gaussian_moment(k: MomentKey | tuple, aux: AuxParams) -> float:
    p, q = k
    if p < 0 or q < 0:
        raise ValueError("moment powers must be non-negative")
    return float(moment_table(aux, p, q)[p, q])


def _integrate(poly: dict, aux: AuxParams):
    if not poly:
        return 0.0
    pmax = max(i for i, _ in poly)
    qmax = max(j for _, j in poly)
    m = moment_table(aux, pmax, qmax)
    return sum(v * m[i, j] for (i, j), v in poly.items())


def inner(s1: PolyGauss, s2: PolyGauss):
    """<s1|s2> for two states sharing a real, normalisable envelope."""
    if s1.aux != s2.aux:
        raise ValueError("states must share an envelope")
    _require_normalisable(s1.aux)
    return _integrate(_mul(_conj(s1.coeffs), s2.coeffs), s1.aux)


def norm_squared(s: PolyGauss) -> float:
    return float(np.real(inner(s, s)))


def expectation_poly(s: PolyGauss, poly: dict):
    """<s| f(x, y) |s> / <s|s> for a polynomial f."""
    num = _integrate(_mul(_mul(_conj(s.coeffs), s.coeffs), poly), s.aux)
    return num / norm_squared(s)


def _unit_scaled(s: PolyGauss) -> tuple[PolyGauss, float, float]:
    """s in coordinates u = x sqrt(alpha), v = y sqrt(beta), plus (lx, ly) with x = lx u.

    Moments of very wide or narrow envelopes overflow; in these coordinates
    alpha = beta = 1 and only the coupling ratio remains.
    """
    a, b, c = _require_normalisable(s.aux)
    lx, ly = 1 / math.sqrt(a), 1 / math.sqrt(b)
    coeffs = {(i, j): v * lx**i * ly**j for (i, j), v in s.coeffs.items()}
    top = max(abs(v) for v in coeffs.values()) if coeffs else 1.0
    coeffs = {k: v / top for k, v in coeffs.items()}
    return PolyGauss(coeffs, AuxParams(1.0, 1.0, c * lx * ly)), lx, ly


def uncertainty(s: PolyGauss, axis: str = "x", p: ModelParams | None = None) -> float:
    """Delta q * Delta p_q with the means dropped (they vanish by parity)."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    # the product is invariant under q -> l q, so work at unit envelope widths
    s, _, _ = _unit_scaled(s)
    key = (2, 0) if axis == "x" else (0, 2)
    q2 = float(np.real(expectation_poly(s, {key: 1.0})))
    ds = s.d_x() if axis == "x" else s.d_y()
    p2 = norm_squared(ds) / norm_squared(s)
    return math.sqrt(q2 * p2)


def means(s: PolyGauss):
    """(<x>, <y>, <p_x>, <p_y>); all four vanish for parity eigenstates."""
    s, lx, ly = _unit_scaled(s)
    n = norm_squared(s)
    ex = expectation_poly(s, {(1, 0): 1.0})
    ey = expectation_poly(s, {(0, 1): 1.0})
    # <p> = -i <psi|d psi>; real part of the overlap integral is a surface term
    px = np.real(-1j * inner(s, s.d_x()) / n)
    py = np.real(-1j * inner(s, s.d_y()) / n)
    return float(np.real(ex)) * lx, float(np.real(ey)) * ly, float(px) / lx, float(py) / ly


def covariance(s: PolyGauss) -> np.ndarray:
    exx = np.real(expectation_poly(s, {(2, 0): 1.0}))
    eyy = np.real(expectation_poly(s, {(0, 2): 1.0}))
    exy = np.real(expectation_poly(s, {(1, 1): 1.0}))
    return np.array([[exx, exy], [exy, eyy]])


def principal_angle(s: PolyGauss) -> float:
    """Angle (radians, in (-pi/2, pi/2]) of the major axis of |psi|^2."""
    w, v = np.linalg.eigh(covariance(s))
    vx, vy = v[:, np.argmax(w)]
    ang = math.atan2(vy, vx)
    if ang <= -math.pi / 2:
        ang += math.pi
    elif ang > math.pi / 2:
        ang -= math.pi
    return ang


def density_grid(s: PolyGauss, window=(-3.0, 3.0, -3.0, 3.0), res=(101, 101), normalise=False):
    """|psi|^2 on a uniform grid; returns (xs, ys, grid) with grid[iy, ix]."""
    x0, x1, y0, y1 = window
    nx, ny = res
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(xs, ys)
    grid = np.abs(evaluate(s, X, Y)) ** 2
    if normalise:
        grid = grid / norm_squared(s)
    return xs, ys, grid
