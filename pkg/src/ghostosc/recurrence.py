"""Quantisation condition and the coupled three-term recurrences.

Writing P_N = sum_k sum_n sigma_n^{N-2k} x^n y^{N-n-2k}, the Schroedinger
equation splits into

    a_n sigma_{n-1}^{N-2k} + b_n sigma_n^{N-2k} + c_n sigma_{n+1}^{N-2k}
        = f_n sigma_n^{N-2k+2} + g_n sigma_{n+2}^{N-2k+2}

for k = 0 .. floor(N/2).  The k = 0 row is homogeneous; its tridiagonal
matrix must be singular, which fixes the energy.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import warnings

from scipy import linalg, special

from .errors import BadLabel, OffSpectrum, SingularMatrix, UnexpectedSingularTower
from .params import AuxParams

DET_RTOL = 1e-8
GAMMA_POLE_MARGIN = 1e-6


# ---------------------------------------------------------------------------
# tridiagonal algebra

@dataclass(frozen=True)
class Tridiag:
    sub: np.ndarray   # a_1 .. a_{d-1}  (row n, column n-1)
    diag: np.ndarray  # b_0 .. b_{d-1}
    sup: np.ndarray   # c_0 .. c_{d-2}  (row n, column n+1)

    def __post_init__(self):
        d = len(self.diag)
        if d < 1 or len(self.sub) != d - 1 or len(self.sup) != d - 1:
            raise ValueError("off-diagonals must be one shorter than the diagonal")

    @property
    def dim(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        d = self.dim
        dtype = np.result_type(self.sub, self.diag, self.sup, float)
        m = np.zeros((d, d), dtype=dtype)
        m[np.arange(d), np.arange(d)] = self.diag
        if d > 1:
            m[np.arange(1, d), np.arange(d - 1)] = self.sub
            m[np.arange(d - 1), np.arange(1, d)] = self.sup
        return m


def leading_minors(m: Tridiag, diag_mag=None):
    """R_0 .. R_{d+1}: R_t is the determinant of the leading (t-1)x(t-1) block.

    Also returns R_{d+1} of the same recursion run on absolute values, the
    scale against which a vanishing determinant is judged. ``diag_mag`` can
    supply diagonal magnitudes that include cancellation inside each entry.
    """
    d = m.dim
    dtype = np.result_type(m.diag, float)
    R = np.zeros(d + 2, dtype=dtype)
    A = np.zeros(d + 2)
    R[1] = A[1] = 1.0
    mag = np.abs(m.diag) if diag_mag is None else diag_mag
    for t in range(1, d + 1):
        R[t + 1] = m.diag[t - 1] * R[t]
        A[t + 1] = mag[t - 1] * A[t]
        if t >= 2:
            R[t + 1] -= m.sub[t - 2] * m.sup[t - 2] * R[t - 1]
            A[t + 1] += abs(m.sub[t - 2] * m.sup[t - 2]) * A[t - 1]
    return R, max(float(A[d + 1]), np.finfo(float).tiny)


def trailing_minors(m: Tridiag):
    """T_1 .. T_{d+1} (index 0 unused): T_t is the determinant of rows/cols t..d (1-based)."""
    d = m.dim
    dtype = np.result_type(m.diag, float)
    T = np.zeros(d + 3, dtype=dtype)
    T[d + 1] = 1.0
    for t in range(d, 0, -1):
        T[t] = m.diag[t - 1] * T[t + 1]
        if t <= d - 1:
            T[t] -= m.sub[t - 1] * m.sup[t - 1] * T[t + 2]
    return T


def tridiag_det(m: Tridiag):
    R, _ = leading_minors(m)
    return R[m.dim + 1]


def tridiag_inverse(m: Tridiag, rtol: float = 1e-13) -> np.ndarray:
    """Closed-form inverse from leading and trailing minors."""
    d = m.dim
    R, scale = leading_minors(m)
    det = R[d + 1]
    if abs(det) <= rtol * scale:
        raise SingularMatrix(f"determinant {det!r} is zero at scale {scale:.3g}")
    T = trailing_minors(m)
    inv = np.empty((d, d), dtype=np.result_type(m.diag, float))
    # 1-based i, j as in the usual formula; sup[k-1] is c_{k-1}, sub[k-1] is a_k
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            if i == j:
                inv[i - 1, j - 1] = R[i] * T[i + 1] / det
            elif i < j:
                prod = np.prod(m.sup[i - 1:j - 1])
                inv[i - 1, j - 1] = (-1) ** (i + j) * R[i] * T[j + 1] * prod / det
            else:
                prod = np.prod(m.sub[j - 1:i - 1])
                inv[i - 1, j - 1] = (-1) ** (i + j) * R[j] * T[i + 1] * prod / det
    return inv


# ---------------------------------------------------------------------------
# recurrence coefficients

@dataclass(frozen=True)
class RecurrenceCoeffs:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    f: np.ndarray
    gg: np.ndarray


def _dtype(*vals):
    return complex if any(isinstance(v, complex) for v in vals) else float


def recurrence_coeffs(N: int, k: int, aux: AuxParams, E) -> RecurrenceCoeffs:
    """Coefficient arrays indexed by n = 0..N."""
    al, be, ga = aux.alpha, aux.beta, aux.gamma
    dt = _dtype(al, be, ga, E)
    n = np.arange(N + 1)
    a = np.asarray(2 * (2 * k + n - N - 1) * ga, dtype=dt)
    b = np.asarray(E - (2 * n + 1) * al + (2 * N - 4 * k - 2 * n + 1) * be, dtype=dt)
    c = np.asarray(2 * (n + 1) * ga, dtype=dt)
    f = (N - 2 * k - n + 1) * (N - 2 * k - n + 2)
    gg = -(n + 1) * (n + 2)
    return RecurrenceCoeffs(a, b, c, f.astype(float), gg.astype(float))


def recurrence_matrix(N: int, k: int, aux: AuxParams, E) -> Tridiag:
    co = recurrence_coeffs(N, k, aux, E)
    return Tridiag(co.a[1:], co.b, co.c[:-1])


def source_matrix(N: int, k: int) -> np.ndarray:
    """Dense (N+1)x(N+1) matrix with f_n on the diagonal and g_n two to the right."""
    n = np.arange(N + 1)
    B = np.diag(((N - 2 * k - n + 1) * (N - 2 * k - n + 2)).astype(float))
    for i in range(N - 1):
        B[i, i + 2] = -(i + 1) * (i + 2)
    return B


# ---------------------------------------------------------------------------
# spectrum

@dataclass(frozen=True)
class SpectrumLevel:
    bigN: int
    n: int
    sign: str  # "+", "-" or "mid"
    energy: complex | float

    @property
    def label(self) -> str:
        return f"N={self.bigN},n={self.n},{self.sign}"


def _tidy(z):
    z = complex(z)
    return z.real if z.imag == 0.0 else z


def level_energy(N: int, n: int, sign: str, aux: AuxParams):
    base = (N + 1) * (complex(aux.alpha) - complex(aux.beta))
    if sign == "mid":
        if N % 2 or n != N:
            raise BadLabel(f"mid level needs even N and n = N, got N={N}, n={n}")
        return _tidy(base)
    if sign not in ("+", "-") or not 1 <= n <= (N + 1) // 2:
        raise BadLabel(f"bad level label N={N}, n={n}, sign={sign!r}")
    s = 1 if sign == "+" else -1
    return _tidy(base + s * (N + 2 - 2 * n) * complex(aux.kappa))


def closed_spectrum(N: int, aux: AuxParams) -> list[SpectrumLevel]:
    """All N+1 roots of det M_N^0, as labelled levels.

    Pairs run over n = 1..floor((N+1)/2); even N adds the middle level
    (N+1)(alpha - beta), labelled n = N.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    levels = []
    for n in range(1, (N + 1) // 2 + 1):
        for sign in ("-", "+"):
            levels.append(SpectrumLevel(N, n, sign, level_energy(N, n, sign, aux)))
    if N % 2 == 0:
        levels.append(SpectrumLevel(N, N, "mid", level_energy(N, N, "mid", aux)))
    return levels


def det_at_energy(N: int, aux: AuxParams, E):
    return tridiag_det(recurrence_matrix(N, 0, aux, E))


def _diag_magnitudes(N: int, k: int, aux: AuxParams, E) -> np.ndarray:
    n = np.arange(N + 1)
    return (abs(E) + np.abs(2 * n + 1) * abs(aux.alpha)
            + np.abs(2 * N - 4 * k - 2 * n + 1) * abs(aux.beta))


def det_scale(N: int, aux: AuxParams, E) -> float:
    """Magnitude of det M_N^0 with every term taken in absolute value."""
    return leading_minors(recurrence_matrix(N, 0, aux, E), _diag_magnitudes(N, 0, aux, E))[1]


def relative_det(N: int, aux: AuxParams, E) -> float:
    M = recurrence_matrix(N, 0, aux, E)
    R, scale = leading_minors(M, _diag_magnitudes(N, 0, aux, E))
    return float(abs(R[N + 2]) / scale)


def on_spectrum(N: int, aux: AuxParams, E, rtol: float = DET_RTOL) -> bool:
    return relative_det(N, aux, E) <= rtol


def quadratic_factor(E, n: int, m: int, aux: AuxParams):
    """g(E, n, m); its two roots in E are (n+1)(alpha-beta) +- (n+2-2m) kappa."""
    al, be, ga = aux.alpha, aux.beta, aux.gamma
    return ((E + (2 * m - 2 * n - 3) * al + (2 * m - 1) * be)
            * (E + (1 - 2 * m) * al + (3 - 2 * m + 2 * n) * be)
            + 4 * ga * ga * (2 - 2 * m + n) ** 2)


def factorised_det(N: int, aux: AuxParams, E):
    """det M_N^0 as a product of quadratic factors (monic in E)."""
    out = 1.0
    for m in range(1, (N + 1) // 2 + 1):
        out = out * quadratic_factor(E, N, m, aux)
    if N % 2 == 0:
        # g(E, N, N/2+1) is a perfect square; take the linear root directly
        out = out * (E - (N + 1) * (aux.alpha - aux.beta))
    return out


# ---------------------------------------------------------------------------
# k = 0 solution

def tau_sequence(lam, length: int):
    """tau_0 .. tau_{length-1} of tau_{n+1} = tau_n + lam_n tau_{n-1}, tau_0 = tau_1 = 1.

    ``lam[n]`` is lambda_n; lam[0] is never used.
    """
    tau = [1.0, 1.0][:length]
    for n in range(1, length - 1):
        tau.append(tau[n] + lam[n] * tau[n - 1])
    return tau


def _rising_product(N: int, n: int, aux: AuxParams, E):
    """prod_{k<n} r_k in Gamma-function form; None when a pole is too close."""
    al, be, ga = complex(aux.alpha), complex(aux.beta), complex(aux.gamma)
    if abs(al + be) < GAMMA_POLE_MARGIN:
        return None
    u = (al - (2 * N + 1) * be - E) / (2 * (al + be))
    for z in (u, u + n):
        if z.real <= 0 and abs(z - round(z.real)) < GAMMA_POLE_MARGIN:
            return None
    val = cmath.exp(special.loggamma(u + n) - special.loggamma(u)) / math.factorial(n)
    return val * ((al + be) / ga) ** n


def _normalise(vec: np.ndarray) -> np.ndarray:
    top = np.max(np.abs(vec)) if len(vec) else 0.0
    if vec[0] != 0 and abs(vec[0]) >= 1e-150 * top:
        return vec / vec[0]
    # first entry zero or too small to divide by without overflow
    nz = np.flatnonzero(np.abs(vec) >= 1e-150 * top) if top else []
    return vec / vec[nz[0]] if len(nz) else vec


def _inverse_iteration(M: Tridiag, steps: int = 4) -> np.ndarray:
    """Null vector from scratch, for when the closed form over- or underflows."""
    d = M.dim
    scale = np.max(np.abs(M.diag)) + (np.max(np.abs(M.sub)) if d > 1 else 0.0)
    ab = np.zeros((3, d), dtype=np.result_type(M.diag, float))
    ab[0, 1:], ab[1], ab[2, :-1] = M.sup, M.diag - 1e-13 * scale, M.sub
    x = np.ones(d, dtype=ab.dtype)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        for _ in range(steps):
            x = linalg.solve_banded((1, 1), ab, x, check_finite=False)
            x = x / np.max(np.abs(x))
    return _normalise(x)


def _twisted_null(M: Tridiag) -> np.ndarray:
    """Null vector by eliminating from both ends and twisting at the smallest pivot.

    Stable when the vector decays steeply, where one-sided recursion picks up
    the growing solution.
    """
    d = M.dim
    if d == 1:
        return np.ones(1, dtype=np.result_type(M.diag, float))
    a = np.concatenate([[0], M.sub])   # a[n] couples row n to column n - 1
    b, c = M.diag, np.concatenate([M.sup, [0]])
    tiny = np.finfo(float).eps * (np.max(np.abs(b)) + np.max(np.abs(M.sub)) + np.max(np.abs(M.sup)))
    dt = np.result_type(b, float)
    fwd, bwd = np.empty(d, dtype=dt), np.empty(d, dtype=dt)
    with np.errstate(all="ignore"):
        fwd[0] = b[0]
        for n in range(1, d):
            fwd[n] = b[n] - a[n] * c[n - 1] / (fwd[n - 1] if fwd[n - 1] != 0 else tiny)
        bwd[d - 1] = b[d - 1]
        for n in range(d - 2, -1, -1):
            bwd[n] = b[n] - c[n] * a[n + 1] / (bwd[n + 1] if bwd[n + 1] != 0 else tiny)
        twist = np.abs(fwd + bwd - b)
        r = int(np.argmin(np.where(np.isfinite(twist), twist, np.inf)))
        v = np.zeros(d, dtype=dt)
        v[r] = 1.0
        for n in range(r - 1, -1, -1):
            v[n] = -c[n] * v[n + 1] / (fwd[n] if fwd[n] != 0 else tiny)
        for n in range(r + 1, d):
            v[n] = -a[n] * v[n - 1] / (bwd[n] if bwd[n] != 0 else tiny)
    return _normalise(v)


def _null_residual(M: Tridiag, vec: np.ndarray) -> float:
    dense = M.to_dense()
    with np.errstate(all="ignore"):
        res = np.linalg.norm(dense @ vec) / (np.linalg.norm(vec) * max(np.max(np.abs(dense)), 1e-300))
    return float(res) if np.isfinite(res) else np.inf


def _polish(M: Tridiag, vec: np.ndarray, steps: int = 2) -> np.ndarray:
    """Inverse iteration at the (rounded) eigenvalue itself.

    Forward recursion towards the minimal solution loses digits; solving
    M x = v with the nearly singular M restores a backward-stable null vector.
    """
    d = M.dim
    if d == 1:
        return vec
    ab = np.zeros((3, d), dtype=np.result_type(M.diag, vec))
    ab[0, 1:], ab[1], ab[2, :-1] = M.sup, M.diag, M.sub
    dense = M.to_dense()
    best, best_res = vec, np.linalg.norm(dense @ vec) / np.linalg.norm(vec)
    x = vec
    for _ in range(steps):
        try:
            with np.errstate(all="ignore"), warnings.catch_warnings():
                warnings.simplefilter("ignore", linalg.LinAlgWarning)
                x = linalg.solve_banded((1, 1), ab, x, check_finite=False)
        except linalg.LinAlgError:
            break
        if not np.all(np.isfinite(x)):
            break
        x = _normalise(x)
        res = np.linalg.norm(dense @ x) / np.linalg.norm(x)
        if res < best_res:
            best, best_res = x, res
    return best


def solve_homogeneous(N: int, aux: AuxParams, E, check: bool = True) -> np.ndarray:
    """Null vector Sigma_N^0 of M_N^0, scaled so the first coefficient is 1."""
    if check:
        rel = relative_det(N, aux, E)
        if rel > DET_RTOL:
            raise OffSpectrum(f"det M_{N}^0 / scale = {rel:.3g} at E = {E!r}")
    co = recurrence_coeffs(N, 0, aux, E)
    dt = np.result_type(co.b, float)
    if aux.gamma == 0:
        # decoupled: M is diagonal, the null vector is the unit vector at the vanishing entry
        vec = np.zeros(N + 1, dtype=dt)
        vec[int(np.argmin(np.abs(co.b)))] = 1.0
        return vec
    r = -co.b / co.c
    s = -co.a / co.c
    scale = np.max(np.abs(co.b)) + abs(complex(aux.gamma))
    if N >= 1 and np.min(np.abs(r[:N])) < 1e-12 * scale / abs(complex(aux.gamma)):
        # some r_k vanishes, lambda_n is undefined: run the plain two-step recurrence
        vec = np.zeros(N + 1, dtype=dt)
        vec[0] = 1.0
        if N >= 1:
            vec[1] = r[0]
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(1, N):
                vec[n + 1] = r[n] * vec[n] + s[n] * vec[n - 1]
        return _best_null(recurrence_matrix(N, 0, aux, E), vec)
    lam = np.zeros(N + 1, dtype=dt)
    vec = np.empty(N + 1, dtype=dt)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N + 1):
            lam[n] = s[n] / (r[n - 1] * r[n]) if n < N else 0.0
        tau = tau_sequence(lam, N + 1)
        running = 1.0
        for n in range(N + 1):
            pref = _rising_product(N, n, aux, E)
            if pref is not None and not np.iscomplexobj(vec):
                pref = pref.real
            vec[n] = tau[n] * (running if pref is None else pref)
            running = running * r[n]
    return _best_null(recurrence_matrix(N, 0, aux, E), vec)


def _best_null(M: Tridiag, vec: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """Polish the closed-form vector; fall back to the twisted one if it stays inaccurate."""
    if np.all(np.isfinite(vec)) and np.any(vec):
        best = _polish(M, _normalise(vec))
        if _null_residual(M, best) <= rtol:
            return best
    else:
        best = _polish(M, _inverse_iteration(M))
    alt = _polish(M, _twisted_null(M))
    return alt if _null_residual(M, alt) < _null_residual(M, best) else best


# ---------------------------------------------------------------------------
# k >= 1 tower

@dataclass(frozen=True)
class CoefficientTable:
    """sigma[k, n] is the coefficient of x^n y^(N - n - 2k)."""

    N: int
    energy: complex | float
    sigma: np.ndarray

    def __post_init__(self):
        if self.sigma.shape != (self.N // 2 + 1, self.N + 1):
            raise ValueError(f"table shape {self.sigma.shape} does not fit N={self.N}")


def solve_tower(N: int, aux: AuxParams, E, sigma0: np.ndarray | None = None) -> CoefficientTable:
    """All coefficient rows, Sigma^k = (M^k)^-1 B^k Sigma^(k-1)."""
    if sigma0 is None:
        sigma0 = solve_homogeneous(N, aux, E)
    rows = [np.asarray(sigma0)]
    for k in range(1, N // 2 + 1):
        # rows past degree N - 2k decouple (a_{N-2k+1} = 0, zero source there): solve the leading block
        d = N - 2 * k + 1
        M = recurrence_matrix(N, k, aux, E)
        lead = Tridiag(M.sub[:d - 1], M.diag[:d], M.sup[:d - 1])
        try:
            inv = tridiag_inverse(lead, rtol=1e-12)
        except SingularMatrix as exc:
            raise UnexpectedSingularTower(f"M_{N}^{k} is singular at E={E!r}: {exc}") from None
        rhs = source_matrix(N, k) @ rows[-1]
        row = np.zeros(N + 1, dtype=np.result_type(inv, rhs))
        row[:d] = inv @ rhs[:d]
        rows.append(row)
    sigma = np.array(rows, dtype=np.result_type(*rows))
    return CoefficientTable(N, E, sigma)


def tower_residuals(table: CoefficientTable, aux: AuxParams) -> list[float]:
    """Relative residual of each row of the matrix recurrence."""
    N, E, sig = table.N, table.energy, table.sigma
    out = []
    for k in range(N // 2 + 1):
        lhs = recurrence_matrix(N, k, aux, E).to_dense() @ sig[k]
        rhs = source_matrix(N, k) @ sig[k - 1] if k else np.zeros_like(lhs)
        scale = max(np.max(np.abs(sig)), 1e-300) * max(1.0, np.max(np.abs(recurrence_matrix(N, k, aux, E).to_dense())))
        out.append(float(np.max(np.abs(lhs - rhs)) / scale))
    return out
