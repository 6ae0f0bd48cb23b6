"""Ladder-operator (Fock space) construction of the eigensystem.

The classical mode amplitudes a, a*, b, b* are linear in (x, y, p_x, p_y);
with p -> -i d they become first-order differential operators acting on
polynomial-Gaussian states.  In units of

    c1 = [a, a+] = 1 / (2 w1 (w1^2 - w2^2)),   c2 = [b, b+] = 1 / (2 w2 (w2^2 - w1^2))

the Hamiltonian is 2 (w1^2 - w2^2) (w1^2 a+ a - w2^2 b+ b) + (w1 + w2)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadLabel, MapUndefined, NotNormalisableGround, UnknownRegime
from .params import Branch, ModelParams, derive_aux
from .pu_map import REGIMES, PUParams, pu_constants
from .recurrence import closed_spectrum
from .wavefunction import PolyGauss, eigen_residual, eigenstate, ground_state

KINDS = ("a", "a_dag", "b", "b_dag")
PARTNER = {"a": "a_dag", "a_dag": "a", "b": "b_dag", "b_dag": "b"}

# regimes in which the first-listed kind annihilates psi0 on the eta = +1
# branch; eta = -1 swaps each operator for its partner
_ANNIHILATES = {
    -1: {"a": {"II", "III", "VI", "VII"}, "a_dag": {"I", "IV", "V", "VIII"},
         "b": {"I", "III", "V", "VII"}, "b_dag": {"II", "IV", "VI", "VIII"}},
    1: {"a": {"I", "II", "VII", "VIII"}, "a_dag": {"III", "IV", "V", "VI"},
        "b": {"I", "II", "III", "IV"}, "b_dag": {"V", "VI", "VII", "VIII"}},
}

# normal orderings: (a-mode word, b-mode word); constants in _form_constant
HAMILTONIAN_FORMS = {
    1: ("a_dag a", "b_dag b"),
    2: ("a a_dag", "b_dag b"),
    3: ("a_dag a", "b b_dag"),
    4: ("a a_dag", "b b_dag"),
}


def _form_constant(k: int, w1, w2):
    return {1: 0.5 * (w1 + w2), 2: 0.5 * (w2 - w1), 3: 0.5 * (w1 - w2), 4: -0.5 * (w1 + w2)}[k]


@dataclass(frozen=True)
class LadderOp:
    kind: str
    pu: PUParams = field(repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ladder operator {self.kind!r}")
        if self.pu.omega1 is None:
            raise MapUndefined("ladder operators need real, distinct frequencies")

    def coefficients(self):
        """(cx, cy, dx, dy) of cx x + cy y + dx d/dx + dy d/dy."""
        pu = self.pu
        w1, w2 = pu.omega1, pu.omega2
        split = w1 * w1 - w2 * w2
        mb1, mb2, nb1, nb2 = pu.mu_bar(w1), pu.mu_bar(w2), pu.nu_bar(w1), pu.nu_bar(w2)
        if self.kind in ("a", "a_dag"):
            d = 2 * w1 * split * pu.det_map
            s = -1 if self.kind == "a" else 1
            return (-w1 * nb2 / d, w1 * mb2 / d, s * 2 * nb2 / d, s * 2 * mb2 / d)
        d = 2 * w2 * split * pu.det_map
        s = 1 if self.kind == "b" else -1
        return (w2 * nb1 / d, -w2 * mb1 / d, s * 2 * nb1 / d, s * 2 * mb1 / d)


def ladder_apply(s: PolyGauss, op: LadderOp) -> PolyGauss:
    return s.first_order(*op.coefficients())


def apply_word(s: PolyGauss, word: str, pu: PUParams) -> PolyGauss:
    """Apply a space-separated operator product, rightmost first."""
    for kind in reversed(word.split()):
        s = ladder_apply(s, LadderOp(kind, pu))
    return s


def commutator_scalars(pu: PUParams):
    w1, w2 = pu.omega1, pu.omega2
    if w1 is None or w1 == 0 or w2 == 0 or w1 * w1 == w2 * w2:
        raise MapUndefined("commutators need real, nonzero, distinct frequencies")
    return 1 / (2 * w1 * (w1 * w1 - w2 * w2)), 1 / (2 * w2 * (w2 * w2 - w1 * w1))


def commutator(s: PolyGauss, first: str, second: str, pu: PUParams) -> PolyGauss:
    """[first, second] acting on s."""
    return apply_word(s, f"{first} {second}", pu) - apply_word(s, f"{second} {first}", pu)


def hamiltonian_form(k: int, s: PolyGauss, pu: PUParams) -> PolyGauss:
    """One of the four normal orderings of the Hamiltonian, applied to s."""
    if k not in HAMILTONIAN_FORMS:
        raise ValueError("form index must be 1..4")
    w1, w2 = pu.omega1, pu.omega2
    wa, wb = HAMILTONIAN_FORMS[k]
    pre = 2 * (w1 * w1 - w2 * w2)
    return (apply_word(s, wa, pu).scaled(pre * w1 * w1)
            - apply_word(s, wb, pu).scaled(pre * w2 * w2)
            + s.scaled(_form_constant(k, w1, w2)))


def annihilator_set(b: Branch, regime: str) -> frozenset:
    if regime not in REGIMES:
        raise UnknownRegime(f"unknown regime {regime!r}")
    table = _ANNIHILATES[b.epsilon]
    kinds = {kind for kind, where in table.items() if regime in where}
    if b.eta == -1:
        kinds = {PARTNER[k] for k in kinds}
    return frozenset(kinds)


def creator_pair(b: Branch, regime: str) -> tuple[str, str]:
    """(mode-1 creator, mode-2 creator): partners of the annihilators."""
    ann = annihilator_set(b, regime)
    c1 = "a" if "a_dag" in ann else "a_dag"
    c2 = "b" if "b_dag" in ann else "b_dag"
    return c1, c2


def _ground_form(b: Branch, regime: str) -> int:
    # annihilators must stand on the right
    ann = annihilator_set(b, regime)
    a_right = "a" in ann   # a_dag a
    b_right = "b" in ann   # b_dag b
    return {(True, True): 1, (False, True): 2, (True, False): 3, (False, False): 4}[(a_right, b_right)]


def _shifts(b: Branch, pu: PUParams):
    c1, c2 = creator_pair(b, pu.regime)
    w1, w2 = pu.omega1, pu.omega2
    return (w1 if c1 == "a_dag" else -w1), (w2 if c2 == "b_dag" else -w2)


def fock_energy(n: int, m: int, pu: PUParams, b: Branch):
    """Energy of the state with n mode-1 and m mode-2 quanta on psi0 of branch b."""
    if n < 0 or m < 0:
        raise BadLabel("occupation numbers must be non-negative")
    if pu.regime is None:
        raise MapUndefined("frequencies are not real; no regime assigned")
    s1, s2 = _shifts(b, pu)
    return _form_constant(_ground_form(b, pu.regime), pu.omega1, pu.omega2) + n * s1 + m * s2


@dataclass(frozen=True)
class FockLevel:
    n: int
    m: int
    energy: float
    norm_const: float | None


def norm_constant(n: int, m: int, b: Branch, pu: PUParams) -> float:
    """<psi|psi> of the unnormalised ladder state, from the commutator algebra."""
    aux = derive_aux(pu.model, b)
    if not aux.is_normalisable():
        raise NotNormalisableGround(f"ground state of branch {b} is not square integrable")
    c1, c2 = commutator_scalars(pu)
    k1 = c1 if creator_pair(b, pu.regime)[0] == "a_dag" else -c1
    k2 = c2 if creator_pair(b, pu.regime)[1] == "b_dag" else -c2
    det = aux.alpha * aux.beta - aux.gamma ** 2
    return math.factorial(n) * math.factorial(m) * k1 ** n * k2 ** m * math.pi / math.sqrt(det)


def fock_state(n: int, m: int, b: Branch, pu: PUParams, normalise: bool = True):
    """C1^n C2^m psi0, optionally scaled to unit norm; returns (state, FockLevel)."""
    if n < 0 or m < 0:
        raise BadLabel("occupation numbers must be non-negative")
    aux = derive_aux(pu.model, b)
    c1, c2 = creator_pair(b, pu.regime)
    s = ground_state(aux)
    for _ in range(m):
        s = ladder_apply(s, LadderOp(c2, pu))
    for _ in range(n):
        s = ladder_apply(s, LadderOp(c1, pu))
    nc = None
    if normalise:
        nc = norm_constant(n, m, b, pu)
        s = s.scaled(1 / math.sqrt(nc))
    return s, FockLevel(n, m, fock_energy(n, m, pu, b), nc)


def label_map(N: int, n: int, sign: str, b: Branch | None = None) -> tuple[int, int]:
    """Recurrence label (N, n, sign) -> occupation numbers in regime I.

    eta = -1 negates both spectra, which swaps the roles of + and -.
    """
    if b is not None and b.eta == -1 and sign in ("+", "-"):
        sign = "-" if sign == "+" else "+"
    if sign in ("mid", "0"):
        if N % 2 or n != N:
            raise BadLabel(f"mid level needs even N and n = N, got N={N}, n={n}")
        return N // 2, N // 2
    if sign not in ("+", "-") or not 1 <= n <= (N + 1) // 2:
        raise BadLabel(f"no level (N={N}, n={n}, sign={sign!r})")
    return (n - 1, 1 + N - n) if sign == "+" else (1 + N - n, n - 1)


def proportionality_error(s1: PolyGauss, s2: PolyGauss) -> float:
    """max |s1 - c s2| / max |s1| with c fixed on the largest coefficient of s1."""
    keys = set(s1.coeffs) | set(s2.coeffs)
    v1 = np.array([s1.coeffs.get(k, 0) for k in keys], dtype=complex)
    v2 = np.array([s2.coeffs.get(k, 0) for k in keys], dtype=complex)
    i = int(np.argmax(np.abs(v1)))
    if v2[i] == 0:
        return math.inf
    c = v1[i] / v2[i]
    return float(np.max(np.abs(v1 - c * v2)) / np.abs(v1[i]))


@dataclass
class CrossCheckEntry:
    N: int
    n: int
    sign: str
    fock_n: int
    fock_m: int
    e_recurrence: complex
    e_fock: float
    energy_rel_err: float
    state_err: float
    eigen_residual: float

    def ok(self, etol=1e-10, stol=1e-8) -> bool:
        return self.energy_rel_err <= etol and self.state_err <= stol


@dataclass
class CrossCheckReport:
    params: ModelParams
    branch: Branch
    entries: list

    @property
    def mismatches(self):
        return [e for e in self.entries if not e.ok()]

    @property
    def passed(self) -> bool:
        return bool(self.entries) and not self.mismatches


def cross_validate(p: ModelParams, b: Branch, Nmax: int) -> CrossCheckReport:
    """Compare recurrence levels with ladder states in regime I for every N <= Nmax."""
    if p.is_degenerate():
        raise MapUndefined("degenerate parameters: frequencies coincide")
    pu = pu_constants(p, "I")
    if pu.regime is None:
        raise MapUndefined("frequencies are not real")
    aux = derive_aux(p, b)
    entries = []
    for N in range(Nmax + 1):
        for lv in closed_spectrum(N, aux):
            n, m = label_map(N, lv.n, lv.sign, b)
            rec, E = eigenstate(N, lv.n, lv.sign, aux, p)
            fs, level = fock_state(n, m, b, pu, normalise=False)
            Ef = level.energy
            entries.append(CrossCheckEntry(
                N, lv.n, lv.sign, n, m, E, Ef,
                abs(E - Ef) / max(1.0, abs(Ef)),
                proportionality_error(fs, rec),
                eigen_residual(fs, Ef, p)))
    return CrossCheckReport(p, b, entries)


