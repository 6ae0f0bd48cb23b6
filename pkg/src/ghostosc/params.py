"""Model parameters, superselection branches and the Gaussian envelope data.

The Hamiltonian is

    H = p_x^2 - p_y^2 + nu^2 x^2 + Omega y^2 + g x y

and the ground-state Ansatz exp(-alpha x^2/2 - beta y^2/2 + gamma x y) solves
it with energy alpha - beta whenever

    alpha^2 - gamma^2 = nu^2,  gamma^2 - beta^2 = Omega,  g + 2 (alpha - beta) gamma = 0.

The four solutions of that system are labelled by two signs (epsilon, eta).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DegenerateBranch, NotDegenerate, SingularDegeneracy

DEGENERACY_RTOL = 1e-10


def _tidy(z):
    """Return a float when ``z`` has an exactly vanishing imaginary part."""
    z = complex(z)
    return z.real if z.imag == 0.0 else z


@dataclass(frozen=True)
class ModelParams:
    nu: float
    omega_cap: float
    g: float

    def __post_init__(self):
        for name in ("nu", "omega_cap", "g"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")

    @property
    def nu2(self) -> float:
        return self.nu * self.nu

    def is_degenerate(self, rtol: float = DEGENERACY_RTOL) -> bool:
        s = self.nu2 + self.omega_cap
        return abs(self.g**2 - s**2) <= rtol * max(1.0, s**2)


@dataclass(frozen=True)
class Branch:
    epsilon: int
    eta: int

    def __post_init__(self):
        if self.epsilon not in (1, -1) or self.eta not in (1, -1):
            raise ValueError(f"branch signs must be +1 or -1, got {self.epsilon}, {self.eta}")

    @classmethod
    def parse(cls, text: str) -> Branch:
        """Parse ``"-1,+1"`` style labels (also accepts ``"-+"``)."""
        text = text.strip()
        if "," in text:
            e, h = (int(float(s)) for s in text.split(","))
        elif len(text) == 2 and set(text) <= {"+", "-"}:
            e, h = (1 if c == "+" else -1 for c in text)
        else:
            raise ValueError(f"cannot parse branch {text!r}")
        return cls(e, h)

    def __str__(self):
        return f"{self.epsilon:+d},{self.eta:+d}"


ALL_BRANCHES = (Branch(-1, 1), Branch(-1, -1), Branch(1, 1), Branch(1, -1))


@dataclass(frozen=True)
class AuxParams:
    """Envelope exponents alpha, beta, gamma (real or complex).

    ``sigma_eps`` and ``Sigma`` are only known when the values came out of
    :func:`derive_aux`; an envelope built by hand leaves them as ``None``.
    """

    alpha: complex | float
    beta: complex | float
    gamma: complex | float
    sigma_eps: complex | float | None = None
    Sigma: complex | float | None = None
    kappa_override: complex | float | None = None

    @property
    def kappa(self):
        if self.kappa_override is not None:
            return self.kappa_override
        a, b, c = complex(self.alpha), complex(self.beta), complex(self.gamma)
        # factored form limits cancellation near the exceptional point
        return _tidy(cmath.sqrt((a + b - 2 * c) * (a + b + 2 * c)))

    @property
    def is_real(self) -> bool:
        return all(isinstance(v, float) or complex(v).imag == 0.0
                   for v in (self.alpha, self.beta, self.gamma))

    @property
    def ground_energy(self):
        return _tidy(complex(self.alpha) - complex(self.beta))

    def residuals(self, p: ModelParams):
        """Residuals of the three envelope conditions, as complex numbers."""
        a, b, c = complex(self.alpha), complex(self.beta), complex(self.gamma)
        return (a * a - c * c - p.nu2, c * c - b * b - p.omega_cap, p.g + 2 * (a - b) * c)

    def is_normalisable(self) -> bool:
        if not self.is_real:
            return False
        a, b, c = (complex(v).real for v in (self.alpha, self.beta, self.gamma))
        return a > 0 and b > 0 and c * c < a * b


@dataclass(frozen=True)
class DomainReport:
    e0_real: bool
    normalisable: bool
    gamma_map_valid: bool
    degenerate: bool


def derive_aux(p: ModelParams, b: Branch) -> AuxParams:
    """Envelope exponents of the (epsilon, eta) branch.

    Raises DegenerateBranch on the frequency-degenerate line, where the
    closed form divides by zero; use :func:`derive_aux_degenerate` there.
    """
    disc = complex(p.g * p.g - 4 * p.nu2 * p.omega_cap)
    sigma = b.epsilon * cmath.sqrt(disc)
    Sigma = 2 * b.eta * cmath.sqrt(complex(p.nu2 - p.omega_cap) + sigma)
    if p.is_degenerate() or Sigma == 0:
        raise DegenerateBranch(
            f"g^2 = (nu^2 + Omega)^2 at nu={p.nu}, Omega={p.omega_cap}, g={p.g}; "
            "use derive_aux_degenerate")
    alpha = (2 * p.nu2 + sigma) / Sigma
    beta = (2 * p.omega_cap - sigma) / Sigma
    gamma = -p.g / Sigma
    return AuxParams(_tidy(alpha), _tidy(beta), _tidy(gamma), _tidy(sigma), _tidy(Sigma))


def derive_aux_degenerate(p: ModelParams, b: Branch) -> AuxParams:
    """Envelope exponents on the degenerate line g = eta (nu^2 + Omega)."""
    s = p.nu2 + p.omega_cap
    if not p.is_degenerate():
        raise NotDegenerate(f"|g| = {abs(p.g)} differs from |nu^2 + Omega| = {abs(s)}")
    if s != 0 and abs(p.g - b.eta * s) > abs(p.g + b.eta * s):
        raise NotDegenerate(f"g = {p.g} has the sign of -eta (nu^2 + Omega); pick eta = {-b.eta:+d}")
    d = p.nu2 - p.omega_cap
    if d == 0:
        raise SingularDegeneracy("nu^2 = Omega makes the degenerate solution singular")
    den = 2 * math.sqrt(2) * cmath.sqrt(complex(d))
    alpha = b.epsilon * (p.omega_cap - 3 * p.nu2) / den
    beta = b.epsilon * (p.nu2 - 3 * p.omega_cap) / den
    gamma = b.eta * b.epsilon * s / den
    return AuxParams(_tidy(alpha), _tidy(beta), _tidy(gamma), kappa_override=0.0)


def frequencies_real(p: ModelParams) -> bool:
    """Both Pais-Uhlenbeck frequencies real and distinct."""
    zeta = 4 * (p.nu2 - p.omega_cap)
    xi = 4 * (p.g**2 - 4 * p.nu2 * p.omega_cap)
    return zeta > 0 and 0 < xi < zeta * zeta / 4


def classify_domain(p: ModelParams, b: Branch) -> DomainReport:
    degenerate = p.is_degenerate()
    disc = p.g**2 - 4 * p.nu2 * p.omega_cap
    if degenerate:
        # closed form of the degenerate branch: real iff nu^2 > Omega; never in L^2
        e0_real = p.nu2 > p.omega_cap
        normalisable = False
    else:
        e0_real = disc >= 0 and p.nu2 - p.omega_cap + b.epsilon * math.sqrt(disc) > 0
        normalisable = derive_aux(p, b).is_normalisable()
    gamma_map_valid = (not degenerate and p.nu2 + p.omega_cap > p.g and frequencies_real(p))
    return DomainReport(e0_real, normalisable, gamma_map_valid, degenerate)
