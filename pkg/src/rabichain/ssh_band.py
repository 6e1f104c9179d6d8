"""Band structure of a dimerized tight-binding chain with two quasiparticle branches.

Dispersion pieces on the reduced zone |k| <= pi/(2a):

    eps_k   = 2 t0 cos(k a)          (undimerized band)
    delta_k = 4 alpha u sin(k a)     (dimerization gap function)
    E_k     = sqrt(eps_k^2 + delta_k^2)

Two branches of quasiparticle solutions exist.  The conventional branch has
conduction/valence energies +-E_k; the additional branch has
E_c = (delta_k^2 - eps_k^2)/E_k and E_v = -E_c, a gapped double-valley shape
that crosses zero where |delta_k| = |eps_k|.

The continuum ground-state energy of the additional branch,

    E0(u) = -(2 N a / pi) * Int_0^{pi/2a} (delta_k^2 - eps_k^2)/E_k dk + 2 N K u^2,

is evaluated three ways: adaptive quadrature (ground truth), a closed form in
complete elliptic integrals, and a small-dimerization expansion.  The closed
form and the expansion agree with quadrature only when the elliptic parameter
is m = 1 - r^2 with r = 2 alpha u / t0; the alternative convention m = 1 - r
is kept available for the consistency report in the test suite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import ellipe, ellipkm1

__all__ = [
    "SSHParams",
    "BranchSelector",
    "OccupationState",
    "MinimaResult",
    "DegeneratePointError",
    "IndeterminateOccupationError",
    "QuadratureError",
    "dispersion",
    "coherence_factors",
    "quasiparticle_energy",
    "minimum_conditions",
    "ground_state_energy_integral",
    "ground_state_energy_elliptic",
    "ground_state_energy_elliptic_literal",
    "ground_state_energy_smallz",
    "find_dimerization_minima",
    "u_from_ratio",
]


class DegeneratePointError(ValueError):
    """Raised where E_k = 0 and branch quantities are undefined."""


class IndeterminateOccupationError(ValueError):
    """Raised when n_c = n_v leaves the extremum conditions without a sign."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class BranchSelector(enum.Enum):
    """Which quasiparticle branch: the conventional one or the additional one."""

    SSH = "ssh"
    ADDITIONAL = "additional"


@dataclass(frozen=True)
class SSHParams:
    """Chain parameters: hopping t0, electron-phonon constant alpha,
    elastic constant K, lattice spacing a, unit-cell count N."""

    t0: float
    alpha: float
    K: float
    a: float = 1.0
    N: int = 1

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.N < 1:
            raise ValueError(f"N must be at least 1, got {self.N}")
        if self.K < 0:
            raise ValueError(f"K must be non-negative, got {self.K}")

    def ratio(self, u: float) -> float:
        """Dimensionless dimerization ratio 2 alpha u / t0."""
        return 2.0 * self.alpha * u / self.t0


@dataclass(frozen=True)
class OccupationState:
    """Occupations of the conduction and valence states at a k-point."""

    n_c: float
    n_v: float

    def sign(self) -> int:
        if self.n_c == self.n_v:
            raise IndeterminateOccupationError(
                f"n_c = n_v = {self.n_c}: extremum conditions have no sign"
            )
        return 1 if self.n_c > self.n_v else -1


def dispersion(params: SSHParams, k, u: float):
    """Return (eps_k, delta_k, E_k) for scalar or array k."""
    k = np.asarray(k, dtype=float)
    eps = 2.0 * params.t0 * np.cos(k * params.a)
    delta = 4.0 * params.alpha * u * np.sin(k * params.a)
    return eps, delta, np.hypot(eps, delta)


def _require_nondegenerate(params: SSHParams, E, what: str) -> None:
    # a zone-edge point of the undimerized chain lands within round-off of zero
    if np.any(np.asarray(E) <= 1e-12 * params.t0):
        raise DegeneratePointError(f"E_k = 0: {what} undefined at a degenerate point")


def coherence_factors(params: SSHParams, k, u: float, branch: BranchSelector):
    """Coherence coefficients (alpha_k, beta_k) of the branch wavefunction.

    The conventional branch takes alpha_k = sqrt((1 + eps/E)/2),
    beta_k = sqrt((1 - eps/E)/2); the additional branch swaps the signs.
    Always alpha_k^2 + beta_k^2 = 1.
    """
    eps, _, E = dispersion(params, k, u)
    _require_nondegenerate(params, E, "coherence factors")
    r = eps / E
    if branch is BranchSelector.SSH:
        return np.sqrt((1.0 + r) / 2.0), np.sqrt((1.0 - r) / 2.0)
    return np.sqrt((1.0 - r) / 2.0), np.sqrt((1.0 + r) / 2.0)


def quasiparticle_energy(params: SSHParams, k, u: float, branch: BranchSelector):
    """Conduction/valence pair (E_c, E_v) with E_v = -E_c on either branch."""
    eps, delta, E = dispersion(params, k, u)
    _require_nondegenerate(params, E, "quasiparticle energies")
    if branch is BranchSelector.SSH:
        e_c = E
    else:
        e_c = (delta**2 - eps**2) / E
    return e_c, -e_c


def minimum_conditions(params: SSHParams, k, u: float,
                       branch: BranchSelector, occ: OccupationState):
    """Evaluate the three sufficient conditions for a conditional energy minimum.

    Returns a boolean triple (cond1, cond2, cond3).  cond1 compares
    eps_k (1 -+ eps_k/E_k) with delta_k^2/E_k, with the comparison direction
    set by sign(n_c - n_v); the minus sign belongs to the conventional branch
    and the plus sign to the additional one.  cond2 is branch-independent:

        (eps_k^2/E_k - 2 delta_k^2/E_k)^2 - E_k^2 + (3/4) delta_k^2 > 0.

    cond3 requires (3 delta_k^2/E_k +- 4 eps_k^2/E_k)(n_c - n_v) > 0 with the
    plus sign on the conventional branch and the minus sign on the additional.
    """
    eps, delta, E = dispersion(params, k, u)
    _require_nondegenerate(params, E, "extremum conditions")
    s = occ.sign()

    if branch is BranchSelector.SSH:
        lhs1 = eps * (1.0 - eps / E)
    else:
        lhs1 = eps * (1.0 + eps / E)
    rhs1 = delta**2 / E
    cond1 = (lhs1 > rhs1) if s > 0 else (lhs1 < rhs1)

    cond2 = (eps**2 / E - 2.0 * delta**2 / E) ** 2 - E**2 + 0.75 * delta**2 > 0.0

    if branch is BranchSelector.SSH:
        factor = 3.0 * delta**2 / E + 4.0 * eps**2 / E
    else:
        factor = 3.0 * delta**2 / E - 4.0 * eps**2 / E
    cond3 = factor * s > 0.0

    return cond1, cond2, cond3


# ---------------------------------------------------------------------------
# ground-state energy of the additional branch
# ---------------------------------------------------------------------------

def _band_integrand(k: float, params: SSHParams, u: float) -> float:
    eps = 2.0 * params.t0 * np.cos(k * params.a)
    delta = 4.0 * params.alpha * u * np.sin(k * params.a)
    E = np.hypot(eps, delta)
    if E == 0.0:
        # |delta^2 - eps^2| <= E^2, so the ratio vanishes with E
        return 0.0
    return (delta * delta - eps * eps) / E


def ground_state_energy_integral(params: SSHParams, u: float) -> float:
    """Ground-state energy by adaptive quadrature (the reference evaluator).

    Absolute tolerance is 1e-10 * N * t0.  Raises :class:`QuadratureError`
    with the integrator diagnostics if that tolerance is not met.
    """
    tol = 1e-10 * params.N * params.t0
    val, err = quad(_band_integrand, 0.0, np.pi / (2.0 * params.a),
                    args=(params, u), epsabs=min(tol, 1e-12), epsrel=1e-12, limit=200)
    if err > tol:
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} exceeds tolerance {tol:.3e} at u={u}"
        )
    band = -(2.0 * params.N * params.a / np.pi) * val
    return band + 2.0 * params.N * params.K * u * u


def _elliptic_band_factor(m_parameter: float, complement: float) -> float:
    """F + (1+Z)/(1-Z) (E - F) evaluated at parameter m = 1 - Z without cancellation."""
    if complement == 0.0:
        # K(1) diverges only logarithmically and cancels; the limit is E(1) = 1
        return 1.0
    F = ellipkm1(complement)  # K(1 - complement), accurate for small complements
    E = ellipe(m_parameter)
    Z = complement
    return F + (1.0 + Z) / (1.0 - Z) * (E - F)


def ground_state_energy_elliptic(params: SSHParams, u: float) -> float:
    """Closed form of the ground-state energy in complete elliptic integrals.

    Evaluates (4 N t0 / pi) [F(pi/2, m) + (1+Z)/(1-Z) (E(pi/2, m) - F(pi/2, m))]
    + 2 N K u^2 with Z = (2 alpha u / t0)^2 and parameter m = 1 - Z.  This is
    the exact antiderivative of the quadrature evaluator and matches it to
    round-off.  Requires |2 alpha u / t0| < 1.
    """
    r = params.ratio(u)
    Z = r * r
    if Z >= 1.0:
        raise ValueError(f"dimerization ratio |2 alpha u / t0| = {abs(r)} outside [0, 1)")
    band = (4.0 * params.N * params.t0 / np.pi) * _elliptic_band_factor(1.0 - Z, Z)
    return band + 2.0 * params.N * params.K * u * u


def ground_state_energy_elliptic_literal(params: SSHParams, u: float) -> float:
    """Same expression with the alternative parameter convention m = 1 - r.

    Here the elliptic parameter is taken directly as one minus the
    dimerization ratio r = 2 alpha u / t0 instead of one minus its square.
    Retained so the convention discrepancy can be measured and reported; it
    does not agree with the quadrature evaluator.
    """
    r = params.ratio(u)
    if not 0.0 <= r < 1.0:
        raise ValueError(f"dimerization ratio 2 alpha u / t0 = {r} outside [0, 1)")
    band = (4.0 * params.N * params.t0 / np.pi) * _elliptic_band_factor(1.0 - r, r)
    return band + 2.0 * params.N * params.K * u * u


def ground_state_energy_smallz(params: SSHParams, u: float) -> float:
    """Small-dimerization expansion of the ground-state energy.

    N [ 4 t0/pi - (6/pi) ln(2 t0 / (alpha |u|)) (4 alpha^2 u^2 / t0)
        + 28 alpha^2 u^2 / (pi t0) ] + 2 N K u^2,

    with the u -> 0 limit N 4 t0 / pi taken exactly.
    """
    if u == 0.0:
        return params.N * 4.0 * params.t0 / np.pi
    au = abs(params.alpha * u)
    quad_term = 4.0 * params.alpha**2 * u * u / params.t0
    band = params.N * (
        4.0 * params.t0 / np.pi
        - (6.0 / np.pi) * np.log(2.0 * params.t0 / au) * quad_term
        + 28.0 * params.alpha**2 * u * u / (np.pi * params.t0)
    )
    return band + 2.0 * params.N * params.K * u * u


def u_from_ratio(params: SSHParams, r: float) -> float:
    """Displacement u at which the dimerization ratio 2 alpha u / t0 equals r."""
    return r * params.t0 / (2.0 * params.alpha)


@dataclass(frozen=True)
class MinimaResult:
    """Symmetric pair of energy minima of the double-well energy curve.

    ``dimerized`` is False when the scan found no interior minimum (the
    elastic term dominates and the energy is monotone in |u|); then
    u_plus = u_minus = 0 and ``energy`` is the u = 0 value.
    """

    u_plus: float
    u_minus: float
    energy: float
    dimerized: bool


def find_dimerization_minima(params: SSHParams, u_max: float,
                             n_scan: int = 256) -> MinimaResult:
    """Locate the double-well minima of the quadrature energy on (0, u_max].

    A coarse scan brackets the interior minimum, which is then refined by
    bounded minimization to an absolute u-tolerance of 1e-8 * u_max.  The
    energy curve is even in u, so the partner minimum is the exact negation.
    """
    if u_max <= 0:
        raise ValueError(f"u_max must be positive, got {u_max}")
    if abs(params.ratio(u_max)) >= 1.0:
        raise ValueError("u_max puts the dimerization ratio outside the closed-form domain [0, 1)")

    us = np.linspace(0.0, u_max, n_scan)
    energies = np.array([ground_state_energy_integral(params, u) for u in us])
    i_min = int(np.argmin(energies))
    if i_min == 0:
        return MinimaResult(0.0, 0.0, energies[0], dimerized=False)

    lo = us[max(i_min - 1, 0)]
    hi = us[min(i_min + 1, n_scan - 1)]
    res = minimize_scalar(lambda u: ground_state_energy_integral(params, u),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-8 * u_max})
    u0 = float(res.x)
    return MinimaResult(u0, -u0, float(res.fun), dimerized=True)
