"""Wave-character classification and finite-time blowup certificates.

A certificate is a machine-checked instance of a singularity-formation
hypothesis on the *initial* data: either a threshold violation of the
scaled diagnostics (min y, q < -N or min y~, q~ < -N~), or the
one-sided-profile criterion that additionally yields an explicit bound T*
on the blowup time.  Certificates are conditional on the user-supplied
a-priori bounds, which are checked a posteriori over the computed run by
:func:`steepen.fields.validate_assumptions`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from steepen import riccati
from steepen.fields import AssumptionBounds, EntropyProfile, Grid, StateField
from steepen.riccati import Exponents
from steepen.solver import Trajectory


# --- R/C classification -----------------------------------------------------


@dataclass
class RCMap:
    """Per-cell rarefactive/compressive labels with a sign dead-band."""

    forward: np.ndarray  # 'R' | 'C' | 'neutral'
    backward: np.ndarray
    delta_rc: float


def _labels(values: np.ndarray, delta: float) -> np.ndarray:
    out = np.full(values.shape, "neutral", dtype="<U7")
    out[values > delta] = "R"
    out[values < -delta] = "C"
    return out


def classify_rc(state: StateField, delta_rc: float | None = None) -> RCMap:
    """Label each cell forward/backward R or C by the sign of alpha/beta.

    The default dead-band is 1e-8 of the current peak |alpha|, |beta|,
    floored at 1e-12, so that machine-noise-level diagnostics classify as
    neutral.
    """
    alpha, beta = riccati.alpha_beta(state)
    if delta_rc is None:
        peak = max(float(np.max(np.abs(alpha))), float(np.max(np.abs(beta))))
        delta_rc = max(1e-8 * peak, 1e-12)
    return RCMap(
        forward=_labels(alpha, delta_rc),
        backward=_labels(beta, delta_rc),
        delta_rc=delta_rc,
    )


# --- thresholds -------------------------------------------------------------


@dataclass(frozen=True)
class Thresholds:
    N: float
    N_tilde: float
    A1: float
    A2: float
    epsilon: float
    discriminant_sign_caveat: bool  # A1 < 0: |A1| in N~ differs from raw A1


def thresholds(bounds: AssumptionBounds, gamma: float, epsilon: float = 0.01) -> Thresholds:
    """Certificate thresholds N and N~ from the a-priori bound constants.

    Degenerates to N = N~ = 0 when M3 = M4 = 0 (constant entropy), which
    recovers the pure sign criterion of the two-variable theory.
    """
    if not gamma > 1.0:
        raise ValueError("gamma must exceed 1")
    if epsilon < 0.0:
        raise ValueError("epsilon must be nonnegative")
    g = gamma
    ex = Exponents.of(g)
    one = 1.0 + epsilon

    base = 2.0 * (g - 1.0) ** 2 / (g * (g + 1.0) * (3.0 * g - 1.0))
    m_low_or_high = bounds.M1 if g <= 3.0 else bounds.M2
    N = (
        one
        * np.sqrt(base * bounds.M2 * bounds.M4)
        * bounds.Z_U ** (ex.E1 + 1.0)
        * m_low_or_high ** (-ex.E2)
    )

    A1 = (9.0 * g * g - 54.0 * g + 81.0) - (1.0 / one) * (24.0 * g * g + 32.0 * g + 8.0) / g
    A2 = (1.0 / one) * (24.0 * g * g + 16.0 * g - 8.0) / g
    N_tilde = (
        one
        * (g - 1.0)
        * (abs(9.0 - 3.0 * g) * bounds.M3 + np.sqrt(abs(A1) * bounds.M3**2 + abs(A2) * bounds.M2 * bounds.M4))
        / (2.0 * (3.0 * g - 1.0) * (g + 1.0))
        * bounds.Z_U ** (ex.E1 + 1.0)
    )
    return Thresholds(
        N=float(N),
        N_tilde=float(N_tilde),
        A1=float(A1),
        A2=float(A2),
        epsilon=epsilon,
        discriminant_sign_caveat=A1 < 0.0,
    )


# --- certificates -----------------------------------------------------------


@dataclass
class Certificate:
    kind: str  # thm14_y | thm14_q | thm14_ytilde | thm14_qtilde | thm15_y | thm15_q | none
    threshold: float | None = None
    epsilon: float | None = None
    witness_x: float | None = None
    witness_value: float | None = None
    t_star_bound: float | None = None
    bounds: AssumptionBounds | None = None
    conditional: bool = True
    notes: str = ""


def certify_thm14(state0: StateField, bounds: AssumptionBounds, epsilon: float = 0.01) -> Certificate:
    """Threshold certificate on initial data: strong enough compression blows up.

    Checks min y < -N, min q < -N, min y~ < -N~, min q~ < -N~ in that
    order and returns the first violation as a certificate (kind 'none'
    when all four minima clear their thresholds).
    """
    gamma = state0.gc.gamma
    th = thresholds(bounds, gamma, epsilon)
    y, q, y_t, q_t = riccati.yq_fields(state0)
    x = state0.grid.x
    for arr, kind, limit in (
        (y, "thm14_y", th.N),
        (q, "thm14_q", th.N),
        (y_t, "thm14_ytilde", th.N_tilde),
        (q_t, "thm14_qtilde", th.N_tilde),
    ):
        i = int(np.argmin(arr))
        if arr[i] < -limit:
            return Certificate(
                kind=kind,
                threshold=limit,
                epsilon=epsilon,
                witness_x=float(x[i]),
                witness_value=float(arr[i]),
                bounds=bounds,
                conditional=True,
            )
    return Certificate(kind="none", epsilon=epsilon, bounds=bounds, conditional=True)


def profile_condition_curvature(profile: EntropyProfile, gamma: float, grid: Grid) -> np.ndarray:
    """(m**(-2/(3 gamma - 1)))_xx on the grid; >= 0 is the one-sided condition."""
    m, m_x, m_xx = profile.on_grid(grid)
    kappa = 2.0 / (3.0 * gamma - 1.0)
    return m ** (-kappa) * (kappa * (kappa + 1.0) * (m_x / m) ** 2 - kappa * m_xx / m)


def min_neg_a2(bounds: AssumptionBounds | None, gc) -> float:
    """Lower bound of -a2 from the a-priori constants (exact for gamma = 3)."""
    g = gc.gamma
    ex = Exponents.of(g)
    lead = gc.K_c * (g + 1.0) / (2.0 * (g - 1.0))
    if g == 3.0:
        return float(lead)
    if bounds is None:
        raise ValueError("Assumption-2 bounds are required unless gamma = 3")
    if g < 3.0:
        return float(lead * bounds.M1**ex.E2 * bounds.Z_L ** (ex.E1 - 1.0))
    return float(lead * bounds.M2**ex.E2 * bounds.Z_U ** (ex.E1 - 1.0))


def certify_thm15(
    state0: StateField,
    A: float,
    bounds: AssumptionBounds | None,
    delta_cond: float | None = None,
    variable: str = "y",
) -> Certificate:
    """One-sided-profile certificate with an explicit blowup-time bound.

    For ``variable='y'`` the profile condition is checked on grid cells with
    x > A and the witness is the most negative y(0, x) there; the mirrored
    check (x < A, backward direction) applies to ``variable='q'``.  The
    bound is t* = -1 / (y0 * min(-a2)); for gamma = 3 no a-priori bounds
    are needed and the certificate is unconditional.
    """
    if variable not in ("y", "q"):
        raise ValueError("variable must be 'y' or 'q'")
    gamma = state0.gc.gamma
    grid = state0.grid
    w_xx = profile_condition_curvature(state0.profile, gamma, grid)
    if delta_cond is None:
        kappa = 2.0 / (3.0 * gamma - 1.0)
        m = state0.m_arrays()[0]
        delta_cond = 1e-10 * float(np.max(m ** (-kappa)))

    region = grid.x > A if variable == "y" else grid.x < A
    none_cert = Certificate(kind="none", bounds=bounds, conditional=gamma != 3.0)
    if not np.any(region):
        return none_cert
    if float(np.min(w_xx[region])) < -delta_cond:
        return none_cert

    y, q, _, _ = riccati.yq_fields(state0)
    arr = y if variable == "y" else q
    masked = np.where(region, arr, np.inf)
    i = int(np.argmin(masked))
    v0 = float(masked[i])
    if not v0 < 0.0:
        return none_cert

    t_star = -1.0 / (v0 * min_neg_a2(bounds, state0.gc))
    return Certificate(
        kind=f"thm15_{variable}",
        witness_x=float(grid.x[i]),
        witness_value=v0,
        t_star_bound=t_star,
        bounds=bounds,
        conditional=gamma != 3.0,
    )


def sign_a0_profile(profile: EntropyProfile, gamma: float, grid: Grid) -> np.ndarray:
    """Per-cell sign of a0, which depends only on the entropy profile.

    Computed as sign((3g-1) m m_xx - (3g+1) m_x^2); stationary in time.
    """
    m, m_x, m_xx = profile.on_grid(grid)
    g = gamma
    return np.sign((3.0 * g - 1.0) * m * m_xx - (3.0 * g + 1.0) * m_x**2)


# --- empirical blowup-time measurement --------------------------------------


@dataclass(frozen=True)
class BlowupEstimate:
    t_blow: float
    uncertainty: float
    window: tuple[float, float]


def detect_blowup(traj: Trajectory) -> BlowupEstimate | None:
    """Extrapolate the gradient-blowup time from the growth of |y|, |q|.

    Fits 1/max(|y|, |q|) against time over the last resolved stretch of the
    run and extrapolates its zero crossing; the reciprocal is asymptotically
    linear near the pole.  Returns None for runs that did not terminate in
    gradient blowup.
    """
    if traj.termination.kind != "gradient_blowup":
        return None

    t = traj.times
    peak = np.empty_like(t)
    for k, snap in enumerate(traj.snapshots):
        d = riccati.diagnostics(snap)
        peak[k] = max(float(np.max(np.abs(d.y))), float(np.max(np.abs(d.q))))
    good = peak > 0.0
    t = t[good]
    g_recip = 1.0 / peak[good]
    if len(t) < 5:
        raise ValueError("too few snapshots to extrapolate a blowup time")

    # late, still-resolved stretch: past the halfway decay of 1/peak but
    # clear of the saturated tail where the grid no longer tracks the peak
    g_end = g_recip[-1]
    sel = np.where((g_recip <= 0.6 * g_recip[0]) & (g_recip >= 2.0 * g_end))[0]
    if len(sel) < 5:
        sel = np.arange(len(t))[-max(5, len(t) // 2):]
    tw = t[sel]
    gw = g_recip[sel]

    slope, intercept = np.polyfit(tw, gw, 1)
    if slope >= 0.0:
        raise ValueError("reciprocal peak diagnostic is not decaying")
    root_lin = -intercept / slope

    half = len(tw) // 2
    roots = []
    for sl in (slice(None, half), slice(half, None)):
        if len(tw[sl]) >= 3:
            b, a = np.polyfit(tw[sl], gw[sl], 1)
            if b < 0.0:
                roots.append(-a / b)
    spread = max(abs(r - root_lin) for r in roots) if roots else 0.0
    rms = float(np.sqrt(np.mean((np.polyval((slope, intercept), tw) - gw) ** 2)))
    uncertainty = max(spread, 3.0 * rms / abs(slope))
    return BlowupEstimate(
        t_blow=float(root_lin),
        uncertainty=float(uncertainty),
        window=(float(tw[0]), float(tw[-1])),
    )
