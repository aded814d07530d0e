"""Gradient diagnostics and the directional Riccati machinery.

All diagnostics are defined once, here, through the canonical grid formulas
in u_x, z_x, m_x, m_xx (the pressure-derivative forms are reserved for
cross-check tests).  With gamma > 1 and the shorthand

    E1 = (gamma+1)/(2(gamma-1))        z exponent of y, q
    E2 = 3(3-gamma)/(2(3gamma-1))      mu_bar = m**(-E2)
    G  = 2/(3gamma-1)                  entropy-gradient coupling

the diagnostics are::

    alpha = u_x + m z_x + ((gamma-1)/gamma) m_x z
    beta  = u_x - m z_x - ((gamma-1)/gamma) m_x z
    y     = m**(-E2) z**E1 ((u+mz)_x - G m_x z)
    q     = m**(-E2) z**E1 ((u-mz)_x + G m_x z)

with tilde variants lacking the m prefactor.  Smooth solutions satisfy
alpha' = k1(k2(3 alpha + beta) + alpha beta - alpha^2) together with its
backward mirror, and the decoupled forms y' = a0 + a2 y^2,
q` = a0 + a2 q^2; ``residual`` measures both numerically along traced
characteristics.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from steepen.fields import StateField, derivative


@dataclass(frozen=True)
class Exponents:
    """The gamma-dependent exponent pack shared by all diagnostics."""

    gamma: float
    E1: float
    E2: float
    G: float
    E_c: float  # (gamma+1)/(gamma-1), the z exponent of the wave speed

    @classmethod
    def of(cls, gamma: float) -> "Exponents":
        return cls(
            gamma=gamma,
            E1=(gamma + 1.0) / (2.0 * (gamma - 1.0)),
            E2=3.0 * (3.0 - gamma) / (2.0 * (3.0 * gamma - 1.0)),
            G=2.0 / (3.0 * gamma - 1.0),
            E_c=(gamma + 1.0) / (gamma - 1.0),
        )


@dataclass
class DiagnosticFields:
    u_x: np.ndarray
    z_x: np.ndarray
    s_x: np.ndarray
    r_x: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    y: np.ndarray
    q: np.ndarray
    y_tilde: np.ndarray
    q_tilde: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    a0: np.ndarray
    a2: np.ndarray
    a0_t: np.ndarray
    a1_t: np.ndarray
    a2_t: np.ndarray
    mu_bar: np.ndarray


_DIAG_CACHE: "weakref.WeakKeyDictionary[StateField, DiagnosticFields]" = (
    weakref.WeakKeyDictionary()
)


def diagnostics(state: StateField) -> DiagnosticFields:
    """Every diagnostic field of the state, computed on the grid (cached)."""
    cached = _DIAG_CACHE.get(state)
    if cached is not None:
        return cached

    gc = state.gc
    g = gc.gamma
    ex = Exponents.of(g)
    grid = state.grid
    z = state.z
    u = state.u
    m, m_x, m_xx = state.m_arrays()

    u_x = derivative(u, grid, 1)
    z_x = derivative(z, grid, 1)
    s_x = derivative(u + m * z, grid, 1)
    r_x = derivative(u - m * z, grid, 1)

    ent = ((g - 1.0) / g) * m_x * z
    alpha = u_x + m * z_x + ent
    beta = u_x - m * z_x - ent

    zE1 = z**ex.E1
    mu_bar = m ** (-ex.E2)
    gy = s_x - ex.G * m_x * z
    gq = r_x + ex.G * m_x * z
    y = mu_bar * zE1 * gy
    q = mu_bar * zE1 * gq
    y_tilde = zE1 * gy
    q_tilde = zE1 * gq

    K_c = gc.K_c
    k1 = (g + 1.0) * K_c / (2.0 * (g - 1.0)) * z ** (2.0 / (g - 1.0))
    k2 = (g - 1.0) / (g * (g + 1.0)) * z * m_x

    bracket = ((g - 1.0) / (3.0 * g - 1.0)) * m * m_xx - (
        (3.0 * g + 1.0) * (g - 1.0) / (3.0 * g - 1.0) ** 2
    ) * m_x**2
    z_a0 = z ** (3.0 * ex.E1 + 1.0)
    a0_t = (K_c / g) * bracket * z_a0
    a0 = (K_c / g) * mu_bar * bracket * z_a0
    a2_t = -K_c * (g + 1.0) / (2.0 * (g - 1.0)) * z ** (ex.E1 - 1.0)
    a2 = -K_c * (g + 1.0) / (2.0 * (g - 1.0)) * m**ex.E2 * z ** (ex.E1 - 1.0)
    a1_t = K_c * ex.E2 * m_x * z**ex.E_c

    fields = DiagnosticFields(
        u_x=u_x, z_x=z_x, s_x=s_x, r_x=r_x,
        alpha=alpha, beta=beta,
        y=y, q=q, y_tilde=y_tilde, q_tilde=q_tilde,
        k1=k1, k2=k2,
        a0=a0, a2=a2, a0_t=a0_t, a1_t=a1_t, a2_t=a2_t,
        mu_bar=mu_bar,
    )
    _DIAG_CACHE[state] = fields
    return fields


def alpha_beta(state: StateField):
    """Gradient diagnostics (alpha, beta); alpha + beta = 2 u_x pointwise."""
    d = diagnostics(state)
    return d.alpha, d.beta


def yq_fields(state: StateField):
    """Scaled diagnostics (y, q, y_tilde, q_tilde)."""
    d = diagnostics(state)
    return d.y, d.q, d.y_tilde, d.q_tilde


def coefficients(state: StateField):
    """Coefficient fields (k1, k2, a0, a2, a0_t, a1_t, a2_t, mu_bar)."""
    d = diagnostics(state)
    return d.k1, d.k2, d.a0, d.a2, d.a0_t, d.a1_t, d.a2_t, d.mu_bar


#: names resolvable by :func:`grid_quantity` beyond the raw state arrays
_DIAG_NAMES = (
    "u_x", "z_x", "s_x", "r_x", "alpha", "beta", "y", "q",
    "y_tilde", "q_tilde", "k1", "k2", "a0", "a2", "a0_t", "a1_t", "a2_t",
    "mu_bar",
)


def grid_quantity(state: StateField, name: str) -> np.ndarray:
    """A named primitive or derived field evaluated on the grid."""
    if name == "z":
        return state.z
    if name == "u":
        return state.u
    if name in ("m", "m_x", "m_xx"):
        return state.m_arrays()[("m", "m_x", "m_xx").index(name)]
    if name in ("p", "c"):
        p, c = state.thermo()
        return p if name == "p" else c
    if name in ("s", "r"):
        m = state.m_arrays()[0]
        return state.u + m * state.z if name == "s" else state.u - m * state.z
    if name in _DIAG_NAMES:
        return getattr(diagnostics(state), name)
    raise ValueError(f"unknown quantity {name!r}")


# --- phase-line classification -------------------------------------------


@dataclass(frozen=True)
class PhaseRegime:
    roots: tuple | None  # None, (0.0,), or (-r, +r)
    region: str  # below | between | above | none
    monotonicity: str  # increasing | decreasing | stationary


def phase_classify(a0: float, a2: float, v: float) -> PhaseRegime:
    """Where v sits on the phase line of v' = a0 + a2 v^2 (a2 < 0 required)."""
    if not a2 < 0.0:
        raise ValueError("a2 must be negative")
    slope = a0 + a2 * v * v
    mono = "increasing" if slope > 0.0 else ("decreasing" if slope < 0.0 else "stationary")
    if a0 < 0.0:
        return PhaseRegime(None, "none", mono)
    if a0 == 0.0:
        region = "below" if v < 0.0 else ("above" if v > 0.0 else "between")
        return PhaseRegime((0.0,), region, mono)
    r = float(np.sqrt(-a0 / a2))
    region = "below" if v < -r else ("above" if v > r else "between")
    return PhaseRegime((-r, r), region, mono)


# --- Riccati integration as a blowup oracle --------------------------------


@dataclass(frozen=True)
class RiccatiResult:
    kind: str  # finite | blowup
    value: float | None = None
    t_blow: float | None = None


def integrate_riccati(
    v0: float,
    t: np.ndarray,
    a0: np.ndarray,
    a2: np.ndarray,
    blow_threshold: float = 1e8,
) -> RiccatiResult:
    """Integrate v' = a0(t) + a2(t) v^2 over the coefficient series.

    Declares blowup once |v| crosses ``blow_threshold``; the blowup time is
    then recovered by extrapolating the reciprocal 1/v (linear near the
    pole) through the last accepted steps.  With constant coefficients and
    a0 = 0 the result is cross-checked against the closed form
    v(t) = v0 / (1 - a2 v0 t).
    """
    t = np.asarray(t, dtype=float)
    a0 = np.broadcast_to(np.asarray(a0, dtype=float), t.shape)
    a2 = np.broadcast_to(np.asarray(a2, dtype=float), t.shape)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0.0):
        raise ValueError("t must be a strictly increasing series")
    if np.any(a2 >= 0.0):
        raise ValueError("a2 series must be negative throughout")

    if t.size >= 4:
        a0_f = CubicSpline(t, a0)
        a2_f = CubicSpline(t, a2)
    else:
        a0_f = lambda s: np.interp(s, t, a0)  # noqa: E731
        a2_f = lambda s: np.interp(s, t, a2)  # noqa: E731

    def rhs(s, v):
        return a0_f(s) + a2_f(s) * v * v

    def crossed(s, v):
        return abs(float(v[0])) - blow_threshold

    crossed.terminal = True
    crossed.direction = 1

    sol = solve_ivp(
        rhs, (t[0], t[-1]), [float(v0)], method="RK45",
        rtol=1e-10, atol=1e-12, events=crossed, dense_output=False,
    )

    const_coeffs = float(np.ptp(a0)) == 0.0 and float(np.ptp(a2)) == 0.0 and a0[0] == 0.0

    if sol.t_events[0].size:
        tail_t = np.append(sol.t[-3:], sol.t_events[0][0])
        tail_v = np.append(sol.y[0, -3:], sol.y_events[0][0, 0])
        keep = np.abs(tail_v) > 0
        w = 1.0 / tail_v[keep]
        coeff = np.polyfit(tail_t[keep], w, 1)
        t_blow = float(-coeff[1] / coeff[0])
        if const_coeffs:
            exact = 1.0 / (a2[0] * v0)
            if abs(t_blow - exact) > 1e-6 * max(1.0, abs(exact)):
                raise RuntimeError("riccati integrator failed its closed-form cross-check")
        return RiccatiResult("blowup", t_blow=t_blow)

    value = float(sol.y[0, -1])
    if const_coeffs:
        exact = v0 / (1.0 - a2[0] * v0 * (t[-1] - t[0]))
        if abs(value - exact) > 1e-6 * max(1.0, abs(exact)):
            raise RuntimeError("riccati integrator failed its closed-form cross-check")
    return RiccatiResult("finite", value=value)


# --- residual verification along characteristics ---------------------------

#: equation -> (needed direction, measured quantity, quantities on the RHS)
RESIDUAL_KINDS = {
    "rem1": ("forward", "alpha", ("alpha", "beta", "k1", "k2")),
    "rem2": ("backward", "beta", ("alpha", "beta", "k1", "k2")),
    "ode_y": ("forward", "y", ("y", "a0", "a2")),
    "ode_q": ("backward", "q", ("q", "a0", "a2")),
    "ode_ytilde": ("forward", "y_tilde", ("y_tilde", "a0_t", "a1_t", "a2_t")),
    "ode_qtilde": ("backward", "q_tilde", ("q_tilde", "a0_t", "a1_t", "a2_t")),
}


def residual(traj, curve, which: str) -> np.ndarray:
    """(measured directional derivative) - (equation right-hand side).

    The curve direction must match the equation's derivative direction:
    forward curves for the primed equations, backward for the back-primed.
    """
    from steepen import charpath  # deferred: charpath consumes this module

    if which not in RESIDUAL_KINDS:
        raise ValueError(f"unknown residual kind {which!r}")
    direction, measured, needed = RESIDUAL_KINDS[which]
    if curve.direction != direction:
        raise ValueError(
            f"{which} needs a {direction} curve, got a {curve.direction} one"
        )

    for name in needed:
        if name not in curve.samples:
            charpath.sample_along(curve, traj, name)
    s = curve.samples

    lhs = charpath.directional_derivative(curve, measured)
    if which == "rem1":
        rhs = s["k1"] * (s["k2"] * (3.0 * s["alpha"] + s["beta"]) + s["alpha"] * s["beta"] - s["alpha"] ** 2)
    elif which == "rem2":
        rhs = s["k1"] * (-s["k2"] * (s["alpha"] + 3.0 * s["beta"]) + s["alpha"] * s["beta"] - s["beta"] ** 2)
    elif which == "ode_y":
        rhs = s["a0"] + s["a2"] * s["y"] ** 2
    elif which == "ode_q":
        rhs = s["a0"] + s["a2"] * s["q"] ** 2
    elif which == "ode_ytilde":
        rhs = s["a0_t"] + s["a1_t"] * s["y_tilde"] + s["a2_t"] * s["y_tilde"] ** 2
    else:  # ode_qtilde
        rhs = s["a0_t"] - s["a1_t"] * s["q_tilde"] + s["a2_t"] * s["q_tilde"] ** 2
    return lhs - rhs
