"""Ground state of (p-2) Lap Q + 2 Q^{p-1} - 2 Q = 0 by radial shooting.

In the radial variable the equation reads
    Q'' + Q'/r = (2/(p-2)) (Q - Q^{p-1}),   Q(0) = beta, Q'(0) = 0,
and the decaying separatrix is isolated by bisecting beta between the
two generic behaviours: trajectories with beta below critical stall and
turn back upward toward the constant solution Q = 1, trajectories above
critical overshoot and cross zero.  Integration starts at r0 = 1e-6
from the Taylor expansion Q ~ beta + Q''(0) r^2 / 2 with
Q''(0) = (beta - beta^{p-1}) / (p - 2) (the 1/r term forbids starting
at r = 0 exactly), using a classic fixed-step fourth-order scheme.

A single forward pass cannot produce the far tail: the separatrix is
exponentially unstable, so double-precision roundoff injected near the
core grows like e^{+r} and swamps Q(r) ~ e^{-r} beyond r ~ 14.  The
profile is therefore assembled from a forward pass on [0, r_fit] and a
backward pass seeded at large radius with the modified-Bessel-type
asymptotic A sqrt(pi/2r) e^{-r} (1 - 1/8r + ...); backward integration
is stable for the decaying branch, and the amplitude A is fixed by
matching the forward solution at r_fit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import disc_spectrum
from .errors import DomainError, SolverError, StepSizeError

_CROSSED = 1    # Q hit zero: beta above critical
_TURNED = -1    # Q' turned nonnegative: beta below critical
_NO_EVENT = 0
_NONFINITE = 2


@njit(cache=True)
def _rhs(r, q, qp, p, k):
    nonlin = np.sign(q) * np.abs(q) ** (p - 1.0)
    return -qp / r + k * (q - nonlin)


@njit(cache=True)
def _classify(beta, p, h, r0, r_stop):
    k = 2.0 / (p - 2.0)
    c2 = (beta - beta ** (p - 1.0)) / (p - 2.0)
    r = r0
    q = beta + 0.5 * c2 * r0 * r0
    qp = c2 * r0
    while r < r_stop:
        k1q = qp
        k1p = _rhs(r, q, qp, p, k)
        k2q = qp + 0.5 * h * k1p
        k2p = _rhs(r + 0.5 * h, q + 0.5 * h * k1q, qp + 0.5 * h * k1p, p, k)
        k3q = qp + 0.5 * h * k2p
        k3p = _rhs(r + 0.5 * h, q + 0.5 * h * k2q, qp + 0.5 * h * k2p, p, k)
        k4q = qp + h * k3p
        k4p = _rhs(r + h, q + h * k3q, qp + h * k3p, p, k)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        qp = qp + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        r = r + h
        if not (np.isfinite(q) and np.isfinite(qp)):
            return _NONFINITE
        if q <= 0.0:
            return _CROSSED
        if qp >= 0.0:
            return _TURNED
    return _NO_EVENT


@njit(cache=True)
def _integrate(q0, qp0, p, h, r_start, steps, stride):
    """Fixed-step integration from (r_start, q0, qp0); h may be negative.

    Returns arrays sampled every ``stride`` steps (first point included).
    """
    k = 2.0 / (p - 2.0)
    kept = steps // stride + 2
    rs = np.empty(kept)
    qs = np.empty(kept)
    qps = np.empty(kept)
    r, q, qp = r_start, q0, qp0
    rs[0], qs[0], qps[0] = r, q, qp
    m = 1
    for i in range(steps):
        k1q = qp
        k1p = _rhs(r, q, qp, p, k)
        k2q = qp + 0.5 * h * k1p
        k2p = _rhs(r + 0.5 * h, q + 0.5 * h * k1q, qp + 0.5 * h * k1p, p, k)
        k3q = qp + 0.5 * h * k2p
        k3p = _rhs(r + 0.5 * h, q + 0.5 * h * k2q, qp + 0.5 * h * k2p, p, k)
        k4q = qp + h * k3p
        k4p = _rhs(r + h, q + h * k3q, qp + h * k3p, p, k)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        qp = qp + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        r = r + h
        if not (np.isfinite(q) and np.isfinite(qp)):
            return rs[:m], qs[:m], qps[:m], _NONFINITE
        if (i + 1) % stride == 0:
            rs[m], qs[m], qps[m] = r, q, qp
            m += 1
    if rs[m - 1] != r:
        rs[m], qs[m], qps[m] = r, q, qp
        m += 1
    return rs[:m], qs[:m], qps[:m], _NO_EVENT


def _tail_seed(r):
    """Decaying asymptotic sqrt(pi/2r) e^{-r} (1 - 1/8r + 9/128r^2 - 225/3072r^3)
    and its derivative, unit amplitude."""
    s = 1.0 - 1.0 / (8.0 * r) + 9.0 / (128.0 * r * r) - 225.0 / (3072.0 * r ** 3)
    sp = 1.0 / (8.0 * r * r) - 9.0 / (64.0 * r ** 3) + 675.0 / (3072.0 * r ** 4)
    g = np.sqrt(np.pi / (2.0 * r)) * np.exp(-r) * s
    gp = g * (-1.0 - 0.5 / r + sp / s)
    return g, gp


@dataclass
class GroundStateProfile:
    """Radial profile of Q with derivative and decay metadata.

    ``value``/``dvalue`` interpolate with cubic splines, switching to a
    spline of log Q in the tail and to log-linear extrapolation beyond
    r_max (the profile decays exponentially, so the extrapolation slope
    is the terminal logarithmic derivative).
    """

    p: float
    r_grid: np.ndarray
    Q: np.ndarray
    Qp: np.ndarray
    mass: float
    center_value: float
    beta_bracket: float = 0.0
    match_mismatch: float = 0.0
    _spline_q: CubicSpline = field(default=None, repr=False)
    _spline_qp: CubicSpline = field(default=None, repr=False)
    _spline_logq: CubicSpline = field(default=None, repr=False)
    _r_switch: float = 2.0

    def __post_init__(self):
        self._spline_q = CubicSpline(self.r_grid, self.Q)
        self._spline_qp = CubicSpline(self.r_grid, self.Qp)
        tail = self.r_grid >= 0.5 * self._r_switch
        self._spline_logq = CubicSpline(self.r_grid[tail], np.log(self.Q[tail]))

    @property
    def r_max(self):
        return float(self.r_grid[-1])

    @property
    def tail_slope(self):
        return float(self._spline_logq(self.r_max, 1))

    def value(self, r):
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0.0):
            raise DomainError("radius must be nonnegative")
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        near = r < self._r_switch
        mid = (~near) & (r <= self.r_max)
        far = r > self.r_max
        out[near] = self._spline_q(r[near])
        out[mid] = np.exp(self._spline_logq(r[mid]))
        if far.any():
            log_end = float(self._spline_logq(self.r_max))
            out[far] = np.exp(log_end + self.tail_slope * (r[far] - self.r_max))
        return float(out[0]) if scalar else out

    def dvalue(self, r):
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0.0):
            raise DomainError("radius must be nonnegative")
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        near = r < self._r_switch
        far = ~near
        out[near] = self._spline_qp(r[near])
        if far.any():
            rv = r[far]
            slope = np.where(rv <= self.r_max, self._spline_logq(rv, 1),
                             self.tail_slope)
            out[far] = self.value(rv) * slope
        return float(out[0]) if scalar else out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "Q", "Qp"])
            for r, q, qp in zip(self.r_grid, self.Q, self.Qp):
                writer.writerow([repr(float(r)), repr(float(q)), repr(float(qp))])

    @classmethod
    def from_csv(cls, path, p, mass=None):
        rows = np.loadtxt(path, delimiter=",", skiprows=1)
        r, q, qp = rows[:, 0], rows[:, 1], rows[:, 2]
        if mass is None:
            mass = float(2.0 * np.pi * simpson(q * q * r, x=r))
        return cls(p=p, r_grid=r, Q=q, Qp=qp, mass=mass, center_value=float(q[0]))


def solve_ground_state(p, tol=1e-12, step=1e-4, r_fit=None, r_end=None,
                       store_every=1, r_classify=None):
    """Shoot for the decaying separatrix; see the module docstring.

    ``tol`` is the requested bisection tolerance on the shooting
    parameter beta; the bracket is always polished further (to ~1e-14)
    because the tail quality degrades exponentially with the beta error.
    The matching and seeding radii scale with the linear decay rate
    sqrt(2/(p-2)) so the forward pass stops while it is still clean.
    """
    if not (2.0 < p <= 8.0):
        raise DomainError("nonlinearity p must lie in (2, 8]")
    if not (1e-12 <= tol <= 1e-4):
        raise DomainError("tol must lie in [1e-12, 1e-4]")
    rate = np.sqrt(2.0 / (p - 2.0))
    if r_fit is None:
        r_fit = 10.0 / rate
    if r_end is None:
        r_end = 28.0 / rate
    if r_classify is None:
        r_classify = 30.0 / rate
    h = float(step)
    r0 = 1e-6

    grid = np.linspace(1.0 + 1e-3, 10.0, 40)
    classes = [_classify(b, p, h, r0, r_classify) for b in grid]
    if _NONFINITE in classes:
        raise StepSizeError("trajectory became non-finite; reduce the step")
    bracket = None
    for i in range(len(grid) - 1):
        if classes[i] != _CROSSED and classes[i + 1] == _CROSSED:
            bracket = (grid[i], grid[i + 1])
            break
    if bracket is None:
        raise SolverError("no shooting bracket found in beta in [1, 10]")
    lo, hi = bracket
    while hi - lo > min(tol, 1e-14):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        cls = _classify(mid, p, h, r0, r_classify)
        if cls == _NONFINITE:
            raise StepSizeError("trajectory became non-finite; reduce the step")
        if cls == _CROSSED:
            hi = mid
        else:
            lo = mid
    beta = 0.5 * (lo + hi)

    c2 = (beta - beta ** (p - 1.0)) / (p - 2.0)
    # Step counts are rounded so both passes land exactly on r_fit; the
    # effective step differs from ``step`` by under one part in 1e4.
    n_fwd = int(round((r_fit - r0) / h))
    h_fwd = (r_fit - r0) / n_fwd
    rf, qf, qpf, status = _integrate(beta + 0.5 * c2 * r0 * r0, c2 * r0,
                                     p, h_fwd, r0, n_fwd, store_every)
    if status == _NONFINITE:
        raise StepSizeError("forward pass became non-finite")

    # Decay rate of the linearized tail: Q'' + Q'/r = (2/(p-2)) Q, so the
    # exponential rate is sqrt(2/(p-2)); rescale the unit-rate seed.
    g_end, gp_end = _tail_seed(rate * r_end)
    n_back = int(round((r_end - r_fit) / h))
    h_back = (r_end - r_fit) / n_back
    rb, qb, qpb, status = _integrate(g_end, rate * gp_end, p, -h_back,
                                     r_end, n_back, store_every)
    if status == _NONFINITE:
        raise StepSizeError("backward tail pass became non-finite")
    rb, qb, qpb = rb[::-1], qb[::-1], qpb[::-1]

    scale = qf[-1] / qb[0]
    qb, qpb = scale * qb, scale * qpb
    mismatch = abs(qpb[0] - qpf[-1]) / abs(qpf[-1])
    if mismatch > 1e-4:
        raise SolverError(
            f"forward/backward derivative mismatch {mismatch:.2e} at r_fit")

    r_all = np.concatenate([rf, rb[1:]])
    q_all = np.concatenate([qf, qb[1:]])
    qp_all = np.concatenate([qpf, qpb[1:]])

    below = np.nonzero(q_all < 1e-9)[0]
    end = below[0] + 1 if below.size else len(r_all)
    r_all, q_all, qp_all = r_all[:end], q_all[:end], qp_all[:end]

    mass = float(2.0 * np.pi * simpson(q_all * q_all * r_all, x=r_all))
    return GroundStateProfile(p=p, r_grid=r_all, Q=q_all, Qp=qp_all,
                              mass=mass, center_value=float(beta),
                              beta_bracket=float(hi - lo),
                              match_mismatch=float(mismatch))


def energy_profile(gs):
    """E[Q(r)] = Q'^2/2 + 2 Q^p / (p(p-2)) - Q^2 / (p-2) at every node."""
    p = gs.p
    return (0.5 * gs.Qp ** 2 + (2.0 / (p * (p - 2.0))) * gs.Q ** p
            - gs.Q ** 2 / (p - 2.0))


def quarter_radius(gs):
    """Smallest a with Q(r) <= 1/4 for all r >= a (Q is decreasing)."""
    if gs.Q[0] <= 0.25:
        return float(gs.r_grid[0])
    return float(brentq(lambda r: gs.value(r) - 0.25, gs.r_grid[0] + 1e-9,
                        gs.r_max))


def _radial_norms(r, vals, dvals, p):
    a2 = np.abs(vals) ** 2
    l2 = 2.0 * np.pi * simpson(a2 * r, x=r)
    lp = 2.0 * np.pi * simpson(np.abs(vals) ** p * r, x=r)
    grad = 2.0 * np.pi * simpson(np.abs(dvals) ** 2 * r, x=r)
    return l2, lp, grad


def gns_ratio(u, p, gs, basis=None):
    """Ratio ||u||_p^p / [ (p/2) ||Q||_2^{2-p} ||grad u||_2^{p-2} ||u||_2^2 ].

    ``u`` may be coefficient vector (with ``basis``), a GroundStateProfile,
    or an (r, values[, dvalues]) tuple of radial grid data; disc fields
    are treated as extended by zero to the plane.  Always <= 1 up to
    quadrature error, with equality on the rescaled ground states.
    """
    if basis is not None and isinstance(u, np.ndarray):
        l2 = disc_spectrum.l2_norm2(basis, u)
        grad = disc_spectrum.h1_norm2(basis, u)
        lp = disc_spectrum.lp_integral(basis, u, p)
    elif isinstance(u, GroundStateProfile):
        l2, lp, grad = _radial_norms(u.r_grid, u.Q, u.Qp, p)
    elif isinstance(u, tuple):
        r, vals = u[0], u[1]
        dvals = u[2] if len(u) > 2 else np.gradient(vals, r)
        l2, lp, grad = _radial_norms(np.asarray(r), np.asarray(vals),
                                     np.asarray(dvals), p)
    else:
        raise DomainError("unsupported field representation for gns_ratio")
    if l2 <= 0.0 or grad <= 0.0:
        raise DomainError("GNS ratio undefined for the zero field")
    denom = (0.5 * p) * gs.mass ** (0.5 * (2.0 - p)) * grad ** (0.5 * (p - 2.0)) * l2
    return float(lp / denom)


def soliton_scaled(gs, delta, r):
    """Mass-invariant dilation Q_delta(r) = delta^{-1} Q(r / delta)."""
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0.0):
        raise DomainError("radius must be nonnegative")
    return gs.value(r / delta) / delta


def soliton_scaled_ddelta(gs, delta, r):
    """d/d delta of Q_delta: -delta^{-2} [Q(s) + s Q'(s)], s = r/delta."""
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    s = np.asarray(r, dtype=np.float64) / delta
    return -(gs.value(s) + s * gs.dvalue(s)) / delta ** 2


def restricted_soliton(gs, delta, basis):
    """Coefficients of bold-Q_delta = Q_delta - Q_delta(R) on the disc."""
    vals = soliton_scaled(gs, delta, basis.quad.nodes)
    vals = vals - soliton_scaled(gs, delta, basis.radius)
    return disc_spectrum.project(basis, vals)


def d_delta_soliton(gs, delta, basis):
    """Coefficients of d/d delta bold-Q_delta (analytic differentiation)."""
    vals = soliton_scaled_ddelta(gs, delta, basis.quad.nodes)
    vals = vals - soliton_scaled_ddelta(gs, delta, np.array(basis.radius))
    return disc_spectrum.project(basis, vals)
