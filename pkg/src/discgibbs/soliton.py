"""Soliton manifold on the disc and the normal-bundle decomposition.

The manifold is the two-parameter family e^{i theta} bold-Q_delta of
boundary-corrected dilated ground states; its tangent frame at a point
is spanned by i e^{i theta} bold-Q_delta (phase direction) and
e^{i theta} d_delta bold-Q_delta (dilation direction), which are
exactly H1-orthogonal under the real inner product.

``decompose`` inverts u = e^{i theta} bold-Q_delta + v, v normal, by the
fixed-point iteration x -> x + dG(base)^{-1} (u - G(x)) with the frozen
derivative of
    G(theta, d, v) = P_N( e^{i theta} bold-Q_{delta_bar d} )
                     + P_{V(theta, delta_bar d)} v,
a contraction on a neighborhood of the base point.  All internal work
happens with the base phase rotated to zero (the map commutes with
global phase rotation); inputs are rotated in and results rotated back.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import disc_spectrum, ground_state
from .errors import (ConvergenceError, DomainError, NotInNeighborhood,
                     WindowError)


def soliton_window(N, delta_star=0.25, floor=0.02):
    """Configured dilation window (delta_*, delta^*), delta_* = max(4/N, floor)."""
    return max(4.0 / N, floor), delta_star


@dataclass(frozen=True)
class SolitonCoords:
    theta: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * np.pi))
        if self.delta <= 0.0:
            raise DomainError("delta must be positive")


@dataclass(frozen=True)
class SolitonDecomposition:
    coords: SolitonCoords
    v: np.ndarray
    residual_l2: float
    orth_residuals: tuple
    iterations: int = 0
    contraction: float = 0.0


def _check_window(delta, N, window):
    lo, hi = soliton_window(N) if window is None else window
    if not (lo <= delta <= hi):
        raise WindowError(
            f"delta={delta:.4g} outside the window ({lo:.4g}, {hi:.4g})")


def tangent_frame(gs, delta, basis, N=None, window=None):
    """Coefficients of P_N(i bold-Q_delta) and P_N(d_delta bold-Q_delta)."""
    N = basis.N if N is None else int(N)
    _check_window(delta, N, window)
    q = ground_state.restricted_soliton(gs, delta, basis)[:N]
    dq = ground_state.d_delta_soliton(gs, delta, basis)[:N]
    return 1j * q, dq.astype(np.complex128)


def _h1_project_normal(basis, u, t_list):
    """Remove the H1 components of u along each (already built) frame vector."""
    out = np.array(u, dtype=np.complex128, copy=True)
    lam = basis.eigenvalues[: out.shape[-1]]
    for t in t_list:
        t_norm2 = float(np.sum(lam * np.abs(t) ** 2))
        coeff = float(np.real(np.sum(lam * out * np.conj(t)))) / t_norm2
        out = out - coeff * t
    return out


def normal_project(gs, u, coords, basis, window=None):
    """H1-orthogonal projection of u onto the normal space V_{theta,delta}."""
    u = np.asarray(u, dtype=np.complex128)
    N = u.shape[-1]
    t1, t2 = tangent_frame(gs, coords.delta, basis, N=N, window=window)
    phase = np.exp(1j * coords.theta)
    return _h1_project_normal(basis, u, (phase * t1, phase * t2))


def decompose(gs, u, initial, basis, eps=None, N=None, max_iter=100,
              tol=1e-13, window=None):
    """Recover (theta, delta, v) with P_N u = P_N(e^{i theta} bold-Q_delta) + v.

    Requires the L2 precondition ||u - P_N e^{i theta0} bold-Q_delta0|| <= 2 eps
    at the initial coordinates; raises NotInNeighborhood when the
    precondition fails or the iteration stops contracting, and
    ConvergenceError past ``max_iter``.
    """
    u = np.asarray(u, dtype=np.complex128)
    N = u.shape[-1] if N is None else int(N)
    u = disc_spectrum.project_low(u, N)[:N]
    if eps is None:
        eps = 0.05 * np.sqrt(gs.mass)
    delta_bar = initial.delta
    _check_window(delta_bar, N, window)
    lam = basis.eigenvalues[:N]

    # Rotate the base phase to zero; everything below lives in that gauge.
    u0 = np.exp(-1j * initial.theta) * u
    q0 = ground_state.restricted_soliton(gs, delta_bar, basis)[:N]
    dq0 = ground_state.d_delta_soliton(gs, delta_bar, basis)[:N]
    d1 = float(np.sum(lam * q0 * q0))
    d2 = float(np.sum(lam * dq0 * dq0))

    miss = u0 - q0
    if np.sqrt(np.sum(np.abs(miss) ** 2)) > 2.0 * eps:
        raise NotInNeighborhood(
            "field violates the 2*eps L2 neighborhood precondition")

    def frame_at(theta, delta):
        q = ground_state.restricted_soliton(gs, delta, basis)[:N]
        dq = ground_state.d_delta_soliton(gs, delta, basis)[:N]
        phase = np.exp(1j * theta)
        return phase * q, phase * (1j * q), phase * dq

    def g_map(theta, drel, v):
        base, t1, t2 = frame_at(theta, delta_bar * drel)
        return base + _h1_project_normal(basis, v, (t1, t2)), (base, t1, t2)

    theta, drel = 0.0, 1.0
    v = np.zeros(N, dtype=np.complex128)
    prev_step = None
    kappa = 0.0
    for it in range(1, max_iter + 1):
        g_val, _ = g_map(theta, drel, v)
        w = u0 - g_val
        alpha = float(np.sum(lam * np.imag(w) * q0)) / d1
        beta = float(np.real(np.sum(lam * w * dq0))) / (delta_bar * d2)
        vres = w - alpha * (1j * q0) - beta * delta_bar * dq0
        step = abs(alpha) + abs(beta) + float(np.sqrt(np.sum(np.abs(vres) ** 2)))
        theta += alpha
        drel += beta
        v = v + vres
        if not (0.0 < delta_bar * drel <= 1.0):
            raise NotInNeighborhood("dilation parameter escaped during iteration")
        if prev_step is not None and prev_step > 1e3 * tol:
            kappa = step / prev_step
            if kappa > 0.5 and step > 1e3 * tol:
                raise NotInNeighborhood(
                    f"fixed-point map not contracting (kappa={kappa:.3f})")
        if step <= tol * (1.0 + np.sqrt(np.sum(np.abs(u0) ** 2))):
            break
        prev_step = step
    else:
        raise ConvergenceError(f"decomposition did not settle in {max_iter} steps")

    delta_f = delta_bar * drel
    _check_window(delta_f, N, window)
    base, t1, t2 = frame_at(theta, delta_f)
    v_f = _h1_project_normal(basis, v, (t1, t2))
    resid = u0 - base - v_f
    residual_l2 = float(np.sqrt(np.sum(np.abs(resid) ** 2)))
    orth = (abs(float(np.real(np.sum(lam * v_f * np.conj(t1))))),
            abs(float(np.real(np.sum(lam * v_f * np.conj(t2))))))
    phase_back = np.exp(1j * initial.theta)
    coords = SolitonCoords(theta=initial.theta + theta, delta=delta_f)
    return SolitonDecomposition(coords=coords, v=phase_back * v_f,
                                residual_l2=residual_l2, orth_residuals=orth,
                                iterations=it, contraction=kappa)


def hamiltonian(basis, coeffs):
    """H(u) = (1/2) ||u||_{H1}^2 - (1/4) int |u|^4 (cubic focusing)."""
    coeffs = np.asarray(coeffs)
    grad = disc_spectrum.h1_norm2(basis, coeffs)
    quart = disc_spectrum.lp_integral(basis, coeffs, 4)
    return float(0.5 * grad - 0.25 * quart)


@dataclass(frozen=True)
class ExpansionTerms:
    """Terms of H(bold-Q + v) expanded around the soliton.

    total = constant + linear + gradient + quadratic + cubic + quartic
    reproduces H(bold-Q + v) exactly (up to quadrature rounding).
    """

    constant: float
    linear: float
    gradient: float
    quadratic: float
    cubic: float
    quartic: float

    @property
    def total(self):
        return (self.constant + self.linear + self.gradient
                + self.quadratic + self.cubic + self.quartic)


def hamiltonian_expansion(basis, q_coeffs, v):
    """Exact termwise expansion of H(bold-Q + v) for real-coefficient Q."""
    q_coeffs = np.real(np.asarray(q_coeffs))
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != q_coeffs.shape:
        v = disc_spectrum.project_low(v, q_coeffs.shape[-1])
    lam = basis.eigenvalues[: q_coeffs.shape[-1]]
    qg = np.real(disc_spectrum.synthesize(basis, q_coeffs))
    vg = disc_spectrum.synthesize(basis, v)
    integrate = basis.integrate
    constant = 0.5 * float(np.sum(lam * q_coeffs ** 2)) - 0.25 * float(
        integrate(qg ** 4))
    linear = float(np.sum(lam * q_coeffs * np.real(v))) - float(
        integrate(qg ** 3 * np.real(vg)))
    gradient = 0.5 * float(np.sum(lam * np.abs(v) ** 2))
    quadratic = -float(integrate(qg ** 2 * (0.5 * np.real(vg ** 2)
                                            + np.abs(vg) ** 2)))
    cubic = -float(integrate(qg * np.abs(vg) ** 2 * np.real(vg)))
    quartic = -0.25 * float(integrate(np.abs(vg) ** 4))
    return ExpansionTerms(constant=constant, linear=linear, gradient=gradient,
                          quadratic=quadratic, cubic=cubic, quartic=quartic)


def quadratic_form_B_parts(basis, q_coeffs, v, delta, eta):
    """Linear and potential pieces of B_delta(v), by quadrature."""
    if eta < 0.0:
        raise DomainError("eta must be nonnegative")
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    qg = np.real(disc_spectrum.synthesize(basis, np.real(np.asarray(q_coeffs))))
    vg = disc_spectrum.synthesize(basis, np.asarray(v, dtype=np.complex128))
    linear = float(basis.integrate(qg * np.real(vg))) / delta ** 2
    potential = float(basis.integrate(
        qg ** 2 * (0.5 * np.real(vg ** 2) + (1.0 + eta) * np.abs(vg) ** 2)))
    return linear, potential


def quadratic_form_B(basis, q_coeffs, v, delta, eta):
    """B_delta(v) = delta^{-2} <Q, v> + <Q^2, v^2/2 + (1+eta)|v|^2>."""
    linear, potential = quadratic_form_B_parts(basis, q_coeffs, v, delta, eta)
    return linear + potential


def surface_measure_factors(delta):
    """Scaling factors of the manifold surface measure (reported, not integrated)."""
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    return {"omega_scale": delta ** -3, "weighted_scale": delta ** -5}


def decomposition_to_json(dec, path, coeff_path=None):
    if coeff_path is not None:
        with open(coeff_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "re_c", "im_c"])
            for i, c in enumerate(dec.v):
                writer.writerow([i + 1, repr(float(np.real(c))),
                                 repr(float(np.imag(c)))])
    record = {
        "theta": dec.coords.theta,
        "delta": dec.coords.delta,
        "residual_l2": dec.residual_l2,
        "orth_residuals": list(dec.orth_residuals),
        "iterations": dec.iterations,
        "contraction": dec.contraction,
        "v_coefficients": str(coeff_path) if coeff_path is not None else None,
    }
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return record
