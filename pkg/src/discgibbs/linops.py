"""Galerkin spectral analysis of the constrained linearized operators.

A1 and A2 act on the real and imaginary sectors of H1_{rad,0}(D),

    A1 = P_{W_R} (-Lap)^{-1} ( -(1+5 eta) (3/2) bold-Q_delta^2 + delta^{-2}/2 ) P_{W_R},
    A2 = P_{W_I} (-Lap)^{-1} ( -(1+5 eta) (1/2) bold-Q_delta^2 + delta^{-2}/2 ) P_{W_I},

and are assembled in the H1-orthonormal basis {e_n / z_n}, where the
unprojected entries are (z_n z_m)^{-1} <V e_m, e_n>_{L2}.  Constraints
are realized as H1-orthogonality: the L2 pairing against bold-Q becomes
orthogonality to its (-Lap)^{-1} representer.  Their eigenvalues must
exceed -1/2 for the Gaussian product prod (1 + 2(1-eta) lambda)^{-1/2}
to converge.

T_R = (delta^{-2} - Lap)/2 - (3/2) Q_delta^2 and the imaginary-sector
T_I (coefficient 1/2) are the plane-limit Schrodinger forms; they are
assembled as plain quadratic-form matrices <T e_m, e_n>_{L2} on a large
disc (the exponential decay of Q makes a radius-20 surrogate adequate),
with no constraint projection, since the kernel and gap probes act on
the raw operator.

The comparison operators S+/S- are diagonal in their own Bessel bases:
their eigenvalues come in closed form from cross-product roots and J0
zeros, see ``comparison_spectrum``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import bessel, disc_spectrum, ground_state
from .errors import DivergentGaussianError, DomainError, ResolutionError

OPERATORS = ("A1", "A2", "S_plus", "S_minus", "T_R", "T_I")


@dataclass(frozen=True)
class GalerkinOperator:
    delta: float
    eta: float
    which: str
    dim: int
    matrix: np.ndarray = field(repr=False)
    n_constraints: int = 0
    radius: float = 1.0


def _orthonormal_columns(vectors):
    """Gram-Schmidt on the constraint directions (columns)."""
    cols = []
    for vec in vectors:
        v = np.array(vec, dtype=np.float64, copy=True)
        for c in cols:
            v -= (c @ v) * c
        norm = np.linalg.norm(v)
        if norm > 1e-14:
            cols.append(v / norm)
    return cols


def _project_out(matrix, constraints):
    mat = matrix
    for c in constraints:
        mat = mat - np.outer(c, c @ mat)
        mat = mat - np.outer(mat @ c, c)
    return 0.5 * (mat + mat.T)


def potential_operator(basis, potential_grid, dim):
    """(z_n z_m)^{-1} <V e_m, e_n>_{L2}, the unconstrained (-Lap)^{-1} V form.

    Diagonal c / z_n^2 for constant potentials; includes an entry
    self-test (the identity-potential Gram) against under-resolution.
    """
    if dim > basis.N:
        raise DomainError("operator dimension exceeds basis size")
    z = basis.frequencies[:dim]
    emat = basis.modes[:dim]
    wts = 2.0 * np.pi * basis.quad.weights
    pot = np.broadcast_to(np.asarray(potential_grid, dtype=np.float64),
                          basis.quad.nodes.shape)
    probe = (emat * wts) @ emat.T
    if np.abs(probe - np.eye(dim)).max() > 1e-8:
        raise ResolutionError("potential matrix self-test failed; "
                              "quadrature under-resolves the basis")
    mat = (emat * (wts * pot)) @ emat.T
    mat = mat / np.outer(z, z)
    return 0.5 * (mat + mat.T)


def build_constrained_operator(which, delta, eta, gs, basis, dim):
    """Assemble the Galerkin matrix of the requested operator.

    A1/A2 use the boldface potential on ``basis`` (normally the unit
    disc); T_R/T_I are plane-limit forms and expect a large-radius
    basis.  S_plus/S_minus are returned as diagonal matrices of their
    closed-form eigenvalues.
    """
    if which not in OPERATORS:
        raise DomainError(f"unknown operator {which!r}")
    if dim > basis.N:
        raise DomainError("operator dimension exceeds basis size")
    if delta <= 0.0:
        raise DomainError("delta must be positive")

    if which in ("S_plus", "S_minus"):
        a = ground_state.quarter_radius(gs)
        eigs = comparison_spectrum(which, delta, a, dim)
        return GalerkinOperator(delta=float(delta), eta=float(eta), which=which,
                                dim=int(dim), matrix=np.diag(eigs),
                                n_constraints=0, radius=basis.radius)

    nodes = basis.quad.nodes
    qvals = ground_state.soliton_scaled(gs, delta, nodes)
    qvals = qvals - ground_state.soliton_scaled(gs, delta, basis.radius)
    z = basis.frequencies[:dim]
    emat = basis.modes[:dim]
    wts = 2.0 * np.pi * basis.quad.weights

    if which in ("A1", "A2"):
        strength = 1.5 if which == "A1" else 0.5
        pot = -(1.0 + 5.0 * eta) * strength * qvals ** 2 + 0.5 / delta ** 2
        mat = potential_operator(basis, pot, dim)
        qc = ground_state.restricted_soliton(gs, delta, basis)[:dim]
        if which == "A1":
            dqc = ground_state.d_delta_soliton(gs, delta, basis)[:dim]
            # H1 coords: the H1 direction of d_delta bold-Q, and the
            # (-Lap)^{-1} representer of the L2 pairing with bold-Q.
            raw = [dqc * z, qc / z]
        else:
            raw = [qc * z]
        constraints = _orthonormal_columns(raw)
        mat = _project_out(mat, constraints)
        return GalerkinOperator(delta=float(delta), eta=float(eta), which=which,
                                dim=int(dim), matrix=mat,
                                n_constraints=len(constraints),
                                radius=basis.radius)

    # T_R / T_I quadratic forms in the L2-orthonormal basis.
    strength = 1.5 if which == "T_R" else 0.5
    lam = basis.eigenvalues[:dim]
    potmat = (emat * (wts * qvals ** 2)) @ emat.T
    mat = np.diag(0.5 * (1.0 / delta ** 2 + lam)) - strength * potmat
    mat = 0.5 * (mat + mat.T)
    return GalerkinOperator(delta=float(delta), eta=float(eta), which=which,
                            dim=int(dim), matrix=mat, n_constraints=0,
                            radius=basis.radius)


def eigenvalues(op):
    """All eigenvalues, descending."""
    vals = np.linalg.eigvalsh(op.matrix)
    return vals[::-1]


def eigenpairs(op):
    """Eigenvalues (descending) with eigenvector columns to match."""
    vals, vecs = np.linalg.eigh(op.matrix)
    return vals[::-1], vecs[:, ::-1]


def eigen_branches(op, zero_tol=1e-12):
    """(positive desc, negative asc-by-magnitude) branches.

    Eigenvalues inside ``zero_tol`` form the constrained/essential
    cluster and are excluded from both branches.
    """
    vals = eigenvalues(op)
    pos = vals[vals > zero_tol]
    neg = np.sort(vals[vals < -zero_tol])[::-1]  # closest to zero first
    return pos, neg


def comparison_spectrum(which, delta, a, n):
    """Closed-form eigenvalues of the comparison operators.

    S_plus: potential delta^{-2}/4 on the annulus (a delta, 1) with a
    Dirichlet hole; eigenvalues mu_k = delta^{-2} / (4 B_k^2) with B_k
    the cross-product roots at ratio alpha = a delta.  S_minus:
    potential -3 delta^{-2} on the hole r <= a delta; eigenvalues
    nu_k = -3 delta^{-2} / A_k^2 with A_k a delta = z_k.
    """
    alpha = a * delta
    if not (0.0 < alpha < 1.0):
        raise DomainError("need a * delta inside (0, 1)")
    if which == "S_plus":
        roots = bessel.cross_product_zeros(alpha, n)
        return 0.25 / (delta ** 2 * roots ** 2)
    if which == "S_minus":
        z = bessel.j0_zeros(n).zeros
        big_a = z / alpha
        return -3.0 / (delta ** 2 * big_a ** 2)
    raise DomainError("comparison operator must be S_plus or S_minus")


@dataclass(frozen=True)
class GaussianProduct:
    product: float
    log_product: float


def gaussian_product(eigs, eta):
    """prod_n (1 + 2(1-eta) lambda_n)^{-1/2}, accumulated in log space."""
    eigs = np.asarray(eigs, dtype=np.float64)
    factors = 1.0 + 2.0 * (1.0 - eta) * eigs
    if np.any(factors <= 0.0):
        worst = float(eigs[np.argmin(factors)])
        raise DivergentGaussianError(
            f"eigenvalue {worst:.6g} breaches the -1/2 Gaussian barrier")
    log_product = -0.5 * float(np.sum(np.log1p(2.0 * (1.0 - eta) * eigs)))
    return GaussianProduct(product=float(np.exp(log_product)),
                           log_product=log_product)


def second_derivative_margin(w_grid, delta, gs, basis):
    """(1/2)<-Lap w, w> - <Q_d^2, w^2/2 + |w|^2> + (delta^{-2}/2)<w, w>.

    ``w_grid`` holds grid values on the quadrature of ``basis`` (use a
    large-radius basis for plane-limit checks).  The input is first
    L2-orthogonalized against Q_delta, as the second-derivative test
    requires.
    """
    w = np.asarray(w_grid, dtype=np.complex128)
    nodes = basis.quad.nodes
    qvals = ground_state.soliton_scaled(gs, delta, nodes)
    qmass = float(basis.integrate(qvals ** 2))
    overlap = float(np.real(basis.integrate(w * qvals)))
    w = w - (overlap / qmass) * qvals

    coeffs = disc_spectrum.project(basis, w)
    lam = basis.eigenvalues
    grad = float(np.sum(lam * np.abs(coeffs) ** 2))
    pot = float(np.real(basis.integrate(
        qvals ** 2 * (0.5 * np.real(w ** 2) + np.abs(w) ** 2))))
    mass = float(np.real(basis.integrate(np.abs(w) ** 2)))
    return 0.5 * grad - pot + 0.5 * mass / delta ** 2


def spectrum_to_csv(ops_and_eigs, path):
    """Rows (which, delta, eta, dim, k, lambda_k) for each operator."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["which", "delta", "eta", "dim", "k", "lambda_k"])
        for op, eigs in ops_and_eigs:
            for k, lam in enumerate(eigs, start=1):
                writer.writerow([op.which, repr(op.delta), repr(op.eta),
                                 op.dim, k, repr(float(lam))])


def product_report_json(path, delta, eta, log_product, min_eigenvalue):
    record = {"delta": delta, "eta": eta, "log_product": log_product,
              "min_eigenvalue": min_eigenvalue}
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return record
