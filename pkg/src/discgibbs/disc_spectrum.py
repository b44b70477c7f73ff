"""Dirichlet radial eigenbasis of -Laplace on a disc.

The L2-normalized eigenfunctions on the radius-R disc are
e_n(r) = J0(z_n r / R) / ||J0(z_n . / R)||_{L2},  lambda_n = (z_n / R)^2,
with z_n the n-th zero of J0.  Radial integrals are evaluated with a
Gauss-Legendre rule on (0, R) whose weights carry the Jacobian r, so
``2 pi * sum(w_i f(r_i))`` realizes the area integral of a radial f.

Coefficient vectors ("FieldCoeffs") are plain complex numpy arrays
c[0..M-1], c[n-1] multiplying e_n; all norms and inner products below
use the real-part convention <f, g> = Re integral f conj(g).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import bessel
from .errors import DomainError, ResolutionError, ShapeError


@dataclass(frozen=True)
class RadialQuadrature:
    """Nodes r_i in (0, R) and weights w_i = gl_i * r_i.

    integrate(f) = 2 pi * sum w_i f(r_i); exact for polynomial
    integrands up to the Gauss-Legendre design degree.
    """

    nodes: np.ndarray
    weights: np.ndarray
    radius: float = 1.0

    def integrate(self, values):
        values = np.asarray(values)
        if values.shape[-1] != self.nodes.shape[0]:
            raise ShapeError("grid values do not match quadrature nodes")
        return 2.0 * np.pi * (values @ self.weights)


def radial_quadrature(points, radius=1.0):
    x, w = leggauss(int(points))
    nodes = 0.5 * radius * (x + 1.0)
    gl = 0.5 * radius * w
    return RadialQuadrature(nodes=nodes, weights=gl * nodes, radius=float(radius))


@dataclass(frozen=True)
class DiscEigenbasis:
    """Truncated Fourier-Bessel basis with its quadrature grid.

    ``modes`` holds e_n(r_i) row-wise, so synthesis is a single matrix
    product.  Instances are immutable and safe to share across threads.
    """

    N: int
    zeros: bessel.BesselZeroTable
    norms: np.ndarray
    quad: RadialQuadrature
    radius: float = 1.0
    modes: np.ndarray = field(repr=False, default=None)
    orth_residual: float = 0.0

    @property
    def eigenvalues(self):
        return (self.zeros.zeros / self.radius) ** 2

    @property
    def frequencies(self):
        """sqrt(lambda_n) = z_n / R, the H1 weight per mode."""
        return self.zeros.zeros / self.radius

    def eval_modes(self, r, M=None):
        """Matrix e_n(r_j) for n <= M at arbitrary radii r."""
        M = self.N if M is None else int(M)
        r = np.atleast_1d(np.asarray(r, dtype=np.float64))
        args = np.outer(self.zeros.zeros[:M] / self.radius, r)
        return bessel.j0(args.ravel()).reshape(M, r.size) / self.norms[:M, None]

    def integrate(self, values):
        return self.quad.integrate(values)


def build_basis(N, quad_points=None, radius=1.0, check=True):
    """Construct the first N modes with a quadrature resolving e_N.

    ``quad_points`` defaults to ceil(4 z_N / pi), roughly 2.5 nodes per
    half-oscillation of the top mode.  A Gram self-test guards against
    under-resolution; residual above 1e-6 raises ResolutionError.
    """
    if N < 1:
        raise DomainError("basis size must be >= 1")
    table = bessel.j0_zeros(N)
    if quad_points is None:
        quad_points = max(64, int(np.ceil(4.0 * table.zeros[-1] / np.pi)))
    if quad_points < 2 * N:
        raise ResolutionError(
            f"{quad_points} quadrature nodes cannot resolve {N} modes")
    quad = radial_quadrature(quad_points, radius=radius)
    raw = bessel.j0(
        np.outer(table.zeros / radius, quad.nodes).ravel()
    ).reshape(N, quad_points)
    norms = np.sqrt(2.0 * np.pi * (raw ** 2 @ quad.weights))
    modes = raw / norms[:, None]
    residual = 0.0
    if check:
        gram = 2.0 * np.pi * ((modes * quad.weights) @ modes.T)
        residual = float(np.abs(gram - np.eye(N)).max())
        if residual > 1e-6:
            raise ResolutionError(
                f"orthonormality self-test failed: residual {residual:.3e}")
    return DiscEigenbasis(N=N, zeros=table, norms=norms, quad=quad,
                          radius=float(radius), modes=modes,
                          orth_residual=residual)


def synthesize(basis, coeffs):
    """Grid values of sum_n c_n e_n on the quadrature nodes."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] > basis.N:
        raise ShapeError("more coefficients than basis modes")
    return coeffs @ basis.modes[: coeffs.shape[-1]]


def project(basis, values, M=None):
    """Coefficients <f, e_n> for n <= M from grid values of f."""
    M = basis.N if M is None else int(M)
    values = np.asarray(values)
    if values.shape[-1] != basis.quad.nodes.shape[0]:
        raise ShapeError("grid values do not match quadrature nodes")
    return 2.0 * np.pi * ((values * basis.quad.weights) @ basis.modes[:M].T)


def project_low(coeffs, M):
    """Truncation P_{<=M}: zero every coefficient beyond mode M."""
    coeffs = np.asarray(coeffs)
    if M > coeffs.shape[-1]:
        raise ShapeError("truncation level exceeds coefficient length")
    out = np.array(coeffs, copy=True)
    out[..., M:] = 0.0
    return out


def _pair(basis, u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ShapeError("coefficient vectors differ in length")
    if u.shape[-1] > basis.N:
        raise ShapeError("more coefficients than basis modes")
    return u, v


def l2_inner(basis, u, v):
    u, v = _pair(basis, u, v)
    return float(np.real(np.sum(u * np.conj(v), axis=-1)))


def h1_inner(basis, u, v):
    """Homogeneous H1 pairing Re sum lambda_n u_n conj(v_n)."""
    u, v = _pair(basis, u, v)
    lam = basis.eigenvalues[: u.shape[-1]]
    return float(np.real(np.sum(lam * u * np.conj(v), axis=-1)))


def l2_norm2(basis, u):
    u = np.asarray(u)
    return float(np.sum(np.abs(u) ** 2, axis=-1))


def h1_norm2(basis, u):
    u = np.asarray(u)
    lam = basis.eigenvalues[: u.shape[-1]]
    return float(np.sum(lam * np.abs(u) ** 2, axis=-1))


def lp_integral(basis, coeffs, p):
    """Quadrature of |u|^p for the field with the given coefficients."""
    grid = synthesize(basis, coeffs)
    return float(np.real(basis.integrate(np.abs(grid) ** p)))


def dump_basis_csv(basis, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "z_n", "norm"])
        for i in range(basis.N):
            writer.writerow([i + 1, repr(float(basis.zeros.zeros[i])),
                             repr(float(basis.norms[i]))])


def load_basis_csv(path):
    """Regression fixture loader; returns (n, z_n, norm) arrays."""
    ns, zs, norms = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            ns.append(int(row["n"]))
            zs.append(float(row["z_n"]))
            norms.append(float(row["norm"]))
    return np.array(ns), np.array(zs), np.array(norms)
