"""Sampling of the free Gaussian measure on the radial disc.

A sample is u = sum_n (g_n / z_n) e_n with g_n standard complex
Gaussians (real and imaginary parts independent N(0, 1/2)).  The RNG is
counter-based (Philox) keyed by (seed, stream_id), so replaying a call
sequence reproduces coefficients bit-for-bit and parallel workers with
distinct stream ids draw independent streams regardless of scheduling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import disc_spectrum
from .errors import DivergentGaussianError, DomainError, ShapeError, StatisticsError


@dataclass
class GaussianSampler:
    basis: disc_spectrum.DiscEigenbasis
    seed: int
    stream_id: int = 0
    _rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF,
                        self.stream_id & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        self._rng = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_id):
        """Fresh sampler on the same seed with its own stream."""
        return GaussianSampler(basis=self.basis, seed=self.seed,
                               stream_id=stream_id)

    def draw_matrix(self, N, count):
        """``count`` independent coefficient vectors, rows c_n = g_n / z_n."""
        if N > self.basis.N:
            raise ShapeError("truncation exceeds basis size")
        g = self._rng.standard_normal((count, N, 2)) * np.sqrt(0.5)
        z = self.basis.frequencies[:N]
        return (g[..., 0] + 1j * g[..., 1]) / z


@dataclass(frozen=True)
class FieldSample:
    coeffs: np.ndarray


def sample_field(sampler, N):
    """One fresh draw of the truncated free field (advances the stream)."""
    return FieldSample(coeffs=sampler.draw_matrix(N, 1)[0])


@dataclass(frozen=True)
class FieldFunctionals:
    mass_l2: float
    l4_integral: float
    hamiltonian_potential: float
    p: float


def functionals(sample, basis, p=4.0):
    """Quadrature values of mass, the quartic integral and (1/p) int |u|^p."""
    coeffs = sample.coeffs if isinstance(sample, FieldSample) else np.asarray(sample)
    grid = disc_spectrum.synthesize(basis, coeffs)
    a2 = np.abs(grid) ** 2
    mass = float(basis.integrate(a2))
    l4 = float(basis.integrate(a2 * a2))
    pot = float(basis.integrate(np.abs(grid) ** p) / p)
    return FieldFunctionals(mass_l2=mass, l4_integral=l4,
                            hamiltonian_potential=pot, p=p)


def tail_l4_mean(sampler, N_cut, N_max, samples, chunk=2048):
    """Monte-Carlo mean (and standard error) of ||P_{>N_cut} u||_{L4}.

    Uses the modes in (N_cut, N_max]; an empty range gives exactly zero.
    """
    if samples < 2:
        raise StatisticsError("need at least 2 samples for a standard error")
    if N_cut > N_max:
        raise ShapeError("N_cut must not exceed N_max")
    if N_max > sampler.basis.N:
        raise ShapeError("N_max exceeds basis size")
    if N_cut == N_max:
        return 0.0, 0.0
    basis = sampler.basis
    z = basis.frequencies[N_cut:N_max]
    emat = basis.modes[N_cut:N_max]
    total = 0.0
    total2 = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        g = sampler._rng.standard_normal((m, N_max - N_cut, 2)) * np.sqrt(0.5)
        coeffs = (g[..., 0] + 1j * g[..., 1]) / z
        grid = coeffs @ emat
        l4 = 2.0 * np.pi * ((np.abs(grid) ** 4) @ basis.quad.weights)
        norms = l4 ** 0.25
        total += float(norms.sum())
        total2 += float((norms ** 2).sum())
        done += m
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0)
    return mean, float(np.sqrt(var / samples))


def gaussian_exponential_moment(c3, N):
    """Closed form prod_{n<=N} E[exp(c3 g_n^2 / 2)] = exp((N/2) log(1/(1-c3))).

    Here each g_n is a real standard Gaussian (the convention of the
    diagonalized gradient-energy product).
    """
    if c3 < 0.0:
        raise DomainError("c3 must be nonnegative")
    if c3 >= 1.0:
        raise DivergentGaussianError("moment diverges for c3 >= 1")
    if N < 0:
        raise DomainError("N must be nonnegative")
    return float(np.exp(0.5 * N * np.log(1.0 / (1.0 - c3))))


def gaussian_exponential_moment_mc(c3, N, samples, seed=0):
    """Monte-Carlo companion of the closed form (real N(0,1) draws)."""
    if samples < 2:
        raise StatisticsError("need at least 2 samples")
    if c3 >= 1.0:
        raise DivergentGaussianError("moment diverges for c3 >= 1")
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0],
                                                            dtype=np.uint64)))
    total = 0.0
    total2 = 0.0
    done = 0
    while done < samples:
        m = min(1 << 16, samples - done)
        g = rng.standard_normal((m, N))
        w = np.exp(0.5 * c3 * np.sum(g * g, axis=1))
        total += float(w.sum())
        total2 += float((w * w).sum())
        done += m
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0)
    return mean, float(np.sqrt(var / samples))


def dump_sample_csv(sample, path):
    coeffs = sample.coeffs if isinstance(sample, FieldSample) else np.asarray(sample)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re_c", "im_c"])
        for i, c in enumerate(coeffs):
            writer.writerow([i + 1, repr(float(np.real(c))), repr(float(np.imag(c)))])


def load_sample_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    rows = np.atleast_2d(rows)
    return FieldSample(coeffs=rows[:, 1] + 1j * rows[:, 2])
