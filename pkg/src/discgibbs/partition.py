"""Monte-Carlo estimation of truncated partition functions.

The estimator is the sample mean of
    1{ ||P_{<=N} u||_{L2} <= K } * exp( (1/p) int_D |P_{<=N} u|^p )
over independent free-field draws.  Weights are accumulated in log
space with a running maximum, so the estimate is computed without ever
forming exp of an unshifted weight; a single log-weight above the
configured ceiling flags the cell as diverged (supercritical cells show
up as sample-starved heavy tails long before any float overflows).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import disc_spectrum
from .errors import DomainError, StatisticsError


@dataclass(frozen=True)
class PartitionEstimate:
    K: float
    p: float
    N: int
    samples: int
    mean: float
    stderr: float
    accepted_fraction: float
    log_max_weight: float
    diverged: bool


def estimate_partition(sampler, K, p, N, samples, log_ceiling=700.0, chunk=4096):
    """Estimate Z_{K,p} at truncation N from ``samples`` i.i.d. draws."""
    if K <= 0.0:
        raise DomainError("mass cutoff K must be positive")
    if p < 2.0:
        raise DomainError("nonlinearity p must be >= 2")
    if samples < 100:
        raise StatisticsError("partition estimates need at least 100 samples")
    basis = sampler.basis
    k2 = K * K
    n_acc = 0
    log_max = -np.inf
    shift = -np.inf     # running max used to scale the accumulators
    s1 = 0.0            # sum exp(l - shift) over accepted samples
    s2 = 0.0            # sum exp(2(l - shift))
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        coeffs = sampler.draw_matrix(N, m)
        mass = np.sum(np.abs(coeffs) ** 2, axis=1)   # Parseval: ||P_N u||_2^2
        grid = coeffs @ basis.modes[:N]
        logw = 2.0 * np.pi * ((np.abs(grid) ** p) @ basis.quad.weights) / p
        acc = mass <= k2
        n_acc += int(acc.sum())
        if acc.any():
            lw = logw[acc]
            cm = float(lw.max())
            log_max = max(log_max, cm)
            if cm > shift:
                if np.isfinite(shift):
                    s1 *= np.exp(shift - cm)
                    s2 *= np.exp(2.0 * (shift - cm))
                shift = cm
            s1 += float(np.exp(lw - shift).sum())
            s2 += float(np.exp(2.0 * (lw - shift)).sum())
        done += m
    diverged = bool(log_max > log_ceiling)
    if n_acc == 0:
        mean, stderr = 0.0, 0.0
    else:
        m1 = s1 / samples
        m2 = s2 / samples
        with np.errstate(over="ignore"):
            mean = float(np.exp(shift) * m1)
            stderr = float(np.exp(shift) * np.sqrt(max(m2 - m1 * m1, 0.0) / samples))
    return PartitionEstimate(K=float(K), p=float(p), N=int(N),
                             samples=int(samples), mean=mean, stderr=stderr,
                             accepted_fraction=n_acc / samples,
                             log_max_weight=float(log_max), diverged=diverged)


def phase_sweep(sampler, K_grid, p_grid, N_list, samples, log_ceiling=700.0):
    """Cross-product sweep; each cell runs on its own derived stream.

    Cell streams depend only on (seed, parent stream, cell index), so
    the sweep is deterministic and cells may run in any order or in
    parallel.
    """
    if not (len(K_grid) and len(p_grid) and len(N_list)):
        raise DomainError("sweep grids must be nonempty")
    out = []
    idx = 0
    for K in K_grid:
        for p in p_grid:
            for N in N_list:
                cell = sampler.spawn(sampler.stream_id * 1_000_003 + idx + 1)
                out.append(estimate_partition(cell, K, p, N, samples,
                                              log_ceiling=log_ceiling))
                idx += 1
    return out


def s_gamma_margin(basis, coeffs, gamma, N_list):
    """max_N [ (1/4) int |P_N u|^4 - ((1-gamma)/2) int |grad P_N u|^2 ].

    Membership in S_gamma means margin <= 0 together with the mass
    cutoff ||u||_2 <= ||Q||_2 (checked by the caller).
    """
    if not (0.0 < gamma < 1.0):
        raise DomainError("gamma must lie in (0, 1)")
    coeffs = np.asarray(coeffs)
    lam = basis.eigenvalues[: coeffs.shape[-1]]
    worst = -np.inf
    for N in N_list:
        trunc = disc_spectrum.project_low(coeffs, int(N))
        quart = 0.25 * disc_spectrum.lp_integral(basis, trunc[: int(N)], 4)
        grad = float(np.sum(lam[: int(N)] * np.abs(trunc[: int(N)]) ** 2))
        worst = max(worst, quart - 0.5 * (1.0 - gamma) * grad)
    return float(worst)


_FIELDS = ["K", "p", "N", "samples", "mean", "stderr",
           "accepted_fraction", "log_max_weight", "diverged"]


def sweep_to_csv(estimates, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_FIELDS)
        for est in estimates:
            row = asdict(est)
            writer.writerow([row[k] for k in _FIELDS])


def sweep_to_json(estimates, path):
    with open(path, "w") as fh:
        json.dump([asdict(e) for e in estimates], fh, indent=2)
        fh.write("\n")
