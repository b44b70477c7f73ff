import numpy as np
import pytest

from discgibbs import disc_spectrum as ds, gff, ground_state as gsm, partition
from discgibbs.errors import DomainError, StatisticsError


def _sampler(basis, seed=3, stream=0):
    return gff.GaussianSampler(basis=basis, seed=seed, stream_id=stream)


def test_tiny_cutoff_rejects_everything(basis64):
    est = partition.estimate_partition(_sampler(basis64), 1e-6, 4.0, 64, 500)
    assert est.mean == 0.0 and est.accepted_fraction == 0.0
    assert not est.diverged


def test_mean_at_least_accepted_fraction(basis64):
    est = partition.estimate_partition(_sampler(basis64), 1.0, 4.0, 64, 2000)
    assert 0.0 < est.accepted_fraction <= 1.0
    assert est.mean >= est.accepted_fraction


def test_log_space_equals_naive(basis64):
    # naive-space recomputation on the identical stream
    est = partition.estimate_partition(_sampler(basis64, seed=8), 2.0, 4.0, 32, 1500)
    coeffs = _sampler(basis64, seed=8).draw_matrix(32, 1500)
    mass = np.sum(np.abs(coeffs) ** 2, axis=1)
    grid = ds.synthesize(basis64, coeffs)
    w = np.where(mass <= 4.0,
                 np.exp(2.0 * np.pi * ((np.abs(grid) ** 4) @ basis64.quad.weights) / 4.0),
                 0.0)
    assert est.mean == pytest.approx(w.mean(), rel=1e-12)
    assert est.stderr == pytest.approx(w.std() / np.sqrt(w.size), rel=1e-10)
    assert est.accepted_fraction == np.mean(mass <= 4.0)


def test_seed_reproducibility(basis64):
    a = partition.estimate_partition(_sampler(basis64, seed=5), 1.5, 3.0, 64, 1000)
    b = partition.estimate_partition(_sampler(basis64, seed=5), 1.5, 3.0, 64, 1000)
    assert a == b


def test_indicator_recheck(basis64):
    # every accepted sample satisfies the mass bound (recheck pass on the
    # identical stream)
    K = 0.6
    est = partition.estimate_partition(_sampler(basis64, seed=6), K, 4.0, 64, 3000)
    coeffs = _sampler(basis64, seed=6).draw_matrix(64, 3000)
    mass = np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=1))
    assert est.accepted_fraction == np.mean(mass <= K)
    assert 0.0 < est.accepted_fraction < 1.0


def test_monotone_in_K(basis64):
    means = []
    for K in (0.4, 0.6, 0.9, 1.5):
        est = partition.estimate_partition(_sampler(basis64, seed=9), K, 4.0, 64, 2000)
        means.append(est.mean)
    assert np.all(np.diff(means) >= 0.0)


def test_divergence_flag_with_low_ceiling(basis64):
    est = partition.estimate_partition(_sampler(basis64), 5.0, 4.0, 64, 500,
                                       log_ceiling=0.01)
    assert est.diverged
    assert est.log_max_weight > 0.01


def test_validation_errors(basis64):
    s = _sampler(basis64)
    with pytest.raises(DomainError):
        partition.estimate_partition(s, -1.0, 4.0, 64, 500)
    with pytest.raises(DomainError):
        partition.estimate_partition(s, 1.0, 1.5, 64, 500)
    with pytest.raises(StatisticsError):
        partition.estimate_partition(s, 1.0, 4.0, 64, 50)
    with pytest.raises(DomainError):
        partition.phase_sweep(s, [], [4.0], [64], 500)


def test_sweep_single_cell_matches_direct(basis64):
    s = _sampler(basis64, seed=11, stream=2)
    sweep = partition.phase_sweep(s, [1.0], [4.0], [64], 400)
    direct = partition.estimate_partition(s.spawn(2 * 1_000_003 + 1), 1.0, 4.0, 64, 400)
    assert sweep[0] == direct


def test_sweep_csv_json(tmp_path, basis64):
    s = _sampler(basis64, seed=12)
    sweep = partition.phase_sweep(s, [0.5, 1.0], [3.0], [32, 64], 300)
    assert len(sweep) == 4
    csv_path = tmp_path / "sweep.csv"
    partition.sweep_to_csv(sweep, csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].startswith("K,p,N,samples,mean,stderr")
    assert len(lines) == 5
    json_path = tmp_path / "sweep.json"
    partition.sweep_to_json(sweep, json_path)
    import json
    rows = json.loads(json_path.read_text())
    assert rows[0]["K"] == 0.5 and len(rows) == 4


def test_s_gamma_zero_field(basis64):
    margin = partition.s_gamma_margin(basis64, np.zeros(64, dtype=complex), 0.1,
                                      [1, 4, 16, 64])
    assert margin == 0.0


def test_s_gamma_scaled_soliton_positive(gs4, basis256):
    # t * bold-Q_delta with t scaled so the L2 norm matches the cutoff:
    # quartic term dominates, margin > 0 for small gamma
    q = gsm.restricted_soliton(gs4, 0.1, basis256).astype(complex)
    t = np.sqrt(gs4.mass / ds.l2_norm2(basis256, q))
    margin = partition.s_gamma_margin(basis256, t * q, 0.1, [64, 256])
    assert margin > 0.0


def test_s_gamma_random_fields_mostly_members(basis256):
    sampler = _sampler(basis256, seed=14)
    margins = [partition.s_gamma_margin(basis256, sampler.draw_matrix(256, 1)[0],
                                        0.1, [256]) for _ in range(100)]
    assert np.mean(np.array(margins) <= 0.0) >= 0.99


def test_s_gamma_domain(basis64):
    with pytest.raises(DomainError):
        partition.s_gamma_margin(basis64, np.zeros(64), 0.0, [64])
