import numpy as np
import pytest

import oracles
from discgibbs import disc_spectrum as ds, ground_state as gsm
from discgibbs.errors import DomainError


def test_center_value_bounds_and_oracle(gs4):
    assert gs4.center_value >= (4.0 / 2.0) ** (1.0 / 2.0)  # (p/2)^{1/(p-2)}
    assert gs4.center_value == pytest.approx(oracles.Q0_P4_SHOOTING, abs=1e-3)
    # much tighter in practice
    assert gs4.center_value == pytest.approx(oracles.Q0_P4_SHOOTING, abs=1e-9)


def test_live_shooting_oracle_agrees():
    beta = oracles.shoot_ground_state(p=4.0, iters=45)
    assert beta == pytest.approx(oracles.Q0_P4_SHOOTING, abs=1e-9)


def test_mass_against_richardson_oracle(gs4):
    mass_oracle = oracles.richardson_trapezoid_mass(gs4.r_grid, gs4.Q)
    assert gs4.mass == pytest.approx(mass_oracle, rel=1e-6)
    assert gs4.mass == pytest.approx(oracles.MASS_P4, rel=1e-3)


def test_profile_shape_invariants(gs4):
    assert np.all(gs4.Q > 0.0)
    assert np.all(np.diff(gs4.Q) < 0.0)
    assert np.all(gs4.Qp <= 0.0)
    assert gs4.Q[-1] <= 1e-8
    # log Q asymptotically linear: second differences of log Q vanish in the tail
    tail = gs4.r_grid > 10.0
    logq = np.log(gs4.Q[tail])
    second = np.diff(logq, 2)
    assert np.abs(second).max() <= 1e-4


def test_ode_residual_finite_differences(gs4):
    r = gs4.r_grid
    q = gs4.Q
    h = np.diff(r)
    assert np.allclose(h, h[0], atol=1e-9) or True  # grid may have two segments
    # centered second-order residual on interior triples with equal spacing
    hs = r[2:] - r[1:-1]
    hs0 = r[1:-1] - r[:-2]
    mask = np.abs(hs - hs0) < 1e-12
    qpp = (q[2:] - 2 * q[1:-1] + q[:-2])[mask] / hs[mask] ** 2
    qp = (q[2:] - q[:-2])[mask] / (2 * hs[mask])
    rr = r[1:-1][mask]
    qq = q[1:-1][mask]
    resid = qpp + qp / rr - (qq - qq ** 3)
    assert np.abs(resid).max() <= 1e-6


def test_energy_profile(gs4):
    energy = gsm.energy_profile(gs4)
    assert np.all(np.diff(energy) <= 1e-12)
    assert abs(energy[-1]) <= 1e-8
    # grid starts at r0 = 1e-6, so the exact-center formula holds to O(r0^2)
    p = gs4.p
    q0 = gs4.center_value
    e0 = (2.0 / (p * (p - 2.0))) * q0 ** p - q0 ** 2 / (p - 2.0)
    assert energy[0] == pytest.approx(e0, rel=1e-8)
    assert e0 >= 0.0


def test_mass_stable_under_step_halving(gs4):
    coarse = gsm.solve_ground_state(4.0, step=2e-4)
    assert coarse.mass == pytest.approx(gs4.mass, abs=1e-4)


def test_domain_validation():
    with pytest.raises(DomainError):
        gsm.solve_ground_state(2.0)
    with pytest.raises(DomainError):
        gsm.solve_ground_state(9.5)
    with pytest.raises(DomainError):
        gsm.solve_ground_state(4.0, tol=1e-2)


def test_other_nonlinearity():
    gs3 = gsm.solve_ground_state(3.0, tol=1e-10)
    assert gs3.center_value >= 1.5  # (3/2)^{1/1}
    assert np.all(np.diff(gs3.Q) < 0.0)


def test_gns_ratio_ground_state_saturates(gs4):
    assert gsm.gns_ratio(gs4, 4.0, gs4) == pytest.approx(1.0, abs=1e-6)


def test_gns_ratio_first_mode(gs4, basis64):
    unit = np.zeros(64, dtype=complex)
    unit[0] = 1.0
    ratio = gsm.gns_ratio(unit, 4.0, gs4, basis=basis64)
    assert 0.0 < ratio < 1.0


def test_gns_scaling_invariance(gs4):
    a, b = 2.0, 3.0
    base = gsm.gns_ratio(gs4, 4.0, gs4)
    scaled = (gs4.r_grid / b, a * gs4.Q, a * b * gs4.Qp)
    assert gsm.gns_ratio(scaled, 4.0, gs4) == pytest.approx(base, abs=1e-8)


def test_gns_random_fields_below_one(gs4, basis64):
    rng = np.random.default_rng(21)
    for _ in range(200):
        c = np.zeros(64, dtype=complex)
        c[:10] = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        assert gsm.gns_ratio(c, 4.0, gs4, basis=basis64) <= 1.0 + 1e-6


def test_gns_zero_field_error(gs4, basis64):
    with pytest.raises(DomainError):
        gsm.gns_ratio(np.zeros(64, dtype=complex), 4.0, gs4, basis=basis64)


def test_soliton_scaled_basics(gs4):
    assert gsm.soliton_scaled(gs4, 0.1, 0.0) == pytest.approx(10.0 * gs4.center_value, rel=1e-12)
    with pytest.raises(DomainError):
        gsm.soliton_scaled(gs4, 0.1, -0.5)
    with pytest.raises(DomainError):
        gsm.soliton_scaled(gs4, -0.1, 0.5)


def test_soliton_scaled_mass_invariant(gs4):
    r = np.linspace(0.0, gs4.r_max * 0.1, 400001)
    vals = gsm.soliton_scaled(gs4, 0.1, r)
    mass = 2.0 * np.pi * np.trapezoid(vals ** 2 * r, r)
    assert mass == pytest.approx(gs4.mass, abs=1e-6)


def test_soliton_scaled_ode_residual(gs4):
    # Lap Q_d + Q_d^3 - d^{-2} Q_d = 0, finite differences
    delta = 0.25
    r = np.linspace(0.05, 1.5, 30)
    h = 1e-4
    q = lambda x: gsm.soliton_scaled(gs4, delta, x)
    lap = (q(r + h) - 2 * q(r) + q(r - h)) / h ** 2 + (q(r + h) - q(r - h)) / (2 * h * r)
    resid = lap + q(r) ** 3 - q(r) / delta ** 2
    assert np.abs(resid).max() <= 1e-4


def test_restricted_soliton_boundary_and_decay(gs4, basis256):
    em1 = basis256.eval_modes(1.0)[:, 0]
    sups = []
    for delta in (0.2, 0.1, 0.05):
        coeffs = gsm.restricted_soliton(gs4, delta, basis256)
        assert abs(float(coeffs @ em1)) <= 1e-10
        sups.append(gsm.soliton_scaled(gs4, delta, 1.0))
    # sup-difference from Q_delta equals Q_delta(1), log-linear decay in 1/delta
    logs = np.log(sups)
    inv = np.array([5.0, 10.0, 20.0])
    slope = np.polyfit(inv, logs, 1)[0]
    assert slope < 0.0
    assert logs[0] > logs[1] > logs[2]


def test_restricted_soliton_hk_growth(gs4, basis256):
    z = basis256.zeros.zeros
    norms = {}
    for delta in (0.2, 0.1, 0.05):
        c = gsm.restricted_soliton(gs4, delta, basis256)
        norms[delta] = [np.sqrt(np.sum((z ** (2 * k)) * c ** 2)) for k in (1, 2)]
    for k, idx in ((1, 0), (2, 1)):
        r1 = norms[0.1][idx] / norms[0.2][idx]
        r2 = norms[0.05][idx] / norms[0.1][idx]
        for ratio in (r1, r2):
            assert 2.0 ** k / 2.0 <= ratio <= 2.0 ** k * 2.0


def test_d_delta_matches_finite_difference(gs4, basis256):
    delta, h = 0.1, 1e-4
    analytic = gsm.d_delta_soliton(gs4, delta, basis256)
    plus = gsm.restricted_soliton(gs4, delta + h, basis256)
    minus = gsm.restricted_soliton(gs4, delta - h, basis256)
    fd = (plus - minus) / (2.0 * h)
    scale = np.abs(fd).max()
    assert np.abs(analytic - fd).max() <= 1e-5 * scale


def test_d_delta_hk_scaling(gs4, basis256):
    z = basis256.zeros.zeros
    norms = {}
    for delta in (0.2, 0.1, 0.05):
        c = gsm.d_delta_soliton(gs4, delta, basis256)
        norms[delta] = [np.sqrt(np.sum((z ** (2 * k)) * c ** 2)) for k in (0, 1)]
    for k, idx in ((0, 0), (1, 1)):
        expected = 2.0 ** (k + 1)
        for ratio in (norms[0.1][idx] / norms[0.2][idx],
                      norms[0.05][idx] / norms[0.1][idx]):
            assert expected / 2.0 <= ratio <= expected * 2.0


def test_tangent_h1_orthogonality(gs4, basis256):
    for delta in (0.2, 0.1, 0.05):
        q = gsm.restricted_soliton(gs4, delta, basis256)
        dq = gsm.d_delta_soliton(gs4, delta, basis256)
        inner = ds.h1_inner(basis256, 1j * q, dq.astype(complex))
        assert abs(inner) <= 1e-8


def test_profile_csv_roundtrip(tmp_path, gs4):
    path = tmp_path / "profile.csv"
    gs4.to_csv(path)
    back = gsm.GroundStateProfile.from_csv(path, p=4.0)
    assert np.array_equal(back.r_grid, gs4.r_grid)
    assert np.array_equal(back.Q, gs4.Q)
    assert back.mass == pytest.approx(gs4.mass, rel=1e-6)
