import math

import numpy as np
import pytest

from irs_sense.channel import (C, ArrayConfig, PathModel, ScenarioGeometry,
                               TargetState, cascade_gain, channel_b2r,
                               channel_r2g, path_gain, steering_ula,
                               steering_upa)

RNG = np.random.default_rng(2024)


def test_steering_ula_zero_phase():
    assert np.allclose(steering_ula(4, 0.0), np.ones(4))


def test_steering_ula_half_turn():
    assert np.allclose(steering_ula(2, 1.0), [1.0, -1.0])


def test_steering_ula_quarter():
    assert np.allclose(steering_ula(3, 0.5), [1.0, 1j, -1.0])


def test_steering_ula_rejects_empty():
    with pytest.raises(ValueError):
        steering_ula(0, 0.3)


def test_steering_upa_trivial():
    assert np.allclose(steering_upa(2, 0.0, 0.0), np.ones(4))
    assert np.allclose(steering_upa(2, 1.0, 0.0), [1, 1, -1, -1])


def test_steering_upa_matches_double_loop():
    m, u, v = 4, 0.3, -0.7
    direct = np.empty(m * m, dtype=complex)
    for p in range(m):
        for q in range(m):
            direct[p * m + q] = np.exp(1j * np.pi * (p * u + q * v))
    assert np.max(np.abs(steering_upa(m, u, v) - direct)) < 1e-12


def test_steering_unit_modulus():
    for _ in range(20):
        u, v = RNG.uniform(-1, 1, 2)
        vec = steering_upa(8, u, v)
        assert np.max(np.abs(np.abs(vec) - 1.0)) < 1e-12


def test_beam_offset_identity():
    # conj(b(ua, va)) * b(u, v) == b(u - ua, v - va), 100 random draws
    m = 8
    for _ in range(100):
        u, v, ua, va = RNG.uniform(-1, 1, 4)
        lhs = steering_upa(m, ua, va).conj() * steering_upa(m, u, v)
        rhs = steering_upa(m, u - ua, v - va)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_path_gain_reference_distance():
    pm = PathModel(pl_d0=40.0)
    assert path_gain(1.0, 2.0, pm) == pytest.approx(10 ** (-2.0))


def test_path_gain_exponent_arithmetic():
    pm = PathModel(pl_d0=0.0)
    assert path_gain(4.0, 2.0, pm) == pytest.approx(0.25)


def test_path_gain_free_space_28ghz():
    pm = PathModel.free_space(28.5e9)
    # 20 log10(4 pi * 1 m * 28.5 GHz / c) = 61.54 dB -> 8.38e-4 amplitude
    assert pm.pl_d0 == pytest.approx(61.539, abs=5e-3)
    assert path_gain(1.0, pm.eps_b2r, pm) == pytest.approx(8.3766e-4, rel=1e-3)


def test_path_gain_rejects_nonpositive_distance():
    pm = PathModel(pl_d0=40.0)
    with pytest.raises(ValueError):
        path_gain(0.0, 2.0, pm)


def _scene(m=4, n_b=3):
    array = ArrayConfig(n_b=n_b, m=m)
    geom = ScenarioGeometry.from_positions([35.0, -20.0, 10.0], [0.0, 0.0, 10.0],
                                           [10.0, -3.0, 8.0])
    pm = PathModel.free_space(28.5e9)
    return array, geom, pm


def test_channel_b2r_rank_one():
    array, geom, pm = _scene()
    mat = channel_b2r(28.5e9, geom, pm, array)
    assert mat.shape == (array.m ** 2, array.n_b)
    assert np.linalg.matrix_rank(mat) == 1


def test_channel_b2r_leading_entry_is_gain():
    array, geom, pm = _scene()
    mat = channel_b2r(28.5e9, geom, pm, array)
    alpha = path_gain(geom.d_b2r, pm.eps_b2r, pm) \
        * np.exp(-2j * np.pi * 28.5e9 * geom.d_b2r / C)
    assert mat[0, 0] == pytest.approx(alpha)


def test_channel_b2r_frobenius_norm():
    array, geom, pm = _scene()
    mat = channel_b2r(28.5e9, geom, pm, array)
    a = path_gain(geom.d_b2r, pm.eps_b2r, pm)
    assert np.linalg.norm(mat) == pytest.approx(a * array.m * math.sqrt(array.n_b))


def test_channel_b2r_frequency_changes_phase_only():
    array, geom, pm = _scene()
    m1 = channel_b2r(28.5e9, geom, pm, array)
    m2 = channel_b2r(28.6e9, geom, pm, array)
    assert np.allclose(np.abs(m1), np.abs(m2))
    assert not np.allclose(m1, m2)


def test_channel_r2g_shape_and_magnitude():
    array, geom, pm = _scene()
    g = channel_r2g(28.5e9, geom, pm, array)
    a = path_gain(geom.d_r2g, pm.eps_r2g, pm)
    assert g.shape == (array.m ** 2,)
    assert np.allclose(np.abs(g), a)


def test_cascade_gain_coherent_maximum():
    array, geom, pm = _scene(m=8)
    xi = steering_upa(8, geom.u_b2r_a, geom.v_b2r_a).conj() \
        * steering_upa(8, geom.u_r2g_d, geom.v_r2g_d)
    assert abs(cascade_gain(xi, geom)) == pytest.approx(64.0)


def test_cascade_gain_all_ones_zero_angles():
    geom = ScenarioGeometry.from_direction([0.0, -20.0, 10.0], [0.0, 0.0, 10.0],
                                           0.0, 0.0, 10.0)
    # force zero incident angles by aligning the DFBS with the IRS axis
    geom2 = ScenarioGeometry(geom.q_b, geom.q_irs, geom.q_g, geom.d_b2r,
                             geom.d_r2g, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert cascade_gain(np.ones(16), geom2) == pytest.approx(16.0)


def test_cascade_gain_matches_triple_loop():
    array, geom, pm = _scene(m=4)
    xi = np.exp(1j * RNG.uniform(0, 2 * np.pi, 16))
    m = 4
    acc = 0.0 + 0.0j
    for p in range(m):
        for q in range(m):
            t = p * m + q
            acc += (np.exp(-1j * np.pi * (p * geom.u_r2g_d + q * geom.v_r2g_d))
                    * xi[t]
                    * np.exp(1j * np.pi * (p * geom.u_b2r_a + q * geom.v_b2r_a)))
    assert abs(cascade_gain(xi, geom) - acc) < 1e-12


def test_cascade_gain_rejects_non_unit_modulus():
    _, geom, _ = _scene(m=4)
    xi = np.full(16, 0.5 + 0.0j)
    with pytest.raises(ValueError):
        cascade_gain(xi, geom)


def test_cascade_gain_bounded_by_m_squared():
    _, geom, _ = _scene(m=4)
    for _ in range(10):
        xi = np.exp(1j * RNG.uniform(0, 2 * np.pi, 16))
        assert abs(cascade_gain(xi, geom)) <= 16.0 + 1e-9


def test_doppler_from_velocity():
    # 20 m/s at 28.5 GHz -> 3800 Hz
    lam = C / 28.5e9
    tgt = TargetState.draw(20.0, 1.0, lam, RNG)
    assert tgt.doppler == pytest.approx(3800.0)
    assert abs(tgt.rcs_sample) == pytest.approx(1.0)


def test_geometry_round_trip_from_direction():
    for _ in range(20):
        u, v = RNG.uniform(-0.7, 0.7, 2)
        d = RNG.uniform(2.0, 40.0)
        geom = ScenarioGeometry.from_direction([35, -20, 10], [0, 0, 10], u, v, d)
        assert geom.u_r2g_d == pytest.approx(u, abs=1e-12)
        assert geom.v_r2g_d == pytest.approx(v, abs=1e-12)
        assert geom.d_r2g == pytest.approx(d, abs=1e-9)


def test_geometry_rejects_coincident_positions():
    with pytest.raises(ValueError):
        ScenarioGeometry.from_positions([0, 0, 10], [0, 0, 10], [5, 0, 10])


def test_array_config_validation():
    with pytest.raises(ValueError):
        ArrayConfig(n_b=4, m=6)
    with pytest.raises(ValueError):
        ArrayConfig(n_b=0, m=4)
