import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camcloak.dispersion import (BandParams, WaveVector, band_energy,
                                 group_velocity, isofrequency_contour,
                                 make_gaussian_packet, make_point_source,
                                 sample_dispersion_surface)
from camcloak.errors import CamcloakError
from camcloak.hamiltonian import build_hamiltonian
from camcloak.lattice import build_square_lattice

from _oracles import bloch_wave, contour_radius_scan, make_torus

P = BandParams()  # omega=0, kappa=1, d=1


class TestBandEnergy:
    def test_band_bottom(self):
        assert band_energy(WaveVector(0, 0), P) == pytest.approx(-4.0)

    def test_band_top(self):
        assert band_energy(WaveVector(math.pi, math.pi), P) == pytest.approx(4.0)

    def test_band_center(self):
        assert band_energy(WaveVector(math.pi / 2, math.pi / 2), P) == \
            pytest.approx(0.0, abs=1e-15)

    @given(kx=st.floats(-3.1, 3.1), ky=st.floats(-3.1, 3.1))
    @settings(max_examples=80)
    def test_symmetries(self, kx, ky):
        e = band_energy(WaveVector(kx, ky), P)
        assert band_energy(WaveVector(ky, kx), P) == pytest.approx(e, abs=1e-12)
        assert band_energy(WaveVector(-kx, ky), P) == pytest.approx(e, abs=1e-12)
        assert band_energy(WaveVector(kx, -ky), P) == pytest.approx(e, abs=1e-12)

    @given(kx=st.floats(-50.0, 50.0), ky=st.floats(-50.0, 50.0))
    @settings(max_examples=80)
    def test_folding_preserves_energy(self, kx, ky):
        folded = WaveVector(kx, ky)
        assert -math.pi <= folded.kx < math.pi
        assert -math.pi <= folded.ky < math.pi
        direct = -2.0 * (math.cos(kx) + math.cos(ky))
        assert band_energy(folded, P) == pytest.approx(direct, abs=1e-9)


class TestGroupVelocity:
    @pytest.mark.parametrize("k,expected", [
        ((0.0, 0.0), (0.0, 0.0)),
        ((math.pi / 2, math.pi / 2), (2.0, 2.0)),
        ((math.pi, 0.0), (0.0, 0.0)),
    ])
    def test_examples(self, k, expected):
        v = group_velocity(WaveVector(*k), P)
        assert v == pytest.approx(expected, abs=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        h = 1e-4
        for kx, ky in rng.uniform(-math.pi, math.pi, size=(1000, 2)):
            vx, vy = group_velocity(WaveVector(kx, ky), P)
            fx = (band_energy(WaveVector(kx + h, ky), P)
                  - band_energy(WaveVector(kx - h, ky), P)) / (2 * h)
            fy = (band_energy(WaveVector(kx, ky + h), P)
                  - band_energy(WaveVector(kx, ky - h), P)) / (2 * h)
            err = math.hypot(vx - fx, vy - fy)
            assert err / max(math.hypot(fx, fy), P.kappa * P.d) < 1e-6


class TestBlochOracle:
    @pytest.mark.parametrize("length", [8, 16])
    def test_plane_waves_are_eigenvectors(self, length):
        torus = make_torus(length)
        h = build_hamiltonian(torus, P)
        for m in range(length):
            for n in range(length):
                amp, (kx, ky) = bloch_wave(length, m, n)
                e = band_energy(WaveVector(kx, ky), P)
                residual = np.abs(h.matrix @ amp - e * amp).max()
                assert residual < 1e-10 * P.kappa


class TestIsofrequencyContour:
    def test_band_center_contour_is_square(self):
        for kv in isofrequency_contour(0.0, P, 32):
            assert abs(kv.kx) + abs(kv.ky) == pytest.approx(math.pi, abs=1e-9)

    def test_near_band_bottom_is_small_circle(self):
        pts = isofrequency_contour(-4.0 + 1e-6, P, 64)
        radii = np.array([math.hypot(k.kx, k.ky) for k in pts])
        assert radii == pytest.approx(1e-3, rel=0.05)
        assert radii.std() / radii.mean() < 1e-3

    def test_residuals_and_convexity(self):
        pts = isofrequency_contour(-3.5, P, 360)
        for kv in pts:
            assert abs(band_energy(kv, P) + 3.5) <= 1e-10 * P.kappa
        xy = np.array([[k.kx, k.ky] for k in pts])
        edges = np.roll(xy, -1, axis=0) - xy
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        assert np.all(cross > -1e-12)

    def test_against_dense_radial_scan(self):
        e0 = -3.5
        c = -e0 / 2.0
        pts = isofrequency_contour(e0, P, 24)
        for idx, kv in enumerate(pts):
            theta = 2 * math.pi * idx / 24
            t_ref = contour_radius_scan(c, theta)
            assert math.hypot(kv.kx, kv.ky) == pytest.approx(t_ref, abs=2e-5)

    def test_above_band_center_closes_around_corner(self):
        pts = isofrequency_contour(3.5, P, 90)
        for kv in pts:
            assert abs(band_energy(kv, P) - 3.5) <= 1e-10 * P.kappa

    def test_rejects_energy_outside_band(self):
        for e0 in (-4.0, 4.0, -7.3, 9.0):
            with pytest.raises(CamcloakError, match="band"):
                isofrequency_contour(e0, P, 16)

    def test_rejects_too_few_samples(self):
        with pytest.raises(CamcloakError, match="3"):
            isofrequency_contour(-3.5, P, 2)


class TestPointSource:
    def test_unit_norm(self):
        lat = build_square_lattice(30, 30)
        psi = make_point_source(lat, P, -3.5, (14.5, 14.5), 3.0, 36)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_peak_near_center(self):
        lat = build_square_lattice(60, 60)
        psi = make_point_source(lat, P, -3.5, (29.5, 29.5), 3.0, 72)
        peak = lat.positions[np.argmax(np.abs(psi.amplitudes))]
        assert math.hypot(peak[0] - 29.5, peak[1] - 29.5) <= 1.0

    def test_single_mode_wide_envelope_is_plane_wave(self):
        lat = build_square_lattice(12, 12)
        psi = make_point_source(lat, P, -3.5, (5.5, 5.5), 1e9, 1)
        mags = np.abs(psi.amplitudes)
        assert mags.std() / mags.mean() < 1e-9
        # the single sampled mode sits at angle 0 on the contour
        kv = isofrequency_contour(-3.5, P, 4)[0]
        rel = lat.positions - np.array([5.5, 5.5])
        expected = np.exp(1j * (rel @ np.array([kv.kx, kv.ky])))
        expected /= np.linalg.norm(expected)
        phase = psi.amplitudes[0] / expected[0]
        np.testing.assert_allclose(psi.amplitudes, expected * phase,
                                   atol=1e-9)

    def test_propagates_contour_errors(self):
        lat = build_square_lattice(5, 5)
        with pytest.raises(CamcloakError):
            make_point_source(lat, P, -9.0, (2, 2), 2.0, 16)


class TestGaussianPacket:
    def test_unit_norm_and_formula(self):
        lat = build_square_lattice(40, 40)
        k = WaveVector(math.pi / 2, 0.0)
        psi = make_gaussian_packet(lat, k, (19.5, 19.5), 4.0)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
        rel = lat.positions - np.array([19.5, 19.5])
        expected = np.exp(1j * lat.positions @ np.array([k.kx, k.ky])) \
            * np.exp(-(rel ** 2).sum(axis=1) / (2 * 16.0))
        expected /= np.linalg.norm(expected)
        np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-12)

    def test_support_check(self):
        lat = build_square_lattice(20, 20)
        with pytest.raises(CamcloakError, match="support"):
            make_gaussian_packet(lat, WaveVector(1.0, 0.0), (3.0, 9.5), 2.0)

    def test_rejects_bad_sigma(self):
        lat = build_square_lattice(20, 20)
        with pytest.raises(CamcloakError):
            make_gaussian_packet(lat, WaveVector(1.0, 0.0), (9.5, 9.5), -1.0)


class TestSurfaceSampling:
    def test_shape_and_values(self):
        rows = sample_dispersion_surface(P, 16)
        assert rows.shape == (256, 3)
        for kx, ky, e in rows[:: 37]:
            assert e == pytest.approx(-2 * (math.cos(kx) + math.cos(ky)),
                                      abs=1e-12)
