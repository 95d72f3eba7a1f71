"""Spatial-correlation engine tests against quadrature oracles."""

import math

import numpy as np
import pytest
from scipy.special import j0 as bessel_j0

from mimo3d import scf
from mimo3d.spectra import (
    AZIMUTH,
    ELEVATION,
    AngularSpectrum,
    LaplacianElevation,
    UniformAngle,
    UnitGain,
    Vertical3gpp,
    VonMisesAzimuth,
)
from mimo3d.validate import correlation_2d_by_quadrature, correlation_by_quadrature

DEG = np.pi / 180.0


def unit_spectra():
    azimuth = AngularSpectrum(AZIMUTH, VonMisesAzimuth(0.4, 3.0))
    elevation = AngularSpectrum(ELEVATION, LaplacianElevation(np.pi / 2, 10.0 * DEG), UnitGain())
    return azimuth, elevation


def standard_tx_spectra():
    azimuth = AngularSpectrum(AZIMUTH, VonMisesAzimuth(2.0 * np.pi / 3.0, 5.0))
    elevation = AngularSpectrum(
        ELEVATION, LaplacianElevation(np.pi / 2, 7.0 * DEG), Vertical3gpp(95.0 * DEG, 15.0 * DEG)
    )
    return azimuth, elevation


@pytest.fixture(autouse=True)
def _quiet_truncation_warnings():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scf.TruncationWarning)
        yield


class TestRho:
    def test_zero_lag_unit_gain_is_one(self):
        azimuth, elevation = unit_spectra()
        config = scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=15)
        assert scf.rho(config, 0) == pytest.approx(1.0 + 0.0j, abs=1e-12)

    def test_zero_lag_equals_mean_gain(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=15)
        oracle = correlation_by_quadrature(azimuth, elevation, 0.5, 0)
        assert scf.rho(config, 0) == pytest.approx(oracle, abs=1e-10)

    def test_adjacent_lag_vs_quadrature_oracle(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 10, azimuth, elevation, truncation=15)
        oracle = correlation_by_quadrature(azimuth, elevation, 0.5, 1)
        assert abs(scf.rho(config, 1) - oracle) <= 1e-6

    def test_conjugate_symmetry(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 8, azimuth, elevation, truncation=15)
        for lag in range(1, 8):
            assert scf.rho(config, -lag) == pytest.approx(np.conj(scf.rho(config, lag)), abs=1e-14)

    def test_gain_linearity(self):
        azimuth, elevation = standard_tx_spectra()
        base = scf.ScfConfig(0.5, 6, azimuth, elevation, truncation=15)
        scaled = scf.ScfConfig(0.5, 6, azimuth, elevation, truncation=15, gain_scale=50.12)
        for lag in range(6):
            assert scf.rho(scaled, lag) == pytest.approx(50.12 * scf.rho(base, lag), rel=1e-14)

    def test_real_output_for_symmetric_spectra(self):
        azimuth = AngularSpectrum(AZIMUTH, VonMisesAzimuth(0.0, 5.0))
        _, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 6, azimuth, elevation, truncation=15)
        for lag in range(6):
            assert abs(scf.rho(config, lag).imag) <= 1e-12

    def test_truncation_monotone_against_oracle(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=20)
        oracle = correlation_by_quadrature(azimuth, elevation, 0.5, 3)
        errors = [abs(scf.rho(config, 3, truncation=n) - oracle) for n in (5, 10, 15, 20)]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))

    def test_lag_bound_enforced(self):
        azimuth, elevation = unit_spectra()
        config = scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=10)
        with pytest.raises(ValueError):
            scf.rho(config, 4)

    def test_random_configs_vs_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            azimuth = AngularSpectrum(
                AZIMUTH, VonMisesAzimuth(rng.uniform(-np.pi, np.pi), rng.uniform(1.0, 20.0))
            )
            elevation = AngularSpectrum(
                ELEVATION,
                LaplacianElevation(rng.uniform(70, 110) * DEG, rng.uniform(3, 20) * DEG),
                Vertical3gpp(rng.uniform(90, 105) * DEG, 15.0 * DEG),
            )
            spacing = rng.uniform(0.1, 2.0)
            config = scf.ScfConfig(spacing, 2, azimuth, elevation, truncation=15)
            oracle = correlation_by_quadrature(azimuth, elevation, spacing, 1)
            assert abs(scf.rho(config, 1) - oracle) <= 1e-5


class TestRho2d:
    def test_uniform_azimuth_gives_clarke_bessel(self):
        azimuth = AngularSpectrum(AZIMUTH, UniformAngle(AZIMUTH, -np.pi, np.pi))
        for lag in range(7):
            value = scf.rho_2d(azimuth, 0.5, lag, truncation=25)
            assert value == pytest.approx(bessel_j0(np.pi * lag), abs=1e-10)
            assert value.imag == pytest.approx(0.0, abs=1e-14)

    def test_zero_lag_unit_gain(self):
        azimuth = AngularSpectrum(AZIMUTH, UniformAngle(AZIMUTH, -np.pi, np.pi))
        assert scf.rho_2d(azimuth, 0.5, 0) == pytest.approx(1.0 + 0j, abs=1e-12)

    def test_against_one_axis_quadrature(self):
        azimuth = AngularSpectrum(AZIMUTH, VonMisesAzimuth(2.0 * np.pi / 3.0, 5.0))
        for lag in (1, 2, 3):
            oracle = correlation_2d_by_quadrature(azimuth, 0.5, lag)
            assert abs(scf.rho_2d(azimuth, 0.5, lag, truncation=20) - oracle) <= 1e-8

    def test_flat_model_dominates_full_model(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 8, azimuth, elevation, truncation=15)
        for lag in range(1, 7):
            flat = abs(scf.rho_2d(azimuth, 0.5, lag, truncation=15))
            full = abs(scf.rho(config, lag))
            assert flat >= full

    def test_conjugate_symmetry(self):
        azimuth = AngularSpectrum(AZIMUTH, VonMisesAzimuth(1.0, 4.0))
        assert scf.rho_2d(azimuth, 0.6, -2) == pytest.approx(
            np.conj(scf.rho_2d(azimuth, 0.6, 2)), abs=1e-14
        )


class TestTruncationBound:
    def test_bound_at_zero_margin_is_gain_times_eta(self):
        azimuth, elevation = unit_spectra()
        # beta*lag = pi -> ceil(e*pi/2) = 5; order 5 leaves zero margin
        config = scf.ScfConfig(0.5, 2, azimuth, elevation, truncation=5, gain_scale=2.0)
        assert scf.truncation_bound(config, 1) == pytest.approx(2.0 * scf.TRUNCATION_ETA, rel=1e-12)

    def test_bound_evaluates_to_half_percent_at_reference_point(self):
        azimuth, elevation = standard_tx_spectra()
        gain = 10.0 ** 1.7
        config = scf.ScfConfig(0.5, 2, azimuth, elevation, truncation=14, gain_scale=gain)
        bound = scf.truncation_bound(config, 1)
        assert 0.003 <= bound <= 0.007

    def test_measured_error_below_bound(self):
        azimuth, elevation = standard_tx_spectra()
        gain = 10.0 ** 1.7
        config = scf.ScfConfig(0.5, 2, azimuth, elevation, truncation=14, gain_scale=gain)
        measured = abs(scf.rho(config, 1) - scf.rho(config, 1, truncation=30))
        assert measured <= scf.truncation_bound(config, 1)

    def test_bound_refuses_low_orders(self):
        azimuth, elevation = unit_spectra()
        config = scf.ScfConfig(2.0, 4, azimuth, elevation, truncation=5)
        with pytest.raises(scf.TruncationBoundError):
            scf.truncation_bound(config, 3)

    def test_required_truncation_meets_tolerance(self):
        for beta_lag in (np.pi, 4 * np.pi):
            for tol in (1e-4, 1e-8):
                order = scf.required_truncation(beta_lag, tol)
                delta = order - math.ceil(math.e * beta_lag / 2.0)
                assert scf.TRUNCATION_ETA * math.exp(-delta) <= tol

    def test_required_truncation_caps_at_degree_limit(self):
        assert scf.required_truncation(1e4, 1e-8) == scf.MAX_TRUNCATION


class TestScfConfig:
    def test_validation(self):
        azimuth, elevation = unit_spectra()
        with pytest.raises(ValueError):
            scf.ScfConfig(-0.5, 4, azimuth, elevation)
        with pytest.raises(ValueError):
            scf.ScfConfig(0.5, 0, azimuth, elevation)
        with pytest.raises(ValueError):
            scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=0)
        with pytest.raises(ValueError):
            scf.ScfConfig(0.5, 4, elevation, azimuth)

    def test_warns_outside_certified_regime(self):
        import warnings as _warnings

        azimuth, elevation = unit_spectra()
        with pytest.warns(scf.TruncationWarning):
            with _warnings.catch_warnings():
                _warnings.simplefilter("always")
                scf.ScfConfig(0.5, 20, azimuth, elevation, truncation=15)

    def test_beta(self):
        azimuth, elevation = unit_spectra()
        config = scf.ScfConfig(0.7, 2, azimuth, elevation)
        assert config.beta == pytest.approx(2.0 * np.pi * 0.7, rel=1e-15)


class TestCorrelationMatrix:
    def test_single_port(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 1, azimuth, elevation, truncation=15)
        matrix = scf.correlation_matrix(config)
        assert matrix.order == 1
        assert matrix.matrix()[0, 0] == pytest.approx(scf.rho(config, 0).real, abs=1e-12)

    def test_uniform_flat_matrix_is_clarke_toeplitz(self):
        azimuth = AngularSpectrum(AZIMUTH, UniformAngle(AZIMUTH, -np.pi, np.pi))
        matrix = scf.correlation_matrix_2d(azimuth, 0.5, 4, truncation=25)
        dense = matrix.matrix()
        for i in range(4):
            for j in range(4):
                assert dense[i, j] == pytest.approx(bessel_j0(np.pi * abs(i - j)), abs=1e-9)
        assert matrix.eigenvalues()[0] >= -1e-9

    def test_toeplitz_hermitian_structure(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 6, azimuth, elevation, truncation=15)
        matrix = scf.correlation_matrix(config)
        dense = matrix.matrix()
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-12)
        for lag in range(1, 6):
            expected = scf.rho(config, lag)
            for i in range(lag, 6):
                assert dense[i, i - lag] == pytest.approx(expected, abs=1e-9)

    def test_psd_and_magnitude_invariants(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 10, azimuth, elevation, truncation=15)
        matrix = scf.correlation_matrix(config)
        first = matrix.first_row
        assert first[0].imag == 0.0 and first[0].real > 0
        assert np.all(np.abs(first) <= first[0].real * (1 + 1e-9))
        assert matrix.eigenvalues()[0] >= -1e-9 * first[0].real

    def test_indefinite_input_rejected(self):
        with pytest.raises(scf.IndefiniteCorrelationError):
            scf.CorrelationMatrix(np.array([1.0, 0.9, -0.9]))

    def test_violating_magnitudes_rejected(self):
        with pytest.raises(ValueError):
            scf.CorrelationMatrix(np.array([1.0, 1.2]))
        with pytest.raises(ValueError):
            scf.CorrelationMatrix(np.array([1.0 + 0.1j, 0.2]))

    def test_auto_truncation_close_to_default_when_converged(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 4, azimuth, elevation, truncation=15)
        base = scf.correlation_matrix(config)
        auto = scf.correlation_matrix(config, auto_truncation=True)
        np.testing.assert_allclose(base.first_row, auto.first_row, atol=1e-8)

    def test_sqrt_reconstructs(self):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 6, azimuth, elevation, truncation=15)
        matrix = scf.correlation_matrix(config)
        root = matrix.sqrt()
        np.testing.assert_allclose(root @ root, matrix.matrix(), atol=1e-10)

    def test_csv_export(self, tmp_path):
        azimuth, elevation = standard_tx_spectra()
        config = scf.ScfConfig(0.5, 3, azimuth, elevation, truncation=15)
        matrix = scf.correlation_matrix(config)
        path = tmp_path / "matrix.csv"
        matrix.to_csv(path)
        rows = [line for line in path.read_text().splitlines() if not line.startswith("#")]
        parsed = np.array([[float(cell) for cell in row.split(",")] for row in rows])
        rebuilt = parsed[:, 0::2] + 1j * parsed[:, 1::2]
        np.testing.assert_allclose(rebuilt, matrix.matrix(), atol=1e-15)
