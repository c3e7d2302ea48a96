"""Unit tests for the CHSH analysis."""
import numpy as np
import pytest

from entconv.chsh import (ChshResult, ChshSettings, analyzer_observable, chsh_s,
                          chsh_sigma_resampled, correlation_from_counts,
                          correlation_from_state)
from entconv.conversion import DetectionModel, SourceModel
from entconv.counts import CountRecord, expected_counts, simulate_counts
from entconv.states import SIGMA_X, SIGMA_Z, bell_state, ket2dm, werner_state

PHI_P = ket2dm(bell_state("phi+"))
REFERENCE_ANGLES = ChshSettings()


def make_group(counts, a=0.0, b=22.5, duration=1.0):
    """Records ordered (a,b), (a',b'), (a,b'), (a',b)."""
    angles = [(a, b), (a + 90, b + 90), (a, b + 90), (a + 90, b)]
    return [CountRecord(repr(x % 180.0), repr(y % 180.0), duration, float(n),
                        int(n), int(n))
            for (x, y), n in zip(angles, counts)]


class TestAnalyzerObservable:
    def test_zero_degrees(self):
        assert np.allclose(analyzer_observable(0.0), SIGMA_Z)

    def test_forty_five_degrees(self):
        assert np.allclose(analyzer_observable(45.0), SIGMA_X)

    def test_intermediate_angle(self):
        assert np.allclose(analyzer_observable(22.5), (SIGMA_Z + SIGMA_X) / np.sqrt(2))

    def test_unit_eigenvalues(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            w = np.linalg.eigvalsh(analyzer_observable(rng.uniform(0, 180)))
            assert np.allclose(sorted(w), [-1.0, 1.0])


class TestCorrelationFromState:
    def test_parallel_analyzers(self):
        assert correlation_from_state(PHI_P, 0.0, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_reference_angle_pair(self):
        assert correlation_from_state(PHI_P, 0.0, 22.5) == pytest.approx(
            np.cos(np.radians(45.0)), abs=1e-12)

    def test_werner_linearity(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = rng.uniform(0, 1)
            a, b = rng.uniform(0, 180, size=2)
            expect = p * np.cos(2 * np.radians(a - b))
            assert correlation_from_state(werner_state(p), a, b) == pytest.approx(
                expect, abs=1e-10)


class TestCorrelationFromCounts:
    def test_perfect_correlation(self):
        e, sigma = correlation_from_counts(make_group([100, 100, 0, 0]))
        assert e == 1.0
        assert sigma == 0.0

    def test_no_correlation(self):
        e, _ = correlation_from_counts(make_group([50, 50, 50, 50]))
        assert e == 0.0

    def test_reference_scale_counts(self):
        # counts matching phi+ at (0, 22.5): E = 242/342
        e, sigma = correlation_from_counts(make_group([146, 146, 25, 25]))
        assert e == pytest.approx(0.7076, abs=5e-5)
        assert sigma > 0

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError, match="zero total"):
            correlation_from_counts(make_group([0, 0, 0, 0]))

    def test_wrong_group_size(self):
        with pytest.raises(ValueError, match="4 records"):
            correlation_from_counts(make_group([1, 1, 1, 1])[:3])

    def test_label_settings_rejected(self):
        recs = [CountRecord("H", "V", 1.0, 1.0, 1, 1)] * 4
        with pytest.raises(ValueError, match="angle"):
            correlation_from_counts(recs)


def noiseless_chsh_records(rho, settings=REFERENCE_ANGLES, rate=15.0, duration=100.0):
    src = SourceModel(kind="werner", p=1.0, pair_rate=rate)
    pairs = [(repr(a), repr(b)) for a, b in settings.measurement_angles()]
    return expected_counts(rho, pairs, src, DetectionModel(), duration)


class TestChshS:
    def test_tsirelson_value_for_bell_state(self):
        result = chsh_s(REFERENCE_ANGLES, PHI_P)
        assert abs(result.s_value - 2 * np.sqrt(2)) < 1e-9
        assert result.s_sigma == 0.0

    def test_separable_state_below_classical_bound(self):
        hh = np.zeros((4, 4), dtype=complex)
        hh[0, 0] = 1.0
        result = chsh_s(REFERENCE_ANGLES, hh)
        assert result.s_value == pytest.approx(np.sqrt(2), abs=1e-9)

    def test_werner_scaling(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = rng.uniform(0, 1)
            result = chsh_s(REFERENCE_ANGLES, werner_state(p))
            assert abs(result.s_value - 2 * np.sqrt(2) * p) < 1e-9

    def test_counts_match_state_on_noiseless_data(self):
        for rho in (PHI_P, werner_state(0.6)):
            exact = chsh_s(REFERENCE_ANGLES, rho).s_value
            from_counts = chsh_s(REFERENCE_ANGLES, noiseless_chsh_records(rho)).s_value
            assert abs(exact - from_counts) < 1e-9

    def test_missing_record_rejected(self):
        records = noiseless_chsh_records(PHI_P)[:-1]
        with pytest.raises(ValueError, match="16 records"):
            chsh_s(REFERENCE_ANGLES, records)

    def test_tsirelson_bound_random_states_and_settings(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            angles = ChshSettings(*rng.uniform(0, 180, size=4))
            assert abs(chsh_s(angles, rho).s_value) <= 2 * np.sqrt(2) + 1e-9

    def test_separable_product_states_respect_classical_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            va = rng.normal(size=2) + 1j * rng.normal(size=2)
            vb = rng.normal(size=2) + 1j * rng.normal(size=2)
            rho = np.kron(ket2dm(va / np.linalg.norm(va)),
                          ket2dm(vb / np.linalg.norm(vb)))
            assert abs(chsh_s(REFERENCE_ANGLES, rho).s_value) <= 2.0 + 1e-9

    def test_angle_validation(self):
        with pytest.raises(ValueError):
            ChshSettings(alpha=190.0)

    def test_result_validation(self):
        with pytest.raises(ValueError):
            ChshResult(correlations=(0.5, 0.5, 0.5, 1.5), s_value=2.0, s_sigma=0.1)


class TestSimulatedStatistics:
    def _simulated_records(self, duration, seed):
        src = SourceModel(kind="werner", p=1.0, pair_rate=15.0)
        pairs = [(repr(a), repr(b)) for a, b in REFERENCE_ANGLES.measurement_angles()]
        return simulate_counts(werner_state(0.925), pairs, src, DetectionModel(),
                               duration, seed=seed)

    def test_sigma_scales_with_inverse_sqrt_duration(self):
        sig_1, sig_2 = [], []
        for seed in range(25):
            sig_1.append(chsh_s(REFERENCE_ANGLES, self._simulated_records(100.0, seed)).s_sigma)
            sig_2.append(chsh_s(REFERENCE_ANGLES, self._simulated_records(200.0, 100 + seed)).s_sigma)
        ratio = np.mean(sig_1) / np.mean(sig_2)
        assert np.sqrt(2) * 0.8 <= ratio <= np.sqrt(2) * 1.2

    def test_delta_method_agrees_with_resampling(self):
        records = self._simulated_records(100.0, seed=8)
        result = chsh_s(REFERENCE_ANGLES, records)
        sigma_mc = chsh_sigma_resampled(REFERENCE_ANGLES, records, n_samples=400, seed=9)
        assert result.s_sigma == pytest.approx(sigma_mc, rel=0.3)

    def test_value_within_tsirelson_plus_noise_band(self):
        for seed in range(30):
            result = chsh_s(REFERENCE_ANGLES, self._simulated_records(100.0, seed))
            assert abs(result.s_value) <= 2 * np.sqrt(2) + 5 * result.s_sigma
