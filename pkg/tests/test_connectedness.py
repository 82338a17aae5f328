import dataclasses
import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from fearconnect.connectedness import (
    ConnectednessSummary,
    FevdTable,
    afc,
    gfevd,
    sensitivity_grid,
    static_analysis,
    summarize,
    summary_frame,
)
from fearconnect.exceptions import DegenerateVarianceError, FlavorMismatchError
from fearconnect.var_engine import VarModel, fit_var, simulate_var
from fearconnect.vol_index import Flavor
from fearconnect.vol_panel import VolPanel

BANKS = ("JPM", "BAC", "WFC", "CITI", "GS", "MS", "USB", "AXP", "PNC", "BK")

# Referenzzerlegungen für zehn Banken (Prozent, Zeile empfängt von Spalte), VAR(4), H = 12
AGGREGATE_SHARES = [
    [46.98, 2.16, 3.58, 3.26, 10.36, 9.46, 8.69, 6.63, 2.06, 6.77],
    [4.03, 56.06, 3.04, 3.28, 8.20, 7.05, 5.67, 4.99, 1.65, 5.98],
    [6.93, 1.78, 44.41, 4.61, 11.11, 6.37, 7.19, 5.63, 5.66, 6.26],
    [5.23, 2.09, 3.44, 54.67, 8.92, 7.20, 5.69, 5.44, 2.33, 4.94],
    [6.34, 2.25, 4.81, 5.54, 35.55, 18.29, 9.35, 7.36, 2.29, 8.19],
    [6.91, 2.58, 4.12, 5.11, 20.29, 34.34, 8.59, 6.40, 2.86, 8.74],
    [8.23, 2.26, 4.97, 4.34, 13.62, 9.67, 36.33, 7.67, 3.48, 9.39],
    [7.14, 2.51, 4.21, 4.45, 12.65, 11.47, 10.42, 35.71, 3.02, 8.37],
    [5.82, 1.34, 4.93, 3.11, 8.69, 7.53, 6.85, 4.22, 49.89, 7.57],
    [7.19, 2.90, 4.25, 4.21, 14.97, 14.50, 10.38, 7.77, 3.87, 29.91],
]
AGGREGATE_FROM = [53.01, 43.93, 55.58, 45.32, 64.44, 65.65, 63.66, 64.28, 50.10, 70.08]
AGGREGATE_TO = [57.86, 19.92, 37.38, 37.96, 108.85, 91.57, 72.87, 56.14, 27.25, 66.25]
AGGREGATE_NET = [4.84, -24.01, -18.19, -7.35, 44.40, 25.92, 9.21, -8.13, -22.84, -3.82]

POSITIVE_SHARES = [
    [73.69, 0.79, 1.55, 1.67, 4.11, 5.28, 5.53, 2.79, 0.73, 3.82],
    [0.90, 79.51, 1.85, 3.36, 2.28, 2.52, 0.80, 3.63, 0.90, 4.20],
    [3.04, 0.88, 72.25, 3.53, 6.20, 1.39, 3.80, 4.13, 1.01, 3.70],
    [0.72, 2.05, 2.10, 80.67, 4.04, 1.73, 1.48, 2.79, 1.88, 2.49],
    [2.50, 1.09, 4.78, 4.05, 58.31, 12.18, 5.95, 5.31, 1.15, 4.63],
    [4.05, 1.76, 2.39, 3.56, 17.76, 53.15, 4.03, 3.64, 1.88, 7.72],
    [4.72, 0.39, 4.00, 2.94, 7.15, 2.66, 63.83, 5.59, 2.53, 6.13],
    [2.70, 1.70, 3.90, 2.83, 7.81, 4.79, 5.98, 63.34, 1.95, 4.96],
    [2.61, 0.92, 2.77, 3.78, 3.92, 3.80, 4.90, 4.05, 68.42, 4.77],
    [3.67, 2.17, 3.46, 2.61, 7.71, 10.08, 6.52, 5.98, 2.90, 54.85],
]
POSITIVE_TO = [24.96, 11.81, 26.85, 28.37, 61.02, 44.46, 39.02, 37.95, 14.97, 42.45]

NEGATIVE_SHARES = [
    [73.08, 1.50, 0.54, 3.86, 5.04, 3.45, 6.28, 3.97, 0.69, 1.54],
    [0.89, 80.11, 3.92, 2.68, 2.57, 4.19, 2.79, 0.45, 0.91, 1.45],
    [1.79, 2.75, 73.53, 4.57, 5.42, 1.83, 2.08, 2.69, 2.99, 2.29],
    [2.43, 2.33, 2.82, 80.73, 2.42, 2.57, 1.71, 2.10, 1.09, 1.76],
    [1.43, 0.91, 3.40, 2.80, 71.83, 10.39, 4.13, 3.01, 0.58, 1.48],
    [2.85, 2.24, 2.25, 3.71, 15.69, 65.02, 2.90, 1.32, 0.83, 3.15],
    [6.54, 1.89, 1.69, 3.07, 6.43, 3.33, 71.05, 4.05, 0.68, 1.20],
    [3.13, 0.24, 3.20, 4.96, 8.58, 2.30, 6.58, 67.32, 1.80, 1.84],
    [2.57, 1.48, 2.75, 1.61, 4.77, 0.94, 1.32, 2.49, 80.72, 1.28],
    [1.23, 2.60, 3.79, 3.61, 4.04, 5.79, 1.47, 1.82, 1.27, 74.32],
]
NEGATIVE_TO = [22.92, 15.99, 24.37, 30.92, 55.01, 34.84, 29.29, 21.94, 10.87, 16.03]


def anchored_table(shares):
    """
    Gerundete Tabellenzeilen summieren sich nicht exakt zu 100. Die Diagonale
    bleibt fest, die Nebendiagonale wird auf 100 - Diagonale skaliert.
    """
    shares = np.asarray(shares, dtype=float)
    diagonal = np.diag(shares)
    off = shares - np.diag(diagonal)
    scaled = off * ((100.0 - diagonal) / off.sum(axis=1))[:, np.newaxis] + np.diag(diagonal)
    return FevdTable.from_shares(scaled, BANKS, H=12)


def brute_force_gfevd(Phi, Sigma, H):
    n = Phi.shape[0]
    Psi = [np.eye(n)]
    for _ in range(H):
        Psi.append(Phi @ Psi[-1])
    theta = np.zeros((n, n))
    for j in range(n):
        denominator = 0.0
        for h in range(H + 1):
            e_j = np.eye(n)[j]
            denominator += e_j @ Psi[h] @ Sigma @ Psi[h].T @ e_j
        for k in range(n):
            e_k = np.eye(n)[k]
            numerator = 0.0
            for h in range(H + 1):
                numerator += (np.eye(n)[j] @ Psi[h] @ Sigma @ e_k) ** 2
            theta[j, k] = numerator / Sigma[k, k] / denominator
    return theta / theta.sum(axis=1, keepdims=True)


def random_stable_model(seed, n=3):
    rng = np.random.default_rng(seed)
    Phi = rng.normal(size=(n, n))
    Phi *= 0.8 / np.max(np.abs(np.linalg.eigvals(Phi)))
    A = rng.normal(size=(n, n))
    return VarModel.from_coefficients(Phi, A @ A.T + 0.1 * np.eye(n))


def _panel(values, flavor=Flavor.AGGREGATE, names=None):
    names = names or tuple(f"N{i}" for i in range(values.shape[1]))
    dates = tuple(dt.date(2000, 1, 1) + dt.timedelta(days=i) for i in range(values.shape[0]))
    return VolPanel(dates, tuple(names), values, flavor)


class TestGfevd:
    def test_orthogonal_white_noise_gives_identity(self):
        table = gfevd(VarModel.from_coefficients(np.zeros((3, 3)), np.eye(3)), 12)
        assert_allclose(table.theta, np.eye(3), atol=1e-15)

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.6, 0.9])
    def test_correlated_white_noise_closed_form(self, rho):
        table = gfevd(VarModel.from_coefficients(np.zeros((2, 2)), [[1.0, rho], [rho, 1.0]]), 5)
        assert_allclose(table.theta_raw, [[1.0, rho ** 2], [rho ** 2, 1.0]], atol=1e-14)
        assert_allclose(table.theta, np.array([[1.0, rho ** 2], [rho ** 2, 1.0]]) / (1 + rho ** 2), atol=1e-14)

    def test_bivariate_fixture_matches_brute_force(self, bivariate_model):
        table = gfevd(bivariate_model, 12)
        oracle = brute_force_gfevd(bivariate_model.Phi[0], bivariate_model.Sigma, 12)
        assert_allclose(table.theta, oracle, atol=1e-10)
        assert table.names == ("A", "B")

    @pytest.mark.parametrize("seed", range(5))
    def test_random_stable_models_match_brute_force(self, seed):
        model = random_stable_model(seed, n=4)
        assert_allclose(gfevd(model, 10).theta, brute_force_gfevd(model.Phi[0], model.Sigma, 10), atol=1e-10)

    def test_rows_sum_to_one_and_total_sum_is_n(self, bivariate_model):
        theta = gfevd(bivariate_model, 12).theta
        assert_allclose(theta.sum(axis=1), 1.0, atol=1e-10)
        assert abs(theta.sum() - 2.0) < 1e-8
        assert (theta >= 0).all()

    def test_ordering_invariance(self):
        model = random_stable_model(11, n=3)
        Y = simulate_var(model, 3_000, seed=4)
        order = [2, 0, 1]
        theta = gfevd(fit_var(Y, 2, log_transform=False), 12).theta
        permuted = gfevd(fit_var(Y[:, order], 2, log_transform=False), 12).theta
        assert_allclose(permuted, theta[np.ix_(order, order)], atol=1e-8)

    def test_zero_residual_variance(self):
        model = VarModel.from_coefficients(np.zeros((2, 2)), [[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(DegenerateVarianceError) as info:
            gfevd(model, 4)
        assert info.value.details["indices"] == [0]


class TestSummarize:
    def test_identity_table(self):
        summary = summarize(FevdTable.from_shares(np.eye(3), ("a", "b", "c")))
        assert summary.total == 0.0
        assert_allclose(summary.from_, 0.0)
        assert_allclose(summary.to, 0.0)
        assert_allclose(summary.net, 0.0)

    def test_aggregate_table_replay(self):
        summary = summarize(anchored_table(AGGREGATE_SHARES))
        assert summary.total == pytest.approx(57.61, abs=0.01)
        assert_allclose(summary.from_, AGGREGATE_FROM, atol=0.02)
        assert_allclose(summary.to, AGGREGATE_TO, atol=0.1)
        assert_allclose(summary.net, AGGREGATE_NET, atol=0.1)
        assert BANKS[int(np.argmax(summary.net))] == "GS"

    def test_signed_tables_replay(self):
        pos = summarize(anchored_table(POSITIVE_SHARES), Flavor.POSITIVE)
        neg = summarize(anchored_table(NEGATIVE_SHARES), Flavor.NEGATIVE)
        assert pos.total == pytest.approx(33.19, abs=0.01)
        assert neg.total == pytest.approx(26.22, abs=0.01)
        assert_allclose(pos.to, POSITIVE_TO, atol=0.1)
        assert_allclose(neg.to, NEGATIVE_TO, atol=0.1)
        assert afc(pos, neg).afc_total == pytest.approx(6.97, abs=0.01)

    def test_pairwise_is_antisymmetric(self):
        summary = summarize(anchored_table(AGGREGATE_SHARES))
        assert_allclose(summary.pairwise, -summary.pairwise.T)
        gs, ms = BANKS.index("GS"), BANKS.index("MS")
        assert summary.pairwise[gs, ms] == pytest.approx(summary.shares[ms, gs] - summary.shares[gs, ms])

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(2, 6).map(lambda n: (n, n)),
                  elements=st.floats(0.01, 10.0)))
    def test_directional_invariants(self, shares):
        n = shares.shape[0]
        summary = summarize(FevdTable.from_shares(shares, tuple(str(i) for i in range(n))))
        assert abs(summary.net.sum()) < 1e-8
        assert summary.total == pytest.approx(summary.from_.mean(), abs=1e-8)
        assert summary.total == pytest.approx(summary.to.mean(), abs=1e-8)
        assert_allclose(summary.net, summary.to - summary.from_)
        assert abs(summary.shares.sum() / 100.0 - n) < 1e-8


class TestAfc:
    @staticmethod
    def _summary(total, net, flavor):
        net = np.asarray(net, dtype=float)
        n = net.size
        return ConnectednessSummary(
            flavor=flavor, total=total, from_=np.zeros(n), to=net, net=net,
            pairwise=np.zeros((n, n)), shares=np.eye(n) * 100, names=("a", "b", "c")[:n])

    def test_total_difference(self):
        report = afc(self._summary(33.19, [1.0, -1.0], Flavor.POSITIVE),
                     self._summary(26.22, [0.5, -0.5], Flavor.NEGATIVE))
        assert report.afc_total == pytest.approx(6.97)
        assert_allclose(report.afc_net, [0.5, -0.5])
        assert list(report.to_frame().columns) == ["net_pos", "net_neg", "afc_net"]

    def test_identical_summaries(self):
        pos = self._summary(20.0, [2.0, -2.0], Flavor.POSITIVE)
        report = afc(pos, dataclasses.replace(pos, flavor=Flavor.NEGATIVE))
        assert report.afc_total == 0.0
        assert_allclose(report.afc_net, 0.0)

    def test_swapping_flavors_negates(self):
        pos = self._summary(30.0, [3.0, -3.0], Flavor.POSITIVE)
        neg = self._summary(25.0, [1.0, -1.0], Flavor.NEGATIVE)
        forward = afc(pos, neg)
        backward = afc(dataclasses.replace(neg, flavor=Flavor.POSITIVE),
                       dataclasses.replace(pos, flavor=Flavor.NEGATIVE))
        assert backward.afc_total == pytest.approx(-forward.afc_total)
        assert_allclose(backward.afc_net, -forward.afc_net)

    def test_flavor_and_axis_mismatch(self):
        pos = self._summary(30.0, [1.0, -1.0], Flavor.POSITIVE)
        with pytest.raises(FlavorMismatchError):
            afc(pos, pos)
        other = dataclasses.replace(pos, flavor=Flavor.NEGATIVE, names=("b", "a"))
        with pytest.raises(FlavorMismatchError):
            afc(pos, other)


class TestStaticAnalysis:
    def test_static_result_and_layout(self, bivariate_model):
        values = np.exp(0.1 * simulate_var(bivariate_model, 800, seed=9))
        panel = _panel(values, Flavor.NEGATIVE, names=("A", "B"))
        result = static_analysis(panel, p=2, H=10)
        assert result.summary.flavor is Flavor.NEGATIVE
        assert result.stable
        assert 0.0 < result.summary.total < 50.0

        frame = summary_frame(result.summary)
        assert list(frame.columns) == ["A", "B", "FROM"]
        assert list(frame.index) == ["A", "B", "TO", "NET"]
        assert frame.loc["TO", "FROM"] == pytest.approx(result.summary.total)
        assert np.isnan(frame.loc["NET", "FROM"])

    def test_sensitivity_grid(self, bivariate_model):
        values = np.exp(0.1 * simulate_var(bivariate_model, 600, seed=3))
        grid = sensitivity_grid(_panel(values), lags=(1, 2), horizons=(4, 10))
        assert grid.shape == (2, 2)
        assert grid.index.name == "lags" and grid.columns.name == "horizon"
        direct = static_analysis(_panel(values), p=2, H=10).summary.total
        assert grid.loc[2, 10] == pytest.approx(direct)
