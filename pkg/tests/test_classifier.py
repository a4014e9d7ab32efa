import math

import numpy as np
import pytest

from rvclass import (
    ClassifierConfig,
    GridSpec,
    Kind,
    Membership,
    MRepresentation,
    build_M,
    classify_M,
    classify_M_extremes,
    classify_ORV,
    classify_RV,
    example,
    full_report,
    index_function_probe,
    orders,
    ratio_extrema,
    ratio_scaled_limit,
    theorem1_threshold,
    uct_envelope,
)
from rvclass.catalog import recommended_config
from rvclass.classifier import BracketError, Extreme, NotApplicableError, limit_label, threshold_band

IN, OUT, INCONCLUSIVE = Membership.IN, Membership.OUT, Membership.INCONCLUSIVE


def entry(name, **params):
    U, truth = example(name, params)
    return U, recommended_config(name, params)


class TestOrders:
    def test_x_over_log(self):
        U, cfg = entry("x_over_log")
        mu, nu, v = orders(U, cfg.grid)
        assert mu == pytest.approx(1, abs=0.01) and nu == pytest.approx(1, abs=0.01)
        assert v.kind is Kind.CONVERGES

    def test_power_exact(self):
        U, cfg = entry("power", rho=-3)
        mu, nu, _ = orders(U, cfg.grid)
        # exact up to the rounding of (rho * y) / y
        assert mu == pytest.approx(-3.0, abs=1e-15) and nu == pytest.approx(-3.0, abs=1e-15)

    def test_heavy_tail(self):
        U, cfg = entry("heavy_tail_step", alpha=1, beta=-2)
        mu, nu, _ = orders(U, cfg.grid)
        assert mu == pytest.approx(-1, abs=0.02) and nu == pytest.approx(-0.5, abs=0.02)

    def test_diverging_orders(self):
        U, cfg = entry("exp_growth")
        assert orders(U, cfg.grid)[:2] == (math.inf, math.inf)


class TestClassifyM:
    def test_loglog_cosine_in_with_rho_zero(self):
        U, cfg = entry("loglog_cosine", alpha=0.7, beta=0.5)
        member, rho, _ = classify_M(U, cfg.grid)
        assert member is IN and abs(rho) <= 0.01

    def test_orv_not_m_out(self):
        U, cfg = entry("orv_not_m")
        member, rho, v = classify_M(U, cfg.grid)
        assert member is OUT and rho is None
        assert v.spread >= 0.4

    def test_x_sin_out(self):
        U, cfg = entry("x_sin")
        member, _, v = classify_M(U, cfg.grid)
        assert member is OUT
        assert v.spread == pytest.approx(2, abs=0.01)

    def test_diverging_orders_are_inconclusive_here(self):
        U, cfg = entry("exp_decay")
        assert classify_M(U, cfg.grid)[0] is INCONCLUSIVE

    def test_band_function_needs_a_band_aligned_grid(self):
        # inside one band the even-band function looks convergent on a linear grid
        U, _ = entry("orv_not_m")
        member, _, _ = classify_M(U, GridSpec.linear(4e5, 1e6))
        assert member is not OUT
        assert classify_M(U, recommended_config("orv_not_m").grid)[0] is OUT


class TestExtremes:
    @pytest.mark.parametrize("name,params,expected", [
        ("exp_decay", {}, Extreme.M_INF),
        ("exp_growth", {}, Extreme.M_MINUS_INF),
        ("power", {"rho": 5}, Extreme.NEITHER),
        ("x_sin", {}, Extreme.NEITHER),
    ])
    def test_examples(self, name, params, expected):
        U, cfg = entry(name, **params)
        assert classify_M_extremes(U, cfg.grid) is expected


class TestRatioExtrema:
    def test_power_exact(self):
        U, cfg = entry("power", rho=2)
        lo, hi, v = ratio_extrema(U, 2.0, cfg.grid)
        # exact in the mathematics; l(y + s) - l(y) at y ~ 1e6 cancels about 1e-10
        assert lo == hi == pytest.approx(2 * math.log(2), abs=1e-9)

    def test_x_sin_unbounded_both_ways(self):
        U, cfg = entry("x_sin")
        lo, hi, v = ratio_extrema(U, math.e, cfg.grid)
        assert (lo, hi) == (-math.inf, math.inf)
        assert v.kind is Kind.OSCILLATES

    def test_loglog_cosine_upper_diverges(self):
        U, cfg = entry("loglog_cosine")
        _, hi, _ = ratio_extrema(U, math.e, cfg.grid)
        assert hi == math.inf

    def test_rejects_nonpositive_t(self):
        U, cfg = entry("power")
        with pytest.raises(ValueError):
            ratio_extrema(U, 0.0, cfg.grid)


class TestClassifyORV:
    def test_orv_not_m(self):
        U, cfg = entry("orv_not_m")
        member, fit, _ = classify_ORV(U, cfg.t_grid, cfg.grid)
        assert member is IN
        assert 0.98 <= fit.alpha <= 1.02 and -0.02 <= fit.beta <= 0.02 and fit.c <= 1.1

    @pytest.mark.parametrize("rho", [-2.0, 0.0, 0.5, 3.0])
    def test_power(self, rho):
        U, cfg = entry("power", rho=rho)
        member, fit, _ = classify_ORV(U, cfg.t_grid, cfg.grid)
        assert member is IN
        assert fit.alpha == pytest.approx(rho, abs=1e-9)
        assert fit.beta == pytest.approx(rho, abs=1e-9)
        assert fit.c == pytest.approx(1, abs=1e-9)

    @pytest.mark.parametrize("name", ["loglog_cosine", "x_sin", "exp_decay", "heavy_tail_step"])
    def test_out(self, name):
        U, cfg = entry(name)
        assert classify_ORV(U, cfg.t_grid, cfg.grid)[0] is OUT

    def test_t_grid_validation(self):
        U, cfg = entry("power")
        with pytest.raises(ValueError):
            classify_ORV(U, [0.5, 2.0], cfg.grid)
        with pytest.raises(ValueError):
            classify_ORV(U, [], cfg.grid)


class TestClassifyRV:
    def test_x_over_log(self):
        U, cfg = entry("x_over_log")
        member, index, sv, _ = classify_RV(U, cfg.t_grid, cfg.grid)
        assert member is IN and index == pytest.approx(1, abs=0.01) and not sv

    def test_sv_log(self):
        U, cfg = entry("sv_log")
        member, index, sv, _ = classify_RV(U, cfg.t_grid, cfg.grid)
        assert member is IN and abs(index) < 1e-3 and sv

    def test_orv_not_m_out(self):
        U, cfg = entry("orv_not_m")
        member, index, sv, trails = classify_RV(U, cfg.t_grid, cfg.grid)
        assert member is OUT and index is None and not sv
        # upper and lower extrema grow like s and stay at 0: slopes 1 and 0
        s = np.log(list(trails))
        upper = [v.limsup_est for v in trails.values()]
        lower = [v.liminf_est for v in trails.values()]
        assert np.polyfit(s, upper, 1)[0] - np.polyfit(s, lower, 1)[0] == pytest.approx(1, abs=0.02)

    def test_t_must_exceed_one(self):
        U, cfg = entry("power")
        with pytest.raises(ValueError):
            classify_RV(U, [1.0, 2.0], cfg.grid)


class TestScaledLimit:
    @pytest.mark.parametrize("rho", [-1.0, 0.0, 2.0])
    @pytest.mark.parametrize("x", [2.0, 50.0])
    def test_power(self, rho, x):
        U, cfg = entry("power", rho=rho)
        assert limit_label(ratio_scaled_limit(U, -rho - 0.1, x, cfg.s_grid)) == "zero"
        assert limit_label(ratio_scaled_limit(U, -rho + 0.1, x, cfg.s_grid)) == "infinity"

    def test_x_over_log(self):
        U, cfg = entry("x_over_log")
        x = math.e ** 2
        assert limit_label(ratio_scaled_limit(U, -2.0, x, cfg.s_grid)) == "zero"
        assert limit_label(ratio_scaled_limit(U, 0.0, x, cfg.s_grid)) == "infinity"

    @pytest.mark.parametrize("r", [0.0, 0.5, -0.5])
    def test_x_sin_oscillates(self, r):
        U, cfg = entry("x_sin")
        v = ratio_scaled_limit(U, r, math.e, cfg.s_grid)
        assert v.kind is Kind.OSCILLATES
        assert limit_label(v) == "undetermined"

    def test_x_must_be_positive(self):
        U, cfg = entry("power")
        with pytest.raises(ValueError):
            ratio_scaled_limit(U, 0.0, -1.0, cfg.s_grid)


class TestThreshold:
    def test_power(self):
        U, cfg = entry("power", rho=2)
        assert theorem1_threshold(U, 5.0, (-10, 10), cfg.s_grid) == pytest.approx(-2, abs=1e-3)

    def test_x_over_log(self):
        U, cfg = entry("x_over_log")
        assert theorem1_threshold(U, math.e ** 3, (-10, 10), cfg.s_grid) == pytest.approx(-1, abs=1e-2)

    def test_loglog_cosine(self):
        U, cfg = entry("loglog_cosine")
        tau = theorem1_threshold(U, cfg.x_probes[0], cfg.r_bracket, cfg.s_grid, band_tol=cfg.band_tol)
        assert tau == pytest.approx(0, abs=1e-2)

    def test_bracket_must_straddle(self):
        U, cfg = entry("power", rho=2)
        with pytest.raises(BracketError):
            theorem1_threshold(U, 5.0, (0.0, 10.0), cfg.s_grid)

    def test_x_sin_not_applicable(self):
        U, cfg = entry("x_sin")
        with pytest.raises(NotApplicableError):
            theorem1_threshold(U, math.e, (-10, 10), cfg.s_grid)
        r_zero, r_inf = threshold_band(U, math.e, (-10, 10), cfg.s_grid)
        assert r_zero == pytest.approx(-1, abs=0.01) and r_inf == pytest.approx(1, abs=0.01)


class TestUCT:
    @pytest.mark.parametrize("rho", [-1.0, 2.0])
    def test_power_sup_mode(self, rho):
        U, cfg = entry("power", rho=rho)
        v = uct_envelope(U, -rho - 0.5, 2.0, 8.0, cfg.s_grid, mode="sup")
        assert limit_label(v) == "zero"

    def test_x_over_log_both_modes(self):
        U, cfg = entry("x_over_log")
        c, d = math.e, math.e ** 2
        assert limit_label(uct_envelope(U, -2.0, c, d, cfg.s_grid, mode="sup")) == "zero"
        assert limit_label(uct_envelope(U, 0.0, c, d, cfg.s_grid, mode="inf")) == "infinity"

    @pytest.mark.parametrize("c,d,kwargs", [
        (8.0, 2.0, {}), (1.0, 2.0, {}), (2.0, math.inf, {}), (2.0, 3.0, {"mode": "avg"}),
        (2.0, 3.0, {"x_resolution": 1}),
    ])
    def test_argument_errors(self, c, d, kwargs):
        U, cfg = entry("power")
        with pytest.raises(ValueError):
            uct_envelope(U, 0.0, c, d, cfg.s_grid, **kwargs)


class TestIndexFunctionProbe:
    def test_constant_beta(self):
        U = build_M(MRepresentation(math.e, lambda y: 0.0, lambda y: 3.0, lambda y: 1.0, 3.0))
        _, beta = index_function_probe(U, GridSpec.linear(10.0, 1e4, points=50), 1.0)
        np.testing.assert_allclose(beta, 3.0, atol=1e-9)

    def test_x_over_log(self):
        U, _ = entry("x_over_log")
        ys, beta = index_function_probe(U, GridSpec.linear(100.0, 1e4, points=50), 1.0)
        assert beta[-1] == pytest.approx(1, abs=0.01)
        assert np.all(np.diff(beta) > 0)

    def test_orv_not_m_alternates(self):
        U, _ = entry("orv_not_m")
        ys, beta = index_function_probe(U, GridSpec(math.exp(5), math.e, "geometric", 200, 6), 1.0)
        inside = np.abs(np.log(ys) - np.round(np.log(ys))) > 0.05
        assert set(np.round(beta[inside], 12)) == {0.0, 1.0}
        bands = np.floor(np.log(ys[inside])).astype(int)
        np.testing.assert_array_equal(beta[inside], (bands % 2 == 0).astype(float))

    def test_step_must_be_positive(self):
        U, _ = entry("power")
        with pytest.raises(ValueError):
            index_function_probe(U, GridSpec.linear(1.0, 2.0), 0.0)


class TestFullReport:
    def test_power(self):
        U, cfg = entry("power", rho=2)
        r = full_report(U, cfg)
        assert r.verdicts["RV"] is IN and r.rv_index == pytest.approx(2)
        assert r.verdicts["O-RV"] is IN and r.verdicts["M"] is IN and r.rho_hat == 2
        assert r.verdicts["M_inf"] is OUT and r.verdicts["M_minus_inf"] is OUT
        assert r.tau_hat == pytest.approx(-2, abs=1e-3)

    def test_orv_not_m(self):
        U, cfg = entry("orv_not_m")
        r = full_report(U, cfg)
        assert (r.verdicts["O-RV"], r.verdicts["M"], r.verdicts["RV"]) == (IN, OUT, OUT)

    def test_loglog_cosine(self):
        U, cfg = entry("loglog_cosine")
        r = full_report(U, cfg)
        assert r.verdicts["M"] is IN and abs(r.rho_hat) < 0.02
        assert [r.verdicts[k] for k in ("O-RV", "RV", "SV")] == [OUT, OUT, OUT]

    def test_errors_are_recorded(self):
        U, _ = entry("exp_decay")
        r = full_report(U, ClassifierConfig(grid=GridSpec.linear(600.0, 698.0)))
        assert "orders" not in r.errors
        assert any(k.startswith("ratio:") for k in r.errors)
        assert r.verdicts["O-RV"] is INCONCLUSIVE or r.verdicts["O-RV"] is OUT
        assert r.verdicts["M_inf"] is IN

    def test_threshold_failure_goes_to_notes(self):
        # M member whose probe sits outside the bracket: noted, not fatal
        U, cfg = entry("power", rho=20)
        r = full_report(U, cfg)
        assert r.verdicts["M"] is IN and r.tau_hat is None
        assert any("threshold" in n for n in r.notes)

    def test_json_dict(self):
        U, cfg = entry("x_over_log")
        d = full_report(U, cfg).to_json_dict("x_over_log")
        assert list(d)[:8] == ["target", "verdicts", "rho_hat", "mu_hat", "nu_hat", "orv_fit", "tau_hat", "evidence"]
        assert d["verdicts"]["RV"] == "in"
        assert {e["criterion"] for e in d["evidence"]} >= {"orders", "ratio:2"}
