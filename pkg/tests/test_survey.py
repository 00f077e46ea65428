import math

import numpy as np
import pytest
from scipy import stats

from promine.survey import (
    SurveyError,
    SurveyResponse,
    anova_oneway,
    correlation_matrix,
    correlation_report,
    ols_regression,
    read_survey_csv,
    spearman,
    survey_analysis,
    t_test_two_sample,
    tpb_scores,
)


def response(cid="c1", items=(3,) * 10, **kw):
    defaults = dict(years_exp=5.0, age=40.0, gender="female", adoption_rate=0.5)
    defaults.update(kw)
    return SurveyResponse(clinician_id=cid, items=tuple(items), **defaults)


class TestSpearman:
    def test_hand_example_exact(self):
        rho, p, n = spearman([1, 2, 3], [3, 1, 2])
        assert rho == -0.5
        assert n == 3

    def test_strictly_increasing_is_one(self):
        rho, p, _ = spearman([1, 5, 9, 11], [2, 3, 10, 50])
        assert rho == 1.0
        assert p == 0.0

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(5, 40))
            x = rng.integers(1, 5, n).astype(float)
            y = rng.integers(1, 5, n).astype(float)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            rho, p, _ = spearman(x, y)
            ref = stats.spearmanr(x, y)
            assert rho == pytest.approx(ref.statistic, abs=1e-12)
            assert p == pytest.approx(ref.pvalue, abs=1e-9)

    def test_independent_samples_rarely_correlated(self):
        rng = np.random.default_rng(1)
        small = 0
        for _ in range(40):
            x = rng.normal(0, 1, 1000)
            y = rng.normal(0, 1, 1000)
            rho, _, _ = spearman(x, y)
            small += abs(rho) < 0.1
        assert small >= 38

    def test_pairwise_deletion_and_minimum_n(self):
        x = [1.0, 2.0, np.nan, 4.0]
        y = [2.0, np.nan, 3.0, 8.0]
        with pytest.raises(SurveyError, match="at least 3"):
            spearman(x, y)

    def test_constant_vector_undefined(self):
        with pytest.raises(SurveyError, match="constant"):
            spearman([1, 1, 1, 1], [1, 2, 3, 4])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(2)
        x = rng.normal(0, 1, 50)
        y = rng.normal(0, 1, 50)
        rho, _, _ = spearman(x, y)
        rho2, _, _ = spearman(np.exp(x), y)
        assert rho2 == pytest.approx(rho, abs=1e-12)
        rho3, _, _ = spearman(x, np.argsort(np.argsort(y)).astype(float))
        assert rho3 == pytest.approx(rho, abs=1e-12)


class TestOls:
    def test_exact_line(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        fit = ols_regression(2 * x, x)
        assert fit.r_squared == pytest.approx(1.0)
        assert np.allclose(fit.residuals, 0.0, atol=1e-10)

    def test_hand_four_point_fit(self):
        fit = ols_regression([1, 2, 2, 3], np.array([1.0, 2.0, 3.0, 4.0]))
        assert fit.coefficients[1] == pytest.approx(0.6)
        assert fit.coefficients[0] == pytest.approx(0.5)

    def test_independent_noise_f_near_one(self):
        rng = np.random.default_rng(3)
        fs = []
        for _ in range(30):
            x = rng.normal(0, 1, 120)
            y = rng.normal(0, 1, 120)
            fs.append(ols_regression(y, x).f_statistic)
        assert 0.3 < np.median(fs) < 2.5

    def test_matches_scipy_f_p(self):
        rng = np.random.default_rng(4)
        x = rng.normal(0, 1, (60, 3))
        y = x @ np.array([0.5, -0.2, 0.0]) + rng.normal(0, 1, 60)
        fit = ols_regression(y, x)
        assert fit.p_value == pytest.approx(stats.f.sf(fit.f_statistic, *fit.df), rel=1e-9)

    def test_rank_deficiency_names_columns(self):
        x = np.column_stack([np.arange(10.0), 2 * np.arange(10.0)])
        with pytest.raises(SurveyError, match="x1"):
            ols_regression(np.arange(10.0) + 1.0, x, names=["x0", "x1"])

    def test_r2_invariant_under_affine_predictor_rescale(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, (50, 2))
        y = x[:, 0] + rng.normal(0, 0.5, 50)
        base = ols_regression(y, x).r_squared
        scaled = ols_regression(y, x * np.array([10.0, 0.2]) + 3.0).r_squared
        assert scaled == pytest.approx(base, rel=1e-12)


class TestGroupTests:
    def test_identical_groups_t_zero(self):
        t, df, p = t_test_two_sample([1, 2, 3, 4], [1, 2, 3, 4])
        assert t == 0.0 and p == pytest.approx(1.0)

    def test_welch_df_below_pooled_for_unequal_variances(self):
        rng = np.random.default_rng(6)
        a = rng.normal(0, 1, 30)
        b = rng.normal(0, 6, 30)
        b = (b - b.mean()) + a.mean()  # equal means
        t, df, p = t_test_two_sample(a, b)
        assert abs(t) < 2.5
        assert df < 58  # pooled df would be 58
        ref = stats.ttest_ind(a, b, equal_var=False)
        assert t == pytest.approx(ref.statistic, abs=1e-10)
        assert p == pytest.approx(ref.pvalue, abs=1e-9)

    def test_anova_identical_groups_f_zero(self):
        f, df, p = anova_oneway([[1, 2, 3], [1, 2, 3], [1, 2, 3]])
        assert f == 0.0 and p == pytest.approx(1.0)

    def test_anova_separated_groups_significant(self):
        rng = np.random.default_rng(7)
        groups = [rng.normal(0, 1, 30), rng.normal(0, 1, 30), rng.normal(5, 1, 30)]
        f, (df1, df2), p = anova_oneway(groups)
        assert (df1, df2) == (2, 87)
        assert p < 0.001
        ref = stats.f_oneway(*groups)
        assert f == pytest.approx(ref.statistic, rel=1e-10)

    def test_group_requirements(self):
        with pytest.raises(SurveyError):
            t_test_two_sample([1.0], [1, 2, 3])
        with pytest.raises(SurveyError):
            anova_oneway([[1, 2, 3]])


class TestTpbScores:
    def test_all_fours_with_reversed_ones(self):
        items = [4, 4, 1, 4, 4, 4, 1, 4, 4, 4]  # items 3 and 7 reversed-worded
        scores = tpb_scores([response(items=items)])["c1"]
        assert scores == {"PU": 4.0, "NB": 4.0, "CB": 4.0, "INT": 4.0}

    def test_all_ones_with_reversed_fours(self):
        items = [1, 1, 4, 1, 1, 1, 4, 1, 1, 1]
        scores = tpb_scores([response(items=items)])["c1"]
        assert scores == {"PU": 1.0, "NB": 1.0, "CB": 1.0, "INT": 1.0}

    def test_uniform_midpoint(self):
        items = [2.5] * 10
        scores = tpb_scores([response(items=items)])["c1"]
        assert all(v == 2.5 for v in scores.values())

    def test_reverse_key_disabled(self):
        items = [4, 4, 1, 4, 4, 4, 1, 4, 4, 4]
        scores = tpb_scores([response(items=items)], reverse_key=False)["c1"]
        assert scores["PU"] == pytest.approx(3.0)

    def test_missing_item_excludes_composite(self):
        items = [4, None, 1, 4, 4, 4, 1, 4, 4, 4]
        scores = tpb_scores([response(items=items)])["c1"]
        assert "PU" not in scores and scores["NB"] == 4.0

    def test_likert_range_enforced(self):
        with pytest.raises(SurveyError):
            response(items=(5,) * 10)


class TestCorrelationMatrix:
    def test_symmetric_unit_diagonal_pairwise_n(self):
        rng = np.random.default_rng(8)
        series = {
            "a": rng.normal(0, 1, 30),
            "b": rng.normal(0, 1, 30),
            "c": np.concatenate([rng.normal(0, 1, 20), [np.nan] * 10]),
        }
        m = correlation_matrix(series)
        assert np.allclose(np.diag(m.rho), 1.0)
        assert np.allclose(m.rho, m.rho.T, equal_nan=True)
        assert m.cell("a", "c")[2] == 20
        assert m.cell("a", "b")[2] == 30

    def test_report_contains_stars_for_significant_pairs(self):
        rng = np.random.default_rng(9)
        x = rng.normal(0, 1, 66)
        y = x + rng.normal(0, 0.5, 66)
        m = correlation_matrix({"x": x, "y": y, "z": rng.normal(0, 1, 66)})
        text = correlation_report(m)
        assert "**" in text


def test_survey_csv_and_analysis(tmp_path):
    path = tmp_path / "survey.csv"
    rng = np.random.default_rng(10)
    lines = ["clinician_id,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10,years_exp,age,gender,adoption_rate,bl_ors,bl_srs,final_delta_ors"]
    for i in range(40):
        items = rng.integers(1, 5, 10)
        extras = f"{rng.uniform(15, 30):.1f},{rng.uniform(25, 38):.1f},{rng.uniform(-2, 9):.1f}" if i % 2 == 0 else ",,"
        lines.append(
            f"c{i},{','.join(map(str, items))},{rng.integers(1, 30)},{rng.integers(25, 64)},"
            f"{'female' if i % 3 else 'male'},{rng.random():.2f},{extras}"
        )
    path.write_text("\n".join(lines) + "\n")
    responses = read_survey_csv(path)
    assert len(responses) == 40
    assert responses[1].bl_ors is None
    text = survey_analysis(responses)
    assert "FACTOR CORRELATIONS" in text
    assert "Intent ~ PU + NB + CB" in text
