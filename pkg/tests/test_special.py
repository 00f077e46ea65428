import numpy as np
import pytest
from scipy import stats

from promine.special import (
    chi2_sf,
    f_sf,
    normal_sf,
    reg_beta,
    reg_gamma_upper,
    student_t_p_two_sided,
    student_t_sf,
)


def test_reg_gamma_upper_against_scipy():
    rng = np.random.default_rng(1)
    for _ in range(200):
        a = float(rng.uniform(0.2, 50))
        x = float(rng.uniform(0, 100))
        assert reg_gamma_upper(a, x) == pytest.approx(stats.gamma.sf(x, a), abs=1e-12)


def test_reg_beta_against_scipy():
    rng = np.random.default_rng(2)
    from scipy.special import betainc

    for _ in range(200):
        a = float(rng.uniform(0.2, 40))
        b = float(rng.uniform(0.2, 40))
        x = float(rng.uniform(0, 1))
        assert reg_beta(a, b, x) == pytest.approx(float(betainc(a, b, x)), abs=1e-12)


def test_distribution_tails_against_scipy():
    assert chi2_sf(128.61, 2) == pytest.approx(stats.chi2.sf(128.61, 2), rel=1e-10)
    assert student_t_sf(2.3, 11) == pytest.approx(stats.t.sf(2.3, 11), abs=1e-12)
    assert student_t_sf(-2.3, 11) == pytest.approx(stats.t.sf(-2.3, 11), abs=1e-12)
    assert student_t_p_two_sided(1.7, 29) == pytest.approx(2 * stats.t.sf(1.7, 29), abs=1e-12)
    assert f_sf(3.4, 3, 62) == pytest.approx(stats.f.sf(3.4, 3, 62), abs=1e-12)
    assert normal_sf(1.96) == pytest.approx(stats.norm.sf(1.96), abs=1e-14)


def test_edge_cases():
    assert reg_gamma_upper(2.0, 0.0) == 1.0
    assert chi2_sf(0.0, 5) == 1.0
    assert reg_beta(1.0, 1.0, 0.0) == 0.0
    assert reg_beta(1.0, 1.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        reg_gamma_upper(-1.0, 2.0)
    with pytest.raises(ValueError):
        chi2_sf(1.0, 0)
