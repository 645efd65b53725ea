import math

import pytest

from dboot.theory import exponents_from_sizes, glm_offsets, tau_min


def test_linear_kgrad_example():
    p = tau_min("linear", "kgrad", 2, 4)
    assert p.feasible and p.tau_min == 6


def test_linear_nk1grad_example():
    p = tau_min("linear", "nk1grad", 4, 1)
    assert p.feasible and p.tau_min == 2


def test_glm_kgrad_example():
    p = tau_min("glm", "kgrad", 8, 4)
    assert p.tau0 == 1 and p.nu0 == pytest.approx(6 / 7, rel=1e-15) and p.tau_min == 2


def test_glm_nk1grad_example():
    p = tau_min("glm", "nk1grad", 8, 2)
    assert p.feasible and p.tau_min == 2


@pytest.mark.parametrize("family,method,gn,gk", [
    ("linear", "kgrad", 1, 5), ("linear", "kgrad", 2, 3), ("linear", "nk1grad", 3, 1),
    ("linear", "nk1grad", 1, 9), ("glm", "kgrad", 4, 5), ("glm", "kgrad", 6, 3), ("glm", "nk1grad", 4.5, 0.5),
])
def test_infeasible_cells(family, method, gn, gk):
    p = tau_min(family, method, gn, gk)
    assert not p.feasible and p.tau_min is None


def test_nk1grad_feasible_where_kgrad_is_not():
    assert tau_min("linear", "nk1grad", 4, 1).feasible and not tau_min("linear", "kgrad", 4, 1).feasible
    assert tau_min("glm", "nk1grad", 6, 0).feasible and not tau_min("glm", "kgrad", 6, 0).feasible


def _grid(family, method):
    return {(gn, gk): tau_min(family, method, gn, gk) for gn in range(2, 11) for gk in range(0, 9)}


@pytest.mark.parametrize("family", ["linear", "glm"])
@pytest.mark.parametrize("method", ["kgrad", "nk1grad"])
def test_monotone_on_grid(family, method):
    g = _grid(family, method)
    for (gn, gk), p in g.items():
        if not p.feasible:
            continue
        up_k = g.get((gn, gk + 1))
        if up_k is not None and up_k.feasible:
            assert up_k.tau_min >= p.tau_min, (gn, gk)
        up_n = g.get((gn + 1, gk))
        if up_n is not None and up_n.feasible:
            assert up_n.tau_min <= p.tau_min, (gn, gk)


@pytest.mark.parametrize("gn", [4.25, 4.5, 5, 6, 7.5, 8, 9, 10, 16])
def test_glm_offsets_match_definition(gn):
    tau0, nu0 = glm_offsets(gn)
    r = (gn - 1) / (gn - 4)
    assert tau0 == 1 + math.floor(math.log2(r) + 1e-12)
    assert nu0 == pytest.approx(2 - 2**tau0 / r, abs=1e-12)


def test_nu0_in_unit_interval_off_boundary():
    for gn in (4.1, 4.3, 5.5, 6.5, 8, 9.5, 12):
        _, nu0 = glm_offsets(gn)
        assert 0 < nu0 <= 1


def test_nu0_boundary_flagged():
    # (gn-1)/(gn-4) = 2 at gn = 7 and 4 at gn = 5
    for gn in (5, 7):
        p = tau_min("glm", "nk1grad", gn, 2)
        assert p.nu0 == 0.0 and p.nu0_degenerate
    assert not tau_min("glm", "nk1grad", 8, 2).nu0_degenerate


def test_plan_as_dict():
    d = tau_min("linear", "kgrad", 2, 4).as_dict()
    assert d["tau_min"] == 6 and d["method"] == "kgrad" and d["feasible"] is True


def test_logistic_alias_and_errors():
    assert tau_min("logistic", "kgrad", 8, 4).tau_min == 2
    with pytest.raises(ValueError):
        tau_min("poisson", "kgrad", 8, 4)
    with pytest.raises(ValueError):
        tau_min("linear", "kgrad", -1, 4)


def test_exponents():
    assert exponents_from_sizes(9, 27, 3) == pytest.approx((2, 3))
    assert exponents_from_sizes(100, 1, 10) == (pytest.approx(2), 0.0)
    with pytest.raises(ValueError):
        exponents_from_sizes(4, 4, 1)
