import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import oracle, rel
from kwtopo import models
from kwtopo.complexes import build_torus_2complex, dual_twist_edges
from kwtopo.errors import AssumptionViolated, BudgetExceeded, NonpositiveBeta, UnknownCycle
from kwtopo.models import (
    BETA_STAR,
    InteractionKernel,
    c_beta,
    dual_beta_ising,
    kw_verify_2d,
    kw_verify_3d,
    match_dual_interaction,
    torus_model,
    twisted_nfg,
)
from kwtopo.nfg import partition_sum_contracted

BETAS = ["0.2", "0.4", "0.4406868", "0.8", "1.2"]


def test_dual_temperature_values():
    assert rel(dual_beta_ising(0.8), oracle("scalars", "dual_beta_0.8")) < 1e-14
    assert rel(c_beta(0.5), oracle("scalars", "c_beta_0.5")) < 1e-14
    assert abs(BETA_STAR - oracle("scalars", "beta_star_closed_form")) < 1e-15
    assert abs(dual_beta_ising(BETA_STAR) - BETA_STAR) < 1e-12


def test_beta_validation():
    with pytest.raises(NonpositiveBeta):
        dual_beta_ising(0.0)
    with pytest.raises(NonpositiveBeta):
        InteractionKernel.ising(-1.0)
    with pytest.raises(ValueError):
        dual_beta_ising(50.0)


@given(st.floats(0.01, 5.0))
def test_duality_is_an_involution(beta):
    assert math.isclose(dual_beta_ising(dual_beta_ising(beta)), beta, rel_tol=1e-9)


@given(st.floats(0.01, 5.0))
def test_fourier_match_agrees_with_closed_form(beta):
    got = match_dual_interaction(InteractionKernel.ising(beta).fourier())
    assert got is not None
    bd, scale = got
    assert math.isclose(bd, dual_beta_ising(beta), rel_tol=1e-9)
    assert math.isclose(scale**2, 2 * c_beta(beta), rel_tol=1e-9)


def test_potts_dual_temperature():
    bd, _ = models.dual_parameters(InteractionKernel.potts(3, 0.7))
    assert rel(bd, oracle("scalars", "potts3_dual_beta_0.7")) < 1e-12


def test_vector_potts_five_has_no_dual_of_either_form():
    k = InteractionKernel.vector_potts(5, 0.9).fourier()
    assert match_dual_interaction(k, "hamming") is None
    assert match_dual_interaction(k, "lee") is None
    with pytest.raises(AssumptionViolated):
        models.dual_parameters(InteractionKernel.vector_potts(5, 0.9))


def test_vector_potts_three_is_hamming():
    k = InteractionKernel.vector_potts(3, 0.6)
    assert match_dual_interaction(k.fourier(), "hamming") is not None


def test_vector_potts_four_splits_into_two_ising_copies():
    for beta in (0.1, 0.7, 2.0):
        assert models.vector_potts_q4_split(beta)


# ---- partition sums against frozen oracles


@pytest.mark.parametrize("L", [2, 3])
@pytest.mark.parametrize("beta", BETAS)
def test_spin_sum_matches_oracle(L, beta):
    m = torus_model(L, float(beta))
    assert rel(m.spin_sum(), oracle("ising2d", f"{L}/{beta}")) < 1e-12


@pytest.mark.parametrize("beta", BETAS)
def test_contraction_matches_oracle_at_l4(beta):
    n = models.ising_nfg_torus(4, float(beta))
    assert rel(partition_sum_contracted(n).real, oracle("ising2d", f"4/{beta}")) < 1e-12


@pytest.mark.parametrize("L", [2, 3])
@pytest.mark.parametrize("beta", ["0.2", "0.8", "1.2"])
def test_twisted_sums_match_antiperiodic_oracle(L, beta):
    bd = dual_beta_ising(float(beta))
    base = torus_model(L, bd)
    for name, cycles in (("", []), ("h", ["h"]), ("v", ["v"]), ("hv", ["h", "v"])):
        expect = oracle("ising2d_twisted", f"{L}/{beta}/{name}")
        assert rel(base.with_twists({c: 1 for c in cycles}).spin_sum(), expect) < 1e-11
        assert rel(partition_sum_contracted(twisted_nfg(base, cycles)).real, expect) < 1e-11


@pytest.mark.parametrize("L", [2, 3])
@pytest.mark.parametrize("beta", ["0.3", "0.5", "0.7"])
def test_potts_matches_oracle(L, beta):
    m = torus_model(L, float(beta), q=3, kind="potts")
    assert rel(m.spin_sum(), oracle("potts3_2d", f"{L}/{beta}")) < 1e-12


def test_three_torus_oracle():
    assert rel(torus_model(2, 0.5, dim=3).spin_sum(), oracle("ising3d", "2/0.5")) < 1e-12
    assert torus_model(2, 0.0, dim=3).spin_sum() == 256


def test_three_evaluations_agree():
    sums = models.partition_sums(torus_model(3, 0.6))
    assert rel(sums["spin"], sums["brute"]) < 1e-12
    assert rel(sums["spin"], sums["contract"]) < 1e-12


def test_twisted_nfg_requires_model_and_known_cycle():
    base = torus_model(2, 0.3)
    with pytest.raises(TypeError):
        twisted_nfg(base.nfg(), ["h"])
    with pytest.raises(UnknownCycle):
        twisted_nfg(base, ["d"])


def test_double_twist_cancels_for_ising():
    base = torus_model(3, 0.4)
    assert base.with_twists({"h": 2}).spin_sum() == base.spin_sum()


def test_spin_sum_budget():
    with pytest.raises(BudgetExceeded):
        torus_model(3, 0.4).spin_sum(budget=100)


# ---- duality checks


@pytest.mark.parametrize("L", [2, 3])
@pytest.mark.parametrize("beta", [0.2, BETA_STAR, 1.2])
def test_kw_identity(L, beta):
    r = kw_verify_2d(L, beta)
    assert r.rel_err <= 1e-10
    assert r.coset_rel_err <= 1e-10
    assert set(r.twisted) == {"", "h", "v", "hv"}


def test_kw_at_self_dual_point_uses_equal_parameters():
    r = kw_verify_2d(2, BETA_STAR)
    assert abs(r.beta_dual - BETA_STAR) < 1e-12
    assert abs(r.c_beta - 1) < 1e-12


def test_proof_constants_small_torus():
    r = kw_verify_2d(2, 0.8, proof=True)
    p = r.proof
    assert p["c1_exponent"] == -4
    assert rel(p["c1_measured"], 2.0**-4) < 1e-9
    assert p["c2_measured_exponent"] == p["c2_formula_exponent"]
    assert abs(p["c2_measured_mantissa"] - p["c2_formula_mantissa"]) < 1e-9
    assert rel(p["c2_formula"], 2.0**3 * c_beta(0.8) ** 4) < 1e-12


def test_potts_coset_identity():
    r = kw_verify_2d(2, 0.5, q=3, kind="potts")
    assert r.coset_rel_err <= 1e-10 and r.rel_err <= 1e-10
    assert len(r.twisted) == 9


def test_three_dimensional_cosets():
    r = kw_verify_3d(2, 0.5)
    assert r.rel_err <= 1e-9
    assert len(r.coset_sums) == 8


def test_sandwich_bounds():
    out = models.twist_ratio_bounds(3, 0.8)
    assert out["holds"]
    assert set(out["checks"]) == {"h", "v", "hv"}


def test_sweep_row_columns():
    row = models.sweep_row(kw_verify_2d(2, 0.5, cosets=False))
    assert tuple(row) == models.SWEEP_COLUMNS
    assert row["seconds"] in ("", None)


def test_edge_tables_shift_only_seam():
    base = torus_model(3, 0.7)
    t = base.with_twists({"h": 1}).edge_tables()
    plain = base.edge_tables()
    changed = np.flatnonzero((t != plain).any(axis=1))
    assert len(changed) == 3
    c = build_torus_2complex(3, 3, 2)
    assert sorted(changed.tolist()) == sorted(dual_twist_edges(c, "h"))
