"""Tests for the residual-certification suite."""

import math

import pytest

from resalg import fock, symplectic, verify
from resalg.expr import DomainError, resolvent


@pytest.fixture(scope="module")
def ladder():
    reps = [fock.build_rep(1, n) for n in (16, 24, 32)]
    return [verify.SolverCache(r) for r in reps]


@pytest.fixture(scope="module")
def ladder_large():
    reps = [fock.build_rep(1, n) for n in (64, 128, 256)]
    return [verify.SolverCache(r) for r in reps]


# ---------------------------------------------------------------------------
# verdict logic


def test_verdict_exact_requires_every_level():
    assert verify._verdict([1e-12, 1e-13], 1e-9, exact=True)
    assert not verify._verdict([1e-12, 1e-8], 1e-9, exact=True)


def test_verdict_convergence_final_and_monotone():
    assert verify._verdict([1e-3, 1e-5, 1e-8], 1e-6, exact=False)
    # final level misses the tolerance
    assert not verify._verdict([1e-3, 1e-5, 1e-5], 1e-6, exact=False)
    # residual grows by more than the slack
    assert not verify._verdict([1e-8, 1e-3, 1e-9], 1e-6, exact=False)
    # 10% slack tolerates a mild plateau
    assert verify._verdict([1e-7, 1.05e-7, 1e-7], 1e-6, exact=False)
    # noise floor tolerates jitter at solver precision
    assert verify._verdict([1e-16, 8e-16, 3e-16], 1e-6, exact=False)
    assert not verify._verdict([float("nan")], 1e-6, exact=False)
    assert not verify._verdict([], 1e-6, exact=False)


def test_relation_check_shape_invariant():
    with pytest.raises(ValueError):
        verify.RelationCheck(
            relation="pseudo",
            params={},
            truncations=(8, 16),
            compression=4,
            residuals=(0.0,),
            tolerance=1e-9,
            verdict=True,
        )


# ---------------------------------------------------------------------------
# exact families


def test_pseudo_resolvent_exact(ladder):
    check = verify.check_pseudo_resolvent(ladder, (1.0, 0.0), 1.0, 2.0, 6)
    assert check.verdict
    assert all(r <= 1e-12 for r in check.residuals)
    assert check.truncations == (16, 24, 32)


def test_pseudo_resolvent_rejects_equal_parameters(ladder):
    with pytest.raises(ValueError):
        verify.check_pseudo_resolvent(ladder, (1.0, 0.0), 1.0, 1.0, 6)


def test_adjoint_symmetry_complex_parameter(ladder):
    check = verify.check_adjoint_symmetry(ladder, (1.0, -2.0), 1.5 + 0.5j, 6)
    assert check.verdict
    assert all(r <= 1e-12 for r in check.residuals)


def test_zero_vector_scalar(ladder):
    check = verify.check_zero_vector(ladder, -2.0, 6)
    assert check.verdict
    assert all(r <= 1e-13 for r in check.residuals)


def test_relation_iii_exact(ladder):
    for c in (1.0, -1.0, 2.5):
        check = verify.check_relation_iii(ladder, (1.0, 1.0), 1.0, c)
        assert check.verdict
        assert all(r <= 1e-10 for r in check.residuals)
    with pytest.raises(ValueError):
        verify.check_relation_iii(ladder, (1.0, 0.0), 1.0, 0.0)
    with pytest.raises(ValueError):
        verify.check_relation_iii(ladder, (1.0, 0.0), 1.0, 1.0 + 1.0j)


def test_single_rep_accepted():
    rep = fock.build_rep(1, 16)
    check = verify.check_zero_vector(rep, 1.0, 4)
    assert check.truncations == (16,)
    assert check.verdict


# ---------------------------------------------------------------------------
# convergence families


def test_relation_i_same_direction_trivial(ladder):
    check = verify.check_relation_i(ladder, (1.0, 0.0), (1.0, 0.0), 1.0, 2.0, 6)
    assert all(r <= 1e-10 for r in check.residuals)


def test_relation_i_convergence(ladder_large):
    check = verify.check_relation_i(
        ladder_large, (1.0, 0.0), (0.0, 1.0), 1.0, 1.0, 6
    )
    assert check.verdict
    r = check.residuals
    assert r[0] > r[1] > r[2]
    assert r[-1] <= 1e-6
    assert check.params["sigma"] == 1.0


def test_relation_ii_zero_direction_exact(ladder):
    check = verify.check_relation_ii(ladder, (1.0, 0.0), (0.0, 0.0), 1.0, 2.0, 6)
    assert all(r <= 1e-9 for r in check.residuals)


def test_relation_ii_same_direction_exact(ladder):
    check = verify.check_relation_ii(ladder, (1.0, 0.0), (1.0, 0.0), 1.0, 1.0, 6)
    assert all(r <= 1e-9 for r in check.residuals)


def test_relation_ii_convergence(ladder_large):
    check = verify.check_relation_ii(
        ladder_large, (1.0, 0.0), (0.0, 1.0), 1.0, 2.0, 6
    )
    assert check.verdict
    r = check.residuals
    assert r[0] > r[1] > r[2]
    assert r[-1] <= 1e-6


def test_relation_ii_rejects_cancelling_parameters(ladder):
    with pytest.raises(DomainError):
        verify.check_relation_ii(ladder, (1.0, 0.0), (0.0, 1.0), 1.0, -1.0, 6)


def test_relation_iv_parallel_trivial(ladder):
    check = verify.check_relation_iv(ladder, (1.0, 0.0), (2.0, 0.0), 1.0, 6)
    assert all(r <= 1e-10 for r in check.residuals)


def test_relation_iv_convergence(ladder_large):
    check = verify.check_relation_iv(
        ladder_large, (1.0, 0.0), (0.0, 1.0), 1.0, 6
    )
    assert check.verdict
    r = check.residuals
    assert r[0] > r[1] > r[2]
    assert r[-1] <= 1e-6


def test_relation_iv_vanishing_pairing(ladder):
    # parallel directions commute exactly, so the residual is pure noise
    check = verify.check_relation_iv(ladder, (2.0, 0.0), (1.0, 0.0), 1.0, 6)
    assert check.params["sigma"] == 0.0
    assert check.verdict


def test_sigma_override_from_explicit_space(ladder):
    # a degenerate form forces the pairing to zero even though the standard
    # one would not; parallel vectors keep the operators consistent with it
    degenerate = symplectic.SymplecticSpace(form=[[0.0, 0.0], [0.0, 0.0]])
    check = verify.check_relation_i(
        ladder, (1.0, 0.0), (2.0, 0.0), 1.0, 2.0, 6, space=degenerate
    )
    assert check.params["sigma"] == 0.0
    assert check.verdict


# ---------------------------------------------------------------------------
# almost-inner probes


def test_almost_inner_monomial_exact(ladder):
    for probe in ("Q1", "P1", "Q1*P1"):
        check = verify.check_almost_inner(ladder, (1.0, 0.0), 1.0, probe, 6)
        assert check.verdict
        assert check.tolerance == verify.EXACT_TOL
        assert all(r <= 1e-10 for r in check.residuals)


def test_almost_inner_identity_probe_trivial(ladder):
    check = verify.check_almost_inner(ladder, (1.0, 0.0), 1.0, "I", 6)
    assert all(r == 0.0 for r in check.residuals)


def test_almost_inner_expression_probe_converges(ladder_large):
    check = verify.check_almost_inner(
        ladder_large, (1.0, 0.0), 1.0, "R(1,[0,1])", 6
    )
    assert check.verdict
    assert check.tolerance == 1e-6
    r = check.residuals
    assert r[0] > r[1] > r[2]
    assert r[-1] <= 1e-6


def test_almost_inner_expr_object_probe(ladder):
    check = verify.check_almost_inner(
        ladder, (1.0, 0.0), 1.0, resolvent(1.0, (0.0, 1.0)), 6
    )
    assert check.params["probe"] == "R(1,[0,1])"


def test_almost_inner_bad_probe(ladder):
    with pytest.raises(TypeError):
        verify.check_almost_inner(ladder, (1.0, 0.0), 1.0, 42, 6)
    with pytest.raises(ValueError):
        verify.check_almost_inner(ladder, (1.0, 0.0), 1.0, "Q7", 6)


# ---------------------------------------------------------------------------
# configuration


def test_config_defaults():
    cfg = verify.Config()
    assert cfg.truncations == (64, 128, 256)
    assert cfg.compression == 6
    assert cfg.vectors == ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
    assert cfg.enabled_families() == (
        "pseudo",
        "adjoint",
        "zero_vector",
        "rel_i",
        "rel_ii",
        "rel_iii",
        "rel_iv",
    )


def test_config_probe_enables_family():
    cfg = verify.Config(probes=("Q1",))
    assert cfg.enabled_families()[-1] == "almost_inner"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"truncations": ()},
        {"truncations": (128, 64)},
        {"truncations": (64, 64)},
        {"compression": 0},
        {"compression": 65},
        {"tolerance": 0.0},
        {"lambdas": (1.0, 0.5j)},
        {"lambdas": ()},
        {"scales": (1.0, 0.0)},
        {"vectors": ((1.0, 0.0, 0.0),)},
        {"families": ("rel_v",)},
        {"families": ("almost_inner",)},
        {"modes": 0},
        {"truncations": (64, 80), "modes": 2},
        {"space": {"n": 2}},
    ],
)
def test_config_rejects(kwargs):
    with pytest.raises(verify.ConfigError):
        verify.Config(**kwargs)


def test_config_json_round_trip():
    cfg = verify.Config(
        truncations=(16, 32),
        compression=4,
        probes=("Q1",),
        lambdas=(1.0, 1.0 + 2.0j),
    )
    back = verify.Config.from_json(cfg.to_json(pretty=True))
    assert back == cfg


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(verify.ConfigError):
        verify.Config.from_dict({"truncation": [64]})
    with pytest.raises(verify.ConfigError):
        verify.Config.from_dict({"schema_version": 2})
    with pytest.raises(verify.ConfigError):
        verify.Config.from_json("not json")
    with pytest.raises(verify.ConfigError):
        verify.Config.from_json("[1,2]")


def test_config_custom_space_round_trip():
    form = symplectic.standard_form(1).tolist()
    cfg = verify.Config(space={"form": form}, truncations=(8, 16), compression=4)
    assert cfg.space_object().dim == 2


# ---------------------------------------------------------------------------
# suite


@pytest.fixture(scope="module")
def small_suite():
    cfg = verify.Config(truncations=(32, 64), compression=4, tolerance=1e-3)
    return verify.run_suite(cfg)


def test_suite_all_pass(small_suite):
    assert small_suite.all_pass
    assert small_suite.families() == (
        "pseudo",
        "adjoint",
        "zero_vector",
        "rel_i",
        "rel_ii",
        "rel_iii",
        "rel_iv",
    )
    assert small_suite.sigma_cross_max <= verify.SIGMA_CROSS_TOL


def test_suite_sequence_protocol(small_suite):
    assert len(small_suite) > 0
    assert small_suite[0].relation == "pseudo"
    assert all(isinstance(c, verify.RelationCheck) for c in small_suite)


def test_suite_report_schema(small_suite):
    report = small_suite.to_report()
    assert report["schema_version"] == 1
    assert report["all_pass"] is True
    entry = report["checks"][0]
    assert set(entry) == {
        "relation",
        "params",
        "truncations",
        "residuals",
        "tolerance",
        "verdict",
        "seed",
    }
    assert entry["verdict"] in ("pass", "fail")
    assert entry["params"]["compression"] == 4


def test_suite_captures_check_errors():
    # probe referencing a missing mode fails its check but not the suite
    cfg = verify.Config(
        truncations=(8, 12),
        compression=4,
        probes=("Q3",),
        families=("zero_vector", "almost_inner"),
    )
    result = verify.run_suite(cfg)
    assert not result.all_pass
    failed = [c for c in result if not c.verdict]
    assert failed and all(c.relation == "almost_inner" for c in failed)
    assert "error" in failed[0].params
    assert all(math.isinf(r) for r in failed[0].residuals)
    passed = [c for c in result if c.relation == "zero_vector"]
    assert passed and all(c.verdict for c in passed)


def test_suite_deterministic_report():
    cfg = verify.Config(truncations=(8, 12), compression=4)
    import json

    a = json.dumps(verify.run_suite(cfg).to_report(), sort_keys=True)
    b = json.dumps(verify.run_suite(cfg).to_report(), sort_keys=True)
    assert a == b
