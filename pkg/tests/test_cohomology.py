"""Tests for the gauge-correction machinery."""

import json

import numpy as np
import pytest

from resalg import cohomology as coh
from resalg import fock


@pytest.fixture(scope="module")
def rep():
    return fock.build_rep(1, 16)


@pytest.fixture(scope="module")
def random_setup(rep):
    gauge = coh.random_gauge(2, 3, seed=5)
    xi = coh.build_cocycle(rep, gauge)
    gamma = coh.solve_coboundary(xi)
    return gauge, xi, gamma


def closed_form_xi(gauge, f, g):
    total = tuple(a + b for a, b in zip(f, g))
    return gauge.values[f] + gauge.values[g] - gauge.values[total]


# ---------------------------------------------------------------------------
# gauges


def test_lattice_points_count():
    assert len(coh.lattice_points(2, 3)) == 49
    assert len(coh.lattice_points(1, 2)) == 5


def test_gauge_constructors():
    zero = coh.zero_gauge(2, 2)
    assert set(zero.values.values()) == {0.0}
    quad = coh.quadratic_gauge(2, 2)
    assert quad.value((1, 2)) == 5.0
    assert quad.value((0, 0)) == 0.0
    rand = coh.random_gauge(2, 2, seed=1)
    assert rand.value((0, 0)) == 0.0
    assert rand.value((1, 1)) != 0.0
    # same seed reproduces, different seed does not
    assert coh.random_gauge(2, 2, seed=1).values == rand.values
    assert coh.random_gauge(2, 2, seed=2).values != rand.values


def test_gauge_validation():
    with pytest.raises(ValueError):
        coh.GaugeFunction(2, 1, {(0, 0): 0.0, (2, 0): 1.0})  # out of box
    with pytest.raises(ValueError):
        coh.GaugeFunction(2, 1, {(0, 0): 0.5})  # origin must vanish
    with pytest.raises(ValueError):
        coh.GaugeFunction(2, 1, {(1, 0): 1.0})  # (-1,0) missing
    gauge = coh.GaugeFunction(2, 1, {(1, 0): 1.0, (-1, 0): 2.0})
    assert gauge.value((0, 0)) == 0.0  # origin inserted automatically
    with pytest.raises(KeyError):
        gauge.value((0.5, 0.0))


def test_gauge_json_round_trip():
    gauge = coh.random_gauge(2, 2, seed=3)
    text = coh.gauge_to_json(gauge, pretty=True)
    back = coh.gauge_from_json(text)
    assert back.values == gauge.values
    assert back.dim == 2 and back.box == 2
    with pytest.raises(ValueError):
        coh.gauge_from_json("[]")
    with pytest.raises(ValueError):
        coh.gauge_from_json('[{"f": [1, 0], "c": 1.0}, {"f": [1], "c": 0.0}]')


# ---------------------------------------------------------------------------
# cocycle extraction


def test_extract_xi_zero_gauge(rep):
    assert coh.extract_xi(rep, coh.zero_gauge(2, 3), (1, 0), (0, 1)) == 0.0


def test_extract_xi_quadratic_oracle(rep):
    # c(f) = |f|^2 gives xi(e1,e1) = 1 + 1 - 4
    gauge = coh.quadratic_gauge(2, 3)
    assert abs(coh.extract_xi(rep, gauge, (1, 0), (1, 0)) - (-2.0)) < 1e-12


def test_extract_xi_matches_closed_form(rep):
    for seed in range(4):
        gauge = coh.random_gauge(2, 3, seed=seed)
        for f, g in [((1, 0), (0, 1)), ((1, -2), (-1, 2)), ((2, 1), (1, 2))]:
            got = coh.extract_xi(rep, gauge, f, g)
            assert abs(got - closed_form_xi(gauge, f, g)) < 1e-10


def test_build_cocycle_closed_form_and_symmetry(rep, random_setup):
    gauge, xi, _ = random_setup
    assert xi.value((1, 0), (0, 1)) == xi.value((0, 1), (1, 0))
    worst = max(
        abs(v - closed_form_xi(gauge, f, g)) for (f, g), v in xi.values.items()
    )
    assert worst < 1e-10
    # only pairs with the sum inside the box are tabulated
    assert ((3, 0), (1, 0)) not in xi.values


def test_verify_cocycle_accepts_extracted(random_setup):
    _, xi, _ = random_setup
    ok, defect = coh.verify_cocycle(xi)
    assert ok and defect <= 1e-10


def test_verify_cocycle_detects_corruption(random_setup):
    _, xi, _ = random_setup
    bad = dict(xi.values)
    bad[((1, 1), (1, 0))] += 0.5
    bad[((1, 0), (1, 1))] += 0.5
    ok, defect = coh.verify_cocycle(coh.Cocycle(dim=2, box=3, values=bad))
    assert not ok and defect > 0.1


def test_zero_cocycle_gives_zero_potential(rep):
    xi = coh.build_cocycle(rep, coh.zero_gauge(2, 2))
    gamma = coh.solve_coboundary(xi)
    assert set(gamma.values.values()) == {0.0}


# ---------------------------------------------------------------------------
# coboundary solving


def test_coboundary_reproduces_cocycle(random_setup):
    _, xi, gamma = random_setup
    assert coh.coboundary_defect(xi, gamma) <= 1e-9
    assert gamma.sweep_disagreement <= 1e-9


def test_coboundary_normalization(random_setup):
    _, _, gamma = random_setup
    assert gamma.value((0, 0)) == 0.0
    assert gamma.value((1, 0)) == 0.0
    assert gamma.value((0, 1)) == 0.0


def test_negative_basis_value_not_forced(rep):
    # gamma at -e is pinned by the pair table, not by a convention
    gauge = coh.quadratic_gauge(2, 3)
    xi = coh.build_cocycle(rep, gauge)
    gamma = coh.solve_coboundary(xi)
    expected = closed_form_xi(gauge, (-1, 0), (1, 0))
    assert abs(gamma.value((-1, 0)) - expected) < 1e-10
    assert gamma.value((-1, 0)) != 0.0


def test_character_is_additive(rep):
    for seed in (0, 7):
        gauge = coh.random_gauge(2, 3, seed=seed)
        gamma = coh.solve_coboundary(coh.build_cocycle(rep, gauge))
        assert coh.character_defect(gauge, gamma) <= 1e-9


def test_path_dependence_detection(random_setup):
    _, xi, _ = random_setup
    bad = dict(xi.values)
    bad[((1, 1), (1, 0))] += 0.5
    bad[((1, 0), (1, 1))] += 0.5
    with pytest.raises(coh.PathDependenceError):
        coh.solve_coboundary(coh.Cocycle(dim=2, box=3, values=bad))


# ---------------------------------------------------------------------------
# shifted families


def test_family_shift_lookup(rep, random_setup):
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    chi = gauge.values[(2, -1)] - gamma.values[(2, -1)]
    assert fam.shift((2, -1)) == chi
    # ray fallback is linear in the unit value
    unit = fam.shift((1, 0))
    assert abs(fam.shift((0.5, 0.0)) - 0.5 * unit) < 1e-12
    with pytest.raises(KeyError):
        fam.shift((0.5, 0.5))  # not on a basis ray, not on the lattice


def test_family_generator_and_resolvent(rep):
    gauge = coh.quadratic_gauge(2, 3)
    fam = coh.family_from_gauge(rep, gauge)
    f = (1, 1)
    gen = fam.generator(f)
    assert np.allclose(gen, fock.generator(rep, f) + 2.0 * np.eye(rep.dim))
    r = fam.resolvent(1.0, f)
    lhs = (1j * np.eye(rep.dim) + gen) @ r
    assert np.allclose(lhs, np.eye(rep.dim), atol=1e-11)


def test_family_dimension_mismatch(rep):
    with pytest.raises(ValueError):
        coh.family_from_gauge(rep, coh.random_gauge(4, 2, seed=0))


# ---------------------------------------------------------------------------
# homogeneity


def test_zeta_zero_for_corrected_family(rep, random_setup):
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    for axis in (0, 1):
        table = coh.extract_zeta(fam, axis)
        assert max(abs(v) for v in table.values()) <= 1e-10


def test_zeta_grid_must_contain_zero_and_one(rep, random_setup):
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    with pytest.raises(ValueError):
        coh.extract_zeta(fam, 0, (0.0, 2.0))
    with pytest.raises(ValueError):
        coh.extract_zeta(fam, 0, (1.0, 2.0))


def test_zeta_injection_round_trip(rep, random_setup):
    # additive perturbation on an exotic grid is recovered exactly
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    s2 = float(np.sqrt(2.0))
    grid = (0.0, 1.0, s2, 1.0 + s2)
    injected = {s2: 0.3, 1.0 + s2: 0.3}
    table = {c: fam.shift((c, 0.0)) + injected.get(c, 0.0) for c in grid}
    fam2 = fam.with_ray_values(0, table)
    recovered = coh.extract_zeta(fam2, 0, grid)
    assert abs(recovered[coh._ray_key(s2)] - 0.3) < 1e-10
    assert abs(recovered[coh._ray_key(1.0 + s2)] - 0.3) < 1e-10
    assert abs(recovered[coh._ray_key(1.0)]) < 1e-12


def test_zeta_detects_uncorrected_family(rep, random_setup):
    # before correction the integer samples are not additive
    gauge, _, _ = random_setup
    raw = coh.family_from_gauge(rep, gauge)
    with pytest.raises(coh.AdditivityError):
        coh.extract_zeta(raw, 0, (0.0, 1.0, 2.0))


def test_zeta_detects_nonadditive_injection(rep, random_setup):
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    fam2 = fam.with_ray_values(0, {0.5: fam.shift((0.5, 0.0)) + 0.3})
    with pytest.raises(coh.AdditivityError):
        coh.extract_zeta(fam2, 0, (0.0, 0.5, 1.0))


def test_theta_assembly(rep, random_setup):
    gauge, _, gamma = random_setup
    fam = coh.corrected_family(rep, gauge, gamma)
    data = coh.extract_theta(fam, box=3)
    # integer coordinates are always covered, and the corrected family is
    # homogeneous already, so the assembled correction vanishes
    assert data.theta((3, -2)) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(KeyError):
        data.zeta_value(0, 0.25)


# ---------------------------------------------------------------------------
# improvement


def test_improve_zero_gauge_is_identity(rep):
    gauge = coh.zero_gauge(2, 2)
    xi = coh.build_cocycle(rep, gauge)
    gamma = coh.solve_coboundary(xi)
    improved = coh.improve_family(rep, gauge, gamma)
    f = (1, 1)
    assert np.allclose(improved.generator(f), fock.generator(rep, f), atol=1e-14)


def test_improve_quadratic_gauge(rep):
    gauge = coh.quadratic_gauge(2, 3)
    gamma = coh.solve_coboundary(coh.build_cocycle(rep, gauge))
    improved = coh.improve_family(rep, gauge, gamma)
    # exact additivity at matrix level
    for f, g in [((1, 0), (0, 1)), ((1, 1), (1, -1)), ((2, 0), (-1, 1))]:
        total = tuple(a + b for a, b in zip(f, g))
        defect = np.linalg.norm(
            improved.generator(f) + improved.generator(g) - improved.generator(total),
            2,
        )
        assert defect <= 1e-10
    # exact homogeneity along rays
    for c in (-1.0, 2.0, 3.0):
        defect = np.linalg.norm(
            improved.generator((c, 0.0)) - c * improved.generator((1, 0)), 2
        )
        assert defect <= 1e-10


def test_improve_rejects_wrong_potential(rep):
    gauge = coh.quadratic_gauge(2, 2)
    bad = coh.Coboundary(
        dim=2, box=2, values={p: 0.0 for p in coh.lattice_points(2, 2)}
    )
    with pytest.raises(coh.ImprovementError):
        coh.improve_family(rep, gauge, bad)


def test_improved_resolvents_keep_difference_identity(rep, random_setup):
    gauge, _, gamma = random_setup
    improved = coh.improve_family(rep, gauge, gamma)
    r1 = improved.resolvent(1.0, (1, 0))
    r2 = improved.resolvent(2.0, (1, 0))
    assert np.linalg.norm(r1 - r2 - 1j * (r1 @ r2), 2) <= 1e-10


# ---------------------------------------------------------------------------
# shift recovery


def test_recover_shift_identical_families(rep):
    r = fock.resolvent_matrix(rep, 1.0, (1.0, 0.0))
    assert abs(coh.recover_shift(rep, r, r, 1.0)) < 1e-12


def test_recover_shift_injected(rep):
    ra = fock.resolvent_matrix(rep, 1.0, (1.0, 0.0))
    rb = fock.ResolventSolver(rep, 1.0 - 0.7j, (1.0, 0.0)).matrix()
    got = coh.recover_shift(rep, ra, rb, 1.0)
    assert abs(got - 0.7) < 1e-10


def test_recover_shift_consistent_descriptions(rep):
    # shifting the generator and continuing the spectral parameter agree
    gen = fock.generator(rep, (1.0, 0.0))
    eye = np.eye(rep.dim)
    direct = np.linalg.solve((1j * 1.0 + 0.7) * eye + gen, eye)
    continued = fock.ResolventSolver(rep, 1.0 - 0.7j, (1.0, 0.0)).matrix()
    assert np.allclose(direct, continued, atol=1e-12)


def test_recover_shift_rejects_different_directions(rep):
    ra = fock.resolvent_matrix(rep, 1.0, (1.0, 0.0))
    rb = fock.resolvent_matrix(rep, 1.0, (0.0, 1.0))
    with pytest.raises(coh.NotScalarError):
        coh.recover_shift(rep, ra, rb, 1.0)


def test_recover_shift_rejects_imaginary_offset(rep):
    ra = fock.resolvent_matrix(rep, 1.0, (1.0, 0.0))
    rb = fock.resolvent_matrix(rep, 2.0, (1.0, 0.0))
    with pytest.raises(coh.NotScalarError):
        coh.recover_shift(rep, ra, rb, 1.0)


# ---------------------------------------------------------------------------
# pipeline


def test_pipeline_random_gauges(rep):
    for seed in (0, 3):
        report = coh.run_pipeline(rep, coh.random_gauge(2, 3, seed=seed))
        assert report["all_pass"]
        assert report["stages"]["cocycle"]["max_defect"] <= 1e-10
        assert report["stages"]["coboundary"]["sweep_disagreement"] <= 1e-9
        assert report["stages"]["improved_resolvents"]["defect"] <= 1e-10


def test_pipeline_report_is_json_ready(rep):
    report = coh.run_pipeline(rep, coh.quadratic_gauge(2, 2))
    text = json.dumps(report, sort_keys=True)
    assert json.loads(text)["schema_version"] == 1
    assert any(entry["value"] == -2.0 for entry in report["xi"])
