import math

import numpy as np
import pytest

from entrosep import criteria as cr
from entrosep import observables as obs
from entrosep.entropy import binary_entropy, f_func, total_uncertainty, total_uncertainty_kets
from entrosep.qstate import (
    DensityMatrix,
    ProductParams,
    is_ppt,
    product_ket,
    random_density,
    random_separable_mixture,
)
from entrosep.werner import werner_matrix

from .conftest import basis_ket

LN2 = math.log(2)


def random_params(rng, n):
    a, b = rng.uniform(0, math.pi / 2, (2, n))
    d, g = rng.uniform(0, 2 * math.pi, (2, n))
    return ProductParams(a, b, d, g)


def batch_kets(p):
    """Product kets for array-valued angles, built amplitude by amplitude."""
    ca, sa, cb, sb = np.cos(p.alpha), np.sin(p.alpha), np.cos(p.beta), np.sin(p.beta)
    ed, eg = np.exp(1j * p.delta), np.exp(1j * p.gamma)
    return np.stack([ca * cb, eg * ca * sb, ed * sa * cb, ed * eg * sa * sb], axis=1)


def dm(v):
    return DensityMatrix.from_ket(v, 2)


def test_evaluate_examples(bell):
    v = cr.evaluate(obs.xyz_set(), dm(bell[3]))
    assert v.value == pytest.approx(0, abs=1e-14)
    assert v.bound == pytest.approx(2 * LN2)
    assert v.violated and v.margin == pytest.approx(2 * LN2)
    v = cr.evaluate(obs.xyz_set(), dm(basis_ket(0)))
    assert v.value == pytest.approx(2 * LN2, abs=1e-12) and not v.violated
    assert v.value_bits == pytest.approx(2.0) and v.bound_bits == pytest.approx(2.0)
    p = 0.8
    v = cr.evaluate(obs.x_1111(), DensityMatrix(2, 2, werner_matrix(p)))
    expected = 3 * f_func((1 - p) / 4) + f_func((1 + 3 * p) / 4)
    assert v.value == pytest.approx(expected, abs=1e-12) and v.violated


def test_boundary_states_are_not_violated():
    w = DensityMatrix(2, 2, werner_matrix(1 / 3))
    assert not any(v.violated for v in cr.evaluate_all(w))
    assert not any(v.violated for v in cr.evaluate_all(DensityMatrix.maximally_mixed(2)))


def test_criterion_registry():
    assert cr.criteria_for_dim(2) == list(cr.QUBIT_CRITERIA)
    assert cr.criteria_for_dim(3) == ["E33-EXTREME-3", "E37-ONEREST-3"]
    assert cr.criterion_set("E37-ONEREST-4").sep_floor == pytest.approx(4 * binary_entropy(0.25))
    assert cr.criterion_set("E33-EXTREME-3").sep_floor == pytest.approx(math.log(3))
    with pytest.raises(KeyError):
        cr.criterion_set("E99-NOPE")


def test_evaluate_all_rejects_non_square():
    rho = DensityMatrix(2, 3, np.eye(6) / 6)
    with pytest.raises(ValueError):
        cr.evaluate_all(rho)


def test_evaluate_batch_keeps_order(rng):
    states = [DensityMatrix(2, 2, random_density(4, rng)) for _ in range(12)]
    serial = cr.evaluate_batch(states)
    threaded = cr.evaluate_batch(states, workers=4)
    assert [[v.value for v in row] for row in serial] == [[v.value for v in row] for row in threaded]


def test_qparams_examples():
    qp = cr.qparams(ProductParams(0, 0, 0.3, 1.2))
    assert (qp.q0, qp.q) == (1, 0)
    np.testing.assert_allclose(qp.bell_projections(), [0.5, 0.5, 0, 0], atol=1e-15)
    qp = cr.qparams(ProductParams(math.pi / 4, math.pi / 4, 0, 0))
    np.testing.assert_allclose([qp.q0, qp.q, qp.q1, qp.q2], [0.5, 0.5, 0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(qp.bell_projections(), [0.5, 0, 0.5, 0], atol=1e-15)


def test_qparams_match_bell_inner_products(rng, bell):
    p = random_params(rng, 2000)
    kets = batch_kets(p)
    direct = np.abs(kets @ bell.conj().T) ** 2
    qp = cr.qparams(p)
    np.testing.assert_allclose(np.stack(qp.bell_projections(), axis=1), direct, atol=1e-12)
    assert np.all(direct <= 0.5 + 1e-12)
    bound = np.minimum(qp.q0, 1 - qp.q0) + 1e-12
    assert np.all(np.abs(qp.q1) <= np.abs(qp.q) + 1e-12)
    assert np.all(np.abs(qp.q2) <= np.abs(qp.q) + 1e-12)
    assert np.all(np.abs(qp.q) <= bound)


CLOSED = [
    ("xy", cr.closed_form_xy),
    ("xyz", cr.closed_form_xyz),
    ("1_3", cr.closed_form_1_3),
    ("1_1_2", cr.closed_form_1_1_2),
    ("1111", cr.closed_form_1111),
    ("spin", cr.closed_form_spin),
]


@pytest.mark.parametrize("name,form", CLOSED, ids=[c[0] for c in CLOSED])
def test_closed_forms_match_density_pipeline(name, form, rng):
    opset = obs.get_set(name)
    for _ in range(100):
        p = ProductParams(*rng.uniform(-4, 4, 4))
        assert form(p) == pytest.approx(total_uncertainty(opset, dm(product_ket(p))), abs=1e-9)


@pytest.mark.parametrize("name,form", CLOSED, ids=[c[0] for c in CLOSED])
def test_closed_forms_vectorise(name, form, rng):
    p = random_params(rng, 2000)
    np.testing.assert_allclose(form(p), total_uncertainty_kets(obs.get_set(name), batch_kets(p)), atol=1e-9)


def test_closed_form_xy_examples():
    assert cr.closed_form_xy(ProductParams(0, 0, 0, 0)) == pytest.approx(LN2, abs=1e-15)
    q = math.pi / 4
    assert cr.closed_form_xy(ProductParams(q, q, math.pi / 2, -math.pi / 2)) == pytest.approx(LN2, abs=1e-12)


def test_closed_form_xy_grid_minimum():
    g = np.linspace(0, math.pi / 2, 41)
    ph = np.linspace(0, 2 * math.pi, 41)
    a, b, d, c = np.meshgrid(g, g, ph, ph, indexing="ij")
    vals = cr.closed_form_xy(ProductParams(a, b, d, c))
    assert vals.min() == pytest.approx(LN2, abs=1e-6)


def test_closed_form_spin_examples():
    assert cr.closed_form_spin(ProductParams(0, math.pi / 2, 0, 0)) == pytest.approx(3 * LN2, abs=1e-12)
    # |00> is an S_1 eigenstate; S_2 and S_3 each contribute (3/2) ln 2
    assert cr.closed_form_spin(ProductParams(0, 0, 0, 0)) == pytest.approx(3 * LN2, abs=1e-12)
    g = np.linspace(0, math.pi / 2, 61)
    ph = np.linspace(0, 2 * math.pi, 25)
    a, b, d, c = np.meshgrid(g, g, ph, ph, indexing="ij")
    assert cr.closed_form_spin(ProductParams(a, b, d, c)).min() >= 3 * LN2 - 1e-9


def test_pair_split_1_3_sums_two_bell_terms(rng):
    qp = cr.qparams(random_params(rng, 5000))
    q = qp.bell_projections()
    np.testing.assert_allclose(cr.pair_split_1_3(qp), binary_entropy(q[0]) + binary_entropy(q[1]), atol=1e-12)


def test_f_terms_bound_chain(rng):
    qp = cr.qparams(random_params(rng, 100_000))
    f0, f1, f2 = cr.f_terms(qp)
    assert f0.min() >= 2 * LN2 - 1e-9
    assert (f1 + f2).min() >= 3 * LN2 - 1e-9
    # f0 is the xyz total uncertainty in the q parameters
    p = random_params(np.random.default_rng(1), 200)
    np.testing.assert_allclose(cr.f_terms(cr.qparams(p))[0], cr.closed_form_xyz(p), atol=1e-12)


def test_g_func():
    assert cr.g_func(0.5) == pytest.approx(LN2, abs=1e-15)
    assert cr.g_func(0.0) == pytest.approx(LN2, abs=1e-15)
    grid = np.linspace(0, 1, 1_000_001)
    vals = cr.g_func(grid)
    assert vals.min() == pytest.approx(LN2, abs=1e-9)
    assert vals.min() >= LN2 - 1e-12


def test_implication_examples(bell):
    r = cr.implication_check(dm(bell[0]))
    assert r.xy_violated and r.xyz_violated and r.consistent
    r = cr.implication_check(DensityMatrix(2, 2, werner_matrix(0.7)))
    assert r.xyz_violated and not r.xy_violated and r.consistent
    assert r.h_x == pytest.approx(r.h_y, abs=1e-12) == pytest.approx(r.h_z, abs=1e-12)


def test_implication_on_random_states(rng):
    for _ in range(1000):
        rho = DensityMatrix(2, 2, random_density(4, rng, rank=int(rng.integers(1, 5))))
        r = cr.implication_check(rho)
        assert r.consistent and r.h_z <= LN2 + 1e-12


def test_separable_mixtures_never_violate():
    for seed in range(500):
        rho = random_separable_mixture(2, 1 + seed % 5, seed=seed).density()
        for v in cr.evaluate_all(rho):
            assert v.margin <= 1e-9, (seed, v)


@pytest.mark.parametrize("d", [3, 4])
def test_separable_mixtures_never_violate_in_higher_dimension(d):
    for seed in range(60):
        rho = random_separable_mixture(d, 1 + seed % 4, seed=1000 + seed).density()
        for v in cr.evaluate_all(rho):
            assert v.margin <= 1e-9, (seed, v)


def test_violations_imply_npt(rng):
    for _ in range(500):
        rho = DensityMatrix(2, 2, random_density(4, rng, rank=int(rng.integers(1, 5))))
        if any(v.violated for v in cr.evaluate_all(rho)):
            assert not is_ppt(rho)[0]


def test_floor_helpers():
    assert cr.h2_floor(2) == pytest.approx(2 * LN2)
    assert cr.h2_floor(3) == pytest.approx(3 * binary_entropy(1 / 3))
    assert cr.log_floor(5) == pytest.approx(math.log(5))
