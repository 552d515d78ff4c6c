import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import unitary_group

from entrosep import werner as wn
from entrosep.criteria import QUBIT_CRITERIA, criterion_set
from entrosep.entropy import binary_entropy, entropic_uncertainty, total_uncertainty
from entrosep.observables import bell_basis_2, xyz_set
from entrosep.qstate import is_ppt

LN2 = math.log(2)


def test_werner_endpoints():
    np.testing.assert_allclose(wn.werner(0).state.matrix, np.eye(4) / 4, atol=1e-15)
    s = bell_basis_2().vectors[3]
    np.testing.assert_allclose(wn.werner(1).state.matrix, np.outer(s, s.conj()), atol=1e-15)
    ok, lam = is_ppt(wn.werner(1 / 3).state)
    assert ok and lam == pytest.approx(0, abs=1e-9)


def test_werner_rejects_out_of_range():
    for p in (-0.1, 1.01):
        with pytest.raises(ValueError):
            wn.werner(p)


def test_werner_is_rotationally_invariant():
    us = unitary_group.rvs(2, size=20, random_state=7)
    rho = wn.werner(0.6).state.matrix
    for u in us:
        uu = np.kron(u, u)
        np.testing.assert_allclose(uu @ rho, rho @ uu, atol=1e-9)


def test_xyz_uncertainties_coincide_on_werner_states():
    for p in np.linspace(0, 1, 11):
        hs = [entropic_uncertainty(o, wn.werner(p).state) for o in xyz_set()]
        assert max(hs) - min(hs) < 1e-12


def test_closed_form_examples():
    assert wn.closed_form("E8-XY", 1.0) == pytest.approx(0, abs=1e-15)
    assert wn.closed_form("E12-XYZ", 0.0) == pytest.approx(3 * LN2, abs=1e-15)
    assert wn.closed_form("E22-SPIN", 0.55) == pytest.approx(3 * LN2, abs=0.02)
    with pytest.raises(KeyError):
        wn.closed_form("E33-EXTREME-3", 0.5)


@pytest.mark.parametrize("cid", list(QUBIT_CRITERIA))
def test_closed_forms_match_density_pipeline(cid):
    opset = criterion_set(cid)
    for p in np.linspace(0, 1, 100):
        assert wn.closed_form(cid, p) == pytest.approx(total_uncertainty(opset, wn.werner(p).state), abs=1e-9)


PUBLISHED = {"E8-XY": 0.78, "E12-XYZ": 0.65, "E14-1_3": 0.68, "E16-1_1_2": 0.72, "E18-1111": 0.74, "E22-SPIN": 0.55}


def test_thresholds_match_published_values():
    th = wn.all_thresholds()
    for cid, ref in PUBLISHED.items():
        assert abs(th[cid] - ref) <= 0.01, cid


def test_threshold_e8_matches_binary_entropy_inversion():
    # 2 H2((1+p)/2) = ln 2 gives H2((1+p)/2) = ln2/2; invert with a separate root finder
    x = brentq(lambda t: binary_entropy(t) - LN2 / 2, 0.5, 1.0, xtol=1e-14)
    assert wn.threshold("E8-XY", tol=1e-10) == pytest.approx(2 * x - 1, abs=1e-9)


def test_threshold_ordering_and_ppt_gap():
    th = wn.all_thresholds()
    assert wn.threshold_order(th) == ["E22-SPIN", "E12-XYZ", "E14-1_3", "E16-1_1_2", "E18-1111", "E8-XY"]
    vals = sorted(th.values())
    assert min(np.diff(vals)) > 1e-6
    assert min(vals) > wn.PPT_THRESHOLD


def test_violation_above_threshold_only():
    for cid in QUBIT_CRITERIA:
        t = wn.threshold(cid)
        bound = criterion_set(cid).sep_floor
        assert wn.closed_form(cid, t - 1e-4) >= bound
        assert wn.closed_form(cid, t + 1e-4) < bound


def test_threshold_rejects_non_firing_criterion(monkeypatch):
    monkeypatch.setitem(wn.CLOSED_FORMS, "E8-XY", lambda p: 5 + 0 * p)
    with pytest.raises(wn.ThresholdError, match="never fires"):
        wn.threshold("E8-XY")
    monkeypatch.setitem(wn.CLOSED_FORMS, "E8-XY", lambda p: p)
    with pytest.raises(wn.ThresholdError, match="monotone"):
        wn.threshold("E8-XY")


def test_sweep_rows():
    rows = wn.sweep(list(QUBIT_CRITERIA), [0, 1 / 3, 1])
    assert [r["ppt_flag"] for r in rows] == [True, True, False]
    for r in rows:
        assert r["E12-XYZ_value"] == pytest.approx(1.5 * r["E8-XY_value"], abs=1e-12)
    (r,) = wn.sweep(list(QUBIT_CRITERIA), [0.6])
    assert [c for c in QUBIT_CRITERIA if r[f"{c}_violated"]] == ["E22-SPIN"]


def test_sweep_matrix_route_agrees():
    grid = np.linspace(0, 1, 21)
    a = wn.sweep(list(QUBIT_CRITERIA), grid)
    b = wn.sweep(list(QUBIT_CRITERIA), grid, matrix=True)
    for ra, rb in zip(a, b):
        for c in QUBIT_CRITERIA:
            assert ra[f"{c}_value"] == pytest.approx(rb[f"{c}_value"], abs=1e-9)
            assert ra[f"{c}_violated"] == rb[f"{c}_violated"]
