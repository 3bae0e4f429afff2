import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zakeri.errors import DomainError
from zakeri.model import (
    ModelPoint,
    eta_eval,
    locate_point,
    phi,
    quotient_project,
    symmetry_residual,
    zakeri_curve_points,
)
from zakeri.multiangle import MultiAngle, pi_step
from zakeri.siegel import polar_coordinates


@st.composite
def sample_points(draw):
    """Legal non-terminal multi-angles with last entry <= 5 and a polar radius."""
    n = draw(st.integers(1, 5))
    ms = [draw(st.integers(0, 3))]
    for i in range(1, n):
        ms.append(ms[-1] if i % 2 else ms[-1] + draw(st.integers(1, 2)))
    ms = tuple(m for m in ms)
    if ms[-1] > 5 or ms in ((0,), (0, 0)) or (len(ms) == 2 and ms[0] == 0):
        ms = (ms[0] + 1,)
    rho = draw(st.one_of(st.just(1.0), st.floats(0.0, 0.9)))
    return MultiAngle(ms), rho


def test_eta_examples(q_tree):
    assert eta_eval(q_tree, (0,), 1.0).embedded == 1
    assert eta_eval(q_tree, (0,), 0.0).embedded == 0
    assert abs(eta_eval(q_tree, (0, 0), 0.0).embedded - 2) < 1e-12


@settings(max_examples=50, deadline=None)
@given(sample_points())
def test_semiconjugacy(q_tree, point):
    ma, rho = point
    lhs = eta_eval(q_tree, pi_step(ma), rho).embedded
    rhs = q_tree.f(eta_eval(q_tree, ma, rho).embedded)
    assert abs(lhs - rhs) < 1e-5


def test_eta_matches_polar_data(q_tree, q_model):
    mp = eta_eval(q_tree, (0, 0, 2), 0.4)  # bubble (0), angle -2 theta
    w = q_tree.f.iterate(mp.embedded, 1)
    p = polar_coordinates(q_model, w)
    assert p.rho == pytest.approx(0.4, abs=1e-5)
    assert (p.angle + q_model.theta + 0.5) % 1 - 0.5 == pytest.approx(0, abs=1e-5)


def test_locate_examples(model_trees):
    tree = model_trees.cubic_tree(-2 + 1j)
    p = locate_point(tree, 1)
    assert p.ma.ms == (0,) and p.rho == 1
    p = locate_point(tree, 0)
    assert p.ma.ms == (0,) and p.rho == 0
    # the root of the bubble hung at angle -theta is reported as a Siegel boundary point
    p = locate_point(tree, tree.model.boundary_point(-1))
    assert p.ma.ms == (1,) and p.rho == 1
    with pytest.raises(DomainError):
        locate_point(tree, 50)


def test_phi_unicritical(golden, model_trees):
    mp = phi(1, golden, model_trees)
    assert abs(mp.embedded - 1) < 1e-6


def test_phi_on_zakeri_curve(golden, model_trees, q_model):
    c = zakeri_curve_points(golden, 5)[1]
    mp = phi(c, golden, model_trees)
    assert mp.on_siegel_boundary and mp.resolved
    delta = mp.last_angle
    # the Q-side point sits at the same angular distance from 1 on the Siegel boundary
    ks, ang, pts = q_model.polygon()
    i = np.argmin(np.abs(pts - mp.embedded))
    assert abs((ang[i] - delta + 0.5) % 1 - 0.5) < 1e-3


def test_phi_range(golden, model_trees):
    for c in (-2 + 1j, 3 + 0.5j, -1):
        mp = phi(c, golden, model_trees)
        assert mp.resolved
        assert mp.rho == 1 or mp.address  # never inside the Siegel disk of Q


def test_phi_domain_errors(golden, model_trees):
    with pytest.raises(DomainError):
        phi(5, golden, model_trees)  # c escapes
    with pytest.raises(DomainError):
        phi(0.5 + 0.2j, golden, model_trees)  # 1 is not on the Siegel boundary


def test_quotient_examples():
    th = 0.1
    bnd = lambda a: ModelPoint(None, 1.0, None, a, theta=th)
    assert quotient_project(bnd(0.3)).canonical_angle == pytest.approx(0.3)
    assert quotient_project(bnd(0.7)).last_angle == pytest.approx(0.3)
    inner = ModelPoint(MultiAngle((0, 0, 3)), 0.5, 1 + 1j, theta=th)
    assert quotient_project(inner) == inner


@given(st.floats(0, 1, exclude_max=True))
def test_quotient_idempotent(a):
    p = quotient_project(ModelPoint(None, 1.0, None, a, theta=0.3))
    assert quotient_project(p) == p
    assert 0 <= p.last_angle <= 0.5


def test_symmetry(golden, model_trees):
    assert symmetry_residual(1, golden, model_trees) == 0
    assert symmetry_residual(-1, golden, model_trees) < 1e-3


def test_continuity_probe(golden, model_trees):
    # advisory: neighbouring curve samples give neighbouring boundary angles
    cs = zakeri_curve_points(golden, 24)[:4]
    angles = [phi(c, golden, model_trees).last_angle for c in cs]
    assert all(math.isfinite(a) for a in angles)
