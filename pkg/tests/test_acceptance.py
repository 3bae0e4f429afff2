"""Acceptance criteria, one test per criterion.

A summary line per criterion is printed at the end of the session.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from zakeri.bubbles import BubbleTree, trace_bubble_ray
from zakeri.dynamics import (
    BlaschkeFraction,
    CubicMap,
    FigOneMap,
    PolynomialMap,
    QuadraticMap,
    RigidRotation,
    circle_rotation_number,
    tune_rotation,
)
from zakeri.errors import UnresolvedError
from zakeri.model import phi, symmetry_residual, zakeri_curve_points
from zakeri.multiangle import MultiAngle, MultiAngleStream, pi_step
from zakeri.render import BOUNDED_RGB, read_ppm
from zakeri.rotation import parse_rotation
from zakeri.siegel import build_model, functional_residual

from strategies import random_legal_sequence

crit = pytest.mark.criterion

BLASCHKE_P, BLASCHKE_Q = 6, -6j


def cyclic_order(angles):
    """Indices sorted by angle, rotated to start at index 0."""
    order = list(np.argsort(np.mod(angles, 1.0), kind="stable"))
    i = order.index(0)
    return order[i:] + order[:i]


@crit(1, "Pi termination on 1000 random legal sequences")
def test_c1_pi_termination(record_property):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0
    for _ in range(1000):
        ma = MultiAngle(random_legal_sequence(rng, max_len=15, max_entry=20))
        for step in range(10 ** 4):
            if ma.ms in ((0,), (0, 0)):
                break
            ma = pi_step(ma)  # re-validates on construction
        else:
            pytest.fail(f"no termination from {ma}")
        worst = max(worst, step)
    dt = time.perf_counter() - t0
    record_property("max_steps", worst)
    record_property("seconds", round(dt, 3))
    assert dt < 1.0


@crit(2, "Siegel functional equation, golden Q, N=200")
def test_c2_functional_equation(record_property, quad, golden):
    t0 = time.perf_counter()
    m = build_model(quad, golden, N=200, K=10, Kb=10, fourier_iters=2000)
    res = functional_residual(m, frac=0.5, samples=256)
    dt = time.perf_counter() - t0
    record_property("residual", f"{res:.2e}")
    record_property("seconds", round(dt, 3))
    assert res < 1e-8 and dt < 1.0


@crit(3, "angular order of Q^k(1), k<=30, matches k theta and the series at rho=0.9")
def test_c3_boundary_series_order(record_property, q_model):
    k = np.arange(31)
    target = cyclic_order(k * q_model.theta)
    orbit = q_model.forward[:31]
    series = q_model.psi_bar(0.9 * np.exp(2j * np.pi * k * q_model.theta))
    # radial extrapolation of the series points keeps their arguments
    transported = series / np.abs(series) * np.abs(orbit)
    assert cyclic_order(np.angle(orbit) / (2 * np.pi)) == target
    assert cyclic_order(np.angle(transported) / (2 * np.pi)) == target
    record_property("rank_correlation", 1)


@crit(4, "bubble root identity and forward consistency, golden Q to generation 6")
def test_c4_bubble_roots(record_property, quad, q_model):
    t0 = time.perf_counter()
    tree = BubbleTree(quad, q_model)
    found = tree.build(6, min_diam=1e-4)
    dt = time.perf_counter() - t0
    root = forward = 0.0
    for b in found:
        if b.is_siegel_disk:
            continue
        r = tree.forward_residuals(b)
        root = max(root, r["root"])
        forward = max(forward, r.get("forward", 0.0))
    record_property("bubbles", len(found))
    record_property("root", f"{root:.1e}")
    record_property("forward", f"{forward:.1e}")
    record_property("seconds", round(dt, 2))
    assert len(found) > 30
    assert root < 1e-5 and forward < 1e-4 and dt < 30


@crit(5, "periodic bubble ray lands on a repelling periodic point")
def test_c5_ray_landing(record_property, q_tree):
    for gaps in ([1], [1, 2]):
        ray = trace_bubble_ray(q_tree, MultiAngleStream.from_periodic_gaps(gaps), period=sum(gaps))
        assert ray.periodic_residual < 1e-8
        assert ray.multiplier > 1
        record_property(f"gaps{gaps}", f"res={ray.periodic_residual:.1e} |mult|={ray.multiplier:.4f}")


@crit(6, "eta semiconjugacy on 50 sampled (ma, rho)")
def test_c6_semiconjugacy(record_property, q_tree):
    from zakeri.model import eta_eval

    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(50):
        ms = random_legal_sequence(rng, max_len=5, max_entry=5)
        ms = ms if len(ms) % 2 else ms[:-1] or (1,)
        if ms in ((0,),) or ms[-1] > 5:
            ms = (1,)
        rho = 1.0 if rng.random() < 0.3 else float(rng.uniform(0, 0.9))
        lhs = eta_eval(q_tree, pi_step(MultiAngle(ms)), rho).embedded
        rhs = q_tree.f(eta_eval(q_tree, ms, rho).embedded)
        worst = max(worst, abs(lhs - rhs))
    record_property("max_residual", f"{worst:.1e}")
    assert worst < 1e-5


@crit(7, "phi(1) embeds at 1")
def test_c7_phi_unicritical(record_property, golden, model_trees):
    mp = phi(1, golden, model_trees)
    record_property("error", f"{abs(mp.embedded - 1):.1e}")
    assert abs(mp.embedded - 1) < 1e-6


@crit(8, "quotient symmetry phi(c) ~ phi(1/c)")
def test_c8_symmetry(record_property, golden, model_trees):
    cs = [-1 + 0j] + [c for c in zakeri_curve_points(golden, 10) if np.isfinite(c)]
    worst, used = 0.0, 0
    for c in cs:
        try:
            r = symmetry_residual(c, golden, model_trees)
        except UnresolvedError:
            continue
        worst, used = max(worst, r), used + 1
    record_property("assessed", used)
    record_property("max_residual", f"{worst:.1e}")
    assert used >= 9
    assert worst < 1e-3


@crit(9, "Figure-1 render: 512^2 under 60 s, deterministic, non-escaping fraction in (2%, 60%)")
def test_c9_figure_one(record_property, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"fig1_{i}.ppm"
        t0 = time.perf_counter()
        subprocess.run([sys.executable, "-m", "zakeri.cli", "render-param", "--rot", "sqrt2over2", "--plane", "a",
                        "--res", "512x512", "--out", str(out)], check=True, capture_output=True,
                       env={**os.environ, "PYTHONHASHSEED": str(i)})
        dt = time.perf_counter() - t0
        assert dt < 60
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    px = read_ppm(tmp_path / "fig1_0.ppm")
    frac = float((px == np.array(BOUNDED_RGB, np.uint8)).all(-1).mean())
    record_property("seconds", round(dt, 1))
    record_property("non_escaping", f"{frac:.3f}")
    assert 0.02 < frac < 0.60


@crit(10, "root solver: 1000 random (map, w), degree-many preimages, residual < 1e-10")
def test_c10_root_solver(record_property, golden):
    rng = np.random.default_rng(110)
    lam = complex(golden.multiplier)
    worst = 0.0
    for i in range(1000):
        c = complex(*rng.uniform(-3, 3, 2))
        if abs(c) < 0.05:
            c += 0.5
        kind = i % 4
        if kind == 0:
            f = QuadraticMap(golden)
        elif kind == 1:
            f = CubicMap(lam, c)
        elif kind == 2:
            f = FigOneMap(lam, c)
        else:
            f = PolynomialMap([0, lam, *(rng.normal(size=(3, 2)) @ [1, 1j])])
        w = complex(*rng.uniform(-2, 2, 2))
        roots = f.preimages(w)
        assert len(roots) == f.degree
        worst = max(worst, max(abs(f(r) - w) for r in roots))
    record_property("max_residual", f"{worst:.1e}")
    assert worst < 1e-10


@crit(11, "Blaschke rotation-number tuning and rigid rotation sanity")
def test_c11_blaschke(record_property, golden):
    theta = float(golden)
    t, tuned = tune_rotation(BlaschkeFraction(0, BLASCHKE_P, BLASCHKE_Q), theta, iters=20000)
    err = abs(circle_rotation_number(tuned, iters=20000) - theta)
    rigid = max(abs((circle_rotation_number(RigidRotation(s), iters=2000) - s + 0.5) % 1 - 0.5)
                for s in np.linspace(0, 1, 37, endpoint=False))
    record_property("tuning_error", f"{err:.1e}")
    record_property("rigid_error", f"{rigid:.1e}")
    assert err < 1e-6 and rigid < 1e-9
