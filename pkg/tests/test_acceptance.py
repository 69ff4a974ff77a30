"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are printed past output capture) or directly with
``python tests/test_acceptance.py``.
"""

import math
import sys
from fractions import Fraction

import numpy as np
import pytest

from bdqms.bunce_deddens import (
    StageElement,
    alpha,
    alpha_inverse,
    cond_expectation,
    lip_L,
    lip_S,
    random_element,
    stage_constants,
    trace_tau,
)
from bdqms.cli import cmd_verify
from bdqms.config import load_config
from bdqms.ou_core import (
    KantorovichParams,
    NetParams,
    StateFunctional,
    finite_commutative_space,
    kantorovich,
    kantorovich_exact_finite,
    stage_space,
    state_net,
)
from bdqms.periodic import (
    evaluate,
    lipschitz_seminorm,
    make_shift_V,
    make_U_sigma,
    make_unitary_U,
    make_W_sigma,
    sup_norm,
)
from bdqms.threads import check_thread_compat, embed_psi, thread_norm, thread_S0
from bdqms.tunnels import (
    Bridge,
    baire_distance,
    baire_lipschitz_check,
    bd_bridge_length_estimate,
    check_evident_tunnel,
    cond_exp_toy,
    distq_chain_bound,
    evident_tunnel,
    exact_extent_glued,
    glued_metric_toy,
    tunnel_extent_estimate,
)

TIMES = np.linspace(0.0, 1.0, 129)
SAMPLES = 100


def report(number, passed, detail, capsys=None):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def _unitary_errors(U, V):
    vals, shifted = evaluate(U, TIMES), evaluate(U, TIMES + 1.0)
    eye = np.eye(U.n)
    unit = max(np.linalg.norm(u @ u.conj().T - eye, 2) for u in vals)
    inter = max(np.linalg.norm(s - u @ V, 2) for s, u in zip(shifted, vals))
    return unit, inter


def criterion_1():
    worst = 0.0
    for m in range(2, 9):
        worst = max(worst, *_unitary_errors(make_unitary_U(m), make_shift_V(m)))
    for sigma in [(2, 3), (3, 2), (2, 2, 2)]:
        for m in range(1, len(sigma) + 1):
            worst = max(worst, *_unitary_errors(make_U_sigma(sigma, m), make_W_sigma(sigma, m)))
    return worst < 1e-10, f"max unitarity/intertwining error {worst:.2e}"


def criterion_2():
    lU2 = lipschitz_seminorm(make_unitary_U(2))
    ok = abs(lU2 - math.pi) < 1e-6
    slack = math.inf
    for m in range(2, 9):
        root = math.sqrt((2 * m * m + 3 * m + 1) / (6 * m))
        slack = min(slack, 2 * math.pi * root + 1e-6 - lipschitz_seminorm(make_unitary_U(m)))
    literal = math.sqrt((2 * 4 + 3 * 2 + 1) / 12)
    falsified = lU2 > literal
    return ok and slack >= 0 and falsified, (
        f"l(U_2) - pi = {lU2 - math.pi:.1e}; min slack of corrected bound {slack:.3f}; "
        f"literal bound {literal:.4f} < l(U_2) = {lU2:.4f} (falsified: {falsified})")


def criterion_3():
    worst = {"mult": 0.0, "unital": 0.0, "adjoint": 0.0, "idem": 0.0, "fix": 0.0,
             "trace": 0.0, "contract": -math.inf, "lip": -math.inf}
    for sigma in [(2, 3), (2, 2, 2)]:
        for m in range(0, min(3, len(sigma)) + 1):
            for k in range(SAMPLES):
                a = random_element(sigma, m, 2, [3, m, k])
                if m < len(sigma):
                    b = random_element(sigma, m, 2, [4, m, k])
                    worst["mult"] = max(worst["mult"], sup_norm(
                        alpha(sigma, m, a @ b).f - (alpha(sigma, m, a) @ alpha(sigma, m, b)).f))
                    c = a @ b
                    worst["adjoint"] = max(worst["adjoint"], sup_norm(
                        alpha(sigma, m, c.adjoint()).f - alpha(sigma, m, c).adjoint().f))
                if m >= 1:
                    Ea = cond_expectation(sigma, m, a)
                    worst["idem"] = max(worst["idem"], sup_norm(cond_expectation(sigma, m, Ea).f - Ea.f))
                    prev = alpha(sigma, m - 1, random_element(sigma, m - 1, 2, [5, m, k]))
                    worst["fix"] = max(worst["fix"], sup_norm(cond_expectation(sigma, m, prev).f - prev.f))
                    worst["trace"] = max(worst["trace"], abs(trace_tau(sigma, m, Ea) - trace_tau(sigma, m, a)))
                    worst["contract"] = max(worst["contract"], Ea.norm() - a.norm())
                    worst["lip"] = max(worst["lip"], lip_L(sigma, m, Ea) - lip_L(sigma, m, a))
            if m < len(sigma):
                one = alpha(sigma, m, StageElement.scalar(sigma, m))
                worst["unital"] = max(worst["unital"], sup_norm(one.f - np.eye(one.n)))
    ok = (max(worst["mult"], worst["unital"], worst["adjoint"], worst["idem"], worst["fix"]) < 1e-9
          and worst["trace"] < 1e-10 and worst["contract"] <= 1e-9 and worst["lip"] <= 1e-9)
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def criterion_4():
    lower = upper = -math.inf
    for sigma in [(2, 3), (3, 2), (2, 2, 2)]:
        for m in range(1, len(sigma) + 1):
            c = stage_constants(sigma, m)
            for k in range(SAMPLES):
                a = random_element(sigma, m - 1, 2, [6, m, k])
                prev, img = lip_L(sigma, m - 1, a), lip_L(sigma, m, alpha(sigma, m - 1, a))
                lower = max(lower, c.c_m * prev - img)
                upper = max(upper, img - c.d_m * prev)
    return lower <= 1e-8 and upper <= 1e-8, f"max lower violation {lower:.2e}, max upper violation {upper:.2e}"


def criterion_5():
    iso = 0.0
    disp = -math.inf
    for sigma in [(2, 3), (2, 2, 2)]:
        for m in range(1, len(sigma) + 1):
            for k in range(SAMPLES):
                a = random_element(sigma, m - 1, 2, [7, m, k])
                iso = max(iso, abs(lip_S(sigma, m, alpha(sigma, m - 1, a)) - lip_S(sigma, m - 1, a)))
                b = random_element(sigma, m, 2, [8, m, k])
                b = b * (1.0 / lip_S(sigma, m, b))
                disp = max(disp, sup_norm(b.f - cond_expectation(sigma, m, b).f) - 2.0 ** -m)
    return iso < 1e-8 and disp <= 1e-9, f"S-isometry error {iso:.1e}; max ||a - E a|| - 2^-m = {disp:.2e}"


def criterion_6():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        P = rng.random((n, 2))
        D = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
        mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        est = kantorovich(finite_commutative_space(D), StateFunctional(mu), StateFunctional(nu)).value
        exact = kantorovich_exact_finite(D, mu, nu)
        worst = max(worst, abs(est - exact) / exact)
    space = stage_space((2, 3), 1, 1)
    states = list(state_net(space, NetParams(grid_points=1, random_states=1)))
    light = KantorovichParams(restarts=3, iterations=80, polish_iterations=40)
    diam = max(kantorovich(space, states[i], states[j], light).value
               for i in range(len(states)) for j in range(i + 1, len(states)))
    return worst < 1e-3 and diam <= 2 + 1e-6, (
        f"engine vs transport LP worst relative error {worst:.1e} over 50 pairs; stage net diameter {diam:.4f}")


def criterion_7():
    s, m = (2, 3, 2), 1
    gp_norm = lambda x: sup_norm(x.f)
    LA = lambda a: lip_S(s, m, a)
    LB = lambda b: lip_S(s, m + 1, b)
    tunnel = evident_tunnel(Bridge(lambda a: alpha(s, m, a), gp_norm), LA, LB, 2.0 ** -(m + 1))
    res = check_evident_tunnel(
        tunnel, LA, LB,
        [random_element(s, m, 2, [9, k]) for k in range(20)], lambda a: alpha(s, m, a),
        [random_element(s, m + 1, 2, [10, k]) for k in range(20)],
        lambda b: alpha_inverse(s, m + 1, cond_expectation(s, m + 1, b)), tol=1e-8)
    extents = {}
    for eps in (0.1, 0.5):
        t, A, B = cond_exp_toy(eps)
        extents[eps] = tunnel_extent_estimate(t, A, B)
    rng = np.random.default_rng(7)
    gap = 0.0
    for _ in range(3):
        X, Y = rng.random((3, 2)), rng.random((3, 2)) + 0.3
        t, nx, ny, D = glued_metric_toy(X, Y)
        gap = max(gap, abs(tunnel_extent_estimate(t, nx, ny) - exact_extent_glued(D, 3)))
    ok = res["passed"] and all(v <= eps + 1e-6 for eps, v in extents.items()) and gap < 1e-6
    return ok, (f"evident tunnel excess {res['worst_excess']:.1e}; extents "
                + ", ".join(f"eps={e:g}: {v:.6f}" for e, v in extents.items())
                + f"; extent vs Hausdorff gap {gap:.1e}")


def criterion_8():
    sigma = (2,) * 8
    ok = True
    for n in range(0, 8):
        rep = distq_chain_bound(sigma, n, 8)
        ok &= rep.links[0].constant == Fraction(4, 2 ** n)
        ok &= distq_chain_bound(sigma, n, n).links[-1].constant == Fraction(8, 2 ** n)
        ok &= rep.consistent
    pairs = [((2, 3), (3, 2)), ((2, 2, 2), (2, 2, 3)), ((2, 3, 2, 2), (2, 3, 2, 5)), ((3, 3, 3), (3, 2, 3))]
    lines = []
    for x, y in pairs:
        res = baire_lipschitz_check(x, y, samples=1, cutoff=1)
        n = baire_distance(x, y).first_difference
        ok &= res["bound"] == Fraction(32, 2 ** n) and res["ratio"] == 1 and res["passed"]
        lines.append(f"n={n}: bound {res['bound']}")
    return bool(ok), "chain and tail constants exact; " + ", ".join(lines) + ", ratio 1"


def criterion_9():
    sups = {}
    for m in (1, 2):
        est = bd_bridge_length_estimate((2, 3, 2), m, samples=200, seed=m)
        sups[m] = est.empirical_sup
    ok = all(v <= 2.0 ** -(m + 1) + 1e-8 for m, v in sups.items())
    return ok, ", ".join(f"m={m}: sup {v:.5f} <= {2.0 ** -(m + 1)}" for m, v in sups.items())


def criterion_10():
    sigma = (2, 3, 2, 2)
    iso = s0 = 0.0
    rng = np.random.default_rng(10)
    for k in range(50):
        n = k % 4
        a = random_element(sigma, n, 2, [11, k]) * float(rng.uniform(0.01, 3.0))
        th = embed_psi(n, a, 4)
        iso = max(iso, abs(thread_norm(th) - a.norm()))
        expect = lip_S(sigma, n, a)
        if n >= 1:
            expect = max(expect, a.norm() / (2 * 2.0 ** -(n - 1)))
        s0 = max(s0, abs(thread_S0(th) - expect))
    th = embed_psi(1, random_element(sigma, 1, 2, 12), 3)
    bad = th.replace(1, (th.entries[1][0], random_element(sigma, 2, 2, 13)))
    control = check_thread_compat(bad) == (False, 1)
    return iso < 1e-10 and s0 < 1e-8 and control, (
        f"psi isometry error {iso:.1e}; S_0 formula error {s0:.1e}; negative control detected: {control}")


def criterion_11():
    cfg = load_config(format="json")
    first, second = cmd_verify(cfg), cmd_verify(cfg)
    same = first[1].encode() == second[1].encode()
    return same and first[0] == 0, f"identical reports: {same}; exit code {first[0]}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 12)}


@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number, capsys):
    passed, detail = CRITERIA[number]()
    assert report(number, passed, detail, capsys), detail


if __name__ == "__main__":
    results = [report(n, *fn()) for n, fn in CRITERIA.items()]
    sys.exit(0 if all(results) else 1)
