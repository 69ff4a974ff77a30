"""Named invariant checks run by ``bdqms verify``.

Each suite returns a list of records ``{name, passed, measured, threshold}``
where ``passed`` means ``measured <= threshold``.  Everything is seeded from
the config, so two runs with the same config give identical records.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .bunce_deddens import (
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
from .config import ExperimentConfig
from .ou_core import (
    KantorovichParams,
    StateFunctional,
    finite_commutative_space,
    kantorovich,
    kantorovich_exact_finite,
    stage_space,
    state_net,
)
from .periodic import evaluate, lipschitz_seminorm, make_shift_V, make_U_sigma, make_unitary_U, make_W_sigma, sup_norm
from .threads import check_thread_compat, embed_psi, thread_norm, thread_S0
from .tunnels import (
    Bridge,
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

__all__ = ["SUITES", "run_suites", "unitary_lip_bound"]

GRID_T = np.linspace(0.0, 1.0, 97)


def _record(name, measured, threshold):
    measured = float(measured)
    return {"name": name, "passed": bool(measured <= threshold), "measured": measured, "threshold": float(threshold)}


def unitary_lip_bound(m: int, uncorrected: bool = False) -> float:
    """Bound on ``l(U_m)``; ``uncorrected`` drops the ``2 pi`` factor."""
    root = math.sqrt((2 * m * m + 3 * m + 1) / (6 * m))
    return root if uncorrected else 2 * math.pi * root


def _unitarity(U, V, t=GRID_T):
    vals = evaluate(U, t)
    shifted = evaluate(U, t + 1.0)
    eye = np.eye(U.n)
    unit = max(np.linalg.norm(u @ u.conj().T - eye, 2) for u in vals)
    inter = max(np.linalg.norm(s - u @ V, 2) for s, u in zip(shifted, vals))
    return unit, inter


def suite_unitaries(cfg: ExperimentConfig):
    out = []
    for m in cfg.unitary_orders:
        unit, inter = _unitarity(make_unitary_U(m), make_shift_V(m))
        out.append(_record(f"unitary/U_{m}/unitarity", unit, 1e-10))
        out.append(_record(f"unitary/U_{m}/intertwining", inter, 1e-10))
    for m in range(1, cfg.max_stage + 1):
        unit, inter = _unitarity(make_U_sigma(cfg.sigma, m), make_W_sigma(cfg.sigma, m))
        out.append(_record(f"unitary/U_sigma_{m}/unitarity", unit, 1e-10))
        out.append(_record(f"unitary/U_sigma_{m}/intertwining", inter, 1e-10))
    return out


def suite_unitary_lip(cfg: ExperimentConfig):
    gp = cfg.grid
    out = []
    for m in cfg.unitary_orders:
        lU = lipschitz_seminorm(make_unitary_U(m), gp)
        bound = unitary_lip_bound(m, cfg.uncorrected_unitary_bound)
        out.append(_record(f"unitary_lip/U_{m}", lU, bound + 1e-6))
    out.append(_record("unitary_lip/U_2_equals_pi", abs(lipschitz_seminorm(make_unitary_U(2), gp) - math.pi), 1e-6))
    return out


def _samples(cfg, m, tag):
    return [random_element(cfg.sigma, m, cfg.cutoff, [cfg.seed, tag, m, k]) for k in range(cfg.samples)]


def suite_alpha(cfg: ExperimentConfig):
    gp, s = cfg.grid, cfg.sigma
    out = []
    for m in range(cfg.max_stage):
        xs, ys = _samples(cfg, m, 1), _samples(cfg, m, 2)
        mult = max(sup_norm(alpha(s, m, x @ y, gp).f - (alpha(s, m, x, gp) @ alpha(s, m, y, gp)).f, gp)
                   for x, y in zip(xs, ys))
        adj = max(sup_norm(alpha(s, m, x.adjoint(), gp).f - alpha(s, m, x, gp).adjoint().f, gp) for x in xs)
        one = sup_norm(alpha(s, m, StageElement.scalar(s, m), gp).f - StageElement.scalar(s, m + 1).f, gp)
        out += [_record(f"alpha/{m}->{m + 1}/multiplicative", mult, 1e-9),
                _record(f"alpha/{m}->{m + 1}/adjoint", adj, 1e-9),
                _record(f"alpha/{m}->{m + 1}/unital", one, 1e-9)]
    return out


def suite_expectation(cfg: ExperimentConfig):
    gp, s = cfg.grid, cfg.sigma
    out = []
    for m in range(1, cfg.max_stage + 1):
        idem = fix = tr = contr = lipd = 0.0
        for a, c in zip(_samples(cfg, m, 3), _samples(cfg, m - 1, 4)):
            Ea = cond_expectation(s, m, a, gp)
            idem = max(idem, sup_norm(cond_expectation(s, m, Ea, gp).f - Ea.f, gp))
            ac = alpha(s, m - 1, c, gp)
            fix = max(fix, sup_norm(cond_expectation(s, m, ac, gp).f - ac.f, gp))
            tr = max(tr, abs(trace_tau(s, m, Ea) - trace_tau(s, m, a)))
            contr = max(contr, Ea.norm(gp) - a.norm(gp))
            lipd = max(lipd, lip_L(s, m, Ea, gp) - lip_L(s, m, a, gp))
        out += [_record(f"expectation/{m}/idempotent", idem, 1e-9),
                _record(f"expectation/{m}/fixes_image", fix, 1e-9),
                _record(f"expectation/{m}/trace", tr, 1e-10),
                _record(f"expectation/{m}/contractive", contr, 1e-9),
                _record(f"expectation/{m}/lip_decreasing", lipd, 1e-9)]
    return out


def suite_sandwich(cfg: ExperimentConfig):
    gp, s = cfg.grid, cfg.sigma
    out = []
    for m in range(1, cfg.max_stage + 1):
        c = stage_constants(s, m, gp)
        lower = upper = -math.inf
        for a in _samples(cfg, m - 1, 5):
            prev, img = lip_L(s, m - 1, a, gp), lip_L(s, m, alpha(s, m - 1, a, gp), gp)
            lower = max(lower, c.c_m * prev - img)
            upper = max(upper, img - c.d_m * prev)
        out += [_record(f"sandwich/{m}/lower", lower, 1e-8), _record(f"sandwich/{m}/upper", upper, 1e-8)]
    return out


def suite_s_norm(cfg: ExperimentConfig):
    gp, s, nc = cfg.grid, cfg.sigma, cfg.norm_coefficient
    out = []
    for m in range(1, cfg.max_stage + 1):
        iso = disp = 0.0
        for a, b in zip(_samples(cfg, m - 1, 6), _samples(cfg, m, 7)):
            iso = max(iso, abs(lip_S(s, m, alpha(s, m - 1, a, gp), gp, nc) - lip_S(s, m - 1, a, gp, nc)))
            b = b * (1.0 / lip_S(s, m, b, gp, nc))
            disp = max(disp, sup_norm(b.f - cond_expectation(s, m, b, gp).f, gp) - 2.0 ** -m)
        out += [_record(f"s_norm/{m}/isometry", iso, 1e-8), _record(f"s_norm/{m}/displacement", disp, 1e-9)]
    return out


def _toy_distances(cfg: ExperimentConfig):
    toy = cfg.toy
    if "distances" in toy:
        return np.asarray(toy["distances"], dtype=float)
    P = np.asarray(toy["points"], dtype=float)
    return np.linalg.norm(P[:, None] - P[None, :], axis=-1)


def suite_kantorovich(cfg: ExperimentConfig):
    kp = cfg.kantorovich_params
    out = []
    rng = np.random.default_rng([cfg.seed, 8])
    worst = 0.0
    for k in range(5):
        n = 3 + k
        P = rng.random((n, 2))
        D = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
        mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        est = kantorovich(finite_commutative_space(D), StateFunctional(mu), StateFunctional(nu), kp).value
        exact = kantorovich_exact_finite(D, mu, nu)
        worst = max(worst, abs(est - exact) / max(exact, 1e-12))
    out.append(_record("kantorovich/oracle_relative_error", worst, 1e-3))
    m = min(1, len(cfg.sigma))
    space = stage_space(cfg.sigma, m, 1, cfg.grid)
    states = list(state_net(space, cfg.net_params))
    light = KantorovichParams(restarts=2, iterations=60, polish_iterations=30, seed=cfg.seed)
    diam = max(kantorovich(space, states[i], states[j], light).value
               for i in range(len(states)) for j in range(i + 1, len(states)))
    out.append(_record(f"kantorovich/stage_{m}_diameter", diam, 2.0 + 1e-6))
    return out


def suite_tunnels(cfg: ExperimentConfig):
    gp, s, nc = cfg.grid, cfg.sigma, cfg.norm_coefficient
    kp = cfg.kantorovich_params
    out = []
    for eps in (0.1, 0.5):
        tunnel, A, B = cond_exp_toy(eps)
        out.append(_record(f"tunnels/cond_exp_extent/eps={eps:g}", tunnel_extent_estimate(tunnel, A, B, kp) - eps, 1e-6))
    rng = np.random.default_rng([cfg.seed, 9])
    X, Y = rng.random((3, 2)), rng.random((3, 2))
    tunnel, nx, ny, D = glued_metric_toy(X, Y)
    gap = abs(tunnel_extent_estimate(tunnel, nx, ny, kp) - exact_extent_glued(D, len(X)))
    out.append(_record("tunnels/extent_is_hausdorff", gap, 1e-6))
    for m in range(1, cfg.max_stage):
        est = bd_bridge_length_estimate(s, m, samples=cfg.samples, seed=cfg.seed, cutoff=cfg.cutoff, gp=gp,
                                        norm_coefficient=nc)
        out.append(_record(f"tunnels/bridge_length/{m}->{m + 1}", est.empirical_sup, 2.0 ** -(m + 1) + 1e-8))
        r = 2.0 ** -(m + 1)
        bridge = Bridge(lambda a, m=m: alpha(s, m, a, gp), lambda x: sup_norm(x.f, gp))
        LA = lambda a, m=m: lip_S(s, m, a, gp, nc)
        LB = lambda b, m=m: lip_S(s, m + 1, b, gp, nc)
        tunnel = evident_tunnel(bridge, LA, LB, r)
        res = check_evident_tunnel(
            tunnel, LA, LB,
            _samples(cfg, m, 10), lambda a, m=m: alpha(s, m, a, gp),
            _samples(cfg, m + 1, 11), lambda b, m=m: alpha_inverse(s, m + 1, cond_expectation(s, m + 1, b, gp), gp),
            tol=1e-8)
        out.append(_record(f"tunnels/evident_tunnel/{m}->{m + 1}/excess", res["worst_excess"], 1e-8))
        out.append(_record(f"tunnels/evident_tunnel/{m}->{m + 1}/lower", res["worst_lower_violation"], 1e-8))
    return out


def suite_bounds(cfg: ExperimentConfig):
    out = []
    L = len(cfg.sigma)
    for n in range(0, L + 1):
        rep = distq_chain_bound(cfg.sigma, n, L, cfg.norm_coefficient)
        ok = rep.consistent and rep.total == Fraction(8, 2 ** n)
        out.append(_record(f"bounds/chain/{n}->{L}", 0.0 if ok else 1.0, 0.0))
    for x, y in cfg.baire_pairs:
        res = baire_lipschitz_check(x, y, samples=2, seed=cfg.seed, cutoff=1, gp=cfg.grid)
        tag = "{}|{}".format(",".join(map(str, x)), ",".join(map(str, y)))
        out.append(_record(f"bounds/baire/{tag}/chain_minus_32d", float(res["bound"] - res["lipschitz_bound"]), 0.0))
        out.append(_record(f"bounds/baire/{tag}/evaluator_gap", res["max_discrepancy"], 1e-9))
    return out


def suite_threads(cfg: ExperimentConfig):
    gp, s, nc = cfg.grid, cfg.sigma, cfg.norm_coefficient
    depth = cfg.max_stage
    out = []
    if depth < 1:
        return out
    iso = s0 = 0.0
    for n in range(depth):
        for a in _samples(cfg, n, 12)[:3]:
            th = embed_psi(n, a, depth, gp)
            iso = max(iso, abs(thread_norm(th, gp) - a.norm(gp)))
            expect = lip_S(s, n, a, gp, nc)
            if n >= 1:
                expect = max(expect, a.norm(gp) / (2 * 2.0 ** -(n - 1)))
            s0 = max(s0, abs(thread_S0(th, gp, norm_coefficient=nc) - expect))
    out += [_record("threads/psi_isometry", iso, 1e-10), _record("threads/S0_formula", s0, 1e-8)]
    if depth >= 2:
        a = _samples(cfg, 0, 13)[0]
        th = embed_psi(0, a, depth, gp)
        bad = th.replace(0, (th.entries[0][0], random_element(s, 1, cfg.cutoff, [cfg.seed, 14])))
        ok, idx = check_thread_compat(bad)
        out.append(_record("threads/negative_control_detected", 0.0 if (not ok and idx == 0) else 1.0, 0.0))
    return out


SUITES = {
    "unitaries": suite_unitaries,
    "unitary_lip": suite_unitary_lip,
    "alpha": suite_alpha,
    "expectation": suite_expectation,
    "sandwich": suite_sandwich,
    "s_norm": suite_s_norm,
    "kantorovich": suite_kantorovich,
    "tunnels": suite_tunnels,
    "bounds": suite_bounds,
    "threads": suite_threads,
}


def run_suites(cfg: ExperimentConfig, names=None) -> list[dict]:
    records = []
    for name in names or SUITES:
        records += SUITES[name](cfg)
    return records
