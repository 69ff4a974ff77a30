"""Desk-scale quantum metric order unit spaces and Monge-Kantorovich distances.

Every space is a real coordinate space ``R^d`` for the self-adjoint part,
with an order unit, a norm and a Lip-norm that also returns a subgradient.
States are dual vectors: ``phi(x) = w . x``.

The Kantorovich engine maximizes ``(phi - psi)(x) / L(x)`` with multi-start
subgradient ascent and then polishes with cutting planes built from the
subgradients it has seen.  For a seminorm every subgradient ``g`` at any
point satisfies ``g . y <= L(y)`` for all ``y``, so the cut polytope contains
the Lip ball and its LP optimum is an upper bound, while every radially
normalized iterate gives a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .bunce_deddens import (
    StageElement,
    SupernaturalSequence,
    boxtimes,
)
from .periodic import (
    DEFAULT_GRID,
    GridParams,
    PeriodicMatrixFunction,
    evaluate,
    make_U_sigma,
    sup_norm,
    sup_norm_argmax,
)

__all__ = [
    "DegenerateLipNormError",
    "DeskQMSpace",
    "KantorovichParams",
    "KantorovichResult",
    "LipNormReport",
    "NetParams",
    "StateFunctional",
    "StateNet",
    "check_lipnorm_axioms",
    "direct_sum",
    "finite_commutative_space",
    "hausdorff",
    "lipschitz_rows",
    "max_of",
    "polyhedral_lip",
    "kantorovich",
    "kantorovich_exact_finite",
    "stage_space",
    "state_net",
]

LipGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


class DegenerateLipNormError(ValueError):
    """The Lip-norm vanishes (numerically) on a non-scalar direction."""


@dataclass(frozen=True, eq=False)
class DeskQMSpace:
    """A finite-dimensional order unit space with a Lip-norm.

    ``lip_grad(x)`` returns ``(L(x), g)`` with ``g`` a subgradient of ``L`` at
    ``x``.  ``reference`` is the dual vector of a distinguished state (the
    trace or the uniform measure) and ``diameter_bound`` a known upper bound
    on Kantorovich distances between states.
    """

    kind: str
    dim: int
    unit: np.ndarray
    lip_grad: LipGrad
    norm: Callable[[np.ndarray], float]
    reference: np.ndarray
    diameter_bound: float
    random_positive: Callable[[np.random.Generator], np.ndarray]
    start_directions: tuple[np.ndarray, ...] = ()
    info: dict = field(default_factory=dict)

    def lip(self, x) -> float:
        return self.lip_grad(np.asarray(x, dtype=float))[0]

    def project_slice(self, x: np.ndarray) -> np.ndarray:
        """Subtract the multiple of the unit that makes the reference state vanish."""
        return x - (self.reference @ x) / (self.reference @ self.unit) * self.unit


@dataclass(frozen=True, eq=False)
class StateFunctional:
    weights: np.ndarray
    label: str = ""

    def __call__(self, x) -> float:
        return float(self.weights @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class NetParams:
    grid_points: int = 4
    random_states: int = 2
    seed: int = 0


@dataclass(frozen=True, eq=False)
class StateNet:
    states: tuple[StateFunctional, ...]
    params: NetParams

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


# -- polyhedral seminorms ------------------------------------------------------


def polyhedral_lip(rows) -> LipGrad:
    """``x -> max_k |r_k . x|`` with the active row (signed) as subgradient."""
    R = np.asarray(rows, dtype=float)

    def lip_grad(x):
        v = R @ x
        k = int(np.argmax(np.abs(v)))
        return float(abs(v[k])), (1.0 if v[k] >= 0 else -1.0) * R[k]

    return lip_grad


def lipschitz_rows(D) -> np.ndarray:
    """Rows ``(e_i - e_j) / d_ij`` for ``i < j``: the Lipschitz seminorm of ``D``."""
    D = np.asarray(D, dtype=float)
    n = len(D)
    i, j = np.triu_indices(n, 1)
    R = np.zeros((len(i), n))
    R[np.arange(len(i)), i] = 1.0 / D[i, j]
    R[np.arange(len(i)), j] = -1.0 / D[i, j]
    return R


def max_of(*terms: LipGrad) -> LipGrad:
    """Pointwise max of seminorms, with the subgradient of the active term."""

    def lip_grad(x):
        best = None
        for term in terms:
            v, g = term(x)
            if best is None or v > best[0]:
                best = (v, g)
        return best

    return lip_grad


# -- finite commutative spaces ----------------------------------------------


def _check_metric(D: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(D, D.T) or np.any(np.diag(D) != 0):
        raise ValueError("distance matrix must be symmetric with zero diagonal")
    off = D[~np.eye(len(D), dtype=bool)]
    if np.any(off <= 0):
        raise ValueError("distinct points must have positive distance")
    if np.any(D[:, None, :] > D[:, :, None] + D[None, :, :] + 1e-12 * max(D.max(), 1.0)):
        raise ValueError("distance matrix violates the triangle inequality")
    return D


def finite_commutative_space(D) -> DeskQMSpace:
    """Real functions on a finite metric space with the Lipschitz seminorm."""
    D = _check_metric(D)
    n = len(D)
    inv = np.where(np.eye(n, dtype=bool), 0.0, 1.0 / np.where(D > 0, D, 1.0))

    def lip_grad(f):
        q = (f[:, None] - f[None, :]) * inv
        k = int(np.argmax(q))
        i, j = divmod(k, n)
        g = np.zeros(n)
        if q[i, j] > 0:
            g[i] += inv[i, j]
            g[j] -= inv[i, j]
        return float(max(q[i, j], 0.0)), g

    def positive(rng):
        return rng.random(n)

    return DeskQMSpace(
        kind="finite_commutative",
        dim=n,
        unit=np.ones(n),
        lip_grad=lip_grad,
        norm=lambda f: float(np.max(np.abs(f))),
        reference=np.full(n, 1.0 / n),
        diameter_bound=float(D.max()) if n > 1 else 0.0,
        random_positive=positive,
        start_directions=tuple(D[k].copy() for k in range(n)),
        info={"points": n, "distances": D},
    )


def kantorovich_exact_finite(D, mu, nu) -> float:
    """Wasserstein-1 distance by the optimal-transport linear program."""
    D = _check_metric(D)
    n = len(D)
    if n > 64:
        raise ValueError("exact transport oracle is limited to 64 points")
    mu = _check_probability(mu, n)
    nu = _check_probability(nu, n)
    rows = np.kron(np.eye(n), np.ones(n))
    cols = np.kron(np.ones(n), np.eye(n))
    res = linprog(D.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([mu, nu]),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return max(float(res.fun), 0.0)


def _check_probability(p, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n,) or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("expected a probability vector of length %d" % n)
    return p


# -- stage spaces -------------------------------------------------------------


def _hermitian_basis(n: int) -> list[np.ndarray]:
    out = []
    for p in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[p, p] = 1
        out.append(E)
    for p in range(n):
        for q in range(p + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[p, q] = E[q, p] = 1
            out.append(E)
            E = np.zeros((n, n), dtype=complex)
            E[p, q] = 1j
            E[q, p] = -1j
            out.append(E)
    return out


@dataclass(frozen=True, eq=False)
class StageCoordinates:
    """Real coordinates for self-adjoint stage elements with ``|nu| <= cutoff``.

    ``basis[i]`` is the coefficient stack (numerators ``-cutoff..cutoff``) of
    the ``i``-th basis element.
    """

    sigma: SupernaturalSequence
    m: int
    cutoff: int
    basis: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.shape[-1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def element(self, x) -> StageElement:
        data = np.tensordot(np.asarray(x, dtype=float), self.basis, axes=(0, 0))
        return StageElement(self.sigma, self.m, PeriodicMatrixFunction._build(self.n, 1, -self.cutoff, data))

    def coordinates(self, a: StageElement) -> np.ndarray:
        """Least-squares coordinates; exact for self-adjoint elements within the cutoff."""
        if a.f.nu_max > self.cutoff:
            raise ValueError(f"element has frequencies beyond the cutoff {self.cutoff}")
        target = np.stack([a.f.coefficient(nu) for nu in range(-self.cutoff, self.cutoff + 1)])
        A = self.basis.reshape(self.dim, -1)
        A = np.concatenate([A.real, A.imag], axis=1)
        b = target.reshape(-1)
        b = np.concatenate([b.real, b.imag])
        return np.linalg.lstsq(A.T, b, rcond=None)[0]


def stage_coordinates(sigma, m: int, cutoff: int) -> StageCoordinates:
    sigma = sigma if isinstance(sigma, SupernaturalSequence) else SupernaturalSequence(sigma)
    return _stage_coordinates(sigma.entries[:max(m, 1)], m, cutoff)


@lru_cache(maxsize=32)
def _stage_coordinates(prefix, m, cutoff):
    n = boxtimes(prefix, m)
    K = 2 * cutoff + 1
    herm = _hermitian_basis(n)
    stacks = []
    for E in herm:
        S = np.zeros((K, n, n), dtype=complex)
        S[cutoff] = E
        stacks.append(S)
    for nu in range(1, cutoff + 1):
        for p in range(n):
            for q in range(n):
                for c in (1.0, 1j):
                    S = np.zeros((K, n, n), dtype=complex)
                    S[cutoff + nu, p, q] = c
                    S[cutoff - nu, q, p] = np.conj(c)
                    stacks.append(S)
    return StageCoordinates(SupernaturalSequence(prefix), m, cutoff, np.stack(stacks))


def _align(fs: Sequence[PeriodicMatrixFunction], Q: int) -> tuple[int, np.ndarray]:
    layouts = [f._on_denominator(Q) for f in fs]
    live = [(lo, d) for lo, d in layouts if d.shape[0]]
    n = fs[0].n
    if not live:
        return 0, np.zeros((len(fs), 1, n, n), dtype=complex)
    lo = min(l for l, _ in live)
    hi = max(l + d.shape[0] for l, d in live)
    out = np.zeros((len(fs), hi - lo, n, n), dtype=complex)
    for i, (l, d) in enumerate(layouts):
        if d.shape[0]:
            out[i, l - lo:l - lo + d.shape[0]] = d
    return lo, out


class _LinearSupTerm:
    """``x -> sup_t ||sum_i x_i M_i(t)||`` for Hermitian ``M_i``, with subgradients."""

    def __init__(self, Q: int, lo: int, tensor: np.ndarray, gp: GridParams):
        self.Q, self.lo, self.tensor, self.gp = Q, lo, tensor, gp
        self.n = tensor.shape[-1]
        self.nums = lo + np.arange(tensor.shape[1])

    def function(self, x) -> PeriodicMatrixFunction:
        data = np.tensordot(x, self.tensor, axes=(0, 0))
        return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, data)

    def value_grad(self, x):
        f = self.function(x)
        val, t = sup_norm_argmax(f, self.gp, hermitian=True)
        M = evaluate(f, t)
        M = 0.5 * (M + M.conj().T)
        w, V = np.linalg.eigh(M)
        k = 0 if abs(w[0]) > abs(w[-1]) else len(w) - 1
        v = V[:, k]
        sign = 1.0 if w[k] >= 0 else -1.0
        phases = np.exp(2j * np.pi * self.nums * t / self.Q)
        Mi = np.tensordot(self.tensor, phases, axes=(1, 0))
        grad = sign * np.real(np.einsum("p,ipq,q->i", v.conj(), Mi, v))
        return val, grad


def stage_space(sigma, m: int, cutoff: int, gp: GridParams = DEFAULT_GRID) -> DeskQMSpace:
    """Self-adjoint elements of stage ``m`` with ``|nu| <= cutoff`` under ``L_{sigma,m}``."""
    coords = stage_coordinates(sigma, m, cutoff)
    sigma = coords.sigma
    n, dim = coords.n, coords.dim
    U = make_U_sigma(sigma, m)
    Uh = U.adjoint()
    twisted, centred = [], []
    for i in range(dim):
        b = PeriodicMatrixFunction._build(n, 1, -cutoff, coords.basis[i])
        twisted.append((Uh @ b @ U).derivative())
        tr = np.trace(coords.basis[i][cutoff]).real / n
        centred.append(b - tr * np.eye(n))
    Qd = U.Q
    lo_d, Td = _align(twisted, Qd)
    lo_n, Tn = _align(centred, 1)
    der = _LinearSupTerm(Qd, lo_d, Td, gp)
    nrm = _LinearSupTerm(1, lo_n, Tn, gp)

    def lip_grad(x):
        x = np.asarray(x, dtype=float)
        v1, g1 = der.value_grad(x)
        v2, g2 = nrm.value_grad(x)
        return (v1, g1) if v1 >= v2 else (v2, g2)

    def norm(x):
        return sup_norm(coords.element(x).f, gp)

    unit = coords.coordinates(StageElement.scalar(sigma, m))
    reference = np.array([np.trace(coords.basis[i][cutoff]).real / n for i in range(dim)])

    def positive(rng):
        G = rng.standard_normal((2 * cutoff + 1, n, n)) + 1j * rng.standard_normal((2 * cutoff + 1, n, n))
        h = PeriodicMatrixFunction._build(n, 1, 0, G[: cutoff // 2 + 1])
        a = StageElement(sigma, m, h.adjoint() @ h)
        return coords.coordinates(a)

    return DeskQMSpace(
        kind="stage",
        dim=dim,
        unit=unit,
        lip_grad=lip_grad,
        norm=norm,
        reference=reference,
        diameter_bound=2.0,
        random_positive=positive,
        info={"sigma": list(sigma.entries), "m": m, "cutoff": cutoff, "coordinates": coords, "grid": gp},
    )


def stage_state(space: DeskQMSpace, t: float, rho: np.ndarray, label: str = "") -> StateFunctional:
    """``a -> Re Tr(rho a(t))`` as a dual vector on a stage space."""
    coords: StageCoordinates = space.info["coordinates"]
    phases = np.exp(2j * np.pi * np.arange(-coords.cutoff, coords.cutoff + 1) * t)
    vals = np.tensordot(coords.basis, phases, axes=(1, 0))
    w = np.real(np.einsum("pq,iqp->i", rho, vals))
    return StateFunctional(w, label)


# -- direct sums ----------------------------------------------------------------


def direct_sum(A: DeskQMSpace, B: DeskQMSpace, lip_grad: LipGrad | None = None,
               diameter_bound: float | None = None) -> DeskQMSpace:
    """``A (+) B`` with the max norm; ``lip_grad`` defaults to ``max(L_A, L_B)``."""
    dA = A.dim

    def default_lip(x):
        va, ga = A.lip_grad(x[:dA])
        vb, gb = B.lip_grad(x[dA:])
        if va >= vb:
            return va, np.concatenate([ga, np.zeros(B.dim)])
        return vb, np.concatenate([np.zeros(dA), gb])

    def positive(rng):
        return np.concatenate([A.random_positive(rng), B.random_positive(rng)])

    return DeskQMSpace(
        kind="direct_sum",
        dim=A.dim + B.dim,
        unit=np.concatenate([A.unit, B.unit]),
        lip_grad=lip_grad or default_lip,
        norm=lambda x: max(A.norm(x[:dA]), B.norm(x[dA:])),
        reference=np.concatenate([A.reference, np.zeros(B.dim)]),
        diameter_bound=diameter_bound if diameter_bound is not None else math.inf,
        random_positive=positive,
        start_directions=tuple(np.concatenate([s, np.zeros(B.dim)]) for s in A.start_directions)
        + tuple(np.concatenate([np.zeros(dA), s]) for s in B.start_directions),
        info={"left": A, "right": B},
    )


def left_state(space: DeskQMSpace, phi: StateFunctional) -> StateFunctional:
    """``phi o pi_A`` on a direct sum."""
    B = space.info["right"]
    return StateFunctional(np.concatenate([phi.weights, np.zeros(B.dim)]), phi.label + "@A")


def right_state(space: DeskQMSpace, phi: StateFunctional) -> StateFunctional:
    """``phi o pi_B`` on a direct sum."""
    A = space.info["left"]
    return StateFunctional(np.concatenate([np.zeros(A.dim), phi.weights]), phi.label + "@B")


# -- Kantorovich engine ---------------------------------------------------------


@dataclass(frozen=True)
class KantorovichParams:
    restarts: int = 16
    iterations: int = 400
    step: float = 0.3
    decay: float = 0.98
    seed: int = 0
    polish_iterations: int = 100
    polish_rtol: float = 1e-10
    box_factor: float = 10.0
    degenerate_tol: float = 1e-12


@dataclass(frozen=True, eq=False)
class KantorovichResult:
    value: float
    maximizer: np.ndarray
    diagnostics: dict


def kantorovich(space: DeskQMSpace, phi: StateFunctional, psi: StateFunctional,
                params: KantorovichParams = KantorovichParams()) -> KantorovichResult:
    """Lower bound on ``sup{ |phi(x) - psi(x)| : L(x) <= 1 }``.

    Every reported value is ``(phi - psi)(x) / L(x)`` at an explicit ``x``,
    returned normalized to ``L(x) = 1``.  ``diagnostics["upper_bound"]`` is the
    cutting-plane LP value when the box constraint was inactive, else None.
    """
    ell = phi.weights - psi.weights
    zero = np.zeros(space.dim)
    if np.max(np.abs(ell)) <= 1e-15:
        return KantorovichResult(0.0, zero, {"restart_values": [], "spread": 0.0, "upper_bound": 0.0,
                                             "polish_iterations": 0, "cuts": 0})
    rng = np.random.default_rng(params.seed)
    starts = [ell.copy()] + [s.copy() for s in space.start_directions] + [-s for s in space.start_directions]
    while len(starts) < params.restarts:
        starts.append(rng.standard_normal(space.dim))
    starts = starts[: max(params.restarts, 1)]

    cuts: list[np.ndarray] = []
    best_val, best_x = -math.inf, zero
    restart_values = []

    def normalized(x):
        x = space.project_slice(x)
        L, g = space.lip_grad(x)
        scale = np.max(np.abs(x))
        if scale == 0:
            return None
        if L <= params.degenerate_tol * scale:
            raise DegenerateLipNormError(f"Lip-norm {L:.3e} on a non-scalar direction of size {scale:.3e}")
        x = x / L
        return x, g

    for x0 in starts:
        out = normalized(x0)
        if out is None:
            continue
        x, g = out
        cuts.append(g)
        val = ell @ x
        run_best, run_x = val, x
        eta = params.step
        for _ in range(params.iterations):
            d = space.project_slice(ell - val * g)
            nd = np.linalg.norm(d)
            if nd <= 1e-15:
                break
            out = normalized(x + eta * np.linalg.norm(x) * d / nd)
            if out is None:
                break
            x, g = out
            cuts.append(g)
            val = ell @ x
            if val > run_best:
                run_best, run_x = val, x
            eta *= params.decay
        restart_values.append(float(run_best))
        if run_best > best_val:
            best_val, best_x = run_best, run_x

    upper, used = None, 0
    if params.polish_iterations > 0 and cuts:
        best_val, best_x, upper, used = _polish(space, ell, cuts, best_val, best_x, params)

    spread = float(max(restart_values) - min(restart_values)) if restart_values else 0.0
    value = max(float(best_val), 0.0)
    return KantorovichResult(value, best_x, {
        "restart_values": restart_values,
        "spread": spread,
        "upper_bound": upper,
        "polish_iterations": used,
        "cuts": len(cuts),
    })


def _polish(space, ell, cuts, best_val, best_x, params):
    """Cutting-plane refinement on the reference slice inside a box."""
    B = params.box_factor * max(float(np.max(np.abs(best_x))), 1.0)
    A_eq = space.reference[None, :]
    G = [g for g in cuts]
    upper = None
    used = 0
    for used in range(1, params.polish_iterations + 1):
        res = linprog(-ell, A_ub=np.array(G), b_ub=np.ones(len(G)), A_eq=A_eq, b_eq=[0.0],
                      bounds=(-B, B), method="highs")
        if not res.success:
            break
        x = res.x
        lp_val = -float(res.fun)
        on_box = np.max(np.abs(x)) >= B * (1 - 1e-9)
        L, g = space.lip_grad(x)
        if L > 0:
            val = float(ell @ x) / L
            if val > best_val:
                best_val, best_x = val, x / L
        if not on_box:
            upper = lp_val if upper is None else min(upper, lp_val)
        if upper is not None and upper - best_val <= params.polish_rtol * max(abs(upper), 1e-12):
            break
        G.append(g)
    return best_val, best_x, upper, used


# -- nets, Hausdorff, axioms ------------------------------------------------------


def state_net(space: DeskQMSpace, params: NetParams = NetParams()) -> StateNet:
    """Finite surrogate for the state space.

    Finite commutative spaces: all Dirac states and the uniform state.  Stage
    spaces: at each of ``grid_points`` times, the pure basis states, the
    maximally mixed state and ``random_states`` seeded rank-one states; plus
    the trace.
    """
    if space.kind == "finite_commutative":
        n = space.dim
        states = [StateFunctional(np.eye(n)[k], f"delta{k}") for k in range(n)]
        states.append(StateFunctional(np.full(n, 1.0 / n), "uniform"))
        return StateNet(tuple(states), params)
    if space.kind == "stage":
        coords: StageCoordinates = space.info["coordinates"]
        n = coords.n
        rng = np.random.default_rng(params.seed)
        states = []
        for k in range(params.grid_points):
            t = k / params.grid_points
            for p in range(n):
                rho = np.zeros((n, n), dtype=complex)
                rho[p, p] = 1
                states.append(stage_state(space, t, rho, f"t={t:g},e{p}"))
            states.append(stage_state(space, t, np.eye(n) / n, f"t={t:g},mixed"))
            for r in range(params.random_states):
                v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                v /= np.linalg.norm(v)
                states.append(stage_state(space, t, np.outer(v, v.conj()), f"t={t:g},rand{r}"))
        states.append(StateFunctional(space.reference.copy(), "tau"))
        return StateNet(tuple(states), params)
    raise ValueError(f"no state net for spaces of kind {space.kind!r}")


def hausdorff(metric: Callable, A: Sequence, B: Sequence) -> float:
    """``max(sup_a inf_b d(a,b), sup_b inf_a d(a,b))``."""
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    M = np.array([[metric(a, b) for b in B] for a in A], dtype=float)
    return float(max(M.min(axis=1).max(), M.min(axis=0).max()))


@dataclass(frozen=True)
class LipNormReport:
    entries: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return all(e["passed"] for e in self.entries)

    def __getitem__(self, name: str) -> dict:
        for e in self.entries:
            if e["name"] == name:
                return e
        raise KeyError(name)


def check_lipnorm_axioms(space: DeskQMSpace, seed: int = 0, samples: int = 20, tol: float = 1e-9,
                         net: NetParams | None = None,
                         kparams: KantorovichParams | None = None) -> LipNormReport:
    """Sampled evidence that ``space.lip`` is a Lip-norm.

    Failures are recorded as report entries, never raised.  The diameter check
    runs the Kantorovich engine on every pair of the state net; pass ``net``
    and ``kparams`` to size it.
    """
    rng = np.random.default_rng(seed)
    entries = []
    lu = space.lip(space.unit)
    entries.append({"name": "unit_in_kernel", "passed": bool(lu <= tol), "measured": lu})

    worst_h, worst_t = 0.0, -math.inf
    for _ in range(samples):
        x, y = rng.standard_normal(space.dim), rng.standard_normal(space.dim)
        c = rng.standard_normal()
        worst_h = max(worst_h, abs(space.lip(c * x) - abs(c) * space.lip(x)) / max(1.0, space.lip(x)))
        worst_t = max(worst_t, space.lip(x + y) - space.lip(x) - space.lip(y))
    entries.append({"name": "homogeneity", "passed": bool(worst_h <= 1e-8), "measured": worst_h})
    entries.append({"name": "triangle", "passed": bool(worst_t <= tol), "measured": worst_t})

    kernel = math.inf
    for _ in range(samples):
        x = space.project_slice(rng.standard_normal(space.dim))
        nx = space.norm(x)
        if nx > 0:
            kernel = min(kernel, space.lip(x) / nx)
    entries.append({"name": "kernel_is_scalars", "passed": bool(kernel > 10 * tol), "measured": kernel})

    worst_pos = 0.0
    states = state_net(space, net or NetParams(seed=seed))
    for phi in states:
        worst_pos = max(worst_pos, abs(phi(space.unit) - 1))
        for _ in range(5):
            worst_pos = max(worst_pos, -phi(space.random_positive(rng)))
    entries.append({"name": "net_states_unital_positive", "passed": bool(worst_pos <= 1e-9), "measured": worst_pos})

    kp = kparams or KantorovichParams(seed=seed)
    diam = 0.0
    sts = list(states)
    try:
        for i in range(len(sts)):
            for j in range(i + 1, len(sts)):
                diam = max(diam, kantorovich(space, sts[i], sts[j], kp).value)
        passed = diam <= space.diameter_bound + 1e-6
    except DegenerateLipNormError:
        diam, passed = math.inf, False
    entries.append({"name": "net_diameter", "passed": bool(passed), "measured": diam,
                    "bound": space.diameter_bound})
    return LipNormReport(tuple(entries))
