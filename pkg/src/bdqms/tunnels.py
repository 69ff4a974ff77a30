"""Bridges, tunnels, extents, and chained distance bounds.

Element-level objects (:class:`Bridge`, :class:`Tunnel`, the modified
Lip-norms) work with any elements supporting subtraction and a norm, so the
same code handles Bunce-Deddens stages and commutative toys.  Extents need
Kantorovich distances, so they run on a coordinate
:class:`~bdqms.ou_core.DeskQMSpace` for the direct sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .bunce_deddens import (
    NORM_COEFFICIENTS,
    SupernaturalSequence,
    alpha,
    alpha_inverse,
    cond_expectation,
    lip_S,
    random_element,
)
from .ou_core import (
    DeskQMSpace,
    KantorovichParams,
    StateFunctional,
    StateNet,
    direct_sum,
    finite_commutative_space,
    hausdorff,
    kantorovich,
    _check_metric,
    kantorovich_exact_finite,
    left_state,
    lipschitz_rows,
    max_of,
    polyhedral_lip,
    right_state,
)
from .periodic import DEFAULT_GRID, GridParams, sup_norm

__all__ = [
    "BaireDistance",
    "BilipLipNorm",
    "BoundLink",
    "BoundReport",
    "Bridge",
    "BridgeLengthEstimate",
    "CondExpLipNorm",
    "Tunnel",
    "baire_distance",
    "baire_lipschitz_check",
    "bd_bridge_length_estimate",
    "bridge_length_estimate",
    "check_evident_tunnel",
    "cond_exp_toy",
    "distq_chain_bound",
    "evident_tunnel",
    "exact_extent_glued",
    "glued_metric_toy",
    "modified_lipnorm_bilip",
    "modified_lipnorm_cond_exp",
    "self_tunnel_toy",
    "tunnel_extent_estimate",
]


# -- modified Lip-norms -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CondExpLipNorm:
    """``a -> max{ L(a), ||a - E(a)|| / eps }``."""

    L: Callable
    E: Callable
    eps: float
    norm: Callable

    def terms(self, a) -> tuple[float, float]:
        return self.L(a), self.norm(a - self.E(a)) / self.eps

    def __call__(self, a) -> float:
        return max(self.terms(a))


def modified_lipnorm_cond_exp(L, E, eps: float, norm) -> CondExpLipNorm:
    if not eps > 0:
        raise ValueError("eps must be positive")
    return CondExpLipNorm(L, E, float(eps), norm)


@dataclass(frozen=True, eq=False)
class BilipLipNorm:
    """``b -> max{ L_B(b), ||b - E(b)|| / eps, L_A(alpha^{-1}(E b)) }``.

    ``warnings`` lists sampled hypothesis violations; the evaluator still
    works when it is nonempty.  ``m_alpha`` is the sampled lower ratio
    ``min L_B(alpha(a)) / L_A(a)``.
    """

    L_A: Callable
    L_B: Callable
    alpha: Callable
    alpha_inv: Callable
    E: Callable
    eps: float
    norm: Callable
    m_alpha: float | None = None
    warnings: tuple[str, ...] = ()

    @property
    def hypotheses_ok(self) -> bool:
        return not self.warnings

    def terms(self, b) -> tuple[float, float, float]:
        Eb = self.E(b)
        return self.L_B(b), self.norm(b - Eb) / self.eps, self.L_A(self.alpha_inv(Eb))

    def __call__(self, b) -> float:
        return max(self.terms(b))


def modified_lipnorm_bilip(L_A, L_B, alpha_map, alpha_inv, E, eps: float, norm,
                           samples_A: Sequence = (), samples_B: Sequence = (),
                           tol: float = 1e-9) -> BilipLipNorm:
    """Build the three-term Lip-norm and sample its hypotheses.

    Checked on the samples: ``L_B(alpha(a)) <= L_A(a)``, a positive lower
    ratio ``m_alpha``, and ``L_B(E(b)) <= L_B(b)``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    warnings = []
    ratios = []
    for a in samples_A:
        la, lb = L_A(a), L_B(alpha_map(a))
        if lb > la + tol * max(1.0, la):
            warnings.append(f"L_B(alpha(a)) = {lb:.6g} exceeds L_A(a) = {la:.6g}")
        if la > tol:
            ratios.append(lb / la)
    m_alpha = min(ratios) if ratios else None
    if m_alpha is not None and m_alpha <= 0:
        warnings.append("sampled lower Lipschitz ratio is not positive")
    for b in samples_B:
        lb, leb = L_B(b), L_B(E(b))
        if leb > lb + tol * max(1.0, lb):
            warnings.append(f"L_B(E(b)) = {leb:.6g} exceeds L_B(b) = {lb:.6g}")
    return BilipLipNorm(L_A, L_B, alpha_map, alpha_inv, E, float(eps), norm, m_alpha, tuple(warnings))


# -- bridges and tunnels -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Bridge:
    """``(D, pivot, embed, id_D)`` with the codomain playing the role of ``D``.

    Only the identity pivot (``pivot=None``) has a length implementation.
    """

    embed: Callable
    norm: Callable
    pivot: Any = None
    domain: Any = None
    codomain: Any = None

    @property
    def is_evident(self) -> bool:
        return self.pivot is None

    def distance(self, a, b) -> float:
        """``||embed(a) pivot - pivot b||``."""
        if not self.is_evident:
            raise NotImplementedError("only identity pivots are supported")
        return self.norm(self.embed(a) - b)


@dataclass(frozen=True, eq=False)
class Tunnel:
    """A Lip-norm on pairs ``(a, b)`` with the two coordinate projections.

    ``space`` is the coordinate model of the direct sum, when one exists.
    """

    lip: Callable
    r: float | None = None
    space: DeskQMSpace | None = None
    left: Callable = field(default=lambda pair: pair[0])
    right: Callable = field(default=lambda pair: pair[1])

    def __call__(self, a, b) -> float:
        return self.lip(a, b)


def evident_tunnel(bridge: Bridge, L_A, L_B, r: float) -> Tunnel:
    """``(a, b) -> max{ L_A(a), L_B(b), ||embed(a) - b|| / r }``."""
    if not r > 0:
        raise ValueError("r must be positive")

    def lip(a, b):
        return max(L_A(a), L_B(b), bridge.distance(a, b) / r)

    return Tunnel(lip, r=float(r))


def check_evident_tunnel(tunnel: Tunnel, L_A, L_B, samples_A: Sequence, partner_A: Callable,
                         samples_B: Sequence, partner_B: Callable, tol: float = 1e-9) -> dict:
    """Sampled quantum-isometry test for both coordinate projections.

    Each sample is scaled into its unit ball; its partner must keep the
    tunnel Lip-norm at most ``1 + tol``.  The lower side
    ``tunnel(a, b) >= max(L_A(a), L_B(b))`` is checked on the same pairs.
    """
    worst_upper, worst_lower = 0.0, 0.0
    count = 0
    for samples, partner, lip, first in ((samples_A, partner_A, L_A, True), (samples_B, partner_B, L_B, False)):
        for x in samples:
            lx = lip(x)
            if lx > 0:
                x = x * (1.0 / lx)
            y = partner(x)
            a, b = (x, y) if first else (y, x)
            val = tunnel(a, b)
            worst_upper = max(worst_upper, val - 1.0)
            worst_lower = max(worst_lower, max(L_A(a), L_B(b)) - val)
            count += 1
    return {
        "samples": count,
        "worst_excess": worst_upper,
        "worst_lower_violation": worst_lower,
        "passed": bool(worst_upper <= tol and worst_lower <= tol),
    }


@dataclass(frozen=True)
class BridgeLengthEstimate:
    """Sampled sup of candidate distances; never a certified length."""

    empirical_sup: float
    forward: tuple[dict, ...]
    backward: tuple[dict, ...]

    @property
    def per_sample(self) -> tuple[dict, ...]:
        return self.forward + self.backward


def bridge_length_estimate(bridge: Bridge, L_A, L_B, candidate_ab: Callable | None,
                           candidate_ba: Callable | None, sample_A: Callable | None,
                           sample_B: Callable | None, samples: int = 200, seed: int = 0) -> BridgeLengthEstimate:
    """Two-sided sampled estimate of the bridge length.

    ``sample_A(rng)`` draws an element of the domain, which is scaled to
    ``L_A = 1`` and paired with ``candidate_ab`` of it; symmetrically for the
    codomain.  Each record holds the candidate's Lip-norm (it must be <= 1
    for the record to bound the inner inf) and the achieved distance.
    """
    children = np.random.SeedSequence(seed).spawn(2 * samples)
    forward, backward = [], []
    if candidate_ab is not None and sample_A is not None:
        for i in range(samples):
            a = sample_A(np.random.default_rng(children[i]))
            la = L_A(a)
            if la > 0:
                a = a * (1.0 / la)
            b = candidate_ab(a)
            forward.append({"lip_sample": L_A(a), "lip_candidate": L_B(b), "distance": bridge.distance(a, b)})
    if candidate_ba is not None and sample_B is not None:
        for i in range(samples):
            b = sample_B(np.random.default_rng(children[samples + i]))
            lb = L_B(b)
            if lb > 0:
                b = b * (1.0 / lb)
            a = candidate_ba(b)
            backward.append({"lip_sample": L_B(b), "lip_candidate": L_A(a), "distance": bridge.distance(a, b)})
    dists = [r["distance"] for r in forward + backward]
    return BridgeLengthEstimate(max(dists) if dists else 0.0, tuple(forward), tuple(backward))


def bd_bridge_length_estimate(sigma, m: int, samples: int = 200, seed: int = 0, cutoff: int = 3,
                              gp: GridParams = DEFAULT_GRID, norm_coefficient: str = "corrected",
                              directions: str = "both") -> BridgeLengthEstimate:
    """Evident bridge from stage ``m`` into stage ``m + 1`` under the ``S`` norms.

    Candidates: ``a -> alpha(a)`` forward and ``b -> alpha^{-1}(E b)`` backward.
    """
    sigma = sigma if isinstance(sigma, SupernaturalSequence) else SupernaturalSequence(sigma)
    if norm_coefficient not in NORM_COEFFICIENTS:
        raise ValueError(f"norm_coefficient must be one of {NORM_COEFFICIENTS}")

    def L_A(a):
        return lip_S(sigma, m, a, gp, norm_coefficient)

    def L_B(b):
        return lip_S(sigma, m + 1, b, gp, norm_coefficient)

    bridge = Bridge(embed=lambda a: alpha(sigma, m, a, gp), norm=lambda x: sup_norm(x.f, gp),
                    domain=(sigma, m), codomain=(sigma, m + 1))

    def sample_A(rng):
        return random_element(sigma, m, cutoff, rng)

    def sample_B(rng):
        return random_element(sigma, m + 1, cutoff, rng)

    forward = directions in ("both", "forward")
    backward = directions in ("both", "backward")
    return bridge_length_estimate(
        bridge, L_A, L_B,
        (lambda a: alpha(sigma, m, a, gp)) if forward else None,
        (lambda b: alpha_inverse(sigma, m + 1, cond_expectation(sigma, m + 1, b, gp), gp)) if backward else None,
        sample_A if forward else None, sample_B if backward else None, samples, seed)


# -- extents ---------------------------------------------------------------------


def tunnel_extent_estimate(tunnel: Tunnel, net_A: StateNet | Sequence[StateFunctional],
                           net_B: StateNet | Sequence[StateFunctional],
                           params: KantorovichParams = KantorovichParams(),
                           sides: tuple[str, str] = ("left", "right")) -> float:
    """Net-restricted extent: Hausdorff distance between the two pulled-back nets.

    Pairwise distances are Kantorovich values under the tunnel's Lip-norm on
    ``tunnel.space``, so the result is an estimate from below per pair.
    ``sides`` chooses the factor each net is pulled back from.
    """
    space = tunnel.space
    if space is None:
        raise ValueError("extent estimates need a coordinate model of the tunnel")
    pull = {"left": left_state, "right": right_state}
    A = [pull[sides[0]](space, phi) for phi in net_A]
    B = [pull[sides[1]](space, phi) for phi in net_B]
    if not A or not B:
        raise ValueError("state nets must be nonempty")
    return hausdorff(lambda p, q: kantorovich(space, p, q, params).value, A, B)


def _linear_sup(M: np.ndarray, scale: float):
    """``x -> max_k |M_k x| * scale`` as a polyhedral seminorm."""
    return polyhedral_lip(np.asarray(M, dtype=float) * scale)


def cond_exp_toy(eps: float, distance: float = 1.0):
    """Two-point space against its constants, glued by the conditional-expectation norm.

    Returns ``(tunnel, net_A, net_B)``.  ``A`` holds functions on two points at
    ``distance`` with ``L_eps(a) = max{ |a_0 - a_1| / d, ||a - mean(a)|| / eps }``;
    ``B`` holds the constants; the tunnel norm adds ``||b 1 - a|| / eps``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    A0 = finite_commutative_space([[0.0, distance], [distance, 0.0]])
    B0 = finite_commutative_space([[0.0]])
    diff = np.array([[1.0, -1.0, 0.0]])
    lip = max_of(
        _linear_sup(diff, 1.0 / distance),
        _linear_sup(diff, 0.5 / eps),
        _linear_sup(np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]]), 1.0 / eps),
    )
    space = direct_sum(A0, B0, lip_grad=lip)
    pair_lip = lambda a, b: space.lip(np.concatenate([a, b]))
    tunnel = Tunnel(pair_lip, r=float(eps), space=space)
    net_A = [StateFunctional(np.array([1.0, 0.0]), "delta0"), StateFunctional(np.array([0.0, 1.0]), "delta1"),
             StateFunctional(np.array([0.5, 0.5]), "uniform")]
    net_B = [StateFunctional(np.array([1.0]), "point")]
    return tunnel, net_A, net_B


def glued_metric_toy(points_X, points_Y):
    """Commutative tunnel from a finite metric on ``X`` disjoint-union ``Y``.

    The tunnel Lip-norm is the Lipschitz seminorm of the glued Euclidean
    metric, which restricts to the Lipschitz seminorms of ``X`` and ``Y``.
    Returns ``(tunnel, net_X, net_Y, D)`` with Dirac nets and the full
    distance matrix.
    """
    P = np.vstack([np.asarray(points_X, dtype=float), np.asarray(points_Y, dtype=float)])
    nx = len(points_X)
    D = _check_metric(np.linalg.norm(P[:, None] - P[None, :], axis=-1))
    A = finite_commutative_space(D[:nx, :nx])
    B = finite_commutative_space(D[nx:, nx:])
    space = direct_sum(A, B, lip_grad=polyhedral_lip(lipschitz_rows(D)), diameter_bound=float(D.max()))
    tunnel = Tunnel(lambda a, b: space.lip(np.concatenate([a, b])), space=space)
    net_X = [StateFunctional(np.eye(A.dim)[k], f"x{k}") for k in range(A.dim)]
    net_Y = [StateFunctional(np.eye(B.dim)[k], f"y{k}") for k in range(B.dim)]
    return tunnel, net_X, net_Y, D


def self_tunnel_toy(D, r: float):
    """Evident tunnel from a finite metric space to a copy of itself.

    ``L(a, b) = max{ L(a), L(b), ||a - b|| / r }`` on functions on two copies.
    Returns ``(tunnel, net)`` with the Dirac net of one copy.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    A = finite_commutative_space(D)
    n = A.dim
    rows = lipschitz_rows(D)
    zeros = np.zeros_like(rows)
    gap = np.hstack([np.eye(n), -np.eye(n)]) / r
    lip = polyhedral_lip(np.vstack([np.hstack([rows, zeros]), np.hstack([zeros, rows]), gap]))
    space = direct_sum(A, A, lip_grad=lip, diameter_bound=A.diameter_bound)
    tunnel = Tunnel(lambda a, b: space.lip(np.concatenate([a, b])), r=float(r), space=space)
    return tunnel, [StateFunctional(np.eye(n)[k], f"x{k}") for k in range(n)]


def exact_extent_glued(D: np.ndarray, nx: int) -> float:
    """Hausdorff distance of the Dirac nets under the exact transport metric on ``X u Y``."""
    n = len(D)
    eye = np.eye(n)
    return hausdorff(lambda i, j: kantorovich_exact_finite(D, eye[i], eye[j]), range(nx), range(nx, n))


# -- bound arithmetic ---------------------------------------------------------------


@dataclass(frozen=True)
class BoundLink:
    source: str
    target: str
    tag: str
    constant: Fraction


@dataclass(frozen=True)
class BoundReport:
    """A chained upper bound; ``total`` is the sum of the link constants."""

    links: tuple[BoundLink, ...]
    total: Fraction
    metadata: dict = field(default_factory=dict)

    def rederive(self) -> Fraction:
        return sum((l.constant for l in self.links), Fraction(0))

    @property
    def consistent(self) -> bool:
        return self.rederive() == self.total

    def part(self, tag_prefix: str) -> Fraction:
        return sum((l.constant for l in self.links if l.tag.startswith(tag_prefix)), Fraction(0))


TAG_CONSECUTIVE = "consecutive stages: 4 beta(j)"
TAG_TAIL = "stage to limit: 4 sum_{j>=n} beta(j)"
TAG_SHARED = "shared stage: identical spaces"


def beta(j: int) -> Fraction:
    return Fraction(1, 2 ** j)


def tail_constant(n: int) -> Fraction:
    """``4 sum_{j >= n} 2^-j = 2^(3 - n)``, exact."""
    return 4 * 2 * beta(n)


def distq_chain_bound(sigma, n: int, M: int, norm_coefficient: str = "corrected") -> BoundReport:
    """Bound from stage ``n`` to the limit through stage ``M``.

    Consecutive links ``j -> j + 1`` for ``n <= j < M`` carry ``4 * 2^-j``; the
    final link from stage ``M`` to the limit carries ``2^(3 - M)``.  The total
    telescopes to ``2^(3 - n)``.
    """
    sigma = sigma if isinstance(sigma, SupernaturalSequence) else SupernaturalSequence(sigma)
    if not 0 <= n <= M <= len(sigma):
        raise ValueError(f"need 0 <= n <= M <= {len(sigma)}, got n={n}, M={M}")
    links = [BoundLink(f"stage {j}", f"stage {j + 1}", TAG_CONSECUTIVE, 4 * beta(j)) for j in range(n, M)]
    links.append(BoundLink(f"stage {M}", "limit", TAG_TAIL, tail_constant(M)))
    total = sum((l.constant for l in links), Fraction(0))
    return BoundReport(tuple(links), total, {
        "sigma": list(sigma.entries), "from_stage": n, "to_stage": M,
        "beta": "2^-j", "norm_coefficient": norm_coefficient,
    })


@dataclass(frozen=True)
class BaireDistance:
    value: Fraction
    first_difference: int | None
    prefix_equal: bool
    compared: int
    indexing: str = "1-based"

    def __float__(self):
        return float(self.value)


def baire_distance(x, y) -> BaireDistance:
    """``2^-m`` for the first index ``m`` (counting from 1) where ``x`` and ``y`` differ.

    Only the common prefix is compared; equal prefixes give 0 with
    ``prefix_equal`` set.
    """
    xs = tuple(getattr(x, "entries", x))
    ys = tuple(getattr(y, "entries", y))
    depth = min(len(xs), len(ys))
    for m in range(1, depth + 1):
        if xs[m - 1] != ys[m - 1]:
            return BaireDistance(Fraction(1, 2 ** m), m, False, depth)
    return BaireDistance(Fraction(0), None, True, depth)


def baire_lipschitz_check(x, y, depth: int | None = None, samples: int = 4, seed: int = 0,
                          cutoff: int = 2, gp: GridParams = DEFAULT_GRID) -> dict:
    """Chain bound between the two limits against ``32 d(x, y)``.

    With the first difference at index ``n`` the stages ``0..n-1`` coincide.
    The chain runs from the limit for ``x`` down to stage ``n - 1``, across
    the shared stage at cost 0, and up to the limit for ``y``; each tail
    costs ``2^(3 - (n - 1))``, so the total is ``32 * 2^-n`` exactly.
    Evaluator agreement at the shared stages is sampled.
    """
    x = x if isinstance(x, SupernaturalSequence) else SupernaturalSequence(x)
    y = y if isinstance(y, SupernaturalSequence) else SupernaturalSequence(y)
    if depth is not None:
        x, y = x.prefix(min(depth, len(x))), y.prefix(min(depth, len(y)))
    d = baire_distance(x, y)
    if d.prefix_equal:
        return {"distance": d, "prefix_equal": True, "report": None, "bound": Fraction(0),
                "lipschitz_bound": Fraction(0), "ratio": None, "passed": True, "max_discrepancy": 0.0}
    shared = d.first_difference - 1
    links = (
        BoundLink("limit x", f"stage {shared}", TAG_TAIL, tail_constant(shared)),
        BoundLink(f"stage {shared} of x", f"stage {shared} of y", TAG_SHARED, Fraction(0)),
        BoundLink(f"stage {shared}", "limit y", TAG_TAIL, tail_constant(shared)),
    )
    total = sum((l.constant for l in links), Fraction(0))
    report = BoundReport(links, total, {"x": list(x.entries), "y": list(y.entries), "indexing": d.indexing,
                                        "shared_stages": shared})
    worst = 0.0
    for m in range(0, shared + 1):
        for k in range(samples):
            a = random_element(x, m, cutoff, [seed, m, k])
            b = random_element(y, m, cutoff, [seed, m, k])
            sx = lip_S(x, m, a, gp)
            sy = lip_S(y, m, b, gp)
            worst = max(worst, abs(sx - sy))
    lipschitz_bound = 32 * d.value
    return {
        "distance": d,
        "prefix_equal": False,
        "report": report,
        "bound": total,
        "lipschitz_bound": lipschitz_bound,
        "ratio": total / lipschitz_bound,
        "max_discrepancy": worst,
        "passed": bool(total <= lipschitz_bound and worst < 1e-9),
    }
