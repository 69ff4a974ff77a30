"""Finite stages of a Bunce-Deddens inductive sequence.

Stage ``m`` of a sequence ``sigma`` is the circle algebra of 1-periodic
functions with values in ``M_n`` with ``n = sigma_1 * ... * sigma_m``.  The
twisted embeddings, the conditional expectation back onto the previous
stage, the trace, and the Lip-norms ``L`` and ``S`` all act on the Fourier
coefficients of :class:`~bdqms.periodic.PeriodicMatrixFunction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .periodic import (
    DEFAULT_GRID,
    GridParams,
    PeriodicMatrixFunction,
    block_diag,
    constant,
    evaluate,
    is_one_periodic,
    lipschitz_seminorm,
    make_U_sigma,
    rescale_compose,
    sup_norm,
)

__all__ = [
    "NORM_COEFFICIENTS",
    "NotInImageError",
    "StageConstants",
    "StageElement",
    "SupernaturalSequence",
    "alpha",
    "alpha_inverse",
    "block_F",
    "block_diag_D",
    "boxtimes",
    "cond_expectation",
    "lip_L",
    "lip_S",
    "random_element",
    "stage_constants",
    "trace_tau",
]

NORM_COEFFICIENTS = ("corrected", "literal")


class NotInImageError(ValueError):
    """Raised when an element is not (numerically) in the image of the embedding."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"element is not in the image of the embedding: residual {residual:.3e} > {tol:.1e}")
        self.residual = residual
        self.tol = tol


@dataclass(frozen=True)
class SupernaturalSequence:
    """A finite prefix of a sequence of integers ``>= 2``, read 1-indexed."""

    entries: tuple[int, ...]

    def __init__(self, entries: Sequence[int]):
        entries = tuple(int(e) for e in entries)
        if not entries:
            raise ValueError("sequence must be nonempty")
        bad = [e for e in entries if e < 2]
        if bad:
            raise ValueError(f"entries must be >= 2, got {bad}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, m: int) -> int:
        if not 1 <= m <= len(self.entries):
            raise IndexError(f"index {m} outside 1..{len(self.entries)}")
        return self.entries[m - 1]

    def boxtimes(self, m: int) -> int:
        return boxtimes(self, m)

    def prefix(self, m: int) -> "SupernaturalSequence":
        return SupernaturalSequence(self.entries[:m])

    def __str__(self):
        return "(" + ",".join(map(str, self.entries)) + ")"


def _as_sigma(sigma) -> SupernaturalSequence:
    return sigma if isinstance(sigma, SupernaturalSequence) else SupernaturalSequence(sigma)


def boxtimes(sigma, m: int) -> int:
    """Product of the first ``m`` entries; 1 for ``m = 0``."""
    sigma = _as_sigma(sigma)
    if not 0 <= m <= len(sigma):
        raise ValueError(f"stage {m} outside 0..{len(sigma)}")
    return math.prod(sigma.entries[:m])


@dataclass(frozen=True)
class StageElement:
    """A 1-periodic function in stage ``m`` of ``sigma``."""

    sigma: SupernaturalSequence
    m: int
    f: PeriodicMatrixFunction

    def __post_init__(self):
        object.__setattr__(self, "sigma", _as_sigma(self.sigma))
        n = boxtimes(self.sigma, self.m)
        if self.f.n != n:
            raise ValueError(f"stage {self.m} has order {n}, got {self.f.n}")
        if not is_one_periodic(self.f):
            raise ValueError("stage elements must be 1-periodic")
        if self.f.Q != 1:
            object.__setattr__(self, "f", self.f.to_one_periodic())

    @property
    def n(self) -> int:
        return self.f.n

    @classmethod
    def scalar(cls, sigma, m: int, c: complex = 1.0) -> "StageElement":
        n = boxtimes(sigma, m)
        return cls(sigma, m, constant(c * np.eye(n)))

    def _same_stage(self, other: "StageElement"):
        if self.sigma.entries[: self.m] != other.sigma.entries[: other.m] or self.m != other.m:
            raise ValueError("elements live in different stages")

    def _wrap(self, f):
        return StageElement(self.sigma, self.m, f)

    def __add__(self, other):
        if isinstance(other, StageElement):
            self._same_stage(other)
            return self._wrap(self.f + other.f)
        return self._wrap(self.f + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, StageElement):
            self._same_stage(other)
            return self._wrap(self.f - other.f)
        return self._wrap(self.f - other)

    def __neg__(self):
        return self._wrap(-self.f)

    def __mul__(self, c):
        if isinstance(c, StageElement):
            return NotImplemented
        return self._wrap(self.f * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._wrap(self.f / c)

    def __matmul__(self, other: "StageElement"):
        self._same_stage(other)
        return self._wrap(self.f @ other.f)

    def adjoint(self) -> "StageElement":
        return self._wrap(self.f.adjoint())

    def jordan(self, other: "StageElement") -> "StageElement":
        """``(ab + ba) / 2``."""
        return (self @ other + other @ self) * 0.5

    def lie(self, other: "StageElement") -> "StageElement":
        """``(ab - ba) / 2i``."""
        return (self @ other - other @ self) * (1 / 2j)

    def norm(self, gp: GridParams = DEFAULT_GRID) -> float:
        return sup_norm(self.f, gp)

    def is_selfadjoint(self, tol: float = DEFAULT_GRID.tol) -> bool:
        return self.f.is_selfadjoint(tol)

    def __call__(self, t):
        return evaluate(self.f, t)


def _check_stage(sigma: SupernaturalSequence, m: int):
    if not 0 <= m <= len(sigma):
        raise ValueError(f"stage {m} outside 0..{len(sigma)}")


def alpha(sigma, m: int, a: StageElement, gp: GridParams = DEFAULT_GRID) -> StageElement:
    """Embed stage ``m`` into stage ``m + 1``.

    ``alpha(a)(t) = U(t) diag_j a((t + j) / s) U(t)^*`` with ``s = sigma_{m+1}``
    and ``U = U_{sigma, m+1}``.
    """
    sigma = _as_sigma(sigma)
    if a.m != m:
        raise ValueError(f"element is at stage {a.m}, not {m}")
    if m + 1 > len(sigma):
        raise ValueError(f"no stage {m + 1} for a sequence of length {len(sigma)}")
    s = sigma[m + 1]
    blocks = block_diag([rescale_compose(a.f, s, j) for j in range(s)])
    U = make_U_sigma(sigma, m + 1)
    out = (U @ blocks @ U.adjoint()).to_one_periodic(gp.tol)
    return StageElement(sigma, m + 1, out)


def _block_size(sigma: SupernaturalSequence, m: int) -> tuple[int, int]:
    if not 1 <= m <= len(sigma):
        raise ValueError(f"stage {m} outside 1..{len(sigma)}")
    return boxtimes(sigma, m - 1), sigma[m]


def block_diag_D(sigma, m: int, M: np.ndarray) -> np.ndarray:
    """Keep the ``sigma_m`` diagonal blocks of order ``boxtimes(sigma, m - 1)``."""
    sigma = _as_sigma(sigma)
    b, s = _block_size(sigma, m)
    M = np.asarray(M)
    if M.shape[-2:] != (b * s, b * s):
        raise ValueError(f"expected matrices of order {b * s}, got {M.shape[-2:]}")
    out = np.zeros_like(M)
    for j in range(s):
        sl = slice(j * b, (j + 1) * b)
        out[..., sl, sl] = M[..., sl, sl]
    return out


def block_F(sigma, m: int, j: int, M: np.ndarray) -> np.ndarray:
    """Diagonal block ``(j, j)``, 1-indexed."""
    sigma = _as_sigma(sigma)
    b, s = _block_size(sigma, m)
    M = np.asarray(M)
    if M.shape[-2:] != (b * s, b * s):
        raise ValueError(f"expected matrices of order {b * s}, got {M.shape[-2:]}")
    if not 1 <= j <= s:
        raise ValueError(f"block index {j} outside 1..{s}")
    sl = slice((j - 1) * b, j * b)
    return M[..., sl, sl]


def _twisted(sigma, m, f: PeriodicMatrixFunction) -> PeriodicMatrixFunction:
    U = make_U_sigma(sigma, m)
    return U.adjoint() @ f @ U


def _diag_part(sigma, m, a: StageElement) -> PeriodicMatrixFunction:
    """``D(U^* a U)``, computed coefficient-wise."""
    return _twisted(sigma, m, a.f).map_coefficients(lambda C: block_diag_D(sigma, m, C))


def cond_expectation(sigma, m: int, a: StageElement, gp: GridParams = DEFAULT_GRID) -> StageElement:
    """``E(a) = U D(U^* a U) U^*``, the expectation onto the image of the previous stage."""
    sigma = _as_sigma(sigma)
    if m < 1:
        raise ValueError("conditional expectation needs m >= 1")
    if a.m != m:
        raise ValueError(f"element is at stage {a.m}, not {m}")
    U = make_U_sigma(sigma, m)
    out = (U @ _diag_part(sigma, m, a) @ U.adjoint()).to_one_periodic(gp.tol)
    return StageElement(sigma, m, out)


def alpha_inverse(sigma, m: int, b: StageElement, gp: GridParams = DEFAULT_GRID,
                  check: bool = True) -> StageElement:
    """Recover ``f`` at stage ``m - 1`` with ``alpha(f) = E(b)``.

    The block-diagonal part of ``U^* b U`` holds ``f((t + j) / s)`` in block
    ``j + 1``.  We sample ``f`` on a power-of-two grid of ``[0, 1)`` by reading
    block ``j + 1`` at ``t = s x - j`` for ``x`` in ``[j/s, (j+1)/s)`` and fit
    the integer-frequency coefficients by FFT.  With ``check`` the residual
    ``||alpha(f) - b||`` must stay below ``gp.tol``; an element outside the
    image raises :class:`NotInImageError`.
    """
    sigma = _as_sigma(sigma)
    if m < 1:
        raise ValueError("alpha_inverse needs m >= 1")
    if b.m != m:
        raise ValueError(f"element is at stage {b.m}, not {m}")
    s = sigma[m]
    bsize = boxtimes(sigma, m - 1)
    g = _diag_part(sigma, m, b)
    # f(x) = block_1 g(s x), so f's top integer frequency is s * nu_max(g) / Q_g
    K = math.ceil(s * g.nu_max / g.Q - 1e-9)
    N = 1 << max(1, (2 * K + 1).bit_length())
    xs = np.arange(N) / N
    js = np.minimum((xs * s).astype(int), s - 1)
    ts = xs * s - js
    vals = evaluate(g, ts)
    samples = np.empty((N, bsize, bsize), dtype=complex)
    for j in range(s):
        idx = js == j
        samples[idx] = block_F(sigma, m, j + 1, vals[idx])
    spectrum = np.fft.fft(samples, axis=0) / N
    # reorder to numerators -N/2 .. N/2 - 1
    data = np.concatenate([spectrum[N // 2:], spectrum[: N // 2]])
    f = PeriodicMatrixFunction._build(bsize, 1, -(N // 2), data, gp.prune_floor)
    out = StageElement(sigma, m - 1, f)
    if check:
        residual = sup_norm((alpha(sigma, m - 1, out, gp).f - b.f), gp)
        if residual > gp.tol:
            raise NotInImageError(residual, gp.tol)
    return out


def trace_tau(sigma, m: int, a: StageElement) -> complex:
    """Normalized trace of the mean, ``(1/n) Tr C_0``."""
    return complex(np.trace(a.f.coefficient(0)) / a.n)


def _require_selfadjoint(a: StageElement, gp: GridParams):
    if not a.is_selfadjoint(gp.tol):
        raise ValueError("Lip-norms are defined on self-adjoint elements only")


def lip_L(sigma, m: int, a: StageElement, gp: GridParams = DEFAULT_GRID) -> float:
    """``max{ l(U^* a U), ||a - tau(a) 1|| }``; at stage 0 ``U`` is the constant 1."""
    sigma = _as_sigma(sigma)
    _check_stage(sigma, m)
    if a.m != m:
        raise ValueError(f"element is at stage {a.m}, not {m}")
    _require_selfadjoint(a, gp)
    lip = lipschitz_seminorm(_twisted(sigma, m, a.f), gp)
    centred = a.f - trace_tau(sigma, m, a).real * np.eye(a.n)
    return max(lip, sup_norm(centred, gp))


@dataclass(frozen=True)
class StageConstants:
    """Constants attached to stage ``m``.

    ``lU`` is the Lipschitz constant of ``U_{sigma, m-1}``, ``c_m`` and ``d_m``
    the lower and upper factors of the two-sided estimate
    ``c_m L_{m-1} <= L_m o alpha <= d_m L_{m-1}``.
    """

    m: int
    lU: float
    k_m: float
    kappa_m: float
    beta_m: float
    c_m: float
    d_m: float


def stage_constants(sigma, m: int, gp: GridParams = DEFAULT_GRID) -> StageConstants:
    sigma = _as_sigma(sigma)
    if m == 0:
        return StageConstants(0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    if not 1 <= m <= len(sigma):
        raise ValueError(f"stage {m} outside 1..{len(sigma)}")
    return _stage_constants(sigma.entries[:m], m, gp)


@lru_cache(maxsize=256)
def _stage_constants(prefix: tuple[int, ...], m: int, gp: GridParams) -> StageConstants:
    kappa = 1.0
    for j in range(1, m + 1):
        lU = 0.0 if j == 1 else lipschitz_seminorm(make_U_sigma(prefix, j - 1), gp)
        k = max(1.0, (1.0 + 2.0 * lU) / prefix[j - 1])
        if j >= 2:
            kappa /= k
    return StageConstants(m, lU, k, kappa, 2.0 ** -m, 1.0 / (prefix[m - 1] ** 2 * k), k)


def _norm_weight(m: int, norm_coefficient: str) -> float:
    if norm_coefficient == "corrected":
        return 2.0 ** m
    if norm_coefficient == "literal":
        return 2.0 ** -m
    raise ValueError(f"norm_coefficient must be one of {NORM_COEFFICIENTS}")


def lip_S(sigma, m: int, a: StageElement, gp: GridParams = DEFAULT_GRID,
          norm_coefficient: str = "corrected") -> float:
    """Recursive Lip-norm.

    ``S_0 = L_0`` and, for ``m >= 1``,
    ``S_m(a) = max{kappa_m L_m(a), S_{m-1}(alpha^{-1}(E a)), w_m ||a - E a||}``
    with ``w_m = 2**m`` (``"corrected"``) or ``2**-m`` (``"literal"``).
    """
    return lip_S_terms(sigma, m, a, gp, norm_coefficient)["value"]


def lip_S_terms(sigma, m: int, a: StageElement, gp: GridParams = DEFAULT_GRID,
                norm_coefficient: str = "corrected") -> dict:
    """The three terms of :func:`lip_S` at the top stage, plus their max."""
    sigma = _as_sigma(sigma)
    _check_stage(sigma, m)
    weight = _norm_weight(m, norm_coefficient)
    if m == 0:
        val = lip_L(sigma, 0, a, gp)
        return {"value": val, "lip": val, "previous": 0.0, "displacement": 0.0}
    const = stage_constants(sigma, m, gp)
    lip = const.kappa_m * lip_L(sigma, m, a, gp)
    Ea = cond_expectation(sigma, m, a, gp)
    prev = lip_S(sigma, m - 1, alpha_inverse(sigma, m, Ea, gp), gp, norm_coefficient)
    disp = sup_norm(a.f - Ea.f, gp)
    return {"value": max(lip, prev, weight * disp), "lip": lip, "previous": prev, "displacement": disp}


def random_element(sigma, m: int, cutoff: int, seed, scale: float = 1.0) -> StageElement:
    """Seeded self-adjoint element with integer frequencies ``|nu| <= cutoff``.

    Entries are standard complex Gaussians, then ``C_nu`` and ``C_{-nu}^*`` are
    averaged so the result is self-adjoint.
    """
    sigma = _as_sigma(sigma)
    _check_stage(sigma, m)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    rng = np.random.default_rng(seed)
    n = boxtimes(sigma, m)
    K = 2 * cutoff + 1
    G = (rng.standard_normal((K, n, n)) + 1j * rng.standard_normal((K, n, n))) / math.sqrt(2)
    G = 0.5 * (G + np.conj(np.transpose(G[::-1], (0, 2, 1))))
    f = PeriodicMatrixFunction._build(n, 1, -cutoff, G * scale)
    return StageElement(sigma, m, f)
