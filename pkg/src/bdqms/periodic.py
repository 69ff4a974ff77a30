"""Matrix-valued trigonometric polynomials with exact rational frequencies.

A :class:`PeriodicMatrixFunction` stores

    f(t) = sum_nu C_nu exp(2 pi i nu t / Q)

as a dense stack of ``n x n`` coefficient matrices over a contiguous range of
integer numerators ``nu``.  Products, adjoints and the rescalings used by the
connecting maps are exact in frequency; only the coefficients are floating
point.  Sup norms are estimated on an oversampled grid and then refined
locally, which yields a (tight) under-estimate of the true supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GridParams",
    "PeriodicMatrixFunction",
    "block_diag",
    "constant",
    "evaluate",
    "grid_size",
    "is_one_periodic",
    "kron_identity",
    "lipschitz_seminorm",
    "make_U_sigma",
    "make_W_sigma",
    "make_shift_V",
    "make_unitary_U",
    "rescale_compose",
    "sup_norm",
    "sup_norm_argmax",
    "z_entry",
]


@dataclass(frozen=True)
class GridParams:
    """Numerical knobs shared by every grid-based evaluator.

    ``refine`` turns on local polishing (safeguarded parabolic interpolation)
    of the highest grid peaks; without it the sup norm is the raw grid maximum.
    """

    oversample: int = 8
    prune_floor: float = 1e-14
    tol: float = 1e-9
    refine: bool = True
    refine_candidates: int = 4
    refine_iterations: int = 14

    def __post_init__(self):
        if self.oversample < 2:
            raise ValueError("oversample must be >= 2")
        if self.prune_floor < 0 or self.tol < 0:
            raise ValueError("prune_floor and tol must be nonnegative")


DEFAULT_GRID = GridParams()


def _next_pow2(k: int) -> int:
    return 1 << max(0, int(k - 1).bit_length())


def grid_size(nu_max: int, gp: GridParams = DEFAULT_GRID) -> int:
    """Power-of-two grid size ``>= oversample * (2 nu_max + 1)``."""
    return _next_pow2(gp.oversample * (2 * int(nu_max) + 1))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True, eq=False)
class PeriodicMatrixFunction:
    """``t -> sum_nu C_nu exp(2 pi i nu t / Q)`` with ``n x n`` coefficients.

    ``data[k]`` is the coefficient of numerator ``lo + k``.  Use
    :meth:`from_coeffs` or the module constructors rather than building the
    dense layout by hand.
    """

    n: int
    Q: int
    lo: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.Q < 1:
            raise ValueError("n and Q must be positive")
        if self.data.ndim != 3 or self.data.shape[1:] != (self.n, self.n):
            raise ValueError(f"coefficient stack must have shape (K, {self.n}, {self.n})")
        self.data.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def _build(cls, n, Q, lo, data, prune_floor=DEFAULT_GRID.prune_floor):
        data = np.asarray(data, dtype=complex)
        if data.shape[0] == 0:
            return cls(n, 1, 0, np.zeros((0, n, n), dtype=complex))
        norms = np.sqrt(np.sum(np.abs(data) ** 2, axis=(1, 2)))
        keep = norms > prune_floor
        if not keep.any():
            return cls(n, 1, 0, np.zeros((0, n, n), dtype=complex))
        first = int(np.argmax(keep))
        last = len(keep) - int(np.argmax(keep[::-1]))
        data = data[first:last].copy()
        data[~keep[first:last]] = 0.0
        lo = lo + first
        # reduce Q when every live numerator shares a factor with it
        nums = lo + np.flatnonzero(keep[first:last])
        g = math.gcd(Q, *(int(v) for v in nums))
        if g > 1:
            start = (-lo) % g
            data = data[start::g]
            lo = (lo + start) // g
            Q //= g
        return cls(n, Q, lo, np.ascontiguousarray(data))

    @classmethod
    def from_coeffs(cls, n: int, Q: int, coeffs: Mapping[int, np.ndarray],
                    prune_floor: float = DEFAULT_GRID.prune_floor):
        if not coeffs:
            return cls._build(n, Q, 0, np.zeros((0, n, n)), prune_floor)
        keys = sorted(int(k) for k in coeffs)
        lo, hi = keys[0], keys[-1]
        data = np.zeros((hi - lo + 1, n, n), dtype=complex)
        for k in keys:
            mat = np.asarray(coeffs[k], dtype=complex)
            if mat.shape != (n, n):
                raise ValueError(f"coefficient at {k} has shape {mat.shape}, expected {(n, n)}")
            data[k - lo] += mat
        return cls._build(n, Q, lo, data, prune_floor)

    @classmethod
    def zero(cls, n: int):
        return cls(n, 1, 0, np.zeros((0, n, n), dtype=complex))

    # -- views --------------------------------------------------------------

    @property
    def coeffs(self) -> dict[int, np.ndarray]:
        """Nonzero coefficients keyed by numerator."""
        out = {}
        for k, mat in enumerate(self.data):
            if np.any(mat):
                out[self.lo + k] = mat
        return out

    @property
    def numerators(self) -> np.ndarray:
        return self.lo + np.arange(self.data.shape[0])

    @property
    def nu_max(self) -> int:
        if self.data.shape[0] == 0:
            return 0
        return max(abs(self.lo), abs(self.lo + self.data.shape[0] - 1))

    @property
    def is_zero(self) -> bool:
        return self.data.shape[0] == 0

    def coefficient(self, nu: int) -> np.ndarray:
        k = nu - self.lo
        if 0 <= k < self.data.shape[0]:
            return self.data[k]
        return np.zeros((self.n, self.n), dtype=complex)

    def _on_denominator(self, Q: int) -> tuple[int, np.ndarray]:
        """Dense layout over denominator ``Q`` (a multiple of ``self.Q``)."""
        r = Q // self.Q
        if r == 1 or self.is_zero:
            return self.lo * r, self.data
        K = self.data.shape[0]
        out = np.zeros(((K - 1) * r + 1, self.n, self.n), dtype=complex)
        out[::r] = self.data
        return self.lo * r, out

    # -- algebra ------------------------------------------------------------

    def _check(self, other: "PeriodicMatrixFunction"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            other = constant(other * np.eye(self.n))
        if isinstance(other, np.ndarray):
            other = constant(other)
        self._check(other)
        Q = _lcm(self.Q, other.Q)
        lo1, d1 = self._on_denominator(Q)
        lo2, d2 = other._on_denominator(Q)
        if d1.shape[0] == 0:
            return PeriodicMatrixFunction._build(self.n, Q, lo2, d2.copy())
        if d2.shape[0] == 0:
            return PeriodicMatrixFunction._build(self.n, Q, lo1, d1.copy())
        lo = min(lo1, lo2)
        hi = max(lo1 + d1.shape[0], lo2 + d2.shape[0])
        out = np.zeros((hi - lo, self.n, self.n), dtype=complex)
        out[lo1 - lo: lo1 - lo + d1.shape[0]] += d1
        out[lo2 - lo: lo2 - lo + d2.shape[0]] += d2
        return PeriodicMatrixFunction._build(self.n, Q, lo, out)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicMatrixFunction(self.n, self.Q, self.lo, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        """Scalar multiplication."""
        if not np.isscalar(c):
            return NotImplemented
        return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, self.data * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        """Pointwise matrix product ``t -> f(t) g(t)``."""
        if isinstance(other, np.ndarray):
            if other.shape != (self.n, self.n):
                raise ValueError("dimension mismatch")
            return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, self.data @ other)
        self._check(other)
        Q = _lcm(self.Q, other.Q)
        lo1, d1 = self._on_denominator(Q)
        lo2, d2 = other._on_denominator(Q)
        if d1.shape[0] == 0 or d2.shape[0] == 0:
            return PeriodicMatrixFunction.zero(self.n)
        return PeriodicMatrixFunction._build(self.n, Q, lo1 + lo2, _convolve(d1, d2))

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            if other.shape != (self.n, self.n):
                raise ValueError("dimension mismatch")
            return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, other @ self.data)
        return NotImplemented

    def adjoint(self):
        """``t -> f(t)^*``, i.e. ``C_nu -> (C_{-nu})^*``."""
        if self.is_zero:
            return self
        K = self.data.shape[0]
        flipped = np.conj(np.transpose(self.data[::-1], (0, 2, 1)))
        return PeriodicMatrixFunction(self.n, self.Q, -(self.lo + K - 1), np.ascontiguousarray(flipped))

    @property
    def H(self):
        return self.adjoint()

    def derivative(self):
        """Exact coefficient-wise derivative."""
        factor = 2j * np.pi * self.numerators / self.Q
        return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, self.data * factor[:, None, None])

    def map_coefficients(self, fn, n_out: int | None = None):
        """Apply a linear, t-independent matrix map to every coefficient."""
        if self.is_zero:
            return PeriodicMatrixFunction.zero(n_out or self.n)
        out = np.stack([fn(c) for c in self.data])
        return PeriodicMatrixFunction._build(out.shape[1], self.Q, self.lo, out)

    def is_selfadjoint(self, tol: float = DEFAULT_GRID.tol) -> bool:
        return self.distance_coeffwise(self.adjoint()) <= tol

    def distance_coeffwise(self, other) -> float:
        """Max Frobenius norm of the coefficient difference."""
        diff = self - other
        if diff.is_zero:
            return 0.0
        return float(np.max(np.sqrt(np.sum(np.abs(diff.data) ** 2, axis=(1, 2)))))

    def to_one_periodic(self, tol: float = DEFAULT_GRID.tol):
        """Drop coefficients at non-integer frequencies, which must be < ``tol``."""
        if self.Q == 1:
            return self
        nums = self.numerators
        off = nums % self.Q != 0
        if off.any():
            worst = float(np.max(np.sqrt(np.sum(np.abs(self.data[off]) ** 2, axis=(1, 2)))))
            if worst >= tol:
                raise ValueError(f"function is not 1-periodic (stray coefficient norm {worst:.3g})")
        data = self.data.copy()
        data[off] = 0.0
        return PeriodicMatrixFunction._build(self.n, self.Q, self.lo, data)

    def __call__(self, t):
        return evaluate(self, t)

    def __repr__(self):
        return f"PeriodicMatrixFunction(n={self.n}, Q={self.Q}, numerators=[{self.lo}..{self.lo + self.data.shape[0] - 1}])"


def _convolve(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Non-commutative linear convolution of two coefficient stacks."""
    K1, K2 = d1.shape[0], d2.shape[0]
    if K1 * K2 <= 64:
        n = d1.shape[1]
        out = np.zeros((K1 + K2 - 1, n, n), dtype=complex)
        for i in range(K1):
            out[i:i + K2] += d1[i] @ d2
        return out
    L = K1 + K2 - 1
    M = _next_pow2(L)
    F1 = np.fft.fft(d1, n=M, axis=0)
    F2 = np.fft.fft(d2, n=M, axis=0)
    return np.fft.ifft(F1 @ F2, axis=0)[:L]


def constant(M) -> PeriodicMatrixFunction:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return PeriodicMatrixFunction._build(M.shape[0], 1, 0, M[None])


def evaluate(f: PeriodicMatrixFunction, t):
    """``f(t)`` for a scalar ``t`` (matrix) or an array of times (stack)."""
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    if f.is_zero:
        out = np.zeros((t_arr.size, f.n, f.n), dtype=complex)
    else:
        phases = np.exp(2j * np.pi * np.outer(t_arr, f.numerators) / f.Q)
        out = np.tensordot(phases, f.data, axes=(1, 0))
    return out[0] if scalar else out


def grid_values(f: PeriodicMatrixFunction, N: int) -> np.ndarray:
    """Values at ``t_j = Q j / N`` for ``j < N``, computed by one inverse FFT."""
    arr = np.zeros((N, f.n, f.n), dtype=complex)
    if not f.is_zero:
        np.add.at(arr, f.numerators % N, f.data)
    return np.fft.ifft(arr, axis=0) * N


def _opnorms(mats: np.ndarray, hermitian: bool) -> np.ndarray:
    if mats.shape[1] == 1:
        return np.abs(mats[:, 0, 0])
    if hermitian:
        ev = np.linalg.eigvalsh(mats)
        return np.maximum(np.abs(ev[:, 0]), np.abs(ev[:, -1]))
    return np.linalg.norm(mats, ord=2, axis=(1, 2))


def sup_norm_argmax(f: PeriodicMatrixFunction, gp: GridParams = DEFAULT_GRID,
                    hermitian: bool | None = None) -> tuple[float, float]:
    """Estimated ``sup_t ||f(t)||`` and a time where it is attained.

    ``hermitian`` skips the self-adjointness test when the caller knows.
    """
    if f.is_zero:
        return 0.0, 0.0
    if hermitian is None:
        hermitian = f.is_selfadjoint(1e-12)
    if f.data.shape[0] == 1 and f.lo == 0:
        return float(_opnorms(f.data, hermitian)[0]), 0.0
    N = grid_size(f.nu_max, gp)
    vals = _opnorms(grid_values(f, N), hermitian)
    j = int(np.argmax(vals))
    best, best_t = float(vals[j]), f.Q * j / N
    if not gp.refine:
        return best, best_t
    # local maxima of the circular grid sequence, highest first
    peaks = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)))
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][: gp.refine_candidates]
    h = f.Q / N
    c = peaks * h
    a, b = c - h, c + h
    fc = vals[peaks]
    fa, fb = vals[(peaks - 1) % N], vals[(peaks + 1) % N]
    nu = f.numerators
    scale = 2j * np.pi / f.Q
    for it in range(gp.refine_iterations):
        width = b - a
        left_big = (c - a) > (b - c)
        golden = np.where(left_big, c - _GOLD * (c - a), c + _GOLD * (b - c))
        if it % 3 == 2:
            u = golden
        else:
            p = (c - a) * (fc - fb)
            q = (c - b) * (fc - fa)
            den = p - q
            with np.errstate(divide="ignore", invalid="ignore"):
                u = c - 0.5 * ((c - a) * p - (c - b) * q) / den
            bad = ~np.isfinite(u) | (u <= a) | (u >= b)
            tiny = np.abs(u - c) < 1e-13 * np.maximum(width, 1e-300)
            u = np.where(bad | tiny, golden, u)
        M = np.tensordot(np.exp(scale * np.outer(u, nu)), f.data, axes=(1, 0))
        fu = _opnorms(M, hermitian)
        up = fu >= fc
        right = u > c
        # new best: shrink toward u, old centre becomes an end point
        a_new = np.where(up, np.where(right, c, a), np.where(right, a, u))
        b_new = np.where(up, np.where(right, b, c), np.where(right, u, b))
        fa_new = np.where(up, np.where(right, fc, fa), np.where(right, fa, fu))
        fb_new = np.where(up, np.where(right, fb, fc), np.where(right, fu, fb))
        c = np.where(up, u, c)
        fc = np.where(up, fu, fc)
        a, b, fa, fb = a_new, b_new, fa_new, fb_new
    k = int(np.argmax(fc))
    if fc[k] > best:
        best, best_t = float(fc[k]), float(c[k] % f.Q)
    return best, best_t


_GOLD = (3 - math.sqrt(5)) / 2


def sup_norm(f: PeriodicMatrixFunction, gp: GridParams = DEFAULT_GRID) -> float:
    """Sup over one period of the largest singular value of ``f(t)``.

    Grid maximum on ``grid_size(nu_max)`` points followed by parabolic
    refinement around the highest peaks.  Every reported value is attained
    at some evaluated ``t``, so the result never exceeds the true supremum.
    """
    return sup_norm_argmax(f, gp)[0]


def lipschitz_seminorm(f: PeriodicMatrixFunction, gp: GridParams = DEFAULT_GRID) -> float:
    """``sup_t ||f'(t)||``, the Lipschitz constant of a C^1 function on R."""
    return sup_norm(f.derivative(), gp)


def is_one_periodic(f: PeriodicMatrixFunction, gp: GridParams = DEFAULT_GRID) -> bool:
    nums = f.numerators
    off = nums % f.Q != 0
    if not off.any():
        return True
    norms = np.sqrt(np.sum(np.abs(f.data[off]) ** 2, axis=(1, 2)))
    return bool(np.all(norms < gp.tol))


def rescale_compose(f: PeriodicMatrixFunction, s: int, j: int) -> PeriodicMatrixFunction:
    """``t -> f((t + j) / s)``; exact (denominator ``Q s``, phases folded in)."""
    if s < 1 or j < 0:
        raise ValueError("need s >= 1 and j >= 0")
    Qs = f.Q * s
    phase = np.exp(2j * np.pi * f.numerators * j / Qs)
    return PeriodicMatrixFunction._build(f.n, Qs, f.lo, f.data * phase[:, None, None])


def kron_identity(f: PeriodicMatrixFunction, k: int) -> PeriodicMatrixFunction:
    """Coefficient-wise ``C -> C (x) id_k``."""
    if k == 1:
        return f
    eye = np.eye(k)
    data = np.einsum("aij,kl->aikjl", f.data, eye).reshape(f.data.shape[0], f.n * k, f.n * k)
    return PeriodicMatrixFunction(f.n * k, f.Q, f.lo, data)


def block_diag(blocks: Sequence[PeriodicMatrixFunction]) -> PeriodicMatrixFunction:
    """Block-diagonal function with the given diagonal blocks."""
    b = blocks[0].n
    Q = 1
    for f in blocks:
        if f.n != b:
            raise ValueError("all blocks must have the same order")
        Q = _lcm(Q, f.Q)
    layouts = [f._on_denominator(Q) for f in blocks]
    live = [(lo, d) for lo, d in layouts if d.shape[0]]
    n = b * len(blocks)
    if not live:
        return PeriodicMatrixFunction.zero(n)
    lo = min(l for l, _ in live)
    hi = max(l + d.shape[0] for l, d in live)
    out = np.zeros((hi - lo, n, n), dtype=complex)
    for i, (l, d) in enumerate(layouts):
        if d.shape[0]:
            out[l - lo: l - lo + d.shape[0], i * b:(i + 1) * b, i * b:(i + 1) * b] = d
    return PeriodicMatrixFunction._build(n, Q, lo, out)


def z_entry(m: int, j: int, k: int, t):
    """Scalar ``z^m_{j,k}(t) = m^{-1/2} exp(2 pi i (m - j)(t + k - 1) / m)``, 1-indexed."""
    return np.exp(2j * np.pi * (m - j) * (np.asarray(t, dtype=float) + k - 1) / m) / math.sqrt(m)


@lru_cache(maxsize=None)
def make_unitary_U(m: int) -> PeriodicMatrixFunction:
    """The ``m``-periodic unitary ``U_m = (z^m_{j,k})``; ``U_0`` is the 1x1 constant 1."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return constant(np.eye(1))
    coeffs = {}
    cols = np.arange(m)
    for j in range(1, m + 1):
        nu = m - j
        C = np.zeros((m, m), dtype=complex)
        C[j - 1] = np.exp(2j * np.pi * nu * cols / m) / math.sqrt(m)
        coeffs[nu] = C
    return PeriodicMatrixFunction.from_coeffs(m, m, coeffs)


def make_shift_V(m: int) -> np.ndarray:
    """Cyclic permutation with ``U_m(t + 1) = U_m(t) V_m``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    V = np.zeros((m, m))
    V[0, m - 1] = 1.0
    for i in range(m - 1):
        V[i + 1, i] = 1.0
    return V


def _entries(sigma) -> tuple[int, ...]:
    return tuple(getattr(sigma, "entries", sigma))


def _boxtimes(entries: tuple[int, ...], m: int) -> int:
    return math.prod(entries[:m])


def make_W_sigma(sigma, m: int) -> np.ndarray:
    """``V_{sigma_m} (x) id`` with identity blocks of order ``boxtimes sigma_{m-1}``."""
    e = _entries(sigma)
    if not 1 <= m <= len(e):
        raise ValueError(f"stage {m} outside 1..{len(e)}")
    return np.kron(make_shift_V(e[m - 1]), np.eye(_boxtimes(e, m - 1)))


def make_U_sigma(sigma, m: int) -> PeriodicMatrixFunction:
    """``U_{sigma_m} (x) id_{boxtimes sigma_{m-1}}``; the constant 1 at ``m = 0``."""
    return _make_U_sigma_cached(_entries(sigma)[:m], m)


@lru_cache(maxsize=None)
def _make_U_sigma_cached(prefix: tuple[int, ...], m: int) -> PeriodicMatrixFunction:
    if m == 0:
        return constant(np.eye(1))
    if len(prefix) < m:
        raise ValueError(f"stage {m} outside 1..{len(prefix)}")
    return kron_identity(make_unitary_U(prefix[m - 1]), _boxtimes(prefix, m - 1))


def coeffs_from_iter(pairs: Iterable[tuple[int, np.ndarray]]) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for k, v in pairs:
        out[k] = out.get(k, 0) + v
    return out
