"""Finite-depth threads of stage elements and the seminorm ``S_0`` on them.

A thread of depth ``N`` is a list of pairs ``(a^n_n, a^n_{n+1})`` for
``n = 0..N-1`` with ``a^n_n`` in stage ``n`` and ``a^n_{n+1}`` in stage
``n + 1``.  Threads are compatible when ``a^n_{n+1} = a^{n+1}_{n+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bunce_deddens import (
    StageElement,
    SupernaturalSequence,
    _as_sigma,
    alpha,
    lip_S,
)
from .periodic import DEFAULT_GRID, GridParams, sup_norm

__all__ = [
    "IncompatibleThreadError",
    "Thread",
    "check_thread_compat",
    "embed_psi",
    "thread_S0",
    "thread_norm",
]


class IncompatibleThreadError(ValueError):
    def __init__(self, index: int, gap: float):
        super().__init__(f"thread is incompatible at index {index} (gap {gap:.3g})")
        self.index = index
        self.gap = gap


@dataclass(frozen=True)
class Thread:
    sigma: SupernaturalSequence
    entries: tuple[tuple[StageElement, StageElement], ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", _as_sigma(self.sigma))
        entries = tuple(tuple(e) for e in self.entries)
        if not entries:
            raise ValueError("threads need at least one entry")
        if len(entries) > len(self.sigma):
            raise ValueError(f"depth {len(entries)} needs {len(entries)} entries of sigma")
        for n, (lo, hi) in enumerate(entries):
            if lo.m != n or hi.m != n + 1:
                raise ValueError(f"entry {n} must pair stages {n} and {n + 1}")
        object.__setattr__(self, "entries", entries)

    @property
    def depth(self) -> int:
        return len(self.entries)

    def replace(self, index: int, pair) -> "Thread":
        entries = list(self.entries)
        entries[index] = tuple(pair)
        return Thread(self.sigma, tuple(entries))


def _zero(sigma, m):
    return StageElement.scalar(sigma, m, 0.0)


def embed_psi(n: int, a: StageElement, depth: int, gp: GridParams = DEFAULT_GRID) -> Thread:
    """``((0,0), ..., (0,a), (a, alpha a), (alpha a, alpha^2 a), ...)``.

    The pair ``(0, a)`` sits at index ``n - 1``; for ``n = 0`` the thread
    starts with ``(a, alpha a)``.
    """
    if not 0 <= n < depth:
        raise ValueError(f"need 0 <= n < depth, got n={n}, depth={depth}")
    if a.m != n:
        raise ValueError(f"a lives in stage {a.m}, expected {n}")
    sigma = a.sigma
    if depth > len(sigma):
        raise ValueError(f"depth {depth} exceeds the {len(sigma)} available entries of sigma")
    entries = [(_zero(sigma, k), _zero(sigma, k + 1)) for k in range(max(n - 1, 0))]
    if n >= 1:
        entries.append((_zero(sigma, n - 1), a))
    cur = a
    for k in range(n, depth):
        nxt = alpha(sigma, k, cur, gp)
        entries.append((cur, nxt))
        cur = nxt
    return Thread(sigma, tuple(entries))


def check_thread_compat(thread: Thread, tol: float = 1e-9, gp: GridParams = DEFAULT_GRID):
    """``(ok, first_bad_index)``; index ``n`` means ``a^n_{n+1} != a^{n+1}_{n+1}``."""
    for n in range(thread.depth - 1):
        gap = sup_norm(thread.entries[n][1].f - thread.entries[n + 1][0].f, gp)
        if gap > tol:
            return False, n
    return True, None


def thread_norm(thread: Thread, gp: GridParams = DEFAULT_GRID) -> float:
    """Sup of the direct-sum norms ``max(||a^n_n||, ||a^n_{n+1}||)``."""
    return max(max(lo.norm(gp), hi.norm(gp)) for lo, hi in thread.entries)


def thread_S0(thread: Thread, gp: GridParams = DEFAULT_GRID, tol: float = 1e-9,
              norm_coefficient: str = "corrected") -> float:
    """``max_n max{ S_n(a^n_n), ||alpha(a^n_n) - a^{n+1}_{n+1}|| / (2 beta(n)) }``.

    ``beta(n) = 2^-n``.  At the last index the next diagonal entry is
    ``a^{N-1}_N``, and ``S_N(a^{N-1}_N)`` closes the tail, which a constant
    continuation by ``alpha`` would repeat forever.
    """
    ok, bad = check_thread_compat(thread, tol, gp)
    if not ok:
        gap = sup_norm(thread.entries[bad][1].f - thread.entries[bad + 1][0].f, gp)
        raise IncompatibleThreadError(bad, gap)
    sigma = thread.sigma
    N = thread.depth
    best = 0.0
    for n, (diag, _) in enumerate(thread.entries):
        nxt = thread.entries[n + 1][0] if n + 1 < N else thread.entries[N - 1][1]
        jump = sup_norm(alpha(sigma, n, diag, gp).f - nxt.f, gp) * 2.0 ** n / 2.0
        best = max(best, lip_S(sigma, n, diag, gp, norm_coefficient), jump)
    return max(best, lip_S(sigma, N, thread.entries[N - 1][1], gp, norm_coefficient))
