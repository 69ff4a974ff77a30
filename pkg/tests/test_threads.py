import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdqms.bunce_deddens import StageElement, alpha, lip_S, random_element
from bdqms.periodic import sup_norm
from bdqms.threads import IncompatibleThreadError, Thread, check_thread_compat, embed_psi, thread_norm, thread_S0

SIGMA = (2, 3, 2, 2)


def expected_S0(n, a):
    val = lip_S(SIGMA, n, a)
    if n >= 1:
        val = max(val, a.norm() / (2 * 2.0 ** -(n - 1)))
    return val


def test_psi_zero_of_one_is_all_ones():
    th = embed_psi(0, StageElement.scalar(SIGMA, 0), 3)
    for lo, hi in th.entries:
        assert sup_norm(lo.f - np.eye(lo.n)) < 1e-12 and sup_norm(hi.f - np.eye(hi.n)) < 1e-12
    assert thread_S0(th) < 1e-12


def test_psi_layout():
    a = random_element(SIGMA, 2, 1, 0)
    th = embed_psi(2, a, 4)
    assert th.depth == 4
    assert th.entries[0][0].norm() == 0 and th.entries[0][1].norm() == 0
    assert th.entries[1][0].norm() == 0 and th.entries[1][1] is a
    assert th.entries[2][0] is a
    assert sup_norm(th.entries[3][0].f - alpha(SIGMA, 2, a).f) < 1e-12
    assert check_thread_compat(th) == (True, None)


@given(st.integers(0, 3), st.integers(0, 10 ** 6))
def test_psi_is_isometric_and_S0_formula(n, seed):
    a = random_element(SIGMA, n, 2, seed) * float(np.random.default_rng(seed).uniform(0.05, 3))
    th = embed_psi(n, a, 4)
    assert thread_norm(th) == pytest.approx(a.norm(), abs=1e-10)
    assert thread_S0(th) == pytest.approx(expected_S0(n, a), abs=1e-8)
    assert thread_S0(th) >= lip_S(SIGMA, n, a) - 1e-8


def test_S0_equals_S_n_when_norm_is_small():
    a = random_element(SIGMA, 1, 2, 1)
    a = a - a.f.coefficient(0).trace().real / a.n
    a = a * (1e-3 / a.norm())
    assert thread_S0(embed_psi(1, a, 3)) == pytest.approx(lip_S(SIGMA, 1, a), rel=1e-9)


def test_psi_consistency_across_stages():
    a = random_element(SIGMA, 1, 2, 2)
    low, high = embed_psi(1, a, 4), embed_psi(2, alpha(SIGMA, 1, a), 4)
    for k in range(2, 4):
        for x, y in zip(low.entries[k], high.entries[k]):
            assert sup_norm(x.f - y.f) < 1e-10


def test_perturbation_lower_bound():
    a = random_element(SIGMA, 0, 1, 3)
    th = embed_psi(0, a, 3)
    j = 1
    p = random_element(SIGMA, j, 1, 4) * 0.1
    lo, hi = th.entries[j]
    prev_lo, _ = th.entries[j - 1]
    # perturb a^j_j and the matching a^{j-1}_j so the thread stays compatible
    pert = th.replace(j, (lo + p, hi)).replace(j - 1, (prev_lo, lo + p))
    assert check_thread_compat(pert)[0]
    assert thread_S0(pert) >= p.norm() / (2 * 2.0 ** -j) - 1e-9


def test_negative_control():
    a = random_element(SIGMA, 1, 2, 5)
    th = embed_psi(1, a, 3)
    bad = th.replace(1, (th.entries[1][0], random_element(SIGMA, 2, 2, 6)))
    assert check_thread_compat(bad) == (False, 1)
    with pytest.raises(IncompatibleThreadError) as info:
        thread_S0(bad)
    assert info.value.index == 1
    rebuilt = bad.replace(1, th.entries[1])
    assert check_thread_compat(rebuilt) == (True, None)


def test_equal_tails_contribute_equally():
    a = random_element(SIGMA, 1, 2, 7)
    b = random_element(SIGMA, 0, 2, 8)
    t1 = embed_psi(1, a, 4)
    t2 = embed_psi(1, a, 4).replace(0, (b, a))
    assert check_thread_compat(t2)[0]
    # both threads agree from index 1 on; the early entry only adds its own terms
    tail = max(lip_S(SIGMA, 1, a), 0.0)
    assert thread_S0(t1) == pytest.approx(max(tail, a.norm() / 2), rel=1e-9)
    jump = sup_norm(alpha(SIGMA, 0, b).f - a.f) / 2
    assert thread_S0(t2) == pytest.approx(max(tail, lip_S(SIGMA, 0, b), jump), rel=1e-9)


def test_errors():
    a = random_element(SIGMA, 1, 1, 0)
    with pytest.raises(ValueError):
        embed_psi(3, random_element(SIGMA, 3, 1, 0), 3)
    with pytest.raises(ValueError):
        embed_psi(2, a, 3)
    with pytest.raises(ValueError):
        Thread(SIGMA, ((a, a),))
    with pytest.raises(ValueError):
        embed_psi(0, random_element(SIGMA, 0, 1, 0), 5)
