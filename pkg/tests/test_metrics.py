import random

import pytest
from hypothesis import given, strategies as st

from onerank.aggregate import Ranking
from onerank.metrics import (
    EmptyRetrieval,
    InsufficientOverlap,
    KTooLarge,
    LengthMismatch,
    average_precision,
    cmc_at_k,
    cohen_kappa,
    kendall_tau,
    mean_ap,
    topk_overlap,
)

from oracles import discordant_tau


def R(order):
    """Ranking with strictly decreasing scores following ``order``."""
    return Ranking.from_scores({m: float(len(order) - i) for i, m in enumerate(order)}, "t")


def test_tau_identical_and_reversed():
    a = R("ABCDE")
    assert kendall_tau(a, a).tau == 1.0
    assert kendall_tau(a, R("EDCBA")).tau == pytest.approx(-1.0)


def test_tau_one_adjacent_swap():
    t = kendall_tau(R("ABCD"), R("ABDC"))
    assert t.tau == pytest.approx(1 - 2 / 6)
    assert t.tau == pytest.approx(discordant_tau("ABCD", "ABDC"))
    assert t.n_common == 4


def test_tau_on_intersection_only():
    t = kendall_tau(R("ABCDX"), R("YABCD"))
    assert t.n_common == 4 and t.tau == 1.0


def test_tau_needs_two_common():
    with pytest.raises(InsufficientOverlap):
        kendall_tau(R("AB"), R("BC"))


def test_tau_b_with_ties():
    a = Ranking.from_scores({"A": 3, "B": 2, "C": 2, "D": 1}, "t")
    b = R("ABCD")
    # concordant 5, discordant 0, one tie in a: 5 / sqrt(5 * 6)
    assert kendall_tau(a, b).tau == pytest.approx(5 / (30 ** 0.5))


def test_tau_constant_scores_is_zero():
    a = Ranking.from_scores({"A": 1, "B": 1, "C": 1}, "t")
    assert kendall_tau(a, R("ABC")).tau == 0.0


def test_topk_examples():
    assert topk_overlap(R("ABCDEFGHIJ"), R("ABCDEFGHIJ"), 10) == 1.0
    assert topk_overlap(R("ABCXYZ"), R("XYZABC"), 3) == 0.0
    assert topk_overlap(R("ABCD"), R("ACDB"), 3) == pytest.approx(2 / 3)
    with pytest.raises(KTooLarge):
        topk_overlap(R("AB"), R("AB"), 3)


def test_ap_examples():
    assert average_precision(["a", "b"], {"a", "b"}) == 1.0
    assert average_precision(["x", "y"], {"a"}) == 0.0
    assert average_precision(["r1", "n", "r2"], {"r1", "r2"}) == pytest.approx((1 + 2 / 3) / 2)
    with pytest.raises(EmptyRetrieval):
        average_precision([], {"a"})
    assert mean_ap([(["a"], {"a"}), (["x"], {"a"})]) == 0.5


def test_cmc_examples():
    assert cmc_at_k([(["a", "x"], {"a"}), (["b"], {"b"})], 1) == 1.0
    assert cmc_at_k([(["x"], {"a"}), (["y"], {"b"})], 5) == 0.0
    q = [(["r"] + ["n"] * 9, {"r"}), (["n"] * 6 + ["r"] + ["n"] * 3, {"r"})]
    assert cmc_at_k(q, 1) == 0.5
    assert cmc_at_k(q, 10) == 1.0


def test_kappa_examples():
    assert cohen_kappa([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0
    # p_o = 0.5 = p_e
    assert cohen_kappa([1, 1, 0, 0], [1, 0, 1, 0]) == 0.0
    assert cohen_kappa([1, 1, 0, 0], [1, 0, 0, 0]) == pytest.approx(0.5)
    with pytest.raises(LengthMismatch):
        cohen_kappa([1], [1, 0])


# -- properties ---------------------------------------------------------------

scores_st = st.dictionaries(
    st.sampled_from(list("ABCDEFGH")), st.integers(0, 4).map(float), min_size=2
)


@given(a=scores_st, b=scores_st)
def test_tau_symmetric_and_bounded(a, b):
    if len(a.keys() & b.keys()) < 2:
        return
    ra, rb = Ranking.from_scores(a, "a"), Ranking.from_scores(b, "b")
    t1, t2 = kendall_tau(ra, rb).tau, kendall_tau(rb, ra).tau
    assert t1 == pytest.approx(t2, abs=1e-12)
    assert -1 <= t1 <= 1


@given(a=scores_st)
def test_tau_self_is_one_unless_constant(a):
    r = Ranking.from_scores(a, "a")
    expected = 0.0 if len(set(a.values())) == 1 else 1.0
    assert kendall_tau(r, r).tau == pytest.approx(expected)


@given(a=scores_st, b=scores_st, seed=st.integers(0, 1000))
def test_tau_invariant_to_shared_relabeling(a, b, seed):
    if len(a.keys() & b.keys()) < 2:
        return
    letters = list("ABCDEFGH")
    perm = letters[:]
    random.Random(seed).shuffle(perm)
    ren = dict(zip(letters, perm))
    ra, rb = Ranking.from_scores(a, "a"), Ranking.from_scores(b, "b")
    pa = Ranking.from_scores({ren[k]: v for k, v in a.items()}, "a")
    pb = Ranking.from_scores({ren[k]: v for k, v in b.items()}, "b")
    assert kendall_tau(ra, rb).tau == pytest.approx(kendall_tau(pa, pb).tau, abs=1e-12)


@given(
    retrieved=st.lists(st.sampled_from(list("abcdefgh")), min_size=1, max_size=8, unique=True),
    relevant=st.sets(st.sampled_from(list("abcdefgh"))),
    tail=st.lists(st.sampled_from(list("uvwxyz")), max_size=5, unique=True),
)
def test_trailing_irrelevant_items(retrieved, relevant, tail):
    extended = retrieved + tail
    assert average_precision(extended, relevant) == pytest.approx(average_precision(retrieved, relevant))
    for k in range(1, len(retrieved) + 1):
        assert cmc_at_k([(extended, relevant)], k) == cmc_at_k([(retrieved, relevant)], k)
