import numpy as np
import pytest

from branchgroups.groups import builtin
from branchgroups.quotients import (
    derived_series_orders,
    format_order,
    full_aut_order,
    hausdorff_ratio,
    hausdorff_ratio_exact,
    level_quotient,
    lower_central_ranks,
    nilpotency_class,
    normal_closure,
    rigid_level_stabilizer,
    rigid_stabilizer,
    suborbit_profile,
    sylow_wreath_order,
)


@pytest.fixture(scope="module")
def gg():
    return builtin("Gg")


def test_level_quotient_basics(gg):
    q1 = level_quotient(gg, 1)
    assert q1.order() == 2
    q3 = level_quotient(builtin("FGg"), 3)
    assert q3.degree == 27
    ident = level_quotient(gg, 4).perm_of_word("1")
    assert np.array_equal(ident, np.arange(16))


def test_orders_match_closed_forms(gg):
    for n in range(4, 7):
        assert level_quotient(gg, n).order() == 2 ** (5 * 2 ** (n - 3) + 2)
    fgg = builtin("FGg")
    for n in range(2, 5):
        assert level_quotient(fgg, n).order() == 3 ** (3 ** (n - 1) + 1)
    bgg = builtin("BGg")
    for n in range(2, 5):
        assert level_quotient(bgg, n).order() == 3 ** ((3**n + 2 * n + 3) // 4)
    assert level_quotient(bgg, 1).order() == 3 ** ((3 - 1) // 2)


def test_chain_vs_brute_force():
    # exact agreement for degree <= 27
    q = level_quotient(builtin("Gg"), 3)
    assert q.order() == q.brute_force_order() == 128
    q = level_quotient(builtin("FGg"), 2)
    assert q.order() == q.brute_force_order() == 81
    q = level_quotient(builtin("BGg"), 3)
    assert q.order() == q.brute_force_order() == 3**9
    q = level_quotient(builtin("Dinf"), 3)
    assert q.order() == q.brute_force_order()


def test_order_monotone_under_projection(gg):
    prev = 1
    for n in range(1, 7):
        o = level_quotient(gg, n).order()
        assert o % prev == 0
        prev = o


def test_psi_consistency(gg):
    # |Stab_{G_n}(L_1)| * |root image| = |G_n|, with the stabilizer
    # generated independently by the conjugated directed generators
    from branchgroups.quotients import SubgroupHandle

    for n in (2, 3, 4, 5):
        q = level_quotient(gg, n)
        gens = [q.perm_of_word(w)
                for w in ("b", "c", "d", "aba", "aca", "ada")]
        stab1 = SubgroupHandle(q, gens)
        root_image = 2  # level-1 action of Gg
        assert stab1.order() * root_image == q.order()


def test_full_aut_order(gg):
    assert full_aut_order(gg, 3) == 2**7
    fgg = builtin("FGg")
    assert full_aut_order(fgg, 2) == 6 * 6**3
    assert sylow_wreath_order(fgg, 2) == 3**4
    # the full Aut quotient's rigid level stabilizer is the level stabilizer:
    # at level n, Aut(T)_n has order m_1! (m_2!)^{m_1} ...
    assert full_aut_order(gg, 4) == 2**15


def test_hausdorff(gg):
    from fractions import Fraction

    assert hausdorff_ratio_exact(gg, 1) == Fraction(1, 1)
    assert hausdorff_ratio_exact(gg, 7) == Fraction(82, 127)
    assert abs(hausdorff_ratio(gg, 7) - 82 / 127) < 1e-12
    with pytest.raises(ValueError):
        hausdorff_ratio(gg, 3, ambient="bogus")


def test_rigid_stabilizers(gg):
    # index of Rist(L_1) is 16 (the subgroup D) once the level resolves it
    for n in (4, 5):
        assert rigid_level_stabilizer(gg, n, 1).index() == 16
    # rigid stabilizer of a deepest-level vertex is trivial
    q = level_quotient(gg, 3)
    leaf = rigid_stabilizer(gg, 3, (0, 0, 0), q=q)
    assert leaf.order() == 1


def test_rozhkov_ranks_and_stability(gg):
    assert lower_central_ranks(gg, 6, 9) == [3, 2, 2, 1, 2, 2, 1, 1, 2]
    assert lower_central_ranks(gg, 7, 9) == [3, 2, 2, 1, 2, 2, 1, 1, 2]
    # abelianization rank 3
    assert lower_central_ranks(gg, 4, 1) == [3]


def test_rozhkov_formula_closed_form(gg):
    # rank gamma_n / gamma_{n+1}: 3 at n=1, 2 for n=2^m+1+r with r<2^{m-1},
    # 1 for larger r
    def rozhkov(n):
        if n == 1:
            return 3
        m = 1
        while 2 ** (m + 1) + 1 <= n:
            m += 1
        r = n - 2**m - 1
        return 2 if r < 2 ** (m - 1) else 1

    computed = lower_central_ranks(gg, 6, 9)
    assert computed == [rozhkov(k) for k in range(1, 10)]


def test_nilpotency_class(gg):
    for n in (3, 4, 5):
        assert nilpotency_class(gg, n) == 2 ** (n - 1)


def test_derived_series(gg):
    q5 = level_quotient(gg, 5)
    orders = derived_series_orders(q5, 4)
    assert orders[0] // orders[1] == 8  # [G : G'] = 8
    # Gg^(3) = rist(L_3): both sides computed independently at level 5
    rist3 = rigid_level_stabilizer(gg, 5, 3)
    assert orders[3] == rist3.order()
    # derived series of an abelian quotient terminates immediately
    q1 = level_quotient(gg, 1)
    assert derived_series_orders(q1, 2) == [2, 1]


def test_k_subgroup(gg):
    # K = <(ab)^2>^Gg has index 16 in every deep enough quotient
    for n in (3, 4, 5):
        q = level_quotient(gg, n)
        k = normal_closure(q, [q.perm_of_word("(ab)^2")])
        assert k.index() == 16
    # K' = K x K at one level deeper: index of [K, K] in G_5
    q = level_quotient(gg, 5)
    k = normal_closure(q, [q.perm_of_word("(ab)^2")])
    from branchgroups.quotients import commutator_subgroup

    kprime = commutator_subgroup(q, k.gens, k.gens)
    assert k.order() % kprime.order() == 0


def test_suborbits(gg):
    assert suborbit_profile(gg, 1) == [1, 1]
    for n in range(1, 7):
        prof = suborbit_profile(gg, n)
        assert len(prof) == n + 1
        assert sum(prof) == 2**n
        assert prof == sorted([1, 1] + [2**i for i in range(1, n)])
    fgg = builtin("FGg")
    for n in range(1, 5):
        prof = suborbit_profile(fgg, n)
        assert len(prof) == 2 * n + 1
        assert sum(prof) == 3**n


def test_full_aut_quotient_rigid_equals_level_stabilizer():
    # finitary flips x_i at the leftmost level-i vertex generate the full
    # automorphism quotient of the binary tree; there the rigid level
    # stabilizer equals the level stabilizer (index 2 at depth 1)
    from branchgroups.automorphisms import perm_from_cycles
    from branchgroups.groups import explicit_group
    from branchgroups.shapes import TreeShape

    flip = perm_from_cycles(2, [[0, 1]])
    full = explicit_group(
        "W4", TreeShape.regular(2),
        {"x0": flip},
        {
            "x1": ([[("x0", 1)], []], None),
            "x2": ([[("x1", 1)], []], None),
            "x3": ([[("x2", 1)], []], None),
        },
    )
    q = level_quotient(full, 4)
    assert q.order() == full_aut_order(full, 4) == 2**15
    rist = rigid_level_stabilizer(full, 4, 1)
    assert rist.index() == 2  # rigid = level stabilizer in the full group


def test_format_order():
    assert format_order(2**12) == "2^12"
    assert format_order(81) == "3^4"
    assert format_order(1) == "1"
    assert format_order(2) == "2"
    assert format_order(12) == "12"
