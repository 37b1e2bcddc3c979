import random
from concurrent.futures import ThreadPoolExecutor

from branchgroups.decision import is_trivial, order
from branchgroups.groups import Word, builtin


def test_concurrent_interning_consistent():
    # products built concurrently intern to the same states
    gg = builtin("Gg")
    rng = random.Random(211)
    words = [gg.random_reduced_word(rng.randint(1, 8), rng) for _ in range(60)]

    def build(w):
        return gg.state_of_word(Word(w, True))

    with ThreadPoolExecutor(max_workers=6) as pool:
        first = list(pool.map(build, words))
        second = list(pool.map(build, words))
    for a, b in zip(first, second):
        assert a is b


def test_concurrent_decisions_deterministic():
    gg = builtin("Gg")
    rng = random.Random(223)
    words = [Word(gg.random_reduced_word(rng.randint(1, 10), rng), True)
             for _ in range(40)]
    serial = [(is_trivial(gg, w), order(gg, w).value) for w in words]

    def work(w):
        return (is_trivial(gg, w), order(gg, w).value)

    with ThreadPoolExecutor(max_workers=6) as pool:
        parallel = list(pool.map(work, words))
    assert serial == parallel
