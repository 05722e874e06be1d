import random
from fractions import Fraction

import pytest

from w160.exactfield import (
    A,
    I,
    ONE,
    PHI,
    ZERO,
    ExactMatrix,
    FieldElem,
    UnusablePrime,
    embed_float,
    exact_kernel,
    exact_rank,
    rank_mod_p,
    usable_primes,
)


def test_defining_relations():
    assert A**4 + A**2 - ONE == ZERO
    assert I * I == -ONE
    assert PHI == ONE + A * A


def test_inverse_of_a():
    inv = A.inverse()
    assert inv * A == ONE
    assert inv * inv == ONE + A * A


def test_embedding_of_a():
    z, bound = embed_float(A)
    assert z == pytest.approx(0.7861513777574233, abs=1e-16)
    assert bound <= 2.0**-53 * abs(z) * 1.01


def test_embedding_of_rationals_is_exact():
    z, bound = embed_float(FieldElem.rational(Fraction(3, 4)))
    assert z == 0.75
    assert bound == 0


def test_json_round_trip():
    x = A * I + Fraction(2, 3) * A**3
    assert FieldElem.from_json(x.to_json()) == x


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_kernel_of_dependent_rows():
    M = ExactMatrix([[ONE, A, I], [A, A * A, A * I]])
    assert exact_rank(M) == 1
    ker = exact_kernel(M)
    assert len(ker) == 2
    for v in ker:
        assert all(x == ZERO for x in M.matvec(v))


def test_full_column_rank_has_empty_kernel():
    M = ExactMatrix.identity(4)
    assert exact_kernel(M) == []


def test_usable_primes_and_screen():
    p = next(usable_primes())
    assert p > 2**31
    rng = random.Random(5)
    from w160.exactfield import random_elem

    rows = [[random_elem(rng) for _ in range(4)] for _ in range(3)]
    rows.append([x + y for x, y in zip(rows[0], rows[1])])
    M = ExactMatrix(rows)
    assert rank_mod_p(M, p) <= exact_rank(M) == 3


def test_unusable_prime_rejected():
    from w160.exactfield import reduce_mod_p

    with pytest.raises(UnusablePrime):
        reduce_mod_p(A, 4)
