"""Exact arithmetic in the degree-8 number field Q(i, a), a^4 + a^2 - 1 = 0.

Elements are stored as 8 rational coordinates over the basis
``a^m i^e`` (``m`` in 0..3, ``e`` in 0..1); coordinate ``k`` holds the
coefficient of ``a^(k % 4) i^(k // 4)``.  The real root ``a = 1/sqrt(phi)``
is the one used for floating point embeddings.

The module also carries exact linear algebra over the field (kernel and
rank by elimination) and a modular rank screen.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterator, Sequence

import mpmath
from sympy import isprime, nextprime
from sympy.ntheory import sqrt_mod

__all__ = [
    "FieldElem",
    "ExactMatrix",
    "UnusablePrime",
    "ZERO",
    "ONE",
    "A",
    "I",
    "PHI",
    "field_add",
    "field_mul",
    "field_neg",
    "field_inv",
    "embed_float",
    "exact_rank",
    "exact_kernel",
    "rank_mod_p",
    "usable_primes",
    "random_elem",
]

DEG = 8
UNIT_ROUNDOFF = 2.0**-53

# a^k for k = 4, 5, 6 expressed over 1, a, a^2, a^3
_A_POW_REDUCTION = {
    4: (1, 0, -1, 0),
    5: (0, 1, 0, -1),
    6: (-1, 0, 2, 0),
}


class UnusablePrime(ValueError):
    """Raised when a prime cannot host the reduction of the field."""


def _lcm(x: int, y: int) -> int:
    return x // gcd(x, y) * y


def _to_ints(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = reduce(_lcm, (c.denominator for c in coeffs), 1)
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _mul_ints(x: Sequence[int], y: Sequence[int]) -> list[int]:
    # polynomial product in a (degree <= 6) for each i-power, then reduce
    prod = [[0] * 7 for _ in range(3)]
    for e in (0, 1):
        xe = x[4 * e : 4 * e + 4]
        if not any(xe):
            continue
        for f in (0, 1):
            yf = y[4 * f : 4 * f + 4]
            if not any(yf):
                continue
            row = prod[e + f]
            for m, xm in enumerate(xe):
                if xm:
                    for n, yn in enumerate(yf):
                        if yn:
                            row[m + n] += xm * yn
    out = [0] * DEG
    for ef, row in enumerate(prod):
        sign = -1 if ef == 2 else 1
        off = 0 if ef in (0, 2) else 4
        for k in range(4):
            out[off + k] += sign * row[k]
        for k, red in _A_POW_REDUCTION.items():
            v = row[k]
            if v:
                for m in range(4):
                    out[off + m] += sign * v * red[m]
    return out


class FieldElem:
    """An element of Q(i, a), immutable, coordinates in lowest terms."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Sequence = (0,) * DEG):
        if len(coeffs) != DEG:
            raise ValueError(f"need {DEG} coordinates, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in coeffs))
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, coeffs) -> "FieldElem":
        # trusted fast path: ``coeffs`` already holds DEG Fractions
        out = object.__new__(cls)
        object.__setattr__(out, "coeffs", tuple(coeffs))
        object.__setattr__(out, "_hash", None)
        return out

    def __setattr__(self, name, value):
        raise AttributeError("FieldElem is immutable")

    @classmethod
    def from_ints(cls, nums: Sequence[int], den: int = 1) -> "FieldElem":
        if den == 1:
            return cls._raw([Fraction(n) for n in nums])
        return cls._raw([Fraction(n, den) for n in nums])

    @classmethod
    def rational(cls, q) -> "FieldElem":
        return cls((q,) + (0,) * (DEG - 1))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return FieldElem._raw([x + y for x, y in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElem._raw([-x for x in self.coeffs])

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return FieldElem._raw([x - y for x, y in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        xs, dx = _to_ints(self.coeffs)
        ys, dy = _to_ints(other.coeffs)
        return FieldElem.from_ints(_mul_ints(xs, ys), dx * dy)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conj_i(self) -> "FieldElem":
        """The automorphism i -> -i."""
        c = self.coeffs
        return FieldElem._raw(c[:4] + tuple(-x for x in c[4:]))

    def conj_a(self) -> "FieldElem":
        """The automorphism a -> -a."""
        return FieldElem._raw([x if (k % 4) % 2 == 0 else -x for k, x in enumerate(self.coeffs)])

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(i, a)")
        # x * conj_i(x) lies in Q(a); y * conj_a(y) lies in Q(a^2) = Q(sqrt 5)
        y = self * self.conj_i()
        z = y * y.conj_a()
        c0, c2 = z.coeffs[0], z.coeffs[2]
        # Galois conjugate of a^2 in Q(sqrt 5) is -1 - a^2
        zbar = FieldElem((c0 - c2, 0, -c2, 0, 0, 0, 0, 0))
        norm = (z * zbar).coeffs[0]
        return (self.conj_i() * y.conj_a() * zbar) * FieldElem.rational(1 / norm)

    # -- comparisons ------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.coeffs))
        return self._hash

    def __repr__(self):
        return f"FieldElem({self})"

    def __str__(self):
        names = ["", "a", "a^2", "a^3", "i", "i*a", "i*a^2", "i*a^3"]
        terms = []
        for c, nm in zip(self.coeffs, names):
            if c == 0:
                continue
            if not nm:
                terms.append(str(c))
            elif c == 1:
                terms.append(nm)
            elif c == -1:
                terms.append("-" + nm)
            else:
                terms.append(f"{c}*{nm}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    def to_json(self) -> list[list[int]]:
        return [[c.numerator, c.denominator] for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "FieldElem":
        return cls([Fraction(int(n), int(d)) for n, d in data])


def _coerce(x):
    if isinstance(x, FieldElem):
        return x
    if isinstance(x, (int, Fraction)):
        return FieldElem.rational(x)
    return None


ZERO = FieldElem()
ONE = FieldElem.rational(1)
A = FieldElem((0, 1, 0, 0, 0, 0, 0, 0))
I = FieldElem((0, 0, 0, 0, 1, 0, 0, 0))
# phi = 1/a^2 = 1 + a^2
PHI = FieldElem((1, 0, 1, 0, 0, 0, 0, 0))


def field_add(x: FieldElem, y: FieldElem) -> FieldElem:
    return x + y


def field_mul(x: FieldElem, y: FieldElem) -> FieldElem:
    return x * y


def field_neg(x: FieldElem) -> FieldElem:
    return -x


def field_inv(x: FieldElem) -> FieldElem:
    return x.inverse()


def random_elem(rng: random.Random, size: int = 5, den: int = 4) -> FieldElem:
    return FieldElem([Fraction(rng.randint(-size, size), rng.randint(1, den)) for _ in range(DEG)])


# -- floating point embedding ---------------------------------------------

_MP_DPS = 60


def _a_powers_mp():
    with mpmath.workdps(_MP_DPS):
        a = mpmath.sqrt((mpmath.sqrt(5) - 1) / 2)
        return [a**m for m in range(4)]


_A_POWERS_MP = _a_powers_mp()


def embed_mp(x: FieldElem) -> mpmath.mpc:
    """High precision value of ``x`` under the real embedding of ``a``."""
    with mpmath.workdps(_MP_DPS):
        re = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * p
                         for c, p in zip(x.coeffs[:4], _A_POWERS_MP))
        im = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * p
                         for c, p in zip(x.coeffs[4:], _A_POWERS_MP))
        return mpmath.mpc(re, im)


def embed_float(x: FieldElem) -> tuple[complex, float]:
    """Nearest complex double to ``x`` and a bound on the distance to it.

    Real and imaginary parts are evaluated at 60 significant digits and
    rounded once, so each part carries relative error at most 2^-53.  The
    bound is zero exactly when both parts are representable rationals.
    """
    c = x.coeffs
    if not any(c[1:4]) and not any(c[5:8]):
        re, im = float(c[0]), float(c[4])
        if Fraction(re) == c[0] and Fraction(im) == c[4]:
            return complex(re, im), 0.0
    z = embed_mp(x)
    out = complex(float(z.real), float(z.imag))
    # 2^-53 relative per part, plus a margin for the truncated evaluation
    bound = UNIT_ROUNDOFF * abs(out) * (1 + 1e-12) + 1e-50
    return out, bound


# -- exact matrices ---------------------------------------------------------


class ExactMatrix:
    """A rectangular grid of field elements (rows of tuples)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = [tuple(e if isinstance(e, FieldElem) else _coerce(e) for e in row) for row in entries]
        if any(e is None for row in rows for e in row):
            raise TypeError("entries must be FieldElem or rational")
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        self.rows = len(rows)
        self.cols = ncols
        self.entries = tuple(rows)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, m: int, n: int) -> "ExactMatrix":
        return cls([[ZERO] * n for _ in range(m)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def matvec(self, v: Sequence[FieldElem]) -> list[FieldElem]:
        return [reduce(field_add, (x * y for x, y in zip(row, v)), ZERO) for row in self.entries]

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"


def _row_echelon(m: ExactMatrix) -> tuple[list[list[FieldElem]], list[int]]:
    """Reduced row echelon form and pivot columns.

    Entries are kept in common-denominator integer form during elimination
    and every pivot row is divided by its pivot, so the rows stay in the
    ring generated by the entries and their pivot inverses.
    """
    work = [list(r) for r in m.entries]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        piv = next((k for k in range(r, m.rows) if not work[k][c].is_zero()), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = work[r][c].inverse()
        work[r] = [ZERO if e.is_zero() else e * inv for e in work[r]]
        for k in range(m.rows):
            if k == r:
                continue
            f = work[k][c]
            if f.is_zero():
                continue
            pr = work[r]
            work[k] = [e if p.is_zero() else e - f * p for e, p in zip(work[k], pr)]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return work, pivots


def exact_rank(m: ExactMatrix) -> int:
    return len(_row_echelon(m)[1])


def exact_kernel(m: ExactMatrix) -> list[list[FieldElem]]:
    """Basis of the right kernel; empty iff the matrix has full column rank."""
    rref, pivots = _row_echelon(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * m.cols
        v[fc] = ONE
        for row_idx, pc in enumerate(pivots):
            v[pc] = -rref[row_idx][fc]
        basis.append(v)
    return basis


# -- modular screen -------------------------------------------------------


def _field_roots_mod(p: int) -> tuple[int, int]:
    """Roots (a_p, i_p) of t^4 + t^2 - 1 and t^2 + 1 modulo p."""
    if p < 7 or p % 2 == 0 or not isprime(p):
        raise UnusablePrime(f"{p} is not an odd prime > 5")
    i_p = sqrt_mod(p - 1, p)
    s5 = sqrt_mod(5, p)
    if i_p is None or s5 is None:
        raise UnusablePrime(f"no sqrt(-1) or sqrt(5) modulo {p}")
    half = pow(2, -1, p)
    for r5 in (s5, p - s5):
        a2 = (r5 - 1) * half % p
        a_p = sqrt_mod(a2, p)
        if a_p is not None:
            return a_p, i_p
    raise UnusablePrime(f"t^4 + t^2 - 1 has no root modulo {p}")


def usable_primes(start: int = 2**31) -> Iterator[int]:
    p = start
    while True:
        p = nextprime(p)
        try:
            _field_roots_mod(p)
        except UnusablePrime:
            continue
        yield p


def reduce_mod_p(x: FieldElem, p: int, roots: tuple[int, int] | None = None) -> int:
    a_p, i_p = roots if roots is not None else _field_roots_mod(p)
    basis = [pow(a_p, k % 4, p) * pow(i_p, k // 4, p) % p for k in range(DEG)]
    total = 0
    for c, b in zip(x.coeffs, basis):
        if c.denominator % p == 0:
            raise UnusablePrime(f"denominator {c.denominator} divisible by {p}")
        total += c.numerator * pow(c.denominator, -1, p) * b
    return total % p


def rank_mod_p(m: ExactMatrix, p: int) -> int:
    """Rank of the reduction of ``m`` at the prime ``p``.

    Never exceeds the exact rank, so a small value here only nominates a
    rank deficiency; it does not certify one.
    """
    roots = _field_roots_mod(p)
    work = [[reduce_mod_p(e, p, roots) for e in row] for row in m.entries]
    rank = 0
    for c in range(m.cols):
        piv = next((k for k in range(rank, m.rows) if work[k][c]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = pow(work[rank][c], -1, p)
        work[rank] = [e * inv % p for e in work[rank]]
        for k in range(m.rows):
            if k != rank and work[k][c]:
                f = work[k][c]
                work[k] = [(e - f * q) % p for e, q in zip(work[k], work[rank])]
        rank += 1
    return rank
