"""The F2-symplectic model of JC[2] for a Humbert curve.

Two-torsion points are 10-bit integers: bit ``k`` is alpha_k and bit
``5 + k`` is alpha'_k, with <alpha_i, alpha'_j> = [i == j] the only
nontrivial pairings.  Theta characteristics are modelled as quadratic forms
``x -> q0(x) + <c, x>`` refining the pairing, labelled by ``c``; the
characteristic is odd iff ``q0(c) = 1``.

This module predicts the Steiner-class census of the 160 distinguished odd
thetas from combinatorics alone.  It never fixes which theta index
corresponds to which affine point.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cache
from itertools import combinations, product

__all__ = [
    "TwoTorsion",
    "alpha",
    "alpha_prime",
    "SUM_ALPHA",
    "weil_pairing",
    "span",
    "beta",
    "v_ij",
    "eta_ij",
    "orth",
    "odd_translate",
    "o_ij",
    "predict_difference_multiset",
    "brute_difference_multiset",
    "predict_partition_table",
    "brute_partition_table",
    "PartitionRow",
    "family_incidence",
    "mu_shape",
    "rotate",
    "sign_flip",
    "orbit",
    "predicted_counts",
    "brute_counts",
    "cross_mu_triples",
    "FAMILIES",
]

TwoTorsion = int
DIM = 10
ALPHA_MASK = 0b11111
FAMILIES = tuple((i, j) for i in range(5) for j in range(i + 1, 5))


def alpha(k: int) -> TwoTorsion:
    return 1 << (k % 5)


def alpha_prime(k: int) -> TwoTorsion:
    return 1 << (5 + k % 5)


SUM_ALPHA = ALPHA_MASK


def weil_pairing(u: TwoTorsion, v: TwoTorsion) -> int:
    return (bin((u & ALPHA_MASK) & (v >> 5)).count("1") + bin((u >> 5) & (v & ALPHA_MASK)).count("1")) & 1


def q0(x: TwoTorsion) -> int:
    """Base quadratic form sum x_k x'_k (Arf invariant 0)."""
    return bin((x & ALPHA_MASK) & (x >> 5)).count("1") & 1


def span(gens) -> frozenset[TwoTorsion]:
    out = {0}
    for g in gens:
        out |= {x ^ g for x in out}
    return frozenset(out)


def beta(k: int) -> TwoTorsion:
    """beta_k = alpha_{k-1} + alpha_{k+1} (kernel of the isogeny from prod E_i)."""
    return alpha(k - 1) ^ alpha(k + 1)


def _check_pair(i: int, j: int) -> tuple[int, int]:
    i, j = i % 5, j % 5
    if i == j:
        raise ValueError("family indices must differ mod 5")
    return i, j


def v_ij(i: int, j: int) -> frozenset[TwoTorsion]:
    """Pic E_i[2] + Pic E_j[2] = span(alpha_i, beta_i, alpha_j, beta_j)."""
    i, j = _check_pair(i, j)
    return span([alpha(i), beta(i), alpha(j), beta(j)])


def orth(space) -> frozenset[TwoTorsion]:
    return frozenset(x for x in range(1 << DIM) if all(weil_pairing(x, v) == 0 for v in space))


@cache
def eta_ij(i: int, j: int) -> TwoTorsion:
    """The nonzero alpha'-component of V_ij^perp."""
    i, j = _check_pair(i, j)
    proj = {x >> 5 << 5 for x in orth(v_ij(i, j))} - {0}
    if len(proj) != 1:
        raise AssertionError(f"V_{i}{j}^perp has {len(proj)} nonzero alpha' projections")
    return proj.pop()


@cache
def odd_translate(i: int, j: int) -> tuple[TwoTorsion, ...]:
    """All c with c + V_ij consisting of odd characteristics."""
    V = v_ij(i, j)
    return tuple(c for c in range(1 << DIM) if all(q0(c ^ v) for v in V))


@cache
def o_ij(i: int, j: int) -> frozenset[TwoTorsion]:
    """The unique translate of V_ij inside the odd characteristics."""
    cosets = {frozenset(c ^ v for v in v_ij(i, j)) for c in odd_translate(i, j)}
    if len(cosets) != 1:
        raise AssertionError(f"expected a unique odd translate of V_{i}{j}, found {len(cosets)}")
    return next(iter(cosets))


def _fam(label) -> tuple[int, int]:
    i, j = label
    return (min(i, j) % 5, max(i, j) % 5) if i % 5 != j % 5 else _check_pair(i, j)


def predict_difference_multiset(fam1, fam2) -> Counter:
    """Differences of unordered pairs (theta1 in fam1, theta2 in fam2), from the structure results.

    Same family: every nonzero element of V_ij, 8 times.  Different
    families: every element of span(alpha) + eta + eta', 8 times.
    """
    f1, f2 = _fam(fam1), _fam(fam2)
    if f1 == f2:
        return Counter({v: 8 for v in v_ij(*f1) if v})
    shift = eta_ij(*f1) ^ eta_ij(*f2)
    return Counter({a ^ shift: 8 for a in range(32)})


def brute_difference_multiset(fam1, fam2) -> Counter:
    """Same count, by enumerating pairs in the affine model."""
    f1, f2 = _fam(fam1), _fam(fam2)
    if f1 == f2:
        return Counter(x ^ y for x, y in combinations(sorted(o_ij(*f1)), 2))
    return Counter(x ^ y for x, y in product(o_ij(*f1), o_ij(*f2)))


# -- group action on JC[2] --------------------------------------------------


def rotate(x: TwoTorsion, r: int = 1) -> TwoTorsion:
    """Index rotation alpha_k -> alpha_{k+r}, alpha'_k -> alpha'_{k+r}."""
    r %= 5
    lo, hi = x & ALPHA_MASK, x >> 5

    def rot(b):
        return ((b << r) | (b >> (5 - r))) & ALPHA_MASK

    return rot(lo) | (rot(hi) << 5)


def sign_flip(x: TwoTorsion, k: int) -> TwoTorsion:
    """Action of the bielliptic involution x_k -> -x_k.

    On 2-torsion it is ``1 + pi^* Nm`` for the cover C -> E_k, i.e.
    ``x + <beta_k, x> alpha_k + <alpha_k, x> beta_k``.
    """
    out = x
    if weil_pairing(beta(k), x):
        out ^= alpha(k)
    if weil_pairing(alpha(k), x):
        out ^= beta(k)
    return out


def orbit(x: TwoTorsion) -> frozenset[TwoTorsion]:
    seen = {x}
    todo = [x]
    while todo:
        y = todo.pop()
        for z in [rotate(y)] + [sign_flip(y, k) for k in range(5)]:
            if z not in seen:
                seen.add(z)
                todo.append(z)
    return frozenset(seen)


# -- census -------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionRow:
    shape: str
    systems: int
    pairs_per_system: int
    orbit_size: int
    orbits: int


def mu_shape(mu: TwoTorsion) -> str:
    """Name the rotation class of a difference, as in the structure results."""
    lo, hi = mu & ALPHA_MASK, mu >> 5
    if hi:
        return "cross:" + _shape5(hi, prime=True)
    return "within:" + _shape5(lo, prime=False)


def _shape5(b: int, prime: bool) -> str:
    idx = [k for k in range(5) if (b >> k) & 1]
    w = len(idx)
    if w == 1:
        return "a_k"
    if w == 2:
        d = (idx[1] - idx[0]) % 5
        return "a_k+a_k+1" if d in (1, 4) else "a_k+a_k+2"
    if w == 3:
        missing = [k for k in range(5) if k not in idx]
        d = (missing[1] - missing[0]) % 5
        return "sum-a_k-a_k+1" if d in (1, 4) else "sum-a_k-a_k+2"
    if w == 4:
        return "sum-a_k"
    return "sum"


def _table_from_counts(counts: Counter) -> list[PartitionRow]:
    by_key: dict[tuple[str, int, int], set] = {}
    for mu, c in counts.items():
        key = (mu_shape(mu).split(":")[0], c, len(orbit(mu)))
        by_key.setdefault(key, set()).add(mu)
    rows = []
    for (kind, c, osz), mus in sorted(by_key.items(), key=lambda kv: (-kv[0][1], kv[0][0])):
        rows.append(PartitionRow(kind, len(mus), c, osz, len(mus) // osz))
    return rows


def predicted_counts() -> Counter:
    total = Counter()
    for f1, f2 in combinations(FAMILIES, 2):
        total.update(predict_difference_multiset(f1, f2))
    for f in FAMILIES:
        total.update(predict_difference_multiset(f, f))
    return total


def brute_counts() -> Counter:
    pts = sorted(set().union(*(o_ij(*f) for f in FAMILIES)))
    return Counter(x ^ y for x, y in combinations(pts, 2))


def predict_partition_table() -> list[PartitionRow]:
    """Census of Steiner classes met by pairs of the 160 thetas, from the structure results."""
    return _table_from_counts(predicted_counts())


def brute_partition_table() -> list[PartitionRow]:
    return _table_from_counts(brute_counts())


def family_incidence() -> dict[TwoTorsion, frozenset[frozenset[tuple[int, int]]]]:
    """For each difference, the unordered family pairs (or single families) realising it."""
    out: dict[TwoTorsion, set] = {}
    for f1 in FAMILIES:
        for f2 in FAMILIES:
            if f1 > f2:
                continue
            for mu in predict_difference_multiset(f1, f2):
                out.setdefault(mu, set()).add(frozenset((f1, f2)))
    return {mu: frozenset(s) for mu, s in out.items()}


def cross_mu_triples() -> list[frozenset[tuple[int, int]]]:
    """Family pairs grouped by their eta-sum: 15 triples covering all 45 pairs."""
    groups: dict[int, set] = {}
    for f1, f2 in combinations(FAMILIES, 2):
        groups.setdefault(eta_ij(*f1) ^ eta_ij(*f2), set()).add(frozenset((f1, f2)))
    return [frozenset(g) for _, g in sorted(groups.items())]
