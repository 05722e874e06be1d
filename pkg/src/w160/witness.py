"""Exact spanning-tree witnesses for Steiner classes.

A quadruple of thetas whose 16 points are distinct and lie on a quadric
outside I2(W) sums to 2K: the quadric cuts a divisor of degree 16, so it
is exactly those points.  A tree of such quadruples over the pairs of a
class therefore certifies the class with no floating point at all.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Sequence

from .exactfield import ExactMatrix, exact_kernel, exact_rank, rank_mod_p, usable_primes
from .wiman import THETA_TABLE, exact_coords, exact_q_rows

__all__ = [
    "REFERENCE_WITNESS",
    "Witness",
    "QuadCheck",
    "WitnessCertificate",
    "WitnessError",
    "exact_monomial_matrix",
    "i2_rows_exact",
    "check_quadruple_exact",
    "recover_pairs",
    "find_witness",
    "verify_witness_exact",
    "corrupt_witness",
    "witness_coverage",
]

WITNESS_SCHEMA = 1

REFERENCE_WITNESS: tuple[tuple[int, int, int, int], ...] = (
    (0, 9, 22, 70), (0, 9, 24, 142), (0, 9, 25, 82), (0, 9, 26, 83), (0, 9, 27, 143),
    (0, 9, 31, 42), (0, 9, 88, 134), (0, 9, 94, 111), (0, 9, 114, 149), (0, 9, 130, 154),
    (2, 20, 30, 49), (2, 24, 49, 142), (2, 40, 49, 71), (2, 49, 91, 92), (2, 49, 108, 132),
    (2, 49, 112, 129), (2, 49, 150, 152), (4, 7, 140, 141), (4, 20, 30, 140), (5, 6, 80, 81),
    (5, 20, 30, 80), (8, 20, 30, 62), (22, 48, 60, 70),
)


class WitnessError(ValueError):
    """The witness is malformed (as opposed to failing verification)."""


@dataclass
class Witness:
    quadruples: list[tuple[int, int, int, int]]
    class_id: int | None = None

    def to_json(self) -> dict:
        return {"schema": WITNESS_SCHEMA, "class_id": self.class_id,
                "quadruples": [list(q) for q in self.quadruples]}

    @classmethod
    def from_json(cls, d: dict) -> "Witness":
        if d.get("schema", WITNESS_SCHEMA) != WITNESS_SCHEMA:
            raise WitnessError(f"unsupported witness schema {d.get('schema')}")
        return cls([tuple(int(t) for t in q) for q in d["quadruples"]], d.get("class_id"))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "Witness":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _points(quad: Sequence[int]) -> list[int]:
    return [J for t in quad for J in THETA_TABLE[t]]


def distinct_points(quad: Sequence[int]) -> bool:
    pts = _points(quad)
    return len(set(pts)) == 16


# -- exact algebra -----------------------------------------------------------


def exact_monomial_matrix(point_ids: Sequence[int]) -> ExactMatrix:
    """Rows of degree-2 monomials of the exact points, lexicographic order."""
    rows = []
    for J in point_ids:
        x = exact_coords(J)
        rows.append([x[i] * x[k] for i in range(5) for k in range(i, 5)])
    return ExactMatrix(rows)


def i2_rows_exact() -> list[list]:
    """Q_0..Q_4 as exact 15-vectors; they span I2(W)."""
    return exact_q_rows()


@dataclass(frozen=True)
class QuadCheck:
    quad: tuple[int, int, int, int]
    distinct: bool
    rank: int | None
    rank_mod_p: int | None
    kernel_dim: int | None
    outside_i2: bool
    ok: bool


def check_quadruple_exact(quad: Sequence[int], prime: int | None = None) -> QuadCheck:
    """Exact test that the 16 points of ``quad`` lie on a quadric not in I2(W).

    All arithmetic is in Q(i, a); ``prime`` only adds a modular rank as a
    cross-check, which must not exceed the exact rank.
    """
    quad = tuple(int(t) for t in quad)
    if not distinct_points(quad):
        return QuadCheck(quad, False, None, None, None, False, False)
    M = exact_monomial_matrix(_points(quad))
    kernel = exact_kernel(M)
    rank = M.cols - len(kernel)
    rp = rank_mod_p(M, prime) if prime else None
    outside = False
    if kernel:
        i2 = i2_rows_exact()
        outside = exact_rank(ExactMatrix(kernel + i2)) > exact_rank(ExactMatrix(i2))
    ok = rank <= 11 and outside and (rp is None or rp <= rank)
    return QuadCheck(quad, True, rank, rp, len(kernel), outside, ok)


# -- graph structure ----------------------------------------------------------


def recover_pairs(quads: Sequence[Sequence[int]]) -> dict[int, int]:
    """Partner of every theta, forced by the quadruples alone.

    Pairs of one class are disjoint, so a theta's partner lies in every
    quadruple containing it; once some partners are known, the rest of a
    quadruple pairs up by elimination.
    """
    partner: dict[int, int] = {}
    containing = defaultdict(list)
    for q in quads:
        if len(set(q)) != 4:
            raise WitnessError(f"quadruple {list(q)} repeats a theta")
        for t in q:
            containing[t].append(set(q) - {t})
    changed = True
    while changed:
        changed = False
        for t, others in containing.items():
            if t in partner:
                continue
            cand = set.intersection(*others)
            # exclude thetas already matched elsewhere
            cand = {c for c in cand if partner.get(c, t) == t}
            if len(others) == 1:
                q = others[0]
                paired_off = {c for c in q if c in partner and partner[c] in q}
                cand -= paired_off
            if len(cand) == 1:
                (u,) = cand
                partner[t], partner[u] = u, t
                changed = True
    missing = sorted(set(containing) - set(partner))
    if missing:
        raise WitnessError(f"pairing not determined for thetas {missing}")
    for q in quads:
        a = q[0]
        if partner[a] not in q or partner[[t for t in q if t not in (a, partner[a])][0]] not in q:
            raise WitnessError(f"quadruple {list(q)} does not split into two pairs")
    return partner


def _split(quad, partner) -> tuple[tuple[int, int], tuple[int, int]]:
    a = quad[0]
    rest = sorted(t for t in quad if t not in (a, partner[a]))
    return tuple(sorted((a, partner[a]))), tuple(rest)


@dataclass
class WitnessCertificate:
    checks: list[QuadCheck]
    pairs: list[tuple[int, int]]
    connected: bool
    is_tree: bool
    spans_class: bool | None
    ok: bool
    errors: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "quadruples": len(self.checks),
            "pairs": [list(p) for p in self.pairs],
            "ranks": [c.rank for c in self.checks],
            "failed": [list(c.quad) for c in self.checks if not c.ok],
            "connected": self.connected,
            "is_tree": self.is_tree,
            "spans_class": self.spans_class,
            "errors": self.errors,
            "ok": self.ok,
        }


def verify_witness_exact(w: Witness, class_pairs: Sequence[tuple[int, int]] | None = None,
                         screen_prime: bool = True) -> WitnessCertificate:
    """Float-free verification of a witness.

    Each quadruple must pass ``check_quadruple_exact`` and the quadruples,
    read as edges between pairs, must form a spanning tree.  With
    ``class_pairs`` the tree must span exactly that class.
    """
    errors: list[str] = []
    prime = next(usable_primes()) if screen_prime else None
    checks = [check_quadruple_exact(q, prime) for q in w.quadruples]
    for c in checks:
        if not c.ok:
            errors.append(f"quadruple {list(c.quad)} failed (distinct={c.distinct}, rank={c.rank})")
    try:
        partner = recover_pairs(w.quadruples)
    except WitnessError as e:
        return WitnessCertificate(checks, [], False, False, None, False, errors + [str(e)])
    pairs = sorted({tuple(sorted((t, u))) for t, u in partner.items()})
    index = {p: k for k, p in enumerate(pairs)}
    parent = list(range(len(pairs)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cycles = 0
    for q in w.quadruples:
        p1, p2 = _split(q, partner)
        r1, r2 = find(index[p1]), find(index[p2])
        if r1 == r2:
            cycles += 1
        else:
            parent[r1] = r2
    connected = len({find(k) for k in range(len(pairs))}) == 1
    is_tree = connected and cycles == 0 and len(w.quadruples) == len(pairs) - 1
    spans = None if class_pairs is None else sorted(map(tuple, class_pairs)) == pairs
    if not connected:
        errors.append("pair graph is disconnected")
    if spans is False:
        errors.append("tree does not span the given class")
    ok = not errors and is_tree
    return WitnessCertificate(checks, pairs, connected, is_tree, spans, ok, errors)


# -- search -----------------------------------------------------------------


def find_witness(class_pairs: Sequence[tuple[int, int]], class_id: int | None = None) -> Witness | None:
    """Breadth-first spanning tree over a class's pairs, lexicographic order.

    Two pairs are adjacent when their four thetas have 16 distinct points.
    Returns ``None`` when that graph is disconnected.
    """
    pairs = sorted(tuple(sorted(p)) for p in class_pairs)
    pts = {p: set(_points(p)) for p in pairs}
    adj = {p: [r for r in pairs if r != p and not pts[p] & pts[r] and len(pts[p]) == 8 and len(pts[r]) == 8]
           for p in pairs}
    root = pairs[0]
    seen = {root}
    todo = deque([root])
    quads = []
    while todo:
        p = todo.popleft()
        for r in adj[p]:
            if r not in seen:
                seen.add(r)
                todo.append(r)
                quads.append(tuple(sorted(p + r)))
    if len(seen) != len(pairs):
        return None
    return Witness(quads, class_id)


def witness_coverage(classes: Sequence[Sequence[tuple[int, int]]]) -> dict:
    """How many classes admit a spanning-tree witness, by class size."""
    found: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for cl in classes:
        found[len(cl)][1] += 1
        if find_witness(cl) is not None:
            found[len(cl)][0] += 1
    return {str(k): {"with_witness": v[0], "classes": v[1]} for k, v in sorted(found.items())}


def corrupt_witness(w: Witness, index: int = 0,
                    class_pairs: Sequence[tuple[int, int]] | None = None) -> Witness:
    """Replace the last theta of one quadruple by the smallest theta outside the witness.

    The replacement keeps the 16 points distinct, so the corrupted entry is
    caught by the rank test rather than the distinctness test.
    """
    used = {t for q in w.quadruples for t in q}
    if class_pairs:
        used |= {t for p in class_pairs for t in p}
    q = list(w.quadruples[index])
    for t in range(len(THETA_TABLE)):
        if t in used:
            continue
        cand = tuple(sorted(q[:3] + [t]))
        if distinct_points(cand):
            quads = list(w.quadruples)
            quads[index] = cand
            return Witness(quads, w.class_id)
    raise WitnessError("no replacement theta keeps the points distinct")
