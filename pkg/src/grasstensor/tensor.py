"""Grassmann tensors: the bifocal matrix and the trifocal tensor of a rig.

Entries are signed maximal minors of the stacked matrix
``[P_1^T | P_2^T | P_3^T]``. Positions are 1-based tuples, one index per
mode, into the lexicographically ordered multi-index labels of each mode.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm, prod
from typing import Sequence

from .combinatorics import MultiIndex, complement, enumerate_multiindices, permutation_sign, shift
from .errors import ShapeError
from .exact_linalg import ExactMatrix, _bareiss_det, rank
from .multiview import CameraRig

__all__ = [
    "GrassmannTensor",
    "RankOneTerm",
    "DecompositionCheck",
    "build_bifocal",
    "build_trifocal",
    "build_tensor",
    "contract",
    "flatten",
    "flattening_ranks",
    "evaluate_terms",
    "verify_decomposition",
    "equal_up_to_scale",
]

THREADS_ENV = "GRASSTENSOR_THREADS"


class GrassmannTensor:
    """Dense exact tensor of arity 2 or 3, optionally labelled by multi-indices."""

    __slots__ = ("mode_dims", "mode_labels", "_entries", "_strides")

    def __init__(
        self,
        mode_dims: Sequence[int],
        entries: Sequence,
        mode_labels: Sequence[Sequence[MultiIndex]] | None = None,
    ):
        self.mode_dims = tuple(int(d) for d in mode_dims)
        if len(self.mode_dims) not in (2, 3):
            raise ShapeError("only arity 2 and 3 tensors are supported")
        entries = tuple(Fraction(x) for x in entries)
        if len(entries) != prod(self.mode_dims):
            raise ShapeError("entry count does not match mode sizes")
        if mode_labels is not None:
            mode_labels = tuple(tuple(tuple(mi) for mi in labels) for labels in mode_labels)
            if tuple(len(l) for l in mode_labels) != self.mode_dims:
                raise ShapeError("label counts do not match mode sizes")
        self.mode_labels = mode_labels
        self._entries = entries
        strides = []
        acc = 1
        for d in reversed(self.mode_dims):
            strides.append(acc)
            acc *= d
        self._strides = tuple(reversed(strides))

    @property
    def arity(self) -> int:
        return len(self.mode_dims)

    @property
    def entries(self) -> tuple[Fraction, ...]:
        """Flat row-major entries."""
        return self._entries

    def positions(self):
        return product(*(range(1, d + 1) for d in self.mode_dims))

    def _offset(self, pos: Sequence[int]) -> int:
        if len(pos) != self.arity:
            raise IndexError("position has wrong arity")
        off = 0
        for p, d, s in zip(pos, self.mode_dims, self._strides):
            if not 1 <= p <= d:
                raise IndexError(f"position {tuple(pos)} out of range")
            off += (p - 1) * s
        return off

    def entry(self, *pos: int) -> Fraction:
        """Entry at a 1-based position, e.g. ``t.entry(1, 3, 1)``."""
        return self._entries[self._offset(pos)]

    def items(self):
        return zip(self.positions(), self._entries)

    def support(self) -> list[tuple[int, ...]]:
        """Nonzero positions in lexicographic order."""
        return [p for p, v in self.items() if v != 0]

    def sparse(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return [(p, v) for p, v in self.items() if v != 0]

    @property
    def support_count(self) -> int:
        return sum(1 for v in self._entries if v != 0)

    def is_zero(self) -> bool:
        return not any(self._entries)

    def is_face_disjoint(self) -> bool:
        """True when each fibre along the last mode holds at most one nonzero."""
        last = self.mode_dims[-1]
        e = self._entries
        for start in range(0, len(e), last):
            if sum(1 for v in e[start : start + last] if v != 0) > 1:
                return False
        return True

    def scale(self, c) -> "GrassmannTensor":
        c = Fraction(c)
        return GrassmannTensor(self.mode_dims, [c * v for v in self._entries], self.mode_labels)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GrassmannTensor)
            and self.mode_dims == other.mode_dims
            and self._entries == other._entries
        )

    def __repr__(self) -> str:
        return f"GrassmannTensor(mode_dims={self.mode_dims}, support={self.support_count})"

    def to_json(self) -> dict:
        names = "IJK"
        out = []
        for pos, v in self.sparse():
            rec = {"position": list(pos)}
            if self.mode_labels is not None:
                for n, labels, p in zip(names, self.mode_labels, pos):
                    rec[n] = list(labels[p - 1])
            rec["value"] = str(v)
            out.append(rec)
        return {
            "arity": self.arity,
            "mode_dims": list(self.mode_dims),
            "labels": None if self.mode_labels is None else [[list(mi) for mi in l] for l in self.mode_labels],
            "entries_sparse": out,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GrassmannTensor":
        dims = tuple(obj["mode_dims"])
        entries = [Fraction(0)] * prod(dims)
        t = cls(dims, entries, obj.get("labels"))
        flat = list(entries)
        for rec in obj["entries_sparse"]:
            flat[t._offset(rec["position"])] = Fraction(rec["value"])
        return cls(dims, flat, obj.get("labels"))


@dataclass(frozen=True)
class RankOneTerm:
    """Decomposable tensor v_1 (x) v_2 [(x) v_3]."""

    vectors: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        vecs = tuple(tuple(Fraction(x) for x in v) for v in self.vectors)
        if any(not any(v) for v in vecs):
            raise ShapeError("rank-one term with a zero factor")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_supports(cls, mode_dims: Sequence[int], *factors) -> "RankOneTerm":
        """Build from ``{index: coeff}`` dicts (or a single 1-based index) per mode."""
        vecs = []
        for d, f in zip(mode_dims, factors):
            v = [Fraction(0)] * d
            items = {f: 1}.items() if isinstance(f, int) else f.items()
            for i, c in items:
                v[i - 1] = Fraction(c)
            vecs.append(tuple(v))
        return cls(tuple(vecs))

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vectors)

    def flat(self) -> list[Fraction]:
        return [prod(xs, start=Fraction(1)) for xs in product(*self.vectors)]

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in v] for v in self.vectors]

    @classmethod
    def from_json(cls, obj) -> "RankOneTerm":
        return cls(tuple(tuple(Fraction(x) for x in v) for v in obj))


# --- construction ----------------------------------------------------------


def _mode_labels(rig: CameraRig) -> list[list[MultiIndex]]:
    return [enumerate_multiindices(h + 1, s + 1) for h, s in zip(rig.hs, rig.ss)]


def _entry_block(args):
    int_cols, blocks, first_labels, rest_labels = args
    out = []
    for first in first_labels:
        for rest in product(*rest_labels):
            chosen = (first, *rest)
            selected: list[int] = []
            kept: list[int] = []
            for (offset, n), mi in zip(blocks, chosen):
                selected.extend(shift(mi, offset))
                kept.extend(shift(complement(mi, n), offset))
            eps = permutation_sign(selected + kept)
            # int_cols holds the columns of the row-scaled stacked matrix
            sub = [list(row) for row in zip(*(int_cols[c - 1] for c in kept))]
            out.append(eps * _bareiss_det(sub))
    return out


def _worker_count(workers: int | None) -> int:
    cap = os.environ.get(THREADS_ENV)
    cap = max(1, int(cap)) if cap else None
    if workers is None:
        return cap or 1
    return max(1, min(workers, cap) if cap else workers)


def build_tensor(rig: CameraRig, workers: int | None = None) -> GrassmannTensor:
    """Grassmann tensor of a 2- or 3-camera rig.

    Entry at (I, J[, K]) is eps * det of the stacked matrix restricted to the
    columns complementary to I, J, K in their blocks, where eps is the sign of
    the permutation (I, J^, K^, I', J^', K^'). ``workers`` > 1 splits the
    first mode across processes; output order does not depend on it.
    """
    labels = _mode_labels(rig)
    m = rig.stacked()
    blocks = []
    offset = 0
    for h in rig.hs:
        blocks.append((offset, h + 1))
        offset += h + 1
    row_scales = [lcm(*(x.denominator for x in r)) for r in m.rows]
    scale = prod(row_scales)
    int_rows = [[int(x * d) for x in r] for r, d in zip(m.rows, row_scales)]
    int_cols = [tuple(c) for c in zip(*int_rows)]

    n = _worker_count(workers)
    first = labels[0]
    if n > 1 and len(first) > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            parts = ex.map(_entry_block, [(int_cols, blocks, [f], labels[1:]) for f in first])
            raw = [v for part in parts for v in part]
    else:
        raw = _entry_block((int_cols, blocks, first, labels[1:]))
    entries = [Fraction(v, scale) for v in raw]
    return GrassmannTensor([len(l) for l in labels], entries, labels)


def build_bifocal(rig: CameraRig, workers: int | None = None) -> GrassmannTensor:
    """Generalized fundamental matrix of a two-camera rig."""
    if len(rig) != 2:
        raise ShapeError("bifocal tensor needs exactly 2 cameras")
    return build_tensor(rig, workers)


def build_trifocal(rig: CameraRig, workers: int | None = None) -> GrassmannTensor:
    if len(rig) != 3:
        raise ShapeError("trifocal tensor needs exactly 3 cameras")
    return build_tensor(rig, workers)


# --- evaluation --------------------------------------------------------------


def contract(t: GrassmannTensor, vectors: Sequence[Sequence]) -> Fraction:
    """Full multilinear contraction with one vector per mode."""
    if len(vectors) != t.arity:
        raise ShapeError("one vector per mode is required")
    vecs = [tuple(Fraction(x) for x in v) for v in vectors]
    if tuple(len(v) for v in vecs) != t.mode_dims:
        raise ShapeError(f"vector lengths {[len(v) for v in vecs]} do not match {t.mode_dims}")
    total = Fraction(0)
    for pos, v in t.sparse():
        term = v
        for vec, p in zip(vecs, pos):
            term *= vec[p - 1]
            if not term:
                break
        total += term
    return total


def flatten(t: GrassmannTensor, mode: int) -> ExactMatrix:
    """Rows indexed by ``mode`` (1-based), columns by the other modes in lex order."""
    if not 1 <= mode <= t.arity:
        raise ShapeError(f"mode {mode} out of range for arity {t.arity}")
    others = [i for i in range(1, t.arity + 1) if i != mode]
    rows = []
    for a in range(1, t.mode_dims[mode - 1] + 1):
        row = []
        for rest in product(*(range(1, t.mode_dims[o - 1] + 1) for o in others)):
            pos = list(rest)
            pos.insert(mode - 1, a)
            row.append(t.entry(*pos))
        rows.append(row)
    return ExactMatrix(rows)


def flattening_ranks(t: GrassmannTensor) -> tuple[int, ...]:
    if t.arity == 2:
        return (rank(flatten(t, 1)),)
    return tuple(rank(flatten(t, m)) for m in range(1, t.arity + 1))


def evaluate_terms(terms: Sequence[RankOneTerm], coefficients: Sequence | None = None) -> GrassmannTensor:
    """Sum of outer products (optionally weighted)."""
    if not terms:
        raise ShapeError("no terms to evaluate")
    dims = terms[0].mode_dims
    if any(tm.mode_dims != dims for tm in terms):
        raise ShapeError("terms have different shapes")
    coeffs = [Fraction(1)] * len(terms) if coefficients is None else [Fraction(c) for c in coefficients]
    total = [Fraction(0)] * prod(dims)
    for c, tm in zip(coeffs, terms):
        if c:
            for i, v in enumerate(tm.flat()):
                if v:
                    total[i] += c * v
    return GrassmannTensor(dims, total)


@dataclass(frozen=True)
class DecompositionCheck:
    """``ok`` iff the tensor lies in the span of the terms.

    ``coefficients`` satisfy sum(c_i * term_i) == tensor. ``scale`` is the
    lambda with sum(term_i) == lambda * tensor when the unweighted sum is
    already proportional, otherwise ``None``.
    """

    ok: bool
    coefficients: tuple[Fraction, ...] | None
    scale: Fraction | None


def verify_decomposition(t: GrassmannTensor, terms: Sequence[RankOneTerm]) -> DecompositionCheck:
    if not terms:
        return DecompositionCheck(t.is_zero(), () if t.is_zero() else None, None)
    if any(tm.mode_dims != t.mode_dims for tm in terms):
        raise ShapeError("term shapes do not match the tensor")
    scale = None
    plain = evaluate_terms(terms)
    if not t.is_zero() and equal_up_to_scale(plain, t):
        i = next(i for i, v in enumerate(t.entries) if v)
        scale = plain.entries[i] / t.entries[i]
    # solve sum_i c_i term_i = t exactly
    columns = [tm.flat() for tm in terms]
    a = ExactMatrix([[col[r] for col in columns] for r in range(len(t.entries))])
    b = ExactMatrix([[v] for v in t.entries])
    try:
        x = a.solve(b)
    except ValueError:
        return DecompositionCheck(False, None, scale)
    return DecompositionCheck(True, tuple(x[i, 0] for i in range(len(terms))), scale)


def equal_up_to_scale(t1: GrassmannTensor, t2: GrassmannTensor) -> bool:
    """Both nonzero and proportional (rank-1 test on the paired entry lists)."""
    if t1.mode_dims != t2.mode_dims or t1.is_zero() or t2.is_zero():
        return False
    return rank(ExactMatrix([t1.entries, t2.entries])) == 1
