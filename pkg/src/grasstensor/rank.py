"""Closed rank formulas, certified rank bounds and degeneration sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb
from typing import Sequence

from .canonical import (
    CanonicalizationResult,
    canonicalize_general,
    canonicalize_nongeneral,
    canonicalize_two_view,
    centers_disjoint,
    check_assumption,
)
from .errors import CertificationError, ParseError, ShapeError
from .exact_linalg import ExactMatrix, rank, rref
from .multiview import Camera, CameraRig, Profile
from .tensor import (
    GrassmannTensor,
    RankOneTerm,
    build_tensor,
    flatten,
    flattening_ranks,
    verify_decomposition,
)

__all__ = [
    "binom",
    "closed_rank_bifocal",
    "closed_rank_trifocal",
    "trifocal_admissible",
    "RankReport",
    "analyze",
    "find_witness",
    "fiber_cover_witness",
    "slice_witness",
    "report_for_rig",
    "DegenerationFamily",
    "Trajectory",
    "sweep",
    "DEFAULT_SCHEDULE",
]


def binom(n: int, m: int) -> int:
    """Binomial coefficient, zero outside 0 <= m <= n."""
    if n < 0 or m < 0 or m > n:
        return 0
    return comb(n, m)


def closed_rank_bifocal(k: int, h1: int, h2: int, a1: int, a2: int) -> int:
    Profile((a1, a2)).validate(k, (h1, h2))
    s1, s2 = h1 - a1 + 1, h2 - a2 + 1
    return binom(s1 + s2, s1)


def trifocal_admissible(k: int, hs: Sequence[int]) -> bool:
    """Whether the dimension counts allow the generality assumption."""
    return sum(hs) + 1 - 2 * k >= 0 and all(k - h >= 0 for h in hs)


def closed_rank_trifocal(k: int, h1: int, h2: int, h3: int, a1: int, a2: int, a3: int) -> int:
    """Rank of the trifocal tensor of a rig in general position."""
    Profile((a1, a2, a3)).validate(k, (h1, h2, h3))
    i = h1 + h2 + h3 + 1 - 2 * k
    j12, j13, j23 = k - h3, k - h2, k - h1
    if i < 0 or min(j12, j13, j23) < 0:
        raise ShapeError(f"negative invariants (i={i}, j=({j12},{j13},{j23})) for k={k}, h=({h1},{h2},{h3})")
    total = 0
    for x2 in range(j12 + 1):
        for x3 in range(j13 + 1):
            for y3 in range(j23 + 1):
                total += (
                    binom(j12, x2)
                    * binom(j13, x3)
                    * binom(j23, y3)
                    * binom(i, a1 - x2 - x3)
                    * binom(i - a1 + x2 + x3, a2 - j12 + x2 - y3)
                )
    return total


# --- witnesses ----------------------------------------------------------------


def _unit_vec(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(j == i)) for j in range(1, n + 1))


def fiber_cover_witness(t: GrassmannTensor, node_budget: int = 50_000) -> list[RankOneTerm]:
    """Decomposition grouping the support into lines along single modes.

    Each term is e_a (x) e_b (x) v (in some mode order) where v carries the
    entries of one fibre. The cover is minimised by branch and bound; past
    ``node_budget`` the best cover found so far is returned.
    """
    support = t.support()
    if not support:
        return []
    sset = set(support)
    arity = t.arity

    def fibre(p, m):
        return frozenset(q for q in sset if all(q[i] == p[i] for i in range(arity) if i != m))

    fibres_of = {p: sorted({fibre(p, m) for m in range(arity)}, key=lambda f: (-len(f), sorted(f))) for p in support}

    best: list[frozenset] = []
    # greedy start
    uncovered = set(support)
    while uncovered:
        p = min(uncovered)
        f = max(fibres_of[p], key=lambda f: len(f & uncovered))
        best.append(f)
        uncovered -= f
    nodes = 0

    def search(uncovered: frozenset, chosen: list):
        nonlocal best, nodes
        nodes += 1
        if not uncovered:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        if nodes > node_budget:
            return
        biggest = max(len(f & uncovered) for q in uncovered for f in fibres_of[q])
        if len(chosen) + -(-len(uncovered) // biggest) >= len(best):
            return
        p = min(uncovered)
        for f in fibres_of[p]:
            chosen.append(f)
            search(uncovered - f, chosen)
            chosen.pop()

    search(frozenset(support), [])

    terms = []
    assigned: set = set()
    for f in best:
        pts = sorted(f - assigned)
        if not pts:
            continue
        assigned |= set(pts)
        if len(pts) == 1:
            p = pts[0]
            vecs = [_unit_vec(d, i) for d, i in zip(t.mode_dims, p)]
            vecs[0] = tuple(x * t.entry(*p) for x in vecs[0])
        else:
            m = next(i for i in range(arity) if len({q[i] for q in pts}) > 1)
            vecs = [_unit_vec(d, i) for d, i in zip(t.mode_dims, pts[0])]
            v = [Fraction(0)] * t.mode_dims[m]
            for q in pts:
                v[q[m] - 1] = t.entry(*q)
            vecs[m] = tuple(v)
        terms.append(RankOneTerm(tuple(vecs)))
    return terms


def _rank_factorization(m: ExactMatrix) -> list[tuple[tuple[Fraction, ...], tuple[Fraction, ...]]]:
    r, piv = rref(m)
    cols = m.columns()
    return [(cols[p - 1], r.rows[i]) for i, p in enumerate(piv)]


def slice_witness(t: GrassmannTensor, mode: int) -> list[RankOneTerm]:
    """Rank-factorise every slice orthogonal to ``mode`` (1-based)."""
    if t.arity == 2:
        m = flatten(t, 1)
        return [RankOneTerm((u, v)) for u, v in _rank_factorization(m)] if not m.is_zero() else []
    others = [i for i in range(1, 4) if i != mode]
    terms = []
    for a in range(1, t.mode_dims[mode - 1] + 1):
        rows = []
        for x in range(1, t.mode_dims[others[0] - 1] + 1):
            row = []
            for y in range(1, t.mode_dims[others[1] - 1] + 1):
                pos = [0, 0, 0]
                pos[mode - 1], pos[others[0] - 1], pos[others[1] - 1] = a, x, y
                row.append(t.entry(*pos))
            rows.append(row)
        sl = ExactMatrix(rows)
        if sl.is_zero():
            continue
        for u, v in _rank_factorization(sl):
            vecs = [None, None, None]
            vecs[mode - 1] = _unit_vec(t.mode_dims[mode - 1], a)
            vecs[others[0] - 1] = u
            vecs[others[1] - 1] = v
            terms.append(RankOneTerm(tuple(vecs)))
    return terms


def find_witness(t: GrassmannTensor) -> list[RankOneTerm]:
    """Shortest of the fibre-cover and slice decompositions."""
    if t.is_zero():
        return []
    candidates = [fiber_cover_witness(t)]
    for m in range(1, t.arity + 1):
        candidates.append(slice_witness(t, m))
    return min(candidates, key=len)


# --- reports ------------------------------------------------------------------


@dataclass
class RankReport:
    """Certified bounds on the rank of a tensor.

    ``certified_upper`` is backed by an exactly verified decomposition (or the
    matrix rank for arity 2); ``certified_lower`` by flattening ranks, raised
    by a closed formula or a pinned fixture value where one applies.
    """

    support_count: int
    flattening_ranks: tuple[int, ...]
    certified_upper: int
    certified_lower: int
    upper_source: str
    lower_source: str
    closed_formula_value: int | None = None
    face_disjoint: bool | None = None
    witness: list[RankOneTerm] | None = None
    context: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "exact" if self.certified_lower == self.certified_upper else "bounded"

    @property
    def rank(self) -> int | None:
        return self.certified_upper if self.verdict == "exact" else None

    def to_json(self, include_witness: bool = True) -> dict:
        out = {
            "verdict": self.verdict,
            "rank": self.rank,
            "certified_lower": self.certified_lower,
            "certified_upper": self.certified_upper,
            "lower_source": self.lower_source,
            "upper_source": self.upper_source,
            "closed_formula_value": self.closed_formula_value,
            "support_count": self.support_count,
            "flattening_ranks": list(self.flattening_ranks),
            "face_disjoint": self.face_disjoint,
        }
        if include_witness and self.witness is not None:
            out["witness"] = [tm.to_json() for tm in self.witness]
        if self.context:
            out["context"] = self.context
        return out


def analyze(
    t: GrassmannTensor,
    *,
    closed_formula: int | None = None,
    pinned_rank: int | None = None,
    pin_source: str | None = None,
    witness: Sequence[RankOneTerm] | None = None,
    search: bool = True,
) -> RankReport:
    """Certify rank bounds for a tensor.

    ``closed_formula`` is the rank the closed formula predicts for a rig in
    general position and acts as a lower certificate. ``pinned_rank`` is a
    rank value established elsewhere for this configuration (a fixture).
    A supplied ``witness`` must verify exactly or CertificationError is raised.
    """
    franks = flattening_ranks(t)
    support = t.support_count
    if t.arity == 2:
        r = franks[0]
        if closed_formula is not None and closed_formula != r:
            raise CertificationError(f"matrix rank {r} contradicts closed formula {closed_formula}")
        wit = slice_witness(t, 1) if search else None
        return RankReport(support, franks, r, r, "matrix rank", "matrix rank", closed_formula, None, wit)

    upper, upper_src, best = support, "support", None
    if witness is not None:
        check = verify_decomposition(t, witness)
        if not check.ok:
            raise CertificationError("supplied decomposition does not reproduce the tensor")
        if len(witness) < upper:
            upper, upper_src, best = len(witness), "supplied witness", list(witness)
    if search:
        found = find_witness(t)
        if not verify_decomposition(t, found).ok:
            raise CertificationError("internal decomposition failed to verify")
        if len(found) < upper or best is None and len(found) == upper:
            upper, upper_src, best = len(found), "decomposition search", found
    lower, lower_src = max(franks), "flattening"
    if closed_formula is not None and closed_formula > lower:
        lower, lower_src = closed_formula, "closed formula"
    if pinned_rank is not None and pinned_rank > lower:
        lower, lower_src = pinned_rank, pin_source or "pinned"
    if lower > upper:
        raise CertificationError(f"lower bound {lower} ({lower_src}) exceeds upper bound {upper} ({upper_src})")
    return RankReport(support, franks, upper, lower, upper_src, lower_src, closed_formula, t.is_face_disjoint(), best)


def report_for_rig(rig: CameraRig, use_fixtures: bool = True) -> tuple[RankReport, CanonicalizationResult]:
    """Rank report of a rig's tensor, computed on its canonical representative.

    View and ambient changes of coordinates preserve rank, so the bounds
    certified on the reduced rig hold for the original one.
    """
    if len(rig) == 2:
        res = canonicalize_two_view(rig) if centers_disjoint(rig) else None
        t = build_tensor(rig if res is None else res.rig)
        closed = closed_rank_bifocal(rig.k, *rig.hs, *rig.profile) if res is not None else None
        rep = analyze(t, closed_formula=closed)
        rep.context = {"form": "phi" if res else "raw", "general": res is not None}
        return rep, res

    general, _ = check_assumption(rig)
    if general:
        res = canonicalize_general(rig)
        t = build_tensor(res.rig)
        closed = closed_rank_trifocal(rig.k, *rig.hs, *rig.profile)
        rep = analyze(t, closed_formula=closed)
        rep.context = {"form": "phi", "general": True, "invariants": res.invariants.to_json()}
        return rep, res

    res = canonicalize_nongeneral(rig, simplify=True)
    t = build_tensor(res.rig)
    pinned = pin_src = None
    if use_fixtures:
        from .fixtures import match_stratum

        fx = match_stratum(rig, res, t)
        if fx is not None:
            pinned, pin_src = fx.expected_rank, f"fixture {fx.name}"
    rep = analyze(t, pinned_rank=pinned, pin_source=pin_src)
    rep.context = {"form": "psi", "general": False, "invariants": res.invariants.to_json()}
    if pin_src:
        rep.context["stratum"] = pin_src.split(" ", 1)[1]
    return rep, res


# --- degeneration families ----------------------------------------------------

DEFAULT_SCHEDULE = tuple(Fraction(1, 2**n) for n in range(1, 9))


def _poly(coeffs) -> tuple[Fraction, ...]:
    if isinstance(coeffs, (int, str, Fraction)):
        return (Fraction(coeffs),)
    return tuple(Fraction(c) for c in coeffs) or (Fraction(0),)


def _horner(p: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * t + c
    return acc


@dataclass(frozen=True)
class RationalEntry:
    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...] = (Fraction(1),)

    def __call__(self, t: Fraction) -> Fraction:
        d = _horner(self.den, t)
        if d == 0:
            raise ShapeError(f"denominator vanishes at t = {t}")
        return _horner(self.num, t) / d

    @classmethod
    def from_json(cls, obj) -> "RationalEntry":
        if isinstance(obj, dict):
            return cls(_poly(obj["num"]), _poly(obj.get("den", [1])))
        return cls(_poly(obj))

    def to_json(self):
        num = [str(c) for c in self.num]
        if self.den == (Fraction(1),):
            return num
        return {"num": num, "den": [str(c) for c in self.den]}


@dataclass(frozen=True)
class DegenerationFamily:
    """One-parameter family of rigs, camera entries rational in t."""

    name: str
    cameras: tuple[tuple[tuple[RationalEntry, ...], ...], ...]
    profile: tuple[int, ...]
    samples: tuple[Fraction, ...] = DEFAULT_SCHEDULE
    limit: Fraction = Fraction(0)
    description: str = ""
    limit_fixture: str | None = None

    def with_profile(self, profile: Sequence[int]) -> "DegenerationFamily":
        return replace(self, profile=tuple(profile))

    def at(self, t) -> CameraRig:
        t = Fraction(t)
        cams = []
        for j, cam in enumerate(self.cameras, start=1):
            m = ExactMatrix([[e(t) for e in row] for row in cam])
            try:
                cams.append(Camera(m))
            except ShapeError as exc:
                raise ShapeError(f"family {self.name!r}: camera {j} degenerates at t = {t}: {exc}") from None
        return CameraRig(tuple(cams), Profile(self.profile))

    @classmethod
    def from_json(cls, obj: dict) -> "DegenerationFamily":
        try:
            cams = tuple(
                tuple(tuple(RationalEntry.from_json(e) for e in row) for row in cam) for cam in obj["cameras"]
            )
            samples = tuple(Fraction(s) for s in obj.get("samples", DEFAULT_SCHEDULE))
            if not samples:
                raise ParseError("sample schedule is empty")
            return cls(
                name=obj.get("name", "family"),
                cameras=cams,
                profile=tuple(obj["profile"]),
                samples=samples,
                limit=Fraction(obj.get("limit", 0)),
                description=obj.get("description", ""),
                limit_fixture=obj.get("limit_fixture"),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed family: {exc}") from None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "profile": list(self.profile),
            "cameras": [[[e.to_json() for e in row] for row in cam] for cam in self.cameras],
            "samples": [str(s) for s in self.samples],
            "limit": str(self.limit),
            "limit_fixture": self.limit_fixture,
        }


@dataclass
class Trajectory:
    family: str
    points: list[tuple[Fraction, RankReport]]
    limit: tuple[Fraction, RankReport]
    stable_upper: int
    stable_lower: int
    border_rank_gap: bool
    rank_drop: bool

    def to_json(self) -> dict:
        def row(t, rep):
            return {
                "t": str(t),
                "verdict": rep.verdict,
                "rank": rep.rank,
                "certified_lower": rep.certified_lower,
                "certified_upper": rep.certified_upper,
                "lower_source": rep.lower_source,
                "upper_source": rep.upper_source,
                "support_count": rep.support_count,
                "flattening_ranks": list(rep.flattening_ranks),
                "general": rep.context.get("general"),
                "stratum": rep.context.get("stratum"),
            }

        return {
            "family": self.family,
            "samples": [row(t, r) for t, r in self.points],
            "limit": row(*self.limit),
            "stable_sample_upper": self.stable_upper,
            "stable_sample_lower": self.stable_lower,
            "limit_rank": self.limit[1].rank,
            "border_rank_gap": self.border_rank_gap,
            "rank_drop": self.rank_drop,
        }

    CSV_FIELDS = ("t", "kind", "verdict", "rank", "certified_lower", "certified_upper", "support_count", "flattening_ranks")

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for kind, (t, rep) in [("sample", p) for p in self.points] + [("limit", self.limit)]:
            rows.append([
                str(t), kind, rep.verdict, "" if rep.rank is None else str(rep.rank),
                str(rep.certified_lower), str(rep.certified_upper), str(rep.support_count),
                " ".join(str(r) for r in rep.flattening_ranks),
            ])
        return rows


def sweep(family: DegenerationFamily, profile: Sequence[int] | None = None, tail: int = 4) -> Trajectory:
    """Rank reports along the sample schedule and at the limit.

    The stable sample bounds are taken over the last ``tail`` samples. A
    border-rank gap is flagged when that stable upper bound is strictly below
    the certified lower bound at the limit; a rank drop when the limit's
    certified upper bound is strictly below the stable lower bound.
    """
    if profile is not None:
        family = family.with_profile(profile)
    points = [(t, report_for_rig(family.at(t))[0]) for t in family.samples]
    limit = (family.limit, report_for_rig(family.at(family.limit))[0])
    last = points[-tail:]
    stable_upper = min(r.certified_upper for _, r in last)
    stable_lower = min(r.certified_lower for _, r in last)
    gap = stable_upper < limit[1].certified_lower
    drop = limit[1].certified_upper < stable_lower
    return Trajectory(family.name, points, limit, stable_upper, stable_lower, gap, drop)
