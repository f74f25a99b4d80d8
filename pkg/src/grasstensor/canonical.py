"""Generality checks, intersection invariants and canonical block forms.

``L_j`` below is the span of the columns of ``P_j^T`` (the row space of
camera j). Every reduction is realised by an ambient transform ``H`` and one
view transform ``A_j`` per camera, so the reduced rig is
``A_j . P_j . H`` and its stacked matrix is ``H^T [P_1^T | ...] diag(A_j^T)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import AssumptionViolated, ShapeError
from .exact_linalg import ExactMatrix, Subspace, intersect, span_join
from .multiview import Camera, CameraRig, random_rig, row_space

__all__ = [
    "PAIRS",
    "GeneralInvariants",
    "NonGeneralInvariants",
    "CanonicalizationResult",
    "check_assumption",
    "centers_disjoint",
    "general_invariants",
    "nongeneral_invariants",
    "canonicalize_general",
    "canonicalize_two_view",
    "canonicalize_nongeneral",
    "canonicalize",
    "phi_pattern",
    "phi_two_view_pattern",
    "random_general_rig",
    "rig_from_stacked",
]

PAIRS = ((1, 2), (1, 3), (2, 3))


def _third(r: int, s: int) -> int:
    return 6 - r - s


def _key(r: int, s: int) -> str:
    return f"{r}{s}"


@dataclass(frozen=True)
class GeneralInvariants:
    i: int
    i_rs: dict[str, int]
    j_rs: dict[str, int]

    def to_json(self) -> dict:
        return {"kind": "general", "i": self.i, "i_rs": self.i_rs, "j_rs": self.j_rs}


@dataclass(frozen=True)
class NonGeneralInvariants:
    g: int
    g_rs: dict[str, int]
    l_rs: dict[str, int]
    alpha_rs: dict[str, int]
    beta_rs: dict[str, int]

    def formal(self, k: int, hs: Sequence[int]) -> tuple[int, dict[str, int]]:
        """Formal i and i_rs from the dimension counts alone."""
        i = sum(hs) + 1 - 2 * k
        return i, {_key(r, s): hs[r - 1] + hs[s - 1] + 1 - k for r, s in PAIRS}

    def links_hold(self, k: int, hs: Sequence[int]) -> bool:
        i, i_rs = self.formal(k, hs)
        return all(
            self.g == i + self.alpha_rs[p] + self.beta_rs[p] and self.g_rs[p] == i_rs[p] + self.alpha_rs[p]
            for p in i_rs
        )

    def to_json(self) -> dict:
        return {
            "kind": "nongeneral",
            "g": self.g,
            "g_rs": self.g_rs,
            "l_rs": self.l_rs,
            "alpha_rs": self.alpha_rs,
            "beta_rs": self.beta_rs,
        }


@dataclass(frozen=True)
class CanonicalizationResult:
    rig: CameraRig
    H: ExactMatrix
    A: tuple[ExactMatrix, ...]
    canonical_matrix: ExactMatrix
    invariants: GeneralInvariants | NonGeneralInvariants | dict
    form: str
    z_blocks: dict[tuple[int, int], ExactMatrix] = field(default_factory=dict)

    def to_json(self) -> dict:
        inv = self.invariants if isinstance(self.invariants, dict) else self.invariants.to_json()
        out = {
            "form": self.form,
            "H": self.H.to_json(),
            "A": [a.to_json() for a in self.A],
            "canonical_matrix": self.canonical_matrix.to_json(),
            "invariants": inv,
        }
        if self.form == "psi":
            out["z_blocks"] = {f"Z{p}_{t}": m.to_json() for (p, t), m in sorted(self.z_blocks.items())}
        return out


# --- subspace bookkeeping -------------------------------------------------


def _row_spaces(rig: CameraRig) -> list[Subspace]:
    return [row_space(c) for c in rig.cameras]


def _complete(base: Sequence[tuple], candidates: Sequence[tuple], n: int, limit: int | None = None) -> list[tuple]:
    """Greedily pick candidates that are independent of ``base`` and of earlier picks."""
    picked: list[tuple] = []
    current = Subspace(n, base)
    for v in candidates:
        if limit is not None and len(picked) == limit:
            break
        nxt = Subspace(n, current.vectors() + (v,))
        if nxt.dim > current.dim:
            picked.append(tuple(v))
            current = nxt
    return picked


def _unit(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(j == i)) for j in range(n))


def check_assumption(rig: CameraRig) -> tuple[bool, tuple[int, int, int] | None]:
    """Whether span(L_r cap L_s, L_t) is the whole space for every {r, s, t}.

    Returns ``(True, None)`` or ``(False, (r, s, t))`` for the first failure.
    """
    if len(rig) != 3:
        raise ShapeError("the generality check needs exactly 3 cameras")
    L = _row_spaces(rig)
    n = rig.k + 1
    for r, s in PAIRS:
        t = _third(r, s)
        if span_join(intersect(L[r - 1], L[s - 1]), L[t - 1]).dim != n:
            return False, (r, s, t)
    return True, None


def centers_disjoint(rig: CameraRig) -> bool:
    """For two cameras: span(L_A, L_B) is the whole space."""
    L = _row_spaces(rig)
    return span_join(L[0], L[1]).dim == rig.k + 1


def general_invariants(rig: CameraRig) -> GeneralInvariants:
    ok, bad = check_assumption(rig)
    if not ok:
        raise AssumptionViolated(f"generality assumption fails for views {bad}")
    k, hs = rig.k, rig.hs
    L = _row_spaces(rig)
    i_formula = sum(hs) + 1 - 2 * k
    i_meas = intersect(intersect(L[0], L[1]), L[2]).dim
    i_rs, j_rs = {}, {}
    for r, s in PAIRS:
        t = _third(r, s)
        formula = hs[r - 1] + hs[s - 1] + 1 - k
        measured = intersect(L[r - 1], L[s - 1]).dim
        if measured != formula:
            raise AssumptionViolated(f"dim(L{r} cap L{s}) = {measured}, expected {formula}")
        i_rs[_key(r, s)] = measured
        j_rs[_key(r, s)] = measured - i_meas
        if j_rs[_key(r, s)] != k - hs[t - 1]:
            raise AssumptionViolated(f"j_{r}{s} = {j_rs[_key(r, s)]}, expected {k - hs[t - 1]}")
    if i_meas != i_formula:
        raise AssumptionViolated(f"triple intersection has dimension {i_meas}, expected {i_formula}")
    return GeneralInvariants(i_meas, i_rs, j_rs)


def nongeneral_invariants(rig: CameraRig) -> NonGeneralInvariants:
    if len(rig) != 3:
        raise ShapeError("invariants need exactly 3 cameras")
    n = rig.k + 1
    L = _row_spaces(rig)
    triple = intersect(intersect(L[0], L[1]), L[2])
    g = triple.dim
    g_rs, l_rs, a_rs, b_rs = {}, {}, {}, {}
    for r, s in PAIRS:
        p = _key(r, s)
        lam = intersect(L[r - 1], L[s - 1])
        g_rs[p] = lam.dim
        l_rs[p] = lam.dim - g
        a_rs[p] = n - span_join(L[r - 1], L[s - 1]).dim
        b_rs[p] = n - span_join(lam, L[_third(r, s) - 1]).dim
    inv = NonGeneralInvariants(g, g_rs, l_rs, a_rs, b_rs)
    if not inv.links_hold(rig.k, rig.hs):
        raise AssertionError("measured intersection dimensions break the Grassmann relations")
    return inv


# --- transforms ---------------------------------------------------------------


def _finish(
    rig: CameraRig,
    basis: Sequence[tuple],
    targets: Sequence[Sequence[tuple]],
) -> tuple[ExactMatrix, tuple[ExactMatrix, ...], CameraRig, ExactMatrix]:
    """Build H, A_j from an ambient basis and per-view target columns.

    ``targets[j]`` lists h_j+1 vectors of L_j (original coordinates) that must
    become the columns of the reduced P_j^T.
    """
    B = ExactMatrix.from_columns(basis)
    Ht = B.inverse()
    H = Ht.T
    A = []
    cams = []
    for cam, cols in zip(rig.cameras, targets):
        X = cam.matrix.T.solve(ExactMatrix.from_columns(cols))
        a = X.T
        A.append(a)
        cams.append(Camera(a @ cam.matrix @ H))
    new_rig = CameraRig(tuple(cams), rig.profile)
    canon = new_rig.stacked()
    return H, tuple(A), new_rig, canon


def phi_pattern(k: int, hs: Sequence[int]) -> ExactMatrix:
    """The 0/1 block matrix of the general three-view canonical form."""
    i = sum(hs) + 1 - 2 * k
    j12, j13, j23 = k - hs[2], k - hs[1], k - hs[0]
    n = k + 1
    V = list(range(i))
    W = list(range(i, i + j12))
    U = list(range(i + j12, i + j12 + j13))
    S = list(range(i + j12 + j13, n))
    cols = []
    for idx in (V + W + U, V + W + S, V + U + S):
        cols.extend(_unit(n, x) for x in idx)
    return ExactMatrix.from_columns(cols)


def phi_two_view_pattern(k: int, h1: int, h2: int) -> ExactMatrix:
    i = h1 + h2 - k + 1
    n = k + 1
    a = [_unit(n, x) for x in range(h1 + 1)]
    b = [_unit(n, x) for x in range(i)] + [_unit(n, x) for x in range(h1 + 1, n)]
    return ExactMatrix.from_columns(a + b)


def canonicalize_general(rig: CameraRig) -> CanonicalizationResult:
    """Reduce a rig satisfying the generality assumption to the 0/1 form.

    Bases are processed in the order: triple intersection, then complements
    inside L12, L13, L23, each following the canonical (RREF) basis order.
    """
    inv = general_invariants(rig)
    n = rig.k + 1
    L = _row_spaces(rig)
    triple = intersect(intersect(L[0], L[1]), L[2])
    V = list(triple.vectors())
    blocks = {}
    for r, s in PAIRS:
        lam = intersect(L[r - 1], L[s - 1])
        blocks[_key(r, s)] = _complete(V, lam.vectors(), n)
    W, U, S = blocks["12"], blocks["13"], blocks["23"]
    basis = V + W + U + S
    if len(basis) != n:
        raise AssumptionViolated("intersection blocks do not form a basis")
    targets = [V + W + U, V + W + S, V + U + S]
    H, A, new_rig, canon = _finish(rig, basis, targets)
    expected = phi_pattern(rig.k, rig.hs)
    if canon != expected:
        raise AssertionError("reduced matrix differs from the canonical pattern")
    return CanonicalizationResult(new_rig, H, A, canon, inv, "phi")


def canonicalize_two_view(rig: CameraRig) -> CanonicalizationResult:
    if len(rig) != 2:
        raise ShapeError("two-view canonical form needs exactly 2 cameras")
    if not centers_disjoint(rig):
        raise AssumptionViolated("the two centers intersect")
    n = rig.k + 1
    h1, h2 = rig.hs
    LA, LB = _row_spaces(rig)
    inter = intersect(LA, LB)
    i = h1 + h2 - rig.k + 1
    if inter.dim != i:
        raise AssumptionViolated(f"dim(L_A cap L_B) = {inter.dim}, expected {i}")
    V = list(inter.vectors())
    W = _complete(V, LA.vectors(), n)
    Wp = _complete(V, LB.vectors(), n)
    H, A, new_rig, canon = _finish(rig, V + W + Wp, [V + W, V + Wp])
    if canon != phi_two_view_pattern(rig.k, h1, h2):
        raise AssertionError("reduced matrix differs from the canonical pattern")
    return CanonicalizationResult(new_rig, H, A, canon, {"kind": "two_view", "i": i}, "phi")


def canonicalize_nongeneral(rig: CameraRig, simplify: bool = False) -> CanonicalizationResult:
    """Partial reduction for arbitrary three-camera rigs.

    The first g + l12 + l13 + l23 ambient basis vectors come from the triple
    intersection and the pairwise complements; each view then keeps identity
    columns on the blocks it contains and a residual column block Z_t whose
    coordinates on those blocks are cleared by a view action.

    The remaining ambient basis vectors are standard unit vectors, or, with
    ``simplify``, residual columns of views 1, 2, 3 taken greedily (so they
    turn into identity columns of the Z blocks) before falling back to unit
    vectors.
    """
    if len(rig) != 3:
        raise ShapeError("canonical form needs exactly 3 cameras")
    inv = nongeneral_invariants(rig)
    n = rig.k + 1
    L = _row_spaces(rig)
    triple = intersect(intersect(L[0], L[1]), L[2])
    V = list(triple.vectors())
    pair = {}
    for r, s in PAIRS:
        pair[_key(r, s)] = _complete(V, intersect(L[r - 1], L[s - 1]).vectors(), n)
    own = {1: ("12", "13"), 2: ("12", "23"), 3: ("13", "23")}
    fixed = V + pair["12"] + pair["13"] + pair["23"]

    rest = {}
    for t in (1, 2, 3):
        base = V + pair[own[t][0]] + pair[own[t][1]]
        rest[t] = _complete(base, L[t - 1].vectors(), n)

    extras_from: dict[int, list[tuple]] = {1: [], 2: [], 3: []}
    extras: list[tuple] = []
    if simplify:
        for t in (1, 2, 3):
            picked = _complete(fixed + extras, rest[t], n)
            extras_from[t] = picked
            extras += picked
    extras += _complete(fixed + extras, [_unit(n, x) for x in range(n)], n)
    basis = fixed + extras
    if len(basis) != n:
        raise AssertionError("failed to complete an ambient basis")

    Bm = ExactMatrix.from_columns(basis)
    Binv = Bm.inverse()
    index = {v: x for x, v in enumerate(basis)}
    widths = [len(V), len(pair["12"]), len(pair["13"]), len(pair["23"]), len(extras)]
    band_starts = [sum(widths[:p]) for p in range(5)]

    targets = []
    z_cols: dict[int, list[tuple]] = {}
    for t in (1, 2, 3):
        ident = V + pair[own[t][0]] + pair[own[t][1]]
        own_idx = {index[v] for v in ident + extras_from[t]}
        residual = [v for v in rest[t] if v not in set(extras_from[t])]
        reduced = []
        for v in residual:
            coords = [sum((Binv[i, j] * v[j] for j in range(n)), Fraction(0)) for i in range(n)]
            coords = [Fraction(0) if i in own_idx else c for i, c in enumerate(coords)]
            reduced.append(tuple(coords))
        # back to original coordinates
        reduced_orig = [tuple(sum((Bm[i, j] * c[j] for j in range(n)), Fraction(0)) for i in range(n)) for c in reduced]
        targets.append(ident + extras_from[t] + reduced_orig)
        z_cols[t] = [_unit(n, index[v]) for v in extras_from[t]] + reduced

    H, A, new_rig, canon = _finish(rig, basis, targets)
    z_blocks = {}
    for t in (1, 2, 3):
        if not z_cols[t]:
            continue
        zt = ExactMatrix.from_columns(z_cols[t])
        for p in range(5):
            if widths[p]:
                z_blocks[(p + 1, t)] = zt.select(rows=range(band_starts[p], band_starts[p] + widths[p]))
    return CanonicalizationResult(new_rig, H, A, canon, inv, "psi", z_blocks)


def canonicalize(rig: CameraRig, mode: str = "auto", simplify: bool = True) -> CanonicalizationResult:
    """Dispatch on ``mode``: ``general``, ``nongeneral`` or ``auto``."""
    if len(rig) == 2:
        return canonicalize_two_view(rig)
    if mode == "general":
        return canonicalize_general(rig)
    if mode == "nongeneral":
        return canonicalize_nongeneral(rig, simplify=simplify)
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    ok, _ = check_assumption(rig)
    return canonicalize_general(rig) if ok else canonicalize_nongeneral(rig, simplify=simplify)


def random_general_rig(
    k: int, hs: Sequence[int], profile: Sequence[int], seed: int = 0, bound: int = 10
) -> CameraRig:
    """Random integer rig meeting the generality assumption (or disjoint centers for 2 views)."""
    accept = (lambda r: check_assumption(r)[0]) if len(hs) == 3 else centers_disjoint
    return random_rig(k, hs, profile, seed=seed, bound=bound, accept=accept)


def rig_from_stacked(m: ExactMatrix, hs: Sequence[int], profile: Sequence[int]) -> CameraRig:
    """Split a stacked [P_1^T | P_2^T | ...] matrix back into cameras."""
    if sum(h + 1 for h in hs) != m.ncols:
        raise ShapeError("view dimensions do not match the stacked matrix")
    cams = []
    start = 0
    for h in hs:
        cams.append(Camera(m.select(cols=range(start, start + h + 1)).T))
        start += h + 1
    return CameraRig(tuple(cams), tuple(profile))
