"""Cameras, profiles, centers, Plücker coordinates and corresponding subspaces."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .combinatorics import enumerate_multiindices
from .errors import SamplingError, ShapeError
from .exact_linalg import ExactMatrix, Subspace, minor, rank, right_kernel

__all__ = [
    "Camera",
    "Profile",
    "CameraRig",
    "ViewSubspace",
    "center",
    "row_space",
    "plucker",
    "project",
    "sample_corresponding",
    "sample_generic_subspaces",
    "system_matrix",
    "act_view",
    "act_views",
    "act_ambient",
    "random_matrix",
    "random_invertible",
    "random_camera",
    "camera_with_center",
    "random_rig",
]

DEFAULT_BOUND = 10


@dataclass(frozen=True)
class Camera:
    """A maximal-rank (h+1) x (k+1) projection P^k -> P^h."""

    matrix: ExactMatrix

    def __post_init__(self):
        m = self.matrix
        if not isinstance(m, ExactMatrix):
            object.__setattr__(self, "matrix", m := ExactMatrix(m))
        if m.nrows >= m.ncols:
            raise ShapeError(f"camera must map onto a smaller space, got shape {m.shape}")
        if rank(m) != m.nrows:
            raise ShapeError("camera matrix is not of maximal rank")

    @property
    def k(self) -> int:
        return self.matrix.ncols - 1

    @property
    def h(self) -> int:
        return self.matrix.nrows - 1


@dataclass(frozen=True)
class Profile:
    alphas: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))

    def __len__(self) -> int:
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def validate(self, k: int, hs: Sequence[int]) -> None:
        if len(self.alphas) != len(hs):
            raise ShapeError(f"profile has {len(self.alphas)} parts for {len(hs)} views")
        if sum(self.alphas) != k + 1:
            raise ShapeError(f"profile {self.alphas} does not sum to k+1 = {k + 1}")
        for a, h in zip(self.alphas, hs):
            if not 1 <= a <= h:
                raise ShapeError(f"profile entry {a} outside 1..{h}")

    def s(self, hs: Sequence[int]) -> tuple[int, ...]:
        """Projective dimensions s_j = h_j - alpha_j of the view subspaces."""
        return tuple(h - a for h, a in zip(hs, self.alphas))


@dataclass(frozen=True)
class CameraRig:
    cameras: tuple[Camera, ...]
    profile: Profile

    def __post_init__(self):
        cams = tuple(c if isinstance(c, Camera) else Camera(ExactMatrix(c)) for c in self.cameras)
        object.__setattr__(self, "cameras", cams)
        if not isinstance(self.profile, Profile):
            object.__setattr__(self, "profile", Profile(tuple(self.profile)))
        if len(cams) not in (2, 3):
            raise ShapeError(f"rigs have 2 or 3 cameras, got {len(cams)}")
        ks = {c.k for c in cams}
        if len(ks) != 1:
            raise ShapeError(f"cameras disagree on the ambient dimension: {sorted(ks)}")
        self.profile.validate(self.k, self.hs)

    @property
    def k(self) -> int:
        return self.cameras[0].k

    @property
    def hs(self) -> tuple[int, ...]:
        return tuple(c.h for c in self.cameras)

    @property
    def ss(self) -> tuple[int, ...]:
        return self.profile.s(self.hs)

    def __len__(self) -> int:
        return len(self.cameras)

    def stacked(self) -> ExactMatrix:
        """The (k+1) x sum(h_j+1) matrix [P_1^T | P_2^T | ...]."""
        ts = [c.matrix.T for c in self.cameras]
        return ts[0].hstack(*ts[1:])

    def with_profile(self, alphas: Sequence[int]) -> "CameraRig":
        return CameraRig(self.cameras, Profile(tuple(alphas)))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "cameras": [c.matrix.to_json() for c in self.cameras],
            "profile": list(self.profile.alphas),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CameraRig":
        cams = tuple(Camera(ExactMatrix.from_json(m)) for m in obj["cameras"])
        rig = cls(cams, Profile(tuple(obj["profile"])))
        if "k" in obj and obj["k"] != rig.k:
            raise ShapeError(f"declared k={obj['k']} but cameras have k={rig.k}")
        return rig


@dataclass(frozen=True)
class ViewSubspace:
    """Basis matrix S_j, (h_j+1) x (s_j+1), of a subspace of view ``view`` (1-based)."""

    view: int
    matrix: ExactMatrix


def center(c: Camera) -> Subspace:
    """Center of projection as a linear subspace of Q^(k+1), dimension k-h."""
    return right_kernel(c.matrix)


def row_space(c: Camera) -> Subspace:
    """Span of the columns of P^T inside the dual space."""
    return Subspace(c.matrix.ncols, c.matrix.rows)


def plucker(s) -> tuple[Fraction, ...]:
    """Maximal minors of a basis matrix, rows chosen in lexicographic order."""
    if isinstance(s, ViewSubspace):
        m = s.matrix
    elif isinstance(s, Subspace):
        m = s.basis
        if m is None:
            raise ShapeError("zero subspace has no Plücker coordinates")
    else:
        m = s
    n, d = m.shape
    if d > n or rank(m) != d:
        raise ShapeError("basis matrix is rank deficient")
    cols = tuple(range(1, d + 1))
    return tuple(minor(m, rows, cols) for rows in enumerate_multiindices(n, d))


def _matvec(m: ExactMatrix, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(sum((a * b for a, b in zip(r, x)), Fraction(0)) for r in m.rows)


def project(c: Camera, x: Sequence) -> tuple[Fraction, ...]:
    """Image P(X); raises when X lies on the center."""
    y = _matvec(c.matrix, [Fraction(v) for v in x])
    if not any(y):
        raise ShapeError("point lies on the center of projection")
    return y


def random_matrix(rows: int, cols: int, rng: random.Random, bound: int = DEFAULT_BOUND) -> ExactMatrix:
    return ExactMatrix([[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)])


def _resample(draw: Callable[[], object], accept: Callable[[object], bool], tries: int, what: str):
    for _ in range(tries):
        x = draw()
        if accept(x):
            return x
    raise SamplingError(f"could not sample {what} after {tries} attempts")


def random_invertible(n: int, rng: random.Random, bound: int = DEFAULT_BOUND) -> ExactMatrix:
    return _resample(lambda: random_matrix(n, n, rng, bound), lambda g: rank(g) == n, 1000, "invertible matrix")


def random_camera(k: int, h: int, rng: random.Random, bound: int = DEFAULT_BOUND) -> Camera:
    m = _resample(lambda: random_matrix(h + 1, k + 1, rng, bound), lambda m: rank(m) == h + 1, 1000, "camera")
    return Camera(m)


def camera_with_center(c: Subspace, rng: random.Random, bound: int = DEFAULT_BOUND) -> Camera:
    """Random camera whose center is exactly ``c``."""
    if c.dim == 0:
        raise ShapeError("center must be nonzero")
    annihilator = right_kernel(c.basis.T)  # rows of P span c^perp
    g = random_invertible(annihilator.dim, rng, bound)
    return Camera(g @ annihilator.basis.T)


def random_rig(
    k: int,
    hs: Sequence[int],
    profile: Sequence[int],
    seed: int = 0,
    bound: int = DEFAULT_BOUND,
    accept: Callable[[CameraRig], bool] | None = None,
    tries: int = 1000,
) -> CameraRig:
    """Random integer rig, resampled until ``accept`` (if given) holds."""
    Profile(tuple(profile)).validate(k, hs)
    rng = random.Random(seed)

    def draw():
        return CameraRig(tuple(random_camera(k, h, rng, bound) for h in hs), Profile(tuple(profile)))

    return _resample(draw, accept or (lambda _: True), tries, "rig")


def _random_point_off_centers(rig: CameraRig, rng: random.Random, bound: int) -> tuple[Fraction, ...]:
    def draw():
        return tuple(Fraction(rng.randint(-bound, bound)) for _ in range(rig.k + 1))

    def ok(x):
        return all(any(_matvec(c.matrix, x)) for c in rig.cameras)

    return _resample(draw, ok, 1000, "point off all centers")


def sample_corresponding(
    rig: CameraRig, seed: int, bound: int = DEFAULT_BOUND
) -> tuple[list[ViewSubspace], tuple[Fraction, ...]]:
    """Random corresponding subspaces through the images of a random point X.

    Each S_j holds P_j(X) as first column plus s_j random view points.
    """
    rng = random.Random(seed)
    x = _random_point_off_centers(rig, rng, bound)
    out = []
    for j, (cam, s) in enumerate(zip(rig.cameras, rig.ss), start=1):
        img = _matvec(cam.matrix, x)

        def draw(img=img, h=cam.h, s=s):
            extra = random_matrix(h + 1, s, rng, bound).columns() if s else ()
            return ExactMatrix.from_columns((img, *extra))

        m = _resample(draw, lambda m, s=s: rank(m) == s + 1, 1000, "view subspace")
        out.append(ViewSubspace(j, m))
    return out, x


def sample_generic_subspaces(rig: CameraRig, seed: int, bound: int = DEFAULT_BOUND) -> list[ViewSubspace]:
    """Random subspaces of the profile's dimensions, with no correspondence imposed."""
    rng = random.Random(seed)
    out = []
    for j, (cam, s) in enumerate(zip(rig.cameras, rig.ss), start=1):
        m = _resample(
            lambda h=cam.h, s=s: random_matrix(h + 1, s + 1, rng, bound),
            lambda m, s=s: rank(m) == s + 1,
            1000,
            "view subspace",
        )
        out.append(ViewSubspace(j, m))
    return out


def system_matrix(rig: CameraRig, subspaces: Sequence[ViewSubspace]) -> ExactMatrix:
    """Block matrix [[P_1, S_1, 0, ...], [P_2, 0, S_2, ...], ...]."""
    if len(subspaces) != len(rig):
        raise ShapeError("one subspace per view is required")
    widths = []
    for cam, s, sub in zip(rig.cameras, rig.ss, subspaces):
        if sub.matrix.shape != (cam.h + 1, s + 1):
            raise ShapeError(
                f"view {sub.view}: expected subspace basis of shape {(cam.h + 1, s + 1)}, got {sub.matrix.shape}"
            )
        widths.append(s + 1)
    blocks = []
    for j, (cam, sub) in enumerate(zip(rig.cameras, subspaces)):
        row = cam.matrix
        for l, w in enumerate(widths):
            row = row.hstack(sub.matrix if l == j else ExactMatrix.zeros(cam.h + 1, w))
        blocks.append(row)
    return blocks[0].vstack(*blocks[1:])


def act_view(c: Camera, g: ExactMatrix) -> Camera:
    """Left action g . P of GL(h+1): a change of coordinates in the view."""
    if g.shape != (c.h + 1, c.h + 1):
        raise ShapeError(f"view transform must be {(c.h + 1, c.h + 1)}, got {g.shape}")
    if rank(g) != c.h + 1:
        raise ShapeError("view transform is singular")
    return Camera(g @ c.matrix)


def act_views(rig: CameraRig, gs: Sequence[ExactMatrix]) -> CameraRig:
    if len(gs) != len(rig):
        raise ShapeError("one view transform per camera is required")
    return CameraRig(tuple(act_view(c, g) for c, g in zip(rig.cameras, gs)), rig.profile)


def act_ambient(rig: CameraRig, g: ExactMatrix) -> CameraRig:
    """Right action P . g of GL(k+1): a change of coordinates in P^k."""
    n = rig.k + 1
    if g.shape != (n, n):
        raise ShapeError(f"ambient transform must be {(n, n)}, got {g.shape}")
    if rank(g) != n:
        raise ShapeError("ambient transform is singular")
    return CameraRig(tuple(Camera(c.matrix @ g) for c in rig.cameras), rig.profile)
