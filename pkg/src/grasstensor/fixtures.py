"""Reference configurations with known tensors and ranks, shipped as JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .canonical import (
    CanonicalizationResult,
    canonicalize_nongeneral,
    general_invariants,
    nongeneral_invariants,
    rig_from_stacked,
)
from .exact_linalg import ExactMatrix
from .multiview import CameraRig
from .tensor import GrassmannTensor, RankOneTerm, build_tensor, verify_decomposition

__all__ = ["Fixture", "FixtureResult", "load_fixtures", "get_fixture", "check_fixture", "run_fixtures", "match_stratum", "load_families", "get_family"]


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    rig: CameraRig
    expected: dict
    witness: tuple[RankOneTerm, ...] | None

    @property
    def expected_rank(self) -> int | None:
        return self.expected.get("rank")

    @property
    def general(self) -> bool:
        return self.expected["general"]

    def expected_support(self) -> list[tuple[int, ...]]:
        sup = self.expected["support"]
        if sup == "all":
            from itertools import product

            return list(product(*(range(1, d + 1) for d in self.expected["mode_dims"])))
        return sorted(tuple(p) for p in sup)


def _read(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath("data").joinpath(name).read_text())


def _parse(obj: dict) -> Fixture:
    rig = rig_from_stacked(ExactMatrix(obj["stacked"]), obj["hs"], obj["profile"])
    wit = None
    if "witness" in obj:
        wit = tuple(RankOneTerm.from_json(term) for term in obj["witness"])
    return Fixture(obj["name"], obj["description"], rig, obj["expected"], wit)


@lru_cache(maxsize=None)
def load_fixtures() -> tuple[Fixture, ...]:
    return tuple(_parse(f) for f in _read("fixtures.json")["fixtures"])


def get_fixture(name: str) -> Fixture:
    for f in load_fixtures():
        if f.name == name:
            return f
    raise KeyError(name)


@lru_cache(maxsize=None)
def _canonical_support(name: str) -> tuple[tuple[int, ...], ...]:
    fx = get_fixture(name)
    return tuple(build_tensor(canonicalize_nongeneral(fx.rig, simplify=True).rig).support())


def match_stratum(rig: CameraRig, res: CanonicalizationResult, canonical_tensor: GrassmannTensor) -> Fixture | None:
    """Non-general fixture with an exact rank whose configuration type matches.

    A match needs the same dimensions, profile and integer invariants, and
    the same support pattern either on the reduced representative or on the
    tensor of the rig as given.
    """
    inv = res.invariants.to_json()
    original = None
    for fx in load_fixtures():
        if fx.general or fx.expected_rank is None:
            continue
        if fx.rig.k != rig.k or fx.rig.hs != rig.hs or tuple(fx.rig.profile) != tuple(rig.profile):
            continue
        if fx.expected["invariants"] != inv:
            continue
        if tuple(canonical_tensor.support()) == _canonical_support(fx.name):
            return fx
        if original is None:
            original = build_tensor(rig).support()
        if original == fx.expected_support():
            return fx
    return None


@dataclass
class FixtureResult:
    name: str
    checks: dict[str, bool]
    report: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checks": self.checks, "report": self.report}


def check_fixture(fx: Fixture) -> FixtureResult:
    from .rank import report_for_rig

    t = build_tensor(fx.rig)
    exp = fx.expected
    checks = {
        "mode_dims": list(t.mode_dims) == exp["mode_dims"],
        "support": t.support() == fx.expected_support(),
    }
    if "invariants" in exp:
        inv = general_invariants(fx.rig) if fx.general else nongeneral_invariants(fx.rig)
        checks["invariants"] = inv.to_json() == exp["invariants"]
    if fx.witness is not None:
        checks["witness"] = verify_decomposition(t, fx.witness).ok and len(fx.witness) == exp["rank"]
    rep, _ = report_for_rig(fx.rig)
    if "closed_formula" in exp:
        checks["closed_formula"] = rep.closed_formula_value == exp["closed_formula"]
    checks["verdict"] = rep.verdict == exp["verdict"]
    checks["rank"] = rep.rank == exp["rank"]
    return FixtureResult(fx.name, checks, rep.to_json(include_witness=False))


def run_fixtures() -> list[FixtureResult]:
    return [check_fixture(fx) for fx in load_fixtures()]


@lru_cache(maxsize=None)
def load_families() -> tuple:
    from .rank import DegenerationFamily

    return tuple(DegenerationFamily.from_json(f) for f in _read("families.json")["families"])


def get_family(name: str):
    for f in load_families():
        if f.name == name:
            return f
    raise KeyError(name)
