"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import json
import random
import subprocess
import sys
from itertools import product

from grasstensor.canonical import (
    canonicalize_general,
    canonicalize_two_view,
    nongeneral_invariants,
    phi_pattern,
    phi_two_view_pattern,
    random_general_rig,
    rig_from_stacked,
)
from grasstensor.exact_linalg import ExactMatrix, det, rank, right_kernel
from grasstensor.fixtures import get_family, get_fixture
from grasstensor.multiview import (
    act_ambient,
    act_views,
    plucker,
    random_invertible,
    random_rig,
    sample_corresponding,
    sample_generic_subspaces,
    system_matrix,
)
from grasstensor.rank import analyze, closed_rank_bifocal, closed_rank_trifocal, report_for_rig, sweep
from grasstensor.tensor import build_bifocal, build_tensor, contract, flatten, flattening_ranks, verify_decomposition

RESULTS = []


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def two_view_shapes():
    out = []
    for k in range(2, 8):
        for h1, h2 in product(range(1, min(5, k - 1) + 1), repeat=2):
            for a1 in range(1, h1 + 1):
                a2 = k + 1 - a1
                if 1 <= a2 <= h2:
                    out.append((k, h1, h2, a1, a2))
    return out


def test_criterion_1_two_view_formula():
    shapes = two_view_shapes()
    rng = random.Random(1)
    bad = []
    for n in range(200):
        k, h1, h2, a1, a2 = shapes[n % len(shapes)]
        rig = random_general_rig(k, (h1, h2), (a1, a2), seed=rng.getrandbits(64))
        r = rank(flatten(build_bifocal(rig), 1))
        if r != closed_rank_bifocal(k, h1, h2, a1, a2):
            bad.append((k, h1, h2, a1, a2))
    reference = get_fixture("bifocal-p4-33").rig
    reference_rank = rank(flatten(build_bifocal(reference), 1))
    ok = not bad and reference_rank == 3 == closed_rank_bifocal(4, 3, 3, 3, 2)
    record(1, ok, f"200 rigs over {len(shapes)} shapes, mismatches={bad}, (4;3,3;3,2) rank={reference_rank}")


def three_view_shapes():
    out = []
    for k in range(2, 7):
        for hs in product(range(1, min(4, k - 1) + 1), repeat=3):
            if sum(hs) + 1 - 2 * k < 0:
                continue
            for prof in product(*(range(1, h + 1) for h in hs)):
                if sum(prof) == k + 1:
                    out.append((k, hs, prof))
    return out


def test_criterion_2_three_view_formula():
    shapes = three_view_shapes()
    bad = []
    for k, hs, prof in shapes:
        want = closed_rank_trifocal(k, *hs, *prof)
        for seed in range(5):
            rig = random_general_rig(k, hs, prof, seed=seed)
            t = build_tensor(canonicalize_general(rig).rig)
            if t.support_count != want or not t.is_face_disjoint():
                bad.append((k, hs, prof, seed))
    classical = build_tensor(get_fixture("trifocal-classical").rig)
    p4 = build_tensor(get_fixture("trifocal-p4-332").rig)
    reference_ok = (
        classical.support() == [(1, 1, 3), (1, 3, 1), (2, 2, 1), (3, 1, 2)]
        and closed_rank_trifocal(3, 2, 2, 2, 2, 1, 1) == 4
        and p4.support() == [(1, 2, 3), (1, 6, 1), (2, 1, 3), (2, 5, 1), (3, 4, 2), (4, 3, 1), (5, 2, 2), (6, 1, 2)]
        and closed_rank_trifocal(4, 3, 3, 2, 2, 2, 1) == 8
    )
    record(2, not bad and reference_ok, f"{len(shapes)} shapes x 5 rigs, failures={bad[:5]}, reference supports ok={reference_ok}")


def test_criterion_3_canonical_forms():
    shapes = [s for s in three_view_shapes() if s[0] >= 3]
    rng = random.Random(3)
    mismatches = round_trip = 0
    for n in range(100):
        k, hs, prof = shapes[rng.randrange(len(shapes))]
        rig = random_general_rig(k, hs, prof, seed=rng.getrandbits(64))
        res = canonicalize_general(rig)
        mismatches += res.canonical_matrix != phi_pattern(k, hs)
        back = tuple(a.inverse() @ c.matrix @ res.H.inverse() for a, c in zip(res.A, res.rig.cameras))
        round_trip += back != tuple(c.matrix for c in rig.cameras)
    reference_two_view = ExactMatrix(
        [[1, 0, 0, 0, 1, 0, 0, 0], [0, 1, 0, 0, 0, 1, 0, 0], [0, 0, 1, 0, 0, 0, 1, 0], [0, 0, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0, 0, 1]]
    )
    tv = canonicalize_two_view(random_general_rig(4, (3, 3), (3, 2), seed=30))
    two_ok = tv.canonical_matrix == reference_two_view == phi_two_view_pattern(4, 3, 3)
    ok = mismatches == 0 and round_trip == 0 and two_ok
    record(3, ok, f"100 general rigs: pattern mismatches={mismatches}, round-trip failures={round_trip}; two-view form ok={two_ok}")


def test_criterion_4_correspondence_vanishing():
    shapes = [(3, (2, 2, 2), (2, 1, 1)), (4, (3, 3, 2), (2, 2, 1)), (4, (2, 2, 2), (2, 2, 1)), (4, (3, 3), (3, 2)), (5, (4, 3, 3), (2, 2, 2))]
    nonzero = 0
    for i in range(100):
        k, hs, prof = shapes[i % 5]
        rig = random_rig(k, hs, prof, seed=400 + i % 5)
        t = build_tensor(rig)
        subs, _ = sample_corresponding(rig, seed=i)
        nonzero += contract(t, [plucker(s) for s in subs]) != 0
    rig = random_rig(3, (2, 2, 2), (2, 1, 1), seed=44)
    t = build_tensor(rig)
    hits, incident = 0, 0
    for s in range(100):
        subs = sample_generic_subspaces(rig, seed=1000 + s)
        if contract(t, [plucker(x) for x in subs]) != 0:
            hits += 1
        else:
            # re-examine: a kernel vector with nonzero X part is a genuine common point
            ker = right_kernel(system_matrix(rig, subs))
            incident += any(any(v[: rig.k + 1]) for v in ker.vectors())
    ok = nonzero == 0 and hits >= 99 and hits + incident == 100
    record(4, ok, f"corresponding nonzero={nonzero}/100; generic nonzero={hits}/100, zero cases with true incidence={incident}")


def test_criterion_5_degenerate_fixtures():
    tables = {
        "p5-222": (0, 0, 0, 0, 3),
        "trifocal-collinear": (2, 2, 0, 0, 1),
        "p4-222-intro": (0, 1, 1, 0, 1),
    }
    table_ok = True
    for name, (g, g_rs, l_rs, a_rs, b_rs) in tables.items():
        inv = nongeneral_invariants(get_fixture(name).rig)
        table_ok &= inv.g == g and all(
            set(d.values()) == {v} for d, v in ((inv.g_rs, g_rs), (inv.l_rs, l_rs), (inv.alpha_rs, a_rs), (inv.beta_rs, b_rs))
        )
    ranks = {}
    for name, want in [("trifocal-collinear", 5), ("p4-222-intro", 4), ("p4-222-case-a", 5), ("p4-222-case-b", 2), ("p4-222-case-c", 4)]:
        fx = get_fixture(name)
        t = build_tensor(fx.rig)
        support_ok = t.support() == fx.expected_support()
        witness_ok = fx.witness is None or (verify_decomposition(t, fx.witness).ok and len(fx.witness) == want)
        rep, _ = report_for_rig(fx.rig)
        ranks[name] = rep.rank
        table_ok &= support_ok and witness_ok and rep.verdict == "exact" and rep.rank == want
    record(5, table_ok, f"invariant tables and rank fixtures; ranks={ranks}")


def test_criterion_6_border_rank_evidence():
    a = sweep(get_family("coplanar-p4"))
    b = sweep(get_family("meeting-p4"))
    c = sweep(get_family("collinear-p3"))

    def stable(tr):
        last = [r for _, r in tr.points[-4:]]
        return all(r.verdict == "exact" for r in last) and tr.stable_upper

    ok = (
        stable(a) == 4 and a.limit[1].rank == 5 and a.border_rank_gap
        and b.limit[1].rank == 2 and not b.border_rank_gap and b.rank_drop
        and stable(c) == 4 and c.limit[1].rank == 5 and c.border_rank_gap
    )
    record(
        6,
        ok,
        f"coplanar {stable(a)}->{a.limit[1].rank} gap={a.border_rank_gap}; "
        f"meeting {stable(b)}->{b.limit[1].rank} gap={b.border_rank_gap} drop={b.rank_drop}; "
        f"collinear {stable(c)}->{c.limit[1].rank} gap={c.border_rank_gap}",
    )


def test_criterion_7_group_actions():
    rng = random.Random(7)
    rig = random_rig(4, (3, 3, 2), (2, 2, 1), seed=70)
    t = build_tensor(rig)
    scale_fail = 0
    for _ in range(50):
        g = random_invertible(5, rng, 5)
        scale_fail += build_tensor(act_ambient(rig, g)) != t.scale(det(g))
    franks = flattening_ranks(t)
    rank_fail = 0
    for _ in range(50):
        gs = [random_invertible(h + 1, rng, 5) for h in rig.hs]
        rank_fail += flattening_ranks(build_tensor(act_views(rig, gs))) != franks
    record(7, scale_fail == 0 and rank_fail == 0, f"ambient det-scaling failures={scale_fail}/50, flattening-rank changes={rank_fail}/50")


def _artifacts(tmp):
    cmds = [["fixtures"], ["rig", "--k", "4", "--h", "3,3,2", "--profile", "2,2,1", "--seed", "12345"]]
    cmds += [["sweep", "--family", f"family:{n}"] for n in ("collinear-p3", "coplanar-p4", "meeting-p4", "coplanar-meeting-p4")]
    out = []
    for i, c in enumerate(cmds):
        path = tmp / f"{i}.json"
        subprocess.run([sys.executable, "-m", "grasstensor.cli", *c, "--out", str(path)], check=True)
        out.append(path.read_bytes())
    return out


def test_criterion_8_determinism(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first = _artifacts(tmp_path / "a")
    second = _artifacts(tmp_path / "b")
    parsed = all(json.loads(x) for x in first)
    record(8, first == second and parsed, f"{len(first)} JSON artifacts from two separate runs, identical={first == second}")
