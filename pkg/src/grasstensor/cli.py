"""Command-line front end.

Exit codes: 0 ok, 2 parse error, 3 invalid profile or shape, 4 assumption
violated, 5 certification failure. Errors print one line on stderr:
``error code=<n> kind=<ExceptionName> msg=<text>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .canonical import canonicalize
from .errors import GrasstensorError, ParseError
from .exact_linalg import ExactMatrix
from .fixtures import get_family, get_fixture, load_families, load_fixtures, run_fixtures
from .multiview import DEFAULT_BOUND, CameraRig, random_rig
from .rank import DegenerationFamily, Trajectory, report_for_rig, sweep
from .tensor import build_tensor, flatten

DEFAULT_SEED = 0


def _load_json(src: str) -> object:
    """Inline JSON (starting with '{') or a file path."""
    try:
        text = src if src.lstrip().startswith("{") else Path(src).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {src}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {src}: {exc.msg} at line {exc.lineno}") from None


def _parse_profile(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"profile must be comma-separated integers, got {text!r}") from None


def load_rig(src: str, profile: tuple[int, ...] | None = None) -> CameraRig:
    """Rig from a path, inline JSON, or ``fixture:NAME``."""
    if src.startswith("fixture:"):
        try:
            rig = get_fixture(src.split(":", 1)[1]).rig
        except KeyError:
            raise ParseError(f"unknown fixture {src.split(':', 1)[1]!r}") from None
    else:
        obj = _load_json(src)
        if not isinstance(obj, dict):
            raise ParseError("rig JSON must be an object")
        try:
            if profile is not None and "profile" not in obj:
                obj = dict(obj, profile=list(profile))
            rig = CameraRig.from_json(obj)
        except GrasstensorError:
            raise
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed rig: {type(exc).__name__}: {exc}") from None
    return rig.with_profile(profile) if profile is not None else rig


def load_family(src: str) -> DegenerationFamily:
    """Family from a path, inline JSON, or ``family:NAME``."""
    if src.startswith("family:"):
        try:
            return get_family(src.split(":", 1)[1])
        except KeyError:
            raise ParseError(f"unknown family {src.split(':', 1)[1]!r}") from None
    obj = _load_json(src)
    if not isinstance(obj, dict):
        raise ParseError("family JSON must be an object")
    return DegenerationFamily.from_json(obj)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_tensor(args) -> str:
    rig = load_rig(args.rig, _parse_profile(args.profile))
    t = build_tensor(rig)
    out = {"rig": rig.to_json(), "tensor": t.to_json()}
    if t.arity == 2:
        out["matrix"] = flatten(t, 1).to_json()
    return _dump(out)


def cmd_canonical(args) -> str:
    rig = load_rig(args.rig, _parse_profile(args.profile))
    res = canonicalize(rig, mode=args.mode, simplify=not args.no_simplify)
    return _dump(res.to_json())


def cmd_rank(args) -> str:
    rig = load_rig(args.rig, _parse_profile(args.profile))
    rep, _ = report_for_rig(rig)
    return _dump({"rig": rig.to_json(), "report": rep.to_json()})


def _parse_schedule(text: str) -> tuple[Fraction, ...]:
    try:
        sched = tuple(Fraction(x) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad schedule {text!r}") from None
    if not sched:
        raise ParseError("sample schedule is empty")
    return sched


def _trajectory_csv(tr: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(Trajectory.CSV_FIELDS)
    w.writerows(tr.csv_rows())
    return buf.getvalue()


def cmd_sweep(args) -> str:
    fam = load_family(args.family)
    if args.schedule:
        fam = DegenerationFamily(fam.name, fam.cameras, fam.profile, _parse_schedule(args.schedule), fam.limit, fam.description, fam.limit_fixture)
    tr = sweep(fam, profile=_parse_profile(args.profile))
    return _trajectory_csv(tr) if args.format == "csv" else _dump(tr.to_json())


def cmd_fixtures(args) -> tuple[str, int]:
    if args.export_dir:
        d = Path(args.export_dir)
        d.mkdir(parents=True, exist_ok=True)
        for fx in load_fixtures():
            (d / f"{fx.name}.json").write_text(_dump(fx.rig.to_json()))
        for fam in load_families():
            (d / f"family-{fam.name}.json").write_text(_dump(fam.to_json()))
    results = run_fixtures()
    failed = [r for r in results if not r.passed]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fixture", "status", "failed_checks"])
        for r in results:
            w.writerow([r.name, "PASS" if r.passed else "FAIL", " ".join(k for k, v in r.checks.items() if not v)])
        text = buf.getvalue()
    else:
        text = _dump({"fixtures": [r.to_json() for r in results], "passed": not failed})
    return text, (1 if failed else 0)


def cmd_rig(args) -> str:
    profile = _parse_profile(args.profile)
    try:
        hs = tuple(int(x) for x in args.h.split(","))
    except ValueError:
        raise ParseError(f"--h must be comma-separated integers, got {args.h!r}") from None
    if profile is None:
        raise ParseError("--profile is required")
    rig = random_rig(args.k, hs, profile, seed=args.seed, bound=args.bound)
    return _dump(rig.to_json())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grasstensor", description="Exact Grassmann tensors of multiview projections.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rig=True):
        if rig:
            sp.add_argument("--rig", required=True, help="rig JSON path, inline JSON, or fixture:NAME")
        sp.add_argument("--profile", help="override profile, e.g. 2,1,1")
        sp.add_argument("--out", help="write output here instead of stdout")

    sp = sub.add_parser("tensor", help="build the Grassmann tensor of a rig")
    common(sp)
    sp = sub.add_parser("canonical", help="reduce a rig to canonical form")
    common(sp)
    sp.add_argument("--mode", choices=("general", "nongeneral", "auto"), default="auto")
    sp.add_argument("--no-simplify", action="store_true", help="stop at the partial non-general form")
    sp = sub.add_parser("rank", help="certified rank report")
    common(sp)
    sp = sub.add_parser("sweep", help="rank along a degeneration family")
    common(sp, rig=False)
    sp.add_argument("--family", required=True, help="family JSON path, inline JSON, or family:NAME")
    sp.add_argument("--schedule", help="comma-separated sample values of t, e.g. 1/2,1/4")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp = sub.add_parser("fixtures", help="check the reference fixtures")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--export-dir", help="also write fixture rigs and families as JSON files here")
    sp = sub.add_parser("rig", help="random integer rig")
    common(sp, rig=False)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--h", required=True, help="view dimensions, e.g. 2,2,2")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    return p


COMMANDS = {
    "tensor": cmd_tensor,
    "canonical": cmd_canonical,
    "rank": cmd_rank,
    "sweep": cmd_sweep,
    "fixtures": cmd_fixtures,
    "rig": cmd_rig,
}


def _fail(exc: BaseException, code: int) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error code={code} kind={type(exc).__name__} msg={msg}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < 2**64:
        return _fail(ParseError("seed must be an unsigned 64-bit integer"), 2)
    try:
        result = COMMANDS[args.command](args)
    except GrasstensorError as exc:
        return _fail(exc, exc.exit_code)
    except AssertionError as exc:
        return _fail(exc, 5)
    text, code = result if isinstance(result, tuple) else (result, 0)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
