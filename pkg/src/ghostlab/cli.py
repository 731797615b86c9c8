"""ghostlab command line: ``family``, ``certify`` and ``ghost``.

Exit status: 0 success, 1 verification failure, 2 usage or config error.

Config files are INI-style.  Keys may sit under ``[run]`` (or with no
section header at all) and tolerances under ``[tolerances]``::

    kind = sl2
    primes = 3,5,7
    policy = steinberg
    window = 1-3
    parallelism = 4

    [tolerances]
    cluster = 1e-8
    projection = 1e-8
"""

from __future__ import annotations

import argparse
import configparser
import sys
import time
from dataclasses import asdict, dataclass, field

from .coarse import write_spectra_csv
from .errors import ClusterAmbiguous, GhostLabError, NotPrime, OracleMismatch
from .families import KINDS, POLICIES, FamilySpec, build_family
from .ghost import build_T, ghost_projection, make_window, rank_sequence
from .groups import DEFAULT_CAP
from .kernels import BACKEND
from .report import Tolerances, canonical_json, certificate, family_summary, ghost_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_int_list(text) -> list[int]:
    if text is None or text == "":
        return []
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"malformed integer list {text!r}") from None


def parse_window(text, nlevels: int) -> list[int]:
    """1-based positions: ``"1,3"``, ``"2-4"`` or ``"all"``; returned 0-based."""
    if text is None or str(text).strip().lower() == "all":
        return list(range(nlevels))
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        try:
            if "-" in part:
                a, b = (int(x) for x in part.split("-", 1))
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"malformed window {text!r}") from None
    if not out:
        raise UsageError("window is empty")
    if any(not 1 <= p <= nlevels for p in out) or len(set(out)) != len(out):
        raise UsageError(f"window {text!r} must list distinct positions in 1..{nlevels}")
    return [p - 1 for p in out]


@dataclass
class RunConfig:
    kind: str
    primes: list[int] = field(default_factory=list)
    degrees: list[int] = field(default_factory=list)
    orders: list[int] = field(default_factory=list)
    preset: str = ""
    policy: str = ""
    window: str | None = None
    cluster_tol: float = Tolerances.cluster
    projection_tol: float = Tolerances.projection
    parallelism: int = 1
    cap: int = DEFAULT_CAP
    truncate: int | None = None
    out: str | None = None
    csv: str | None = None

    def family_spec(self) -> FamilySpec:
        try:
            return FamilySpec(self.kind, self.primes, self.degrees, self.orders, self.preset, self.policy)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def echo(self) -> dict:
        # execution details (parallelism, output paths) stay out of the report body
        keep = ("kind", "primes", "degrees", "orders", "preset", "window", "truncate", "cap")
        d = {k: v for k, v in asdict(self).items() if k in keep}
        d["policy"] = self.family_spec().default_policy
        return d


def read_config(path) -> dict:
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser()
    try:
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"bad config {path}: {exc}") from None
    values = {}
    for section in parser.sections():
        for key, val in parser.items(section):
            if section == "tolerances":
                key = f"tolerances.{key}"
            values[key] = val
    return values


def build_config(args) -> RunConfig:
    file_values = read_config(args.config) if args.config else {}
    known = {"kind", "primes", "degrees", "orders", "preset", "policy", "window", "parallelism", "cap",
             "tolerances.cluster", "tolerances.projection"}
    unknown = set(file_values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")

    def pick(flag, key):
        v = getattr(args, flag, None)
        return v if v is not None else file_values.get(key)

    kind = pick("kind", "kind")
    if not kind:
        raise UsageError("no family kind given (--kind or config)")
    try:
        cfg = RunConfig(
            kind=kind,
            primes=parse_int_list(pick("primes", "primes")),
            degrees=parse_int_list(pick("degrees", "degrees")),
            orders=parse_int_list(pick("orders", "orders")),
            preset=pick("preset", "preset") or "",
            policy=pick("policy", "policy") or "",
            window=pick("window", "window"),
            cluster_tol=float(pick("cluster_tol", "tolerances.cluster") or Tolerances.cluster),
            projection_tol=float(pick("projection_tol", "tolerances.projection") or Tolerances.projection),
            parallelism=int(pick("parallelism", "parallelism") or 1),
            cap=int(pick("cap", "cap") or DEFAULT_CAP),
            truncate=getattr(args, "truncate", None),
            out=args.out,
            csv=getattr(args, "csv", None),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.parallelism < 1:
        raise UsageError("parallelism must be at least 1")
    if cfg.truncate is not None and cfg.truncate < 0:
        raise UsageError("--truncate must be non-negative")
    return cfg


def _tolerances(cfg):
    try:
        return Tolerances(cfg.cluster_tol, cfg.projection_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _family(cfg):
    spec = cfg.family_spec()
    try:
        return spec, build_family(spec, cap=cfg.cap)
    except NotPrime as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path, text):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_family(cfg: RunConfig) -> int:
    _, family = _family(cfg)
    summary = family_summary(family)
    print(f"family {family.name}: {len(family)} levels, {summary['symbols']} symbols, "
          f"symmetric={summary['symmetry']}")
    for row in summary["levels"]:
        print(f"  {row['position']:>2}  {row['label']:<10} order {row['order']:>7}  "
              f"degree {row['degree']}  diameter {row['diameter']}")
    print(f"orders: {','.join(str(o) for o in summary['index_growth']['orders'])}")
    _write(cfg.out, canonical_json(summary))
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    _, family = _family(cfg)
    levels = parse_window(cfg.window, len(family))
    t0 = time.perf_counter()
    report, rows = certificate(family, levels)
    report["timing"] = {"seconds": time.perf_counter() - t0, "backend": BACKEND}
    for r in rows:
        print(f"  {r['block_label']:<10} n={r['dim']:>6}  lambda1={r['lambda1']:.6g}  mu2={r['mu2']:.6g}")
    print(f"min lambda1 = {report['min_lambda1']:.6g}")
    _write(cfg.out, canonical_json(report))
    if cfg.csv:
        write_spectra_csv(rows, cfg.csv)
    return EXIT_OK


def run_ghost(cfg: RunConfig) -> tuple[dict, list[str]]:
    spec, family = _family(cfg)
    tol = _tolerances(cfg)
    levels = parse_window(cfg.window, len(family))
    if cfg.truncate is not None and cfg.truncate > len(levels):
        raise UsageError("--truncate exceeds the window size")
    t0 = time.perf_counter()
    window = make_window(family, levels, spec.default_policy, cap=cfg.cap)
    T = build_T(window, cfg.parallelism)
    e = ghost_projection(T, cfg.parallelism, cluster_tol=tol.cluster)
    ranks = rank_sequence(e)
    run = ghost_report(window, T, e, ranks, tol, cfg.echo(), cfg.parallelism, cfg.truncate)
    run.report["timing"] = {"seconds": time.perf_counter() - t0, "parallelism": cfg.parallelism,
                            "backend": BACKEND}
    return run.report, run.failures


def cmd_ghost(cfg: RunConfig) -> int:
    report, failures = run_ghost(cfg)
    print(report["scope"])
    print(f"window {report['window']['labels']}  dims {report['window']['irrep_dims']}")
    print(f"diagonal ranks {report['rank_sequence']['diagonal']}  min gap {report['claim1']['min_gap']:.6g}")
    for claim in ("claim1", "claim2", "claim3"):
        print(f"{claim}: {report[claim]['verdict']}")
    if "truncation" in report:
        print(f"J-truncation k={report['truncation']['k']}: tail ranks {report['truncation']['tail_ranks']}")
    _write(cfg.out, canonical_json(report))
    for f in failures:
        print(f"check failed: {f}", file=sys.stderr)
    return EXIT_FAIL if failures else EXIT_OK


def _add_family_args(p):
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--primes", help="comma-separated primes (sl2)")
    p.add_argument("--degrees", help="comma-separated degrees (alt)")
    p.add_argument("--orders", help="group order (complete)")
    p.add_argument("--preset", help="product preset name")
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--cap", type=int, help="closure size cap")
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="build a family and summarize its levels")
    _add_family_args(p)

    p = sub.add_parser("certify", help="spectral gaps of the level Cayley graphs")
    _add_family_args(p)
    p.add_argument("--window", help="1-based level positions, e.g. 1-3 or 1,3")
    p.add_argument("--csv", help="write per-block spectra CSV here")

    p = sub.add_parser("ghost", help="build T and e and check the claims on a window")
    _add_family_args(p)
    p.add_argument("--window")
    p.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    p.add_argument("--projection-tol", dest="projection_tol", type=float)
    p.add_argument("--parallelism", type=int)
    p.add_argument("--truncate", type=int, help="also report truncate_to_J at this k")
    return parser


COMMANDS = {"family": cmd_family, "certify": cmd_certify, "ghost": cmd_ghost}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"ghostlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ghostlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OracleMismatch, ClusterAmbiguous) as exc:
        print(f"ghostlab: verification failed at block {exc.block}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except GhostLabError as exc:
        print(f"ghostlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
