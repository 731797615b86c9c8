"""Report assembly and canonical JSON output.

Reports are plain dicts.  ``canonical_json`` fixes key order and rounds every
float to 12 significant digits, so parsing a report and dumping it again gives
the same bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import __version__
from .coarse import DENSE_LIMIT, block_spectrum, family_space, level_graph, propagation
from .ghost import (
    CONSISTENCY_TOL,
    GAP_FLOOR,
    PROJECTION_TOL,
    BlockOperator,
    Window,
    diagonal_ranks,
    truncate_to_J,
    verify_claim1,
    verify_claim2,
    verify_claim3,
)
from .groups import check_symmetric, index_growth
from .reps import AMBIGUITY_WINDOW, CLUSTER_TOL, RANK_GUARD

SCHEMA = "ghost-lab/1"
SCOPE = (
    "finite-scale evidence: every verdict below is computed on the stated window of "
    "finite quotients only; no infinite-scale or limit statement is asserted"
)
PASS = "pass (finite scale)"
PROPAGATION_THRESHOLDS = (0.1, 0.01)
CROSS_DISTANCE_RULE = "max(q, q', diam_q, diam_q') + 1"


@dataclass
class Tolerances:
    cluster: float = CLUSTER_TOL
    projection: float = PROJECTION_TOL

    def __post_init__(self):
        if not (self.cluster > 0 and self.projection > 0):
            raise ValueError("tolerances must be positive")
        if self.cluster >= 1e-2:
            raise ValueError("cluster threshold must be below 1e-2")

    def echo(self) -> dict:
        return {
            "cluster": self.cluster,
            "projection": self.projection,
            "rank_guard": RANK_GUARD,
            "ambiguity_window": AMBIGUITY_WINDOW,
            "gap_floor": GAP_FLOOR,
            "gap_consistency": CONSISTENCY_TOL,
        }


def _round(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in report")
    return float(f"{x:.12g}")


def canonicalize(obj):
    """Recursively convert to JSON-native types with floats at 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "item"):  # numpy scalars
        obj = obj.item()
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return _round(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(report: dict) -> str:
    return json.dumps(canonicalize(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def window_echo(window: Window) -> dict:
    return {
        "family": window.family.name,
        "positions": [n + 1 for n in window.levels],
        "labels": window.labels,
        "orders": window.orders,
        "irrep_dims": window.dims,
        "irreps": [window.irreps[n].label for n in window.levels],
        "policy": window.policy,
    }


def family_summary(family, levels=None) -> dict:
    levels = range(len(family)) if levels is None else levels
    rows = []
    for n in levels:
        lv = family.levels[n]
        graph = level_graph(family, n)
        rows.append({
            "position": n + 1,
            "label": lv.label,
            "order": lv.group.order,
            "degree": graph.degree,
            "diameter": graph.diameter,
            "identity_symbols": graph.flags["identity_symbols"],
            "collapsed": graph.flags["collapsed"],
        })
    return {
        "schema": SCHEMA,
        "tool": {"name": "ghostlab", "version": __version__},
        "family": family.name,
        "symbols": family.symbols.size,
        "pairing": list(family.symbols.pairing),
        "symmetry": check_symmetric(family)["symmetric"],
        "index_growth": index_growth(family),
        "levels": rows,
    }


def certificate(family, levels) -> tuple[dict, list[dict]]:
    """lambda_1 per level graph, with the lambda_1 = |S|(1 - mu_2) identity residual."""
    rows = []
    for n in levels:
        spec = block_spectrum(level_graph(family, n))
        spec["position"] = n + 1
        spec["identity_residual"] = abs(spec["lambda1"] - spec["degree"] * (1.0 - spec["mu2"]))
        rows.append(spec)
    lams = [r["lambda1"] for r in rows]
    space = family_space(family, levels)
    report = {
        "schema": SCHEMA,
        "scope": SCOPE,
        "tool": {"name": "ghostlab", "version": __version__},
        "family": family.name,
        "blocks": rows,
        "min_lambda1": min(lams),
        "trend": {
            "lambda1": lams,
            "nonincreasing": all(a >= b for a, b in zip(lams, lams[1:])),
            "orders": [r["dim"] for r in rows],
        },
        "connected": True,
        "triangle_check": space.triangle_check(),
        "cross_distance_rule": CROSS_DISTANCE_RULE,
    }
    return report, rows


def _claim1_section(window, T, parallelism):
    gaps = verify_claim1(window, T, parallelism)
    ok = gaps.min_gap > GAP_FLOOR and gaps.consistent
    if ok:
        verdict = PASS
    elif not gaps.consistent:
        verdict = "fail: block gap below intersection-quotient gap"
    else:
        verdict = "fail: gap at 1 not above floor"
    return gaps, {
        "verdict": verdict,
        "window": [n + 1 for n in window.levels],
        "min_gap": gaps.min_gap,
        "min_quotient_gap": gaps.min_quotient_gap,
        "consistent": gaps.consistent,
        "star_flag": gaps.star_condition_flag,
    }


def _claim2_section(window, e):
    per_level = []
    for n in window.levels:
        r = verify_claim2(window, n, e)
        per_level.append({
            "N": n + 1,
            "order": r.order,
            "ranks": [x["rank"] for x in r.ranks],
            "vanish_from": r.vanish_from,
            "bound_positions": [m + 1 for m in r.bound_levels],
            "bound_holds": r.bound_holds,
        })
    bound_ok = all(x["bound_holds"] for x in per_level)
    off_diagonal = sum(1 for (n, m) in e.pairs if n != m and e.multiplicity[(n, m)] > 0)
    if not window.star_star:
        verdict = "fail: (★★) not satisfied by policy"
    elif not bound_ok:
        verdict = "fail: nonzero rank where dim(H_M) > |G_N|"
    else:
        verdict = PASS
    return {
        "verdict": verdict,
        "window": [n + 1 for n in window.levels],
        "per_level": per_level,
        "bound_pairs": sum(len(x["bound_positions"]) for x in per_level),
        "nonzero_off_diagonal": off_diagonal,
    }


def _claim3_section(window, e):
    r = verify_claim3(window, e)
    verdict = PASS if (r.all_nonzero and r.separated) else "fail: rank sequence does not separate"
    if r.vacuous:
        verdict = "vacuous: empty window"
    return {
        "verdict": verdict,
        "window": [n + 1 for n in window.levels],
        "diagonal_ranks": r.diagonal,
        "all_nonzero": r.all_nonzero,
        "truncations": r.truncations,
        "separated": r.separated,
    }


@dataclass
class GhostRun:
    report: dict
    failures: list = field(default_factory=list)


def ghost_report(window: Window, T: BlockOperator, e: BlockOperator, ranks, tolerances: Tolerances,
                 config: dict, parallelism: int = 1, truncate: int | None = None) -> GhostRun:
    failures = []
    gaps, claim1 = _claim1_section(window, T, parallelism)
    by_pair = {(r["N"], r["M"]): r for r in gaps.pairs}
    blocks = []
    for key in e.pairs:
        n, m = key
        agree = e.agreement[key]
        if agree > tolerances.projection:
            failures.append(f"block {(n + 1, m + 1)}: spectral and averaging projections differ by {agree:.3e}")
        g = by_pair[key]
        if not g["consistent"]:
            failures.append(f"block {(n + 1, m + 1)}: gap {g['gap']:.6g} below quotient gap {g['quotient_gap']:.6g}")
        blocks.append({
            "N": n + 1,
            "M": m + 1,
            "dim": int(T.blocks[key].shape[0]),
            "quotient_order": g["quotient_order"],
            "gap": g["gap"],
            "degenerate": g["degenerate"],
            "quotient_gap": g["quotient_gap"],
            "top_eigenvalue": T.top_eigenvalue[key],
            "rank": ranks.table[key],
            "oracle_rank": ranks.oracle[key],
            "agreement": agree,
        })
    space = family_space(window.family, window.levels)
    decay = []
    for n in window.levels:
        single = BlockOperator(window, {(n, n): e.blocks[(n, n)]})
        prof = propagation(single, space, PROPAGATION_THRESHOLDS)
        decay.append({"N": n + 1, "exact": prof.exact_propagation,
                      "radius": {f"{eps:g}": r for eps, r in prof.profile}})
    report = {
        "schema": SCHEMA,
        "scope": SCOPE,
        "tool": {"name": "ghostlab", "version": __version__},
        "config": config,
        "window": window_echo(window),
        "tolerances": tolerances.echo(),
        "design": {"dense_limit": DENSE_LIMIT, "cross_distance_rule": CROSS_DISTANCE_RULE,
                   "propagation_norm": "entry"},
        "blocks": blocks,
        "rank_sequence": {"diagonal": ranks.diagonal, "diagonal_dims_match": ranks.diagonal == window.dims},
        "claim1": claim1,
        "claim2": _claim2_section(window, e),
        "claim3": _claim3_section(window, e),
        "flags": {"star": gaps.star_condition_flag, "star_star": window.star_star},
        "ghost_decay": decay,
        "checks": {"passed": not failures, "failures": failures},
    }
    if truncate is not None:
        cut = diagonal_ranks(truncate_to_J(e, truncate))
        report["truncation"] = {"k": truncate, "diagonal_ranks": cut, "tail_ranks": cut[truncate:]}
    return GhostRun(report, failures)
