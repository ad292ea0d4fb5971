"""Rendering of scenario reports, expert scores and decision makers.

Renderers return ``bytes`` (UTF-8) and are deterministic: the same input
always gives the same output. Percentages print with 1 decimal, GBP with 2.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

from .basket import PCT, STATISTICS, NodeSummary, ScenarioReport, SummaryStats
from .classical import DecisionMaker, ExpertScore
from .domain import ElicitationStudy

FORMATS = ("table", "csv", "json")
CSV_HEADER = ("scenario", "node", "statistic", "value")


def fmt_pct(x: float) -> str:
    return f"{x:+.1f}%"


def fmt_gbp(x: float, sign: bool = True) -> str:
    s = f"{x:+.2f}" if sign else f"{abs(x):.2f}"
    return f"{s[0]}£{s[1:]}" if sign else f"£{s}"


def stats_line(stats: SummaryStats, unit: str) -> str:
    """One summary cell, e.g. ``Mean +6.4% ± 6.0 Median +6.1% [-2.7, +16.9]``."""
    if unit == PCT:
        return (
            f"Mean {fmt_pct(stats.mean)} ± {stats.sd:.1f} "
            f"Median {fmt_pct(stats.median)} [{stats.q05:+.1f}, {stats.q95:+.1f}]"
        )
    return (
        f"Mean {fmt_gbp(stats.mean)} ± {fmt_gbp(stats.sd, sign=False)} "
        f"Median {fmt_gbp(stats.median)} [{fmt_gbp(stats.q05)}, {fmt_gbp(stats.q95)}]"
    )


def scenario_label(report: ScenarioReport) -> str:
    if report.condition is None:
        return report.scenario
    cat, p = report.condition
    return f"{report.scenario} [{cat}@{p:g}]"


def node_key(node: NodeSummary) -> str:
    return f"{node.basket}_{node.unit}"


def _value(node: NodeSummary, stat: str) -> str:
    v = getattr(node.stats, stat)
    return f"{v:.1f}" if node.unit == PCT else f"{v:.2f}"


def _as_list(reports) -> list[ScenarioReport]:
    return [reports] if isinstance(reports, ScenarioReport) else list(reports)


def _csv_bytes(rows: Iterable[Sequence[str]]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue().encode("utf-8")


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def report_to_dict(report: ScenarioReport) -> dict:
    return {
        "scenario": report.scenario,
        "condition": (
            None
            if report.condition is None
            else {"category": report.condition[0], "percentile": report.condition[1], "value": report.condition_value}
        ),
        "seed": report.seed,
        "n_samples": report.n_samples,
        "overshoot": report.overshoot,
        "sampler_version": report.sampler_version,
        "correlation_matrix": {"provenance": report.matrix_provenance, "drift": report.matrix_drift},
        "nodes": [
            {"basket": n.basket, "unit": n.unit, **n.stats.as_dict()} for n in report.nodes
        ],
    }


def render_report(reports, fmt: str = "table") -> bytes:
    """Render one report or a sequence of reports."""
    reports = _as_list(reports)
    if fmt == "csv":
        rows = [CSV_HEADER]
        for r in reports:
            label = scenario_label(r)
            for n in r.nodes:
                rows += [(label, node_key(n), s, _value(n, s)) for s in STATISTICS]
        return _csv_bytes(rows)
    if fmt == "json":
        return _json_bytes({"reports": [report_to_dict(r) for r in reports]})
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    out = []
    for r in reports:
        out.append(f"Scenario {scenario_label(r)}")
        out.append(
            f"  seed {r.seed}, {r.n_samples} samples, overshoot {r.overshoot:g}, "
            f"correlations {r.matrix_provenance}"
            + (f" (drift {r.matrix_drift:.4f})" if r.matrix_drift else "")
        )
        if r.condition is not None:
            cat, p = r.condition
            out.append(f"  {cat} fixed at its {p * 100:g}th percentile ({fmt_pct(r.condition_value)})")
        width = max((len(_row_label(n)) for n in r.nodes), default=0)
        for n in r.nodes:
            out.append(f"  {_row_label(n).ljust(width)}  {stats_line(n.stats, n.unit)}")
        out.append("")
    return "\n".join(out).encode("utf-8")


def _row_label(node: NodeSummary) -> str:
    return f"{node.basket} % change" if node.unit == PCT else f"{node.basket} weekly cost change"


def render_comparison(pairs: Sequence[tuple[ScenarioReport, ScenarioReport]], fmt: str = "table") -> bytes:
    """Conditioned results with the unconditioned values in brackets.

    ``pairs`` holds ``(conditioned, base)`` reports for the same scenario.
    """
    if fmt in ("csv", "json"):
        flat = [r for pair in pairs for r in pair]
        return render_report(flat, fmt)
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    out = []
    for cond, base in pairs:
        cat, p = cond.condition
        out.append(f"Scenario {cond.scenario} [{cat} {fmt_pct(cond.condition_value)}, {p * 100:g}th percentile]")
        width = max((len(_row_label(n)) for n in cond.nodes), default=0)
        for n in cond.nodes:
            b = base.node(n.basket, n.unit)
            f = fmt_pct if n.unit == PCT else fmt_gbp
            out.append(
                f"  {_row_label(n).ljust(width)}  "
                f"mean {f(n.stats.mean)} ({f(b.stats.mean)})  "
                f"95%ile {f(n.stats.q95)} ({f(b.stats.q95)})  "
                f"sd {n.stats.sd:.2f} ({b.stats.sd:.2f})"
            )
        out.append("")
    out.append("(unconditioned values in brackets)")
    return ("\n".join(out) + "\n").encode("utf-8")


# -- Classical Model output --------------------------------------------------


def render_scores(scores: Sequence[ExpertScore], weights: dict[str, float], fmt: str = "table") -> bytes:
    cols = ("expert", "calibration", "information", "information_all", "combined", "weight")
    rows = [
        (s.expert, s.calibration, s.information, s.information_all, s.combined, weights.get(s.expert, 0.0))
        for s in scores
    ]
    if fmt == "json":
        return _json_bytes({"experts": [dict(zip(cols, r)) for r in rows]})
    if fmt == "csv":
        return _csv_bytes([cols] + [(r[0], *(f"{v:.6g}" for v in r[1:])) for r in rows])
    width = max([len("expert")] + [len(r[0]) for r in rows])
    out = [f"{'expert'.ljust(width)}  {'C':>10}  {'I(cal)':>8}  {'I(all)':>8}  {'C*I':>10}  {'weight':>8}"]
    for r in rows:
        out.append(f"{r[0].ljust(width)}  {r[1]:10.4g}  {r[2]:8.4f}  {r[3]:8.4f}  {r[4]:10.4g}  {r[5]:8.4f}")
    return ("\n".join(out) + "\n").encode("utf-8")


def render_dm(dm: DecisionMaker, study: ElicitationStudy, fmt: str = "table") -> bytes:
    items = []
    for q in study.questions:
        if q.id not in dm.items:
            continue
        t = dm.items[q.id].quantiles
        items.append((q.id, q.kind, t.q05, t.q50, t.q95, q.realization))
    score = dm.score
    head = {
        "alpha": dm.alpha,
        "calibration": score.calibration if score else None,
        "information": score.information if score else None,
        "combined": score.combined if score else None,
        "weights": dict(dm.weights),
    }
    if fmt == "json":
        cols = ("question", "kind", "q05", "q50", "q95", "realization")
        return _json_bytes({**head, "items": [dict(zip(cols, r)) for r in items]})
    if fmt == "csv":
        rows = [("question", "kind", "q05", "q50", "q95", "realization")]
        rows += [(i[0], i[1], f"{i[2]:.6g}", f"{i[3]:.6g}", f"{i[4]:.6g}", "" if i[5] is None else f"{i[5]:.6g}") for i in items]
        return _csv_bytes(rows)
    out = []
    if dm.alpha is not None:
        out.append(f"alpha = {dm.alpha:.6g}")
    if score:
        out.append(f"DM calibration {score.calibration:.4g}, information {score.information:.4f}, C*I {score.combined:.4g}")
    out.append("weights: " + ", ".join(f"{e}={w:.4f}" for e, w in dm.weights.items()))
    width = max([len("question")] + [len(i[0]) for i in items])
    out.append(f"{'question'.ljust(width)}  {'kind':<11}  {'q05':>10}  {'q50':>10}  {'q95':>10}  {'realization':>11}")
    for i in items:
        real = "" if i[5] is None else f"{i[5]:.4g}"
        out.append(f"{i[0].ljust(width)}  {i[1]:<11}  {i[2]:10.4g}  {i[3]:10.4g}  {i[4]:10.4g}  {real:>11}")
    return ("\n".join(out) + "\n").encode("utf-8")
