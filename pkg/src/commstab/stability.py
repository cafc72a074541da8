"""Removal-impact experiment: recompute every metric on the reduced
network and correlate against the full baseline.

For each plan the full graph loses the selected nodes, the event stream
is reduced accordingly (messages from removed senders vanish; surviving
messages drop removed targets; e-mails left without recipients vanish
too), and all node metrics are recomputed from scratch on the reduced
data.  Correlations run over surviving nodes with pairwise deletion of
undefined values.  A failing plan is flagged and reported as null; the
run continues.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

from ._io import open_output
from .config import RunConfig
from .correlate import CorrelationResult, correlate_values
from .events import MessageEvent, restrict_events
from .global_metrics import GlobalMetrics, compute_global_metrics
from .graph import CommGraph, GraphError, SnapshotSeries, Window, build_graph, window_slices
from .node_metrics import (METRIC_ORDER, activity_counts, betweenness_oscillations,
                           contribution_indices, pair_responses, response_stats)
from .removal import RemovalPlan, parse_plan, remove, select_nodes
from .shortest_paths import structural_pass
from .spam import SpamResult, classify
from .text_metrics import (TokenTable, author_semantic_values, build_token_table,
                           default_scorer, load_lexicon)

CSV_EXTRA_COLUMNS = ("in_degree", "out_degree")


def node_metric_table(events: list[MessageEvent], graph: CommGraph,
                      series: SnapshotSeries, *, horizon_s: int, scorer=None,
                      token_table: TokenTable | None = None, threads: int = 1,
                      flags: list[str] | None = None,
                      pass_result=None) -> dict[str, dict[str, float | None]]:
    """All node metrics for one (event stream, graph, window series) state.

    Every metric maps each graph node to a value or None (undefined).
    """
    if scorer is None:
        scorer = default_scorer()
    sp = pass_result if pass_result is not None else structural_pass(graph, threads=threads)
    nodes = graph.nodes

    stats = response_stats(pair_responses(events, horizon_s))
    activity = activity_counts(events)
    ci = contribution_indices(events)
    osc = betweenness_oscillations(series, universe=nodes, threads=threads, flags=flags)
    semantics = author_semantic_values(events, scorer, token_table=token_table)

    table: dict[str, dict[str, float | None]] = {m: {} for m in METRIC_ORDER}
    table["in_degree"] = {}
    table["out_degree"] = {}
    ind = graph.in_degrees
    outd = graph.out_degrees
    for i, v in enumerate(nodes):
        sem = semantics.get(v)
        table["alter_art"][v] = stats.alter_art.get(v)
        table["ego_art"][v] = stats.ego_art.get(v)
        table["alter_nudges"][v] = stats.alter_nudges.get(v)
        table["ego_nudges"][v] = stats.ego_nudges.get(v)
        table["activity"][v] = float(activity.get(v, 0))
        table["contribution_index"][v] = ci.get(v)
        table["betweenness"][v] = float(sp.betweenness[i])
        table["betweenness_oscillations"][v] = float(osc.get(v, 0))
        table["closeness"][v] = float(sp.closeness[i])
        table["degree"][v] = float(ind[i] + outd[i])
        table["in_degree"][v] = float(ind[i])
        table["out_degree"][v] = float(outd[i])
        table["sentiment"][v] = sem.sentiment if sem else None
        table["emotionality"][v] = sem.emotionality if sem else None
        table["complexity"][v] = (sem.complexity if sem and sem.complexity is not None
                                  else None)
    return table


@dataclass
class PlanOutcome:
    label: str
    selection_size: int | None
    global_metrics: GlobalMetrics | None
    correlations: dict[str, CorrelationResult] | None
    node_values: dict[str, dict[str, float | None]] | None
    reduced_nodes: tuple[str, ...] | None
    error: str | None = None


@dataclass
class StabilityReport:
    config: dict
    full_global: GlobalMetrics
    full_node_values: dict[str, dict[str, float | None]]
    full_nodes: tuple[str, ...]
    plan_outcomes: list[PlanOutcome]
    flags: list[str]


def _reduced_series(series: SnapshotSeries, selection) -> SnapshotSeries:
    """Remove nodes from each window graph, keeping window boundaries."""
    windows = tuple(Window(w.start, w.end, remove(w.graph, selection))
                    for w in series.windows)
    return SnapshotSeries(series.window_s, windows)


def run_experiment(events: list[MessageEvent], plans, config: RunConfig, *,
                   threads: int = 1, labels: dict | None = None,
                   verdicts: SpamResult | None = None) -> StabilityReport:
    """Full baseline plus one reduced recomputation per plan."""
    flags: list[str] = []
    channel = config.input_format
    window_s = config.resolved_window_s
    horizon_s = config.resolved_horizon_s
    scorer = load_lexicon(config.lexicon_path) if config.lexicon_path else default_scorer()

    parsed: list[RemovalPlan] = []
    seen_labels = set()
    for p in plans:
        plan = parse_plan(p) if isinstance(p, str) else p
        if plan.label in seen_labels:
            flags.append(f"duplicate plan {plan.label} ignored")
            continue
        seen_labels.add(plan.label)
        parsed.append(plan)

    full_graph = build_graph(events, channel, flags=flags)
    if full_graph.n == 0:
        raise GraphError("event stream yields an empty graph")
    series = window_slices(events, window_s, channel)
    token_table = build_token_table(events, scorer)

    full_pass = structural_pass(full_graph, threads=threads)
    full_global = compute_global_metrics(
        full_graph, threads=threads,
        symmetrize_distances=config.symmetrize_distances,
        flags=flags, pass_result=full_pass)
    full_table = node_metric_table(
        events, full_graph, series, horizon_s=horizon_s, scorer=scorer,
        token_table=token_table, threads=threads, flags=flags,
        pass_result=full_pass)

    needs_spam = any(p.kind in ("spammers", "spammers+bottom") for p in parsed)
    if needs_spam and verdicts is None:
        verdicts = classify(events, full_graph, labels=labels,
                            thresholds=config.thresholds, flags=flags)

    outcomes: list[PlanOutcome] = []
    for plan in parsed:
        label = plan.label
        plan_flags: list[str] = []
        try:
            selection = select_nodes(full_graph, plan, verdicts=verdicts,
                                     flags=plan_flags)
            reduced = remove(full_graph, selection)
            if reduced.n == 0:
                raise GraphError("removal empties the graph")
            reduced_events = restrict_events(events, set(selection))
            reduced_series = _reduced_series(series, selection)
            reduced_pass = structural_pass(reduced, threads=threads)
            reduced_global = compute_global_metrics(
                reduced, threads=threads,
                symmetrize_distances=config.symmetrize_distances,
                flags=plan_flags, pass_result=reduced_pass)
            reduced_table = node_metric_table(
                reduced_events, reduced, reduced_series, horizon_s=horizon_s,
                scorer=scorer, token_table=token_table, threads=threads,
                flags=plan_flags, pass_result=reduced_pass)
            correlations = {
                metric: correlate_values(full_table[metric],
                                         reduced_table[metric], reduced.nodes)
                for metric in METRIC_ORDER
            }
            outcomes.append(PlanOutcome(
                label=label, selection_size=len(selection),
                global_metrics=reduced_global, correlations=correlations,
                node_values=reduced_table, reduced_nodes=reduced.nodes))
        except (ValueError, ArithmeticError, KeyError) as exc:
            plan_flags.append(f"plan failed: {exc}")
            outcomes.append(PlanOutcome(
                label=label, selection_size=None, global_metrics=None,
                correlations=None, node_values=None, reduced_nodes=None,
                error=str(exc)))
        flags.extend(f"{label}: {msg}" for msg in plan_flags)

    return StabilityReport(
        config=config.echo(),
        full_global=full_global,
        full_node_values=full_table,
        full_nodes=full_graph.nodes,
        plan_outcomes=outcomes,
        flags=flags,
    )


def _round6(x: float) -> float:
    return float(f"{x:.6g}")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return _round6(obj)
    return obj


def _global_dict(g: GlobalMetrics | None):
    if g is None:
        return None
    return {
        "adarp": g.adarp,
        "diameter": g.diameter,
        "clustering_coefficient": g.clustering_coefficient,
        "average_degree": g.average_degree,
        "giant_component_fraction": g.giant_component_fraction,
        "reachable_pairs": g.reachable_pairs,
    }


def _corr_dict(c: CorrelationResult):
    out = {
        "pearson_r": c.pearson_r,
        "spearman_rho": c.spearman_rho,
        "p_value": c.p_value,
        "n_pairs": c.n_pairs,
    }
    if c.flag:
        out["flag"] = c.flag
    return out


def report_to_dict(report: StabilityReport) -> dict:
    """Serializable view with fixed key order and no volatile fields."""
    global_metrics = {"full": _global_dict(report.full_global)}
    node_correlations = {}
    selection_sizes = {}
    for outcome in report.plan_outcomes:
        global_metrics[outcome.label] = _global_dict(outcome.global_metrics)
        if outcome.correlations is None:
            node_correlations[outcome.label] = None
        else:
            node_correlations[outcome.label] = {
                metric: _corr_dict(outcome.correlations[metric])
                for metric in METRIC_ORDER
            }
        selection_sizes[outcome.label] = outcome.selection_size
    return {
        "config": report.config,
        "global_metrics": global_metrics,
        "node_correlations": node_correlations,
        "selection_sizes": selection_sizes,
        "flags": list(report.flags),
    }


def write_report_json(report: StabilityReport, path: str) -> None:
    payload = _json_ready(report_to_dict(report))
    with open_output(path) as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def write_report_csv(report: StabilityReport, path: str) -> None:
    """Flat per-plan, per-metric correlation rows."""
    with open_output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["plan", "metric", "pearson_r", "spearman_rho",
                         "p_value", "n_pairs", "flag"])
        for outcome in report.plan_outcomes:
            for metric in METRIC_ORDER:
                if outcome.correlations is None:
                    writer.writerow([outcome.label, metric, "", "", "", "",
                                     outcome.error or "plan failed"])
                    continue
                c = outcome.correlations[metric]
                writer.writerow([
                    outcome.label, metric,
                    "" if c.pearson_r is None else f"{c.pearson_r:.6g}",
                    "" if c.spearman_rho is None else f"{c.spearman_rho:.6g}",
                    "" if c.p_value is None else f"{c.p_value:.6g}",
                    c.n_pairs, c.flag or "",
                ])


def write_node_metrics_csv(values: dict[str, dict[str, float | None]],
                           nodes, path: str) -> None:
    """Per-node metric matrix; undefined values are empty cells."""
    columns = list(METRIC_ORDER) + list(CSV_EXTRA_COLUMNS)
    with open_output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["node"] + columns)
        for v in nodes:
            row = [v]
            for metric in columns:
                value = values[metric].get(v)
                row.append("" if value is None else f"{value:.6g}")
            writer.writerow(row)
