"""Command-line front end.

One executable with subcommands for each stage of the pipeline: ingest
checking, metric computation, spam detection, graph simplification, the
stability experiment, semantic text analysis, synthetic data generation,
and graph export.

Settings resolve with precedence flags > config file > built-in defaults.
The config file is INI-style; sections group keys by subcommand and keys
mirror the long flag names with dashes replaced by underscores.  All
diagnostics go to standard error; data goes to files or, with ``-``, to
standard output.  Exit codes: 0 success, 1 input or usage error, 2
internal failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ._io import open_output
from .config import (RunConfig, VERSION, load_config_file, parse_duration)
from .events import (EMAIL, CHANNELS, IngestError, RejectThresholdError,
                     ingest, write_email_csv, write_micropost_jsonl)
from .graph import (GraphError, build_graph, degree_summary, export_edgelist,
                    export_graphml)
from .node_metrics import contribution_indices, activity_counts
from .removal import parse_plan, remove, select_nodes
from .spam import SpamThresholds, ci_screen, classify, read_labels_csv, write_verdicts_csv
from .stability import (_global_dict, _json_ready, node_metric_table,
                        run_experiment, write_node_metrics_csv,
                        write_report_csv, write_report_json)
from .synth import SynthConfig, generate, write_ground_truth
from .text_metrics import load_lexicon, subject_body_correlation
from .global_metrics import compute_global_metrics
from .shortest_paths import structural_pass
from .graph import window_slices

DEFAULT_PLANS = "spammers,bottom,top1,top5,top10,top1+bottom,spammers+bottom"


class _Parser(argparse.ArgumentParser):
    """argparse with input-error semantics: usage + exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _threads_default() -> int:
    return os.cpu_count() or 1


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"bad boolean {text!r}")


class _Resolver:
    """Pick each setting from flags, then the config file, then defaults."""

    def __init__(self, args: argparse.Namespace, file_cfg: dict[str, str]):
        self.args = args
        self.file = file_cfg

    def get(self, key: str, builtin, cast=None):
        value = getattr(self.args, key, None)
        if value is None and key in self.file:
            value = self.file[key]
        if value is None:
            return builtin
        return cast(value) if cast else value


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="input path, - for stdin")
    p.add_argument("--format", choices=sorted(CHANNELS), help="email or micropost")
    p.add_argument("--max-reject-fraction", type=float,
                   help="abort when more than this fraction of rows is malformed")


def _add_spam_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--labels", help="manual node_id,label CSV for criterion C")
    p.add_argument("--high-volume-pct", type=float,
                   help="sender-activity percentile for the volume criterion")
    p.add_argument("--min-received", type=int,
                   help="received-from-non-spammers bound for criterion B")
    p.add_argument("--follow-ratio", type=float,
                   help="following/followers multiple for criterion D")
    p.add_argument("--active-hour-bins", type=int,
                   help="distinct hour-of-day bins that trigger the micropost volume criterion")
    p.add_argument("--ci-screen", type=float,
                   help="contribution-index cutoff for the advisory screen")
    p.add_argument("--max-iters", type=int,
                   help="fixed-point iteration cap for criterion B")


def _thresholds(r: _Resolver) -> SpamThresholds:
    return SpamThresholds(
        high_volume_percentile=r.get("high_volume_pct", 99.0, float),
        min_received_nonspam=r.get("min_received", 1, int),
        follow_ratio=r.get("follow_ratio", 10.0, float),
        active_hour_bins=r.get("active_hour_bins", 20, int),
        ci_screen=r.get("ci_screen", 0.8, float),
        max_fixed_point_iters=r.get("max_iters", 5, int),
    )


def _ingest(r: _Resolver):
    path = r.get("input", None)
    if path is None:
        raise IngestError("missing --input")
    fmt = r.get("format", EMAIL)
    frac = r.get("max_reject_fraction", 0.1, float)
    try:
        result = ingest(path, fmt, max_reject_fraction=frac)
    except FileNotFoundError:
        raise IngestError(f"input file not found: {path}") from None
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from None
    if result.rejects:
        print(f"warning: {len(result.rejects)} of {result.n_rows} rows rejected",
              file=sys.stderr)
    return result, path, fmt, frac


def _build_parser() -> _Parser:
    top = _Parser(prog="commstab", description=__doc__.split("\n\n")[0])
    top.add_argument("--version", action="version", version=f"commstab {VERSION}")
    top.add_argument("--config", help="INI config file; flags override its keys")
    sub = top.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest-check", parents=[], help="parse input and report malformed rows")
    _add_input_flags(p)
    p.add_argument("--report", help="write a JSON reject report here (- for stdout)")

    p = sub.add_parser("metrics", help="global and per-node metrics for one graph")
    _add_input_flags(p)
    p.add_argument("--window", help="snapshot window for the oscillation series, e.g. 30d")
    p.add_argument("--horizon", help="response pairing horizon, e.g. 14d")
    p.add_argument("--symmetrize-distances", action="store_const", const=True,
                   help="measure distances on the symmetrized graph")
    p.add_argument("--threads", type=int, help="worker threads (results identical for any N)")
    p.add_argument("--lexicon", help="sentiment lexicon path")
    p.add_argument("--out", help="metrics JSON (- for stdout)")
    p.add_argument("--out-nodes", help="per-node metric CSV")

    p = sub.add_parser("detect-spam", help="criteria-based spam account detection")
    _add_input_flags(p)
    _add_spam_flags(p)
    p.add_argument("--truth", help="node_id,label CSV to score precision/recall against")
    p.add_argument("--out", help="verdict CSV (- for stdout)")

    p = sub.add_parser("simplify", help="apply a removal plan and export the reduced graph")
    _add_input_flags(p)
    _add_spam_flags(p)
    p.add_argument("--plan", help="spammers | bottom | top<p> | top<p>+bottom | "
                                  "spammers+bottom | custom:<file>")
    p.add_argument("--out", help="reduced graph, .graphml or .csv edge list")
    p.add_argument("--out-selection", help="write removed node ids here, one per line")

    p = sub.add_parser("stability", help="full-vs-reduced metric stability experiment")
    _add_input_flags(p)
    _add_spam_flags(p)
    p.add_argument("--plans", help=f"comma-separated plans (default {DEFAULT_PLANS})")
    p.add_argument("--window", help="snapshot window, e.g. 30d")
    p.add_argument("--horizon", help="response pairing horizon, e.g. 14d")
    p.add_argument("--symmetrize-distances", action="store_const", const=True)
    p.add_argument("--seed", type=int, help="echoed into the report")
    p.add_argument("--threads", type=int)
    p.add_argument("--lexicon", help="sentiment lexicon path")
    p.add_argument("--min-author-msgs", type=int)
    p.add_argument("--out", help="report JSON (- for stdout)")
    p.add_argument("--out-csv", help="flat (plan, metric) CSV companion")
    p.add_argument("--out-nodes-dir", help="write node_metrics_<plan>.csv files here")

    p = sub.add_parser("text", help="subject-vs-body semantic correlation matrices")
    _add_input_flags(p)
    p.add_argument("--lexicon", help="sentiment lexicon path")
    p.add_argument("--min-author-msgs", type=int, help="author-level row minimum")
    p.add_argument("--out", help="semantic report JSON (- for stdout)")

    p = sub.add_parser("synth", help="generate a synthetic message stream with planted spammers")
    p.add_argument("--n", type=int, help="organic node count")
    p.add_argument("--m-attach", type=int, help="out-arcs per new core node")
    p.add_argument("--reciprocation-prob", type=float)
    p.add_argument("--leaf-fraction", type=float)
    p.add_argument("--spammers", type=int, help="planted spammer count")
    p.add_argument("--volume-multiplier", type=float,
                   help="spam volume as a multiple of the median sender")
    p.add_argument("--arc-rate", type=float, help="expected exchanges per arc over the period")
    p.add_argument("--period", help="simulated span, e.g. 120d")
    p.add_argument("--reply-prob", type=float)
    p.add_argument("--reply-latency-mean", help="mean reply latency, e.g. 2h")
    p.add_argument("--nudge-prob", type=float)
    p.add_argument("--channel", choices=sorted(CHANNELS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out-messages", help="message stream (- for stdout)")
    p.add_argument("--out-truth", help="node_id,label ground truth CSV")

    p = sub.add_parser("export", help="export the full or a reduced graph")
    _add_input_flags(p)
    _add_spam_flags(p)
    p.add_argument("--plan", help="optional removal plan applied before export")
    p.add_argument("--out", help="output graph, .graphml or .csv edge list")
    return top


def _run_config(r: _Resolver, path: str, fmt: str, frac: float,
                plans=("spammers",)) -> RunConfig:
    return RunConfig(
        input_path=path,
        input_format=fmt,
        plans=tuple(plans),
        window_s=r.get("window", None, parse_duration),
        horizon_s=r.get("horizon", None, parse_duration),
        symmetrize_distances=r.get("symmetrize_distances", False, _bool),
        seed=r.get("seed", 42, int),
        max_reject_fraction=frac,
        thresholds=_thresholds(r),
        lexicon_path=r.get("lexicon", None),
        min_author_msgs=r.get("min_author_msgs", 3, int),
    )


def _cmd_ingest_check(r: _Resolver) -> int:
    try:
        result, path, fmt, frac = _ingest(r)
        failed = None
    except RejectThresholdError as exc:
        result, failed = exc.result, str(exc)
        path, fmt, frac = r.get("input", "-"), r.get("format", EMAIL), r.get(
            "max_reject_fraction", 0.1, float)
    report_path = r.get("report", None)
    if report_path:
        doc = {
            "version": VERSION,
            "input": path,
            "format": fmt,
            "max_reject_fraction": frac,
            "n_rows": result.n_rows,
            "n_events": len(result.events),
            "n_rejects": len(result.rejects),
            "reject_fraction": result.reject_fraction,
            "rejects": [{"line": rj.line_no, "reason": rj.reason}
                        for rj in result.rejects],
        }
        with open_output(report_path) as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    print(f"rows={result.n_rows} events={len(result.events)} "
          f"rejects={len(result.rejects)} "
          f"reject_fraction={result.reject_fraction:.4f}", file=sys.stderr)
    if failed:
        print(f"error: {failed}", file=sys.stderr)
        return 1
    return 0


def _cmd_metrics(r: _Resolver) -> int:
    result, path, fmt, frac = _ingest(r)
    rc = _run_config(r, path, fmt, frac)
    threads = r.get("threads", _threads_default(), int)
    flags: list[str] = []
    graph = build_graph(result.events, fmt, flags=flags)
    if graph.n == 0:
        raise IngestError("event stream yields an empty graph")
    pass_result = structural_pass(graph, threads=threads)
    gm = compute_global_metrics(graph, threads=threads,
                                symmetrize_distances=rc.symmetrize_distances,
                                flags=flags, pass_result=pass_result)
    scorer = load_lexicon(rc.lexicon_path) if rc.lexicon_path else None
    series = window_slices(result.events, rc.resolved_window_s, fmt)
    table = node_metric_table(result.events, graph, series,
                              horizon_s=rc.resolved_horizon_s, scorer=scorer,
                              threads=threads, flags=flags,
                              pass_result=pass_result)
    summary = degree_summary(graph)
    doc = {
        "config": rc.echo(),
        "n_nodes": graph.n,
        "n_arcs": graph.m,
        "degree_tail_ratio": summary.tail_ratio,
        "global_metrics": _global_dict(gm),
        "flags": flags,
    }
    with open_output(r.get("out", "-")) as f:
        json.dump(_json_ready(doc), f, indent=2)
        f.write("\n")
    nodes_path = r.get("out_nodes", None)
    if nodes_path:
        write_node_metrics_csv(table, graph.nodes, nodes_path)
    return 0


def _cmd_detect_spam(r: _Resolver) -> int:
    result, path, fmt, frac = _ingest(r)
    thresholds = _thresholds(r)
    labels = read_labels_csv(r.get("labels", None)) if r.get("labels", None) else None
    flags: list[str] = []
    graph = build_graph(result.events, fmt, flags=flags)
    verdicts = classify(result.events, graph, labels=labels,
                        thresholds=thresholds, flags=flags)
    write_verdicts_csv(verdicts, r.get("out", "-"))
    spammers = {v.node for v in verdicts.verdicts if v.is_spammer}
    print(f"nodes={graph.n} spammers={len(spammers)} "
          f"iterations={verdicts.iterations} converged={verdicts.converged}",
          file=sys.stderr)
    for msg in flags:
        print(f"note: {msg}", file=sys.stderr)
    truth_path = r.get("truth", None)
    if truth_path:
        truth = read_labels_csv(truth_path)
        actual = {v for v, lab in truth.items() if lab == "spam"}
        tp = len(spammers & actual)
        precision = tp / len(spammers) if spammers else float("nan")
        recall = tp / len(actual) if actual else float("nan")
        screened = set(ci_screen(result.events, graph, thresholds=thresholds))
        screen_recall = (len(screened & actual) / len(actual)
                         if actual else float("nan"))
        print(f"precision={precision:.4f} recall={recall:.4f} "
              f"ci_screen_recall={screen_recall:.4f}", file=sys.stderr)
    return 0


def _export_graph(graph, out: str) -> None:
    if out.endswith(".graphml"):
        export_graphml(graph, out)
    elif out.endswith(".csv") or out == "-":
        export_edgelist(graph, out)
    else:
        raise IngestError(f"cannot infer export format from {out!r}; "
                          "use a .graphml or .csv suffix")


def _selection(r: _Resolver, events, graph, plan_text: str):
    plan = parse_plan(plan_text)
    verdicts = None
    if plan.kind in ("spammers", "spammers+bottom"):
        labels = read_labels_csv(r.get("labels", None)) if r.get("labels", None) else None
        verdicts = classify(events, graph, labels=labels, thresholds=_thresholds(r))
    flags: list[str] = []
    selection = select_nodes(graph, plan, verdicts=verdicts, flags=flags)
    for msg in flags:
        print(f"note: {msg}", file=sys.stderr)
    return selection


def _cmd_simplify(r: _Resolver) -> int:
    plan_text = r.get("plan", None)
    if plan_text is None:
        raise IngestError("missing --plan")
    out = r.get("out", None)
    if out is None:
        raise IngestError("missing --out")
    result, path, fmt, frac = _ingest(r)
    graph = build_graph(result.events, fmt)
    selection = _selection(r, result.events, graph, plan_text)
    reduced = remove(graph, selection)
    _export_graph(reduced, out)
    sel_path = r.get("out_selection", None)
    if sel_path:
        with open_output(sel_path) as f:
            for node in sorted(selection):
                f.write(node + "\n")
    print(f"removed {len(selection)} of {graph.n} nodes; "
          f"{reduced.n} nodes and {reduced.m} arcs remain", file=sys.stderr)
    return 0


def _cmd_stability(r: _Resolver) -> int:
    result, path, fmt, frac = _ingest(r)
    plans = [s.strip() for s in r.get("plans", DEFAULT_PLANS).split(",") if s.strip()]
    if not plans:
        raise IngestError("no plans given")
    rc = _run_config(r, path, fmt, frac, plans=plans)
    threads = r.get("threads", _threads_default(), int)
    labels = read_labels_csv(r.get("labels", None)) if r.get("labels", None) else None
    report = run_experiment(result.events, plans, rc, threads=threads,
                            labels=labels)
    write_report_json(report, r.get("out", "-"))
    csv_path = r.get("out_csv", None)
    if csv_path:
        write_report_csv(report, csv_path)
    nodes_dir = r.get("out_nodes_dir", None)
    if nodes_dir:
        os.makedirs(nodes_dir, exist_ok=True)
        write_node_metrics_csv(report.full_node_values, report.full_nodes,
                               os.path.join(nodes_dir, "node_metrics_full.csv"))
        for outcome in report.plan_outcomes:
            if outcome.node_values is None:
                continue
            safe = outcome.label.replace("+", "_plus_").replace(":", "_")
            write_node_metrics_csv(outcome.node_values, outcome.reduced_nodes,
                                   os.path.join(nodes_dir, f"node_metrics_{safe}.csv"))
    for msg in report.flags:
        print(f"note: {msg}", file=sys.stderr)
    return 0


def _matrix_dict(matrix):
    if matrix is None:
        return None
    return {
        "variables": list(matrix.variables),
        "n": matrix.n_rows,
        "r": matrix.r,
        "p": matrix.p,
        "n_pairs": matrix.n_pairs,
    }


def _cmd_text(r: _Resolver) -> int:
    result, path, fmt, frac = _ingest(r)
    rc = _run_config(r, path, fmt, frac)
    scorer = load_lexicon(rc.lexicon_path) if rc.lexicon_path else None
    flags: list[str] = []
    corr = subject_body_correlation(result.events, scorer,
                                    min_author_msgs=rc.min_author_msgs,
                                    flags=flags)
    doc = {
        "config": rc.echo(),
        "complexity_unit": "bits",
        "email_level": _matrix_dict(corr.email_level),
        "author_level": _matrix_dict(corr.author_level),
        "flags": flags,
    }
    with open_output(r.get("out", "-")) as f:
        json.dump(_json_ready(doc), f, indent=2)
        f.write("\n")
    return 0


def _cmd_synth(r: _Resolver) -> int:
    period_s = r.get("period", None, parse_duration)
    latency_s = r.get("reply_latency_mean", None, parse_duration)
    base = SynthConfig()
    cfg = SynthConfig(
        n=r.get("n", base.n, int),
        m_attach=r.get("m_attach", base.m_attach, int),
        reciprocation_prob=r.get("reciprocation_prob", base.reciprocation_prob, float),
        leaf_fraction=r.get("leaf_fraction", base.leaf_fraction, float),
        spammer_count=r.get("spammers", base.spammer_count, int),
        spammer_volume_multiplier=r.get("volume_multiplier",
                                        base.spammer_volume_multiplier, float),
        arc_rate=r.get("arc_rate", base.arc_rate, float),
        period_days=(period_s / 86400.0) if period_s else base.period_days,
        reply_prob=r.get("reply_prob", base.reply_prob, float),
        reply_latency_mean_s=float(latency_s) if latency_s else base.reply_latency_mean_s,
        nudge_prob=r.get("nudge_prob", base.nudge_prob, float),
        channel=r.get("channel", base.channel),
        seed=r.get("seed", base.seed, int),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise IngestError(str(exc)) from None
    events, truth = generate(cfg)
    with open_output(r.get("out_messages", "-")) as f:
        if cfg.channel == EMAIL:
            write_email_csv(events, f)
        else:
            write_micropost_jsonl(events, f)
    truth_path = r.get("out_truth", None)
    if truth_path:
        nodes = set()
        for e in events:
            nodes.add(e.sender)
            nodes.update(e.recipients)
        with open_output(truth_path) as f:
            write_ground_truth(truth, nodes, f)
    print(f"generated {len(events)} events, {len(truth.spammers)} spammers, "
          f"seed {cfg.seed}", file=sys.stderr)
    return 0


def _cmd_export(r: _Resolver) -> int:
    out = r.get("out", None)
    if out is None:
        raise IngestError("missing --out")
    result, path, fmt, frac = _ingest(r)
    graph = build_graph(result.events, fmt)
    plan_text = r.get("plan", None)
    if plan_text:
        selection = _selection(r, result.events, graph, plan_text)
        graph = remove(graph, selection)
        print(f"removed {len(selection)} nodes before export", file=sys.stderr)
    _export_graph(graph, out)
    print(f"exported {graph.n} nodes and {graph.m} arcs to {out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "ingest-check": _cmd_ingest_check,
    "metrics": _cmd_metrics,
    "detect-spam": _cmd_detect_spam,
    "simplify": _cmd_simplify,
    "stability": _cmd_stability,
    "text": _cmd_text,
    "synth": _cmd_synth,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("commstab: error: missing subcommand", file=sys.stderr)
        return 1
    file_cfg: dict[str, str] = {}
    if args.config:
        try:
            file_cfg = load_config_file(args.config)
        except (OSError, ValueError) as exc:
            print(f"commstab: error: bad config file: {exc}", file=sys.stderr)
            return 1
    resolver = _Resolver(args, file_cfg)
    try:
        return _COMMANDS[args.command](resolver)
    except (IngestError, RejectThresholdError, GraphError, ValueError) as exc:
        print(f"commstab: error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"commstab: internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
