"""Communication-network metric stability under node removal.

Build directed message graphs from e-mail or micropost streams, compute
global and per-node network metrics, detect spammer accounts by explicit
criteria, remove node selections, and measure how well full-graph metrics
survive on the reduced graphs.
"""

from .config import RunConfig, parse_duration, VERSION
from .correlate import CorrelationResult, correlate_values, correlate_vectors, pearson
from .events import (EMAIL, MICROPOST, IngestError, IngestResult, MessageEvent,
                     RejectThresholdError, ingest, restrict_events)
from .global_metrics import GlobalMetrics, compute_global_metrics
from .graph import (CommGraph, GraphError, SnapshotSeries, Window, build_graph,
                    degree_summary, export_edgelist, export_graphml, window_slices)
from .node_metrics import (METRIC_ORDER, PairingResult, ResponsePair,
                           activity_counts, art, betweenness_centrality,
                           betweenness_oscillations, closeness_centrality,
                           contribution_index, contribution_indices,
                           degree_centrality, nudges, oscillation_count,
                           pair_responses, received_counts, response_stats,
                           windowed_betweenness)
from .removal import RemovalPlan, bottom_nodes, parse_plan, remove, select_nodes, top_degree_nodes
from .shortest_paths import StructuralPass, distance_pass, structural_pass
from .spam import (SpamResult, SpamThresholds, SpamVerdict, ci_screen, classify,
                   evaluate_criteria, is_spam_verdict)
from .stability import (StabilityReport, node_metric_table, report_to_dict,
                        run_experiment, write_report_csv, write_report_json)
from .synth import GroundTruth, SynthConfig, gen_message_stream, gen_scale_free, generate
from .text_metrics import (CorpusModel, LexiconScorer, build_corpus_model,
                           complexity, emotionality, load_lexicon, sentiment,
                           subject_body_correlation, tokenize)

__version__ = VERSION

__all__ = [
    "CommGraph", "CorpusModel", "CorrelationResult", "EMAIL", "GlobalMetrics",
    "GraphError", "GroundTruth", "IngestError", "IngestResult",
    "LexiconScorer", "MICROPOST", "METRIC_ORDER", "MessageEvent",
    "PairingResult", "RejectThresholdError", "RemovalPlan", "ResponsePair",
    "RunConfig", "SnapshotSeries", "SpamResult", "SpamThresholds",
    "SpamVerdict", "StabilityReport", "StructuralPass", "SynthConfig",
    "VERSION", "Window", "activity_counts", "art", "betweenness_centrality",
    "betweenness_oscillations", "bottom_nodes", "build_corpus_model",
    "build_graph", "ci_screen", "classify", "closeness_centrality",
    "complexity", "compute_global_metrics", "contribution_index",
    "contribution_indices", "correlate_values", "correlate_vectors",
    "degree_centrality", "degree_summary", "distance_pass", "emotionality",
    "evaluate_criteria", "export_edgelist", "export_graphml",
    "gen_message_stream", "gen_scale_free", "generate", "ingest",
    "is_spam_verdict", "load_lexicon", "node_metric_table", "nudges",
    "oscillation_count", "pair_responses", "parse_plan", "pearson",
    "received_counts", "remove", "report_to_dict", "response_stats",
    "restrict_events", "run_experiment", "select_nodes", "sentiment",
    "structural_pass", "subject_body_correlation", "tokenize",
    "top_degree_nodes", "window_slices", "windowed_betweenness",
    "write_report_csv", "write_report_json",
]
