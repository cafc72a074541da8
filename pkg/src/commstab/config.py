"""Run configuration: durations, channel defaults, INI config files."""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from importlib import metadata

from .events import CHANNELS, EMAIL, MICROPOST
from .spam import SpamThresholds

try:
    VERSION = metadata.version("commstab")
except metadata.PackageNotFoundError:  # running from a source tree
    VERSION = "0.1.0"

DAY = 86400

DEFAULT_WINDOW_S = {EMAIL: 30 * DAY, MICROPOST: 7 * DAY}
DEFAULT_HORIZON_S = {EMAIL: 14 * DAY, MICROPOST: 7 * DAY}

_DURATION_RE = re.compile(r"(\d+)\s*([smhd]?)$")
_UNIT_S = {"": 1, "s": 1, "m": 60, "h": 3600, "d": DAY}


def parse_duration(text: str) -> int:
    """'90s', '45m', '12h', '30d' or a bare integer (seconds) -> seconds."""
    m = _DURATION_RE.fullmatch(str(text).strip().lower())
    if not m:
        raise ValueError(f"bad duration {text!r}; expected <int>[s|m|h|d]")
    seconds = int(m.group(1)) * _UNIT_S[m.group(2)]
    if seconds <= 0:
        raise ValueError("duration must be positive")
    return seconds


def format_duration(seconds: int) -> str:
    for unit, size in (("d", DAY), ("h", 3600), ("m", 60)):
        if seconds % size == 0:
            return f"{seconds // size}{unit}"
    return f"{seconds}s"


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one analysis run.

    window_s / horizon_s of None fall back to the channel defaults
    (30d / 14d for e-mail, 7d / 7d for microposts).
    """

    input_path: str = "-"
    input_format: str = EMAIL
    plans: tuple[str, ...] = ("spammers",)
    window_s: int | None = None
    horizon_s: int | None = None
    symmetrize_distances: bool = False
    seed: int = 42
    max_reject_fraction: float = 0.1
    thresholds: SpamThresholds = field(default_factory=SpamThresholds)
    lexicon_path: str | None = None
    min_author_msgs: int = 3

    def __post_init__(self):
        if self.input_format not in CHANNELS:
            raise ValueError(f"unknown format {self.input_format!r}")
        self.thresholds.validate()

    @property
    def resolved_window_s(self) -> int:
        return self.window_s if self.window_s is not None else DEFAULT_WINDOW_S[self.input_format]

    @property
    def resolved_horizon_s(self) -> int:
        return self.horizon_s if self.horizon_s is not None else DEFAULT_HORIZON_S[self.input_format]

    def echo(self) -> dict:
        """Settings as serialized into reports.

        Deliberately excludes anything runtime-only (thread counts,
        output paths), so reruns of the same analysis compare equal.
        """
        t = self.thresholds
        return {
            "version": VERSION,
            "input": self.input_path,
            "format": self.input_format,
            "plans": list(self.plans),
            "window_s": self.resolved_window_s,
            "horizon_s": self.resolved_horizon_s,
            "symmetrize_distances": self.symmetrize_distances,
            "seed": self.seed,
            "max_reject_fraction": self.max_reject_fraction,
            "spam_thresholds": {
                "high_volume_percentile": t.high_volume_percentile,
                "min_received_nonspam": t.min_received_nonspam,
                "follow_ratio": t.follow_ratio,
                "active_hour_bins": t.active_hour_bins,
                "ci_screen": t.ci_screen,
                "max_fixed_point_iters": t.max_fixed_point_iters,
            },
            "lexicon": self.lexicon_path or "default",
            "min_author_msgs": self.min_author_msgs,
        }


def load_config_file(path: str) -> dict[str, str]:
    """Flatten an INI file into {key: value}; sections only group keys."""
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as f:
        parser.read_string(f.read(), source=path)
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[key.replace("-", "_")] = value
    if parser.defaults():
        for key, value in parser.defaults().items():
            flat.setdefault(key.replace("-", "_"), value)
    return flat
