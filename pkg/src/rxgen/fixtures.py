"""Small hard-coded scorers used by tests, docs, and demos."""

from __future__ import annotations

from .decode import DecodeConfig
from .scorers.table import TableScorer

EOS = "<eos>"

# A nine-token conditional table constructed so that the two best complete
# sequences under the length-normalized heuristic are "I am twelve"
# (joint 0.138) and "You are twelve" (joint 0.135), while a higher-joint
# but length-penalized branch ending in "scored" (joint 0.15) lures a
# width-2 greedy beam away from "You are": greedy returns the "scored"
# dead-end in place of the second optimum, expanding 6 prefixes where the
# backtracking search expands 7 and recovers both optima.
_DEMO_TOKENS = ("I", "You", "He", "am", "are", "have", "twelve", "scored", EOS)

_DEMO_TABLE = {
    (): {"I": 0.50, "You": 0.45, "He": 0.05},
    ("I",): {"am": 0.46, "scored": 0.30, EOS: 0.24},
    ("You",): {"are": 0.30, EOS: 0.28, "twelve": 0.24, "have": 0.18},
    ("I", "am"): {"twelve": 0.60, EOS: 0.40},
    ("I", "scored"): {EOS: 1.0},
    ("You", "are"): {"twelve": 1.0},
    ("I", "am", "twelve"): {EOS: 1.0},
    ("You", "are", "twelve"): {EOS: 1.0},
}


def demo_scorer() -> TableScorer:
    """The worked two-optima example as a table scorer."""
    return TableScorer(_DEMO_TOKENS, _DEMO_TABLE, eos=EOS)


def demo_config() -> DecodeConfig:
    """Search settings under which the demo exhibits the greedy miss."""
    return DecodeConfig(n=2, nb_output=2, m=2, p_b=1.0, alpha=0.6, max_len=6)
