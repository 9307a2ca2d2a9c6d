"""Label-to-text prescription generation toolkit.

Pipelines: build or load a (label, instruction) corpus, train a word-piece
vocabulary and an autoregressive scorer, decode prescriptions per label with
greedy or backtracking beam search, then evaluate with lexical metrics,
diversity scores, and a downstream entity-recognition experiment.
"""

__version__ = "0.1.0"
