"""Python access to the m2oie extractor: corpora, extraction and scoring."""

import json

from ._m2oie import M2oieError, Model, evaluate_files, run, synth_lines

__all__ = ["M2oieError", "Model", "evaluate", "extract", "run", "synth_corpus"]


def synth_corpus(seed=7, size=200):
    """Synthetic annotated sentences as dicts with id, tokens and tuples."""
    return [json.loads(line) for line in synth_lines(seed, size)]


def extract(checkpoint, sentences, batch=32):
    """Extract tuples from raw sentences (strings or token lists)."""
    tokens = [s.split() if isinstance(s, str) else list(s) for s in sentences]
    return Model(str(checkpoint)).extract(tokens, batch)


def evaluate(gold, pred, matcher="tuple"):
    """AUC, max-F1 operating point and PR curve for an extraction file."""
    return evaluate_files(str(gold), str(pred), matcher)
