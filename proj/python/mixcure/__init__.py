"""Mixture-cure additive hazards models for partly interval-censored data."""

import csv
import io
import json

from ._mixcure import (
    Dataset,
    Fit,
    InputError,
    fit,
    incidence_prob,
    parse_dataset,
    read_dataset,
    solve_event_time,
    version,
)
from ._mixcure import replicate as _replicate
from ._mixcure import simulate as _simulate

__version__ = version()

__all__ = [
    "Dataset",
    "Fit",
    "InputError",
    "fit",
    "fit_document",
    "incidence_prob",
    "parse_dataset",
    "read_dataset",
    "replicate",
    "simulate",
    "solve_event_time",
    "version",
]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _overrides(overrides):
    return {str(k): str(v) for k, v in (overrides or {}).items()}


def simulate(preset="nc80-pc70", n=200, seed=1, overrides=None):
    """Simulated dataset and its latent quantities (a list of row dicts)."""
    data, latent = _simulate(preset, n, seed, _overrides(overrides))
    return data, _rows(latent)


def replicate(preset="nc80-pc70", n=200, reps=100, seed=1, jobs=1, overrides=None):
    """Metric report (dict) and per-replicate rows (list of dicts)."""
    report, per_rep = _replicate(preset, n, reps, seed, jobs, _overrides(overrides))
    return json.loads(report), _rows(per_rep)


def fit_document(result):
    """The fit as the JSON document written by the command-line tool."""
    return json.loads(result.to_json())
