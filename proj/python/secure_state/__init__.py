"""Python bindings for the securestate C++ core."""

import json as _json

from ._core import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    Error,
    LinearSystem,
    OverflowError,
    PreconditionError,
    __version__,
    noiseless_secure_decode,
    observation_symbols,
    run_filtering,
    run_prediction,
    scalar_predict,
    simulate,
    solve_steady_state,
    sparse_observability_index,
    vector_filter,
    vector_predict,
)
from ._core import run_experiment_json as _run_experiment_json


def run_experiment(config, parallel=1, oracle=False):
    """Run an experiment from a config dict or JSON string; returns the results document as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_experiment_json(text, parallel, oracle))
