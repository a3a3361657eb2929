"""Open intent detection with distance-aware adaptive decision boundaries.

The heavy lifting lives in the compiled ``_core`` extension; configs are plain
dicts with the same keys as the TOML files, or a path to a TOML file.
"""

from ._core import (
    OPEN_LABEL,
    ContractError,
    Error,
    FormatError,
    Model,
    ParseError,
    TrainingError,
    boundary_gradient,
    classify,
    classify_msp,
    compute_centroids,
    config_hash,
    distance_coefficient,
    evaluate,
    featurize,
    fit_boundaries,
    format_results_table,
    load_corpus,
    load_embeddings,
    resolve_config,
    run_experiment,
    run_labeled_ratio_study,
    run_radius_ablation,
    save_embeddings,
    sigmoid,
    softplus,
    squash,
    tokenize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
