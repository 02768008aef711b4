"""DigitalExposome analysis: ingest, align, stats, spatial, DBN features, classifiers."""

import json

from ._exposome import (
    DbnModel,
    ExposomeError,
    fuse_session,
    interpolate_linear,
    kfold_cv,
    ols,
    pca,
    pearson,
    pipeline_stages,
    qq_data,
    synthesize_session,
    train_dbn,
    validate_session,
    voronoi,
)
from . import _exposome

__all__ = [
    "DbnModel",
    "ExposomeError",
    "default_config",
    "fuse_session",
    "interpolate_linear",
    "kfold_cv",
    "ols",
    "pca",
    "pearson",
    "pipeline_stages",
    "qq_data",
    "run_pipeline",
    "synthesize_session",
    "train_dbn",
    "validate_session",
    "voronoi",
]


def default_config():
    return json.loads(_exposome.default_config_json())


def run_pipeline(config=None, **overrides):
    """Run every stage; keyword overrides are merged over `config`.

    Returns the run report (success, stages, outputs, config) as a dict.
    """
    cfg = dict(config or {})
    cfg.update(overrides)
    if "out_dir" in cfg:
        cfg["out_dir"] = str(cfg["out_dir"])
    if cfg.get("manifest") is not None:
        cfg["manifest"] = str(cfg["manifest"])
    return json.loads(_exposome.run_pipeline_json(json.dumps(cfg)))
