"""Python front end for the cfbva pricing engine.

The heavy lifting happens in the compiled ``_cfbva`` module; this package
adds config loading from dicts or files and decodes the JSON report.
"""

import json
import os

from ._cfbva import (
    ConfigError,
    Curve,
    NumericDomainError,
    SolverError,
    UsageError,
    __version__,
    ccp_gap_risk,
    foreign_collateral,
    on_default_theta,
    perfect_collateral,
    simple_zcb,
    uncollateralized_fva,
)
from . import _cfbva

__all__ = [
    "ConfigError",
    "Curve",
    "NumericDomainError",
    "SolverError",
    "UsageError",
    "__version__",
    "ccp_gap_risk",
    "foreign_collateral",
    "load",
    "on_default_theta",
    "perfect_collateral",
    "price",
    "run",
    "simple_zcb",
    "uncollateralized_fva",
    "verify",
]


def _text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config, encoding="utf-8") as fh:
            return fh.read()
    raise TypeError("config must be a dict or the path of a JSON file")


def load(config):
    """Validated config with every default filled in."""
    return json.loads(_cfbva.normalize_config(_text(config)))


def run(config, mode="price", *, seed=None, threads=None, ladder=None, out=None):
    """Run one job and return the decoded report.

    The returned dict is the machine report with two extra keys:
    ``passed`` (verify outcome) and ``summary`` (the human-readable text).
    """
    if out is not None:
        out = os.fspath(out)
    raw = _cfbva.run_job(_text(config), mode, seed, threads, ladder, out)
    report = json.loads(raw["report"])
    report["passed"] = raw["passed"]
    report["summary"] = raw["summary"]
    if raw["written"]:
        report["written"] = raw["written"]
    return report


def price(config, **kwargs):
    return run(config, "price", **kwargs)


def verify(config, **kwargs):
    return run(config, "verify", **kwargs)
