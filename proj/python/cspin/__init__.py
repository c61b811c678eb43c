"""Periodically reset central spin model: spectra, metastable manifolds, sweeps."""

import json

from ._core import *  # noqa: F401,F403
from ._core import CspinError, reproduce_figure as _reproduce_figure


def reproduce_figure(figure, out, scale="default", threads=0):
    """Write the data files of one figure under out/figure and return its manifest."""
    return json.loads(_reproduce_figure(figure, str(out), scale, threads))


__all__ = [name for name in dir() if not name.startswith("_")] + ["CspinError"]
