"""Saddlepoint tail envelopes and finite-blocklength bounds."""

from ._core import *  # noqa: F401,F403
from ._core import CertboundError, __version__

__all__ = [name for name in dir() if not name.startswith("_")]
