"""Signal-to-noise estimates for single-emitter fluorescence and extinction spectroscopy."""

from ._core import *  # noqa: F401,F403
from ._core import Error, ValidationError  # noqa: F401
