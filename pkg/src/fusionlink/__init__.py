"""Fusion systems, centric linking systems, bisets and twisted cohomology of finite groups."""

from __future__ import annotations

from .biset import *  # noqa: F401,F403
from .cohomology import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .fusion import *  # noqa: F401,F403
from .groups import *  # noqa: F401,F403
from .linking import *  # noqa: F401,F403
from .stable import *  # noqa: F401,F403

__version__ = "0.1.0"
