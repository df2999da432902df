"""specforge: an agentic pipeline that lowers specification documents into
verified, synthesis-ready code through understanding, progressive coding, and
adaptive reflection, with a deterministic scripted provider for offline runs.
"""

from .config import RunConfig, load_config
from .document import SpecDocument, load_manifest, render_context, validate_document
from .errors import SpecForgeError
from .orchestrator import Orchestrator, compute_metrics_from_events
from .patcher import CodeLevel, apply_patch, parse_patch
from .providers import ScriptedProvider, Transcript, usage_totals

__version__ = "0.1.0"

__all__ = [
    "CodeLevel",
    "Orchestrator",
    "RunConfig",
    "ScriptedProvider",
    "SpecDocument",
    "SpecForgeError",
    "Transcript",
    "apply_patch",
    "compute_metrics_from_events",
    "load_config",
    "load_manifest",
    "parse_patch",
    "render_context",
    "usage_totals",
    "validate_document",
    "__version__",
]
