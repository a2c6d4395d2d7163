"""Manual-guided task-oriented dialogue toolkit.

Synthesizes dialogue corpora driven by natural-language instruction
manuals, runs lexical baselines for instruction matching and argument
tagging, evaluates them, and serves a small collection workflow over
HTTP for human annotation sessions.
"""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
