"""
Shared helpers: seeding, atomic file output and logging setup.
"""

from src.utils.io_utils import append_jsonl, atomic_path, read_jsonl, write_json_atomic, write_jsonl_atomic, write_text_atomic
from src.utils.logging_utils import configure_logging
from src.utils.seeding import derive_seed, make_rng

__all__ = [
    'append_jsonl',
    'atomic_path',
    'read_jsonl',
    'write_json_atomic',
    'write_jsonl_atomic',
    'write_text_atomic',
    'configure_logging',
    'derive_seed',
    'make_rng',
]
