"""
Batch command handlers behind the command-line entry point.
"""

from src.commands.curate import cmd_curate
from src.commands.evaluate import cmd_eval
from src.commands.generate import GenerationConfig, cmd_generate, config_hash, load_generation_config, plan_tasks
from src.commands.preview import cmd_preview
from src.commands.refine import cmd_refine

__all__ = [
    'cmd_curate',
    'cmd_eval',
    'GenerationConfig',
    'cmd_generate',
    'config_hash',
    'load_generation_config',
    'plan_tasks',
    'cmd_preview',
    'cmd_refine',
]
