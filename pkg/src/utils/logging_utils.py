from typing import Optional

import logfire

from src.config import settings

_configured = False


def configure_logging(send_to_logfire: Optional[str] = None, console: Optional[bool] = None) -> None:
    """
    Configure logfire once per process.

    Args:
        send_to_logfire: Overrides settings.LOGFIRE_ENABLED ('if-token-present', True, False)
        console: Overrides settings.LOG_CONSOLE
    """
    global _configured
    if _configured:
        return

    target = send_to_logfire if send_to_logfire is not None else settings.LOGFIRE_ENABLED
    if target in ('true', 'True', '1'):
        target = True
    elif target in ('false', 'False', '0'):
        target = False

    show_console = settings.LOG_CONSOLE if console is None else console
    logfire.configure(
        send_to_logfire=target,
        service_name='ct-lesion-synth',
        console=None if show_console else False,
    )
    _configured = True
