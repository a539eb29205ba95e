"""
Logging setup shared by every module of the package.
"""
import logging

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')

_configured = False


def get_logger(name):
    """
    Get a named logger, configuring the root handler on first use.

    The level starts at INFO; load_settings applies Settings.log_level once the
    environment and config file have been read.

    Args:
        name: Logger name, usually the module's short name

    Returns:
        logging.Logger: The configured logger
    """
    global _configured
    if not _configured:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
        _configured = True
    return logging.getLogger(name)


def set_level(level):
    """Change the level of the root logger."""
    logging.getLogger().setLevel(getattr(logging, str(level).upper(), logging.INFO))
