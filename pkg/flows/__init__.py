import importlib
import inspect
import os
import sys
from pathlib import Path

from loguru import logger
from prefect import Flow

sys.tracebacklimit = int(os.getenv("TRACEBACK_LIMIT", 3))


# Define the log format
log_format = "[{time:YYYY-MM-DD HH:mm:ss}] | {level:<8} | {file}:{line} - {message}"


def add_console_sink(sink=sys.stderr) -> int:
    """Colored console handler at `LOG_LEVEL`; stderr by default since stdout
    carries reports"""
    return logger.add(
        sink=sink,
        format=log_format,
        level=os.getenv("LOG_LEVEL", "INFO"),
        colorize=True,
    )


# Remove the default logger to prevent duplicate logs
logger.remove()
add_console_sink()

# Optional file handler with rotation
if log_file := os.getenv("LANGVAR_LOG_FILE"):
    logger.add(
        log_file,
        format=log_format,
        level=os.getenv("LOG_LEVEL_FILE", "INFO"),
        rotation="10 MB",  # Rotate after 10 MB
        retention=5,  # Keep the last 5 log files
        compression="zip",  # Compress rotated logs
    )


def collect_public_flows() -> dict[str, Flow]:
    """Gathers every flow listed in a sub-module's "PUBLIC_FLOWS" dictionary.
    Sub-modules are imported on demand, not upon the 'flows' module init.

    Returns:
        dict[str, Flow]: Mapping from 'flow name' to Flow for every public Flow found
    """
    public_flows = {}
    root_dir = Path(__file__).parent.parent

    # Look for all the sub-modules (e.g.: flows.langvar, ...)
    for path in root_dir.glob("flows/**/__init__.py"):
        relative_path = path.relative_to(root_dir).with_suffix("")
        module_name = ".".join(relative_path.parts)
        try:
            module = importlib.import_module(module_name)
            if hasattr(module, "PUBLIC_FLOWS") and not inspect.ismodule(
                module.PUBLIC_FLOWS
            ):
                public_flows.update(module.PUBLIC_FLOWS)

        except ImportError as e:
            logger.warning(f"Could not import {module_name}: {e}")
        except Exception as e:  # noqa: BLE001
            logger.warning(f"Error accessing PUBLIC_FLOWS in {module_name}: {e}")

    return public_flows
