import json
import logging
from datetime import datetime

import config

_configured = False


def get_logger(name):
    global _configured
    if not _configured:
        logging.basicConfig(
            level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.WARNING),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        _configured = True
    return logging.getLogger(f"maxgraph.{name}")


def set_level(level):
    logging.getLogger("maxgraph").setLevel(level)


logger = get_logger("audit")


def log_action(command, run_id, action):
    """
    Records one activity entry.
    command: "verify" | "mesh" | "catalog" | "minimal-measure" | "api"
    run_id: short digest of the resolved configuration
    action: string describing the activity
    """
    logger.info("[%s:%s] %s", command, run_id, action)
    if not config.ACTIVITY_LOG:
        return
    try:
        entry = {
            "command": command,
            "run_id": run_id,
            "action": action,
            "timestamp": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        }
        with open(config.ACTIVITY_LOG, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")
    except OSError as e:
        logger.warning("Failed to record action: %s", e)
