"""Stage records for pipeline runs: a start entry, then an end entry with status and fields."""
import logging
import time
from contextlib import contextmanager
from datetime import datetime

import pandas as pd

from greens.errors import GreensError

logger = logging.getLogger("greens.audit")

RECORD_COLUMNS = ["stage", "status", "started_at", "elapsed_seconds", "detail"]

_records = []
_open = {}


def log_stage_start(stage):
    """Opens a record for `stage` with its start time."""
    _open[stage] = (time.perf_counter(), datetime.now().isoformat(timespec="seconds"))
    logger.info(f"stage {stage} started")


def log_stage_end(stage, status="ok", **fields):
    """Closes the latest open record for `stage`."""
    if stage not in _open:
        logger.warning(f"stage {stage} was never started")
        return
    began, started_at = _open.pop(stage)
    elapsed = time.perf_counter() - began
    _records.append(
        {
            "stage": stage,
            "status": status,
            "started_at": started_at,
            "elapsed_seconds": round(elapsed, 3),
            "detail": ", ".join(f"{key}={value}" for key, value in fields.items()),
        }
    )
    if status == "ok":
        logger.info(f"stage {stage} finished in {elapsed:.2f}s")
    else:
        logger.error(f"stage {stage} failed after {elapsed:.2f}s: {fields.get('error', '')}")


@contextmanager
def stage(name, **fields):
    """Records `name`; a GreensError raised inside is labelled with the stage."""
    log_stage_start(name)
    try:
        yield fields
    except GreensError as exc:
        exc.with_stage(name)
        log_stage_end(name, "failed", error=exc)
        raise
    except Exception as exc:
        log_stage_end(name, "failed", error=exc)
        raise
    else:
        log_stage_end(name, **fields)


def records_frame():
    return pd.DataFrame(_records, columns=RECORD_COLUMNS)


def reset():
    _records.clear()
    _open.clear()
