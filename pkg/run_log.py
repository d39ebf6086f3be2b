from __future__ import annotations

import json
import logging
import os
import time
from typing import Any, Dict

log = logging.getLogger(__name__)


def _log_path(output_dir: str, run_id: str) -> str:
    """Путь к журналу событий прогона.

    Формат: <output_dir>/<run_id>_events.jsonl
    """
    return os.path.join(output_dir, f"{run_id}_events.jsonl")


def log_run_event(output_dir: str, run_id: str, event: str, **extra: Any) -> None:
    """Записать одно событие прогона в jsonl-журнал.

    События run: run_started, census_done, stage_a_done, stage_b_done,
    stage_c_done, run_done, report_saved; у verify — verify_done.

    Ошибка записи только логируется: журнал не должен ронять прогон.
    """
    if not run_id:
        return

    payload: Dict[str, Any] = {
        "ts": time.time(),
        "event": event,
        "run_id": run_id,
    }
    if extra:
        payload.update(extra)

    path = _log_path(output_dir, run_id)
    try:
        os.makedirs(output_dir, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, default=str)
            f.write("\n")
    except OSError as e:  # noqa: BLE001
        log.exception("Не удалось записать журнал прогона %s: %s", run_id, e)
