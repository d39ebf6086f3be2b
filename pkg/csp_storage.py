from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Union

from csp import read_dimacs, to_dimacs
from csp_models import CspInstance
from errors import InputError

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_instance(path: PathLike) -> CspInstance:
    """Загрузить задачу из нативного JSON-файла."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"файл задачи не найден: {path}")

    try:
        data = json.loads(path.read_text(encoding="utf-8") or "{}")
    except json.JSONDecodeError as e:
        raise InputError(f"повреждённый JSON в {path}: {e}") from e

    instance = CspInstance.from_dict(data)
    if not instance.label:
        instance = CspInstance(
            d=instance.d,
            n_ab=instance.n_ab,
            k=instance.k,
            constraints=instance.constraints,
            label=path.stem,
        )
    return instance


def save_instance(path: PathLike, instance: CspInstance) -> None:
    """Сохранить задачу в нативном JSON (детерминированно, байт-в-байт)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = instance.to_dict()
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def load_dimacs(path: PathLike) -> CspInstance:
    """Загрузить задачу из DIMACS CNF-файла."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"DIMACS-файл не найден: {path}")
    return read_dimacs(path.read_bytes(), label=path.stem)


def save_dimacs(path: PathLike, instance: CspInstance) -> None:
    """Сохранить задачу с d=2 в DIMACS CNF."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_dimacs(instance), encoding="utf-8", newline="\n")


def load_any(path: PathLike, *, dimacs: bool = False) -> CspInstance:
    """Нативный JSON или DIMACS (по флагу или расширению .cnf)."""
    path = Path(path)
    if dimacs or path.suffix.lower() in (".cnf", ".dimacs"):
        return load_dimacs(path)
    return load_instance(path)
