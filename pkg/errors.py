"""Иерархия ошибок пакета.

Каждый класс несёт exit_code — стабильный контракт командной строки:
0 ok, 2 usage, 3 unsat, 4 no-partial-solutions, 5 resource.
"""

from __future__ import annotations

from typing import Optional


class NestedSearchError(Exception):
    """Базовая ошибка пакета."""

    exit_code = 1


class InputError(NestedSearchError, ValueError):
    """Некорректные входные данные (размерности, флаги, файлы)."""

    exit_code = 2


class DimacsParseError(InputError):
    """Ошибка разбора DIMACS CNF с номером строки."""

    def __init__(self, message: str, lineno: Optional[int] = None) -> None:
        self.lineno = lineno
        if lineno is not None:
            message = f"строка {lineno}: {message}"
        super().__init__(message)


class ResourceError(NestedSearchError):
    """Превышен лимит перебора или плотной алгебры."""

    exit_code = 5


class ContractError(NestedSearchError):
    """Нарушено предусловие операции (неподдерживаемый вариант, нет census и т.п.)."""

    exit_code = 1


class ScheduleError(ContractError):
    """Расписание нельзя построить (щель закрывается на сетке)."""


class UnsatisfiableError(NestedSearchError):
    """У задачи нет ни одного полного решения."""

    exit_code = 3


class NoPartialSolutionsError(NestedSearchError):
    """Нет ни одного частичного решения на первичных переменных."""

    exit_code = 4
