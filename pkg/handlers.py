import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from analysis import ComplexityModel, compare_alpha, model_table
from csp import census, generate_random_ksat
from csp_models import CspInstance
from csp_storage import load_any, save_instance
from errors import NoPartialSolutionsError
from evolve import error_budget
from nested import (
    NestedProblem,
    build_u,
    plan_stages,
    resolve_partition,
    run_nested,
    stage_a_pair,
    stage_a_profile,
    stage_b_pair,
    stage_b_profile,
    stage_c_norms,
    stage_c_pair,
    stage_c_profile,
)
from report_storage import (
    budget_row,
    save_budget_csv,
    save_histogram_csv,
    save_model_csv,
    save_profile_csv,
    save_report,
    save_schedule_csv,
    save_sweep_csv,
    save_trace_csv,
    write_json,
)
from report_text import (
    build_census_text,
    build_instance_text,
    build_run_text,
    build_sweep_text,
    build_verify_text,
)
from run_config import SCHEDULE_BOUNDS, RunConfig, load_run_config
from run_log import log_run_event
from schedule import local_schedule
from sweep import load_sweep_spec, run_sweep

log = logging.getLogger(__name__)

# Сетка x для таблицы модели сложности в census --model-csv
MODEL_GRID = np.linspace(0.05, 0.95, 19)


# ---------- ВСПОМОГАТЕЛЬНЫЕ ФУНКЦИИ ----------


def _load_instance(args: argparse.Namespace) -> CspInstance:
    instance = load_any(args.instance, dimacs=args.dimacs)
    log.info("Задача %s загружена: n=%d, xi=%d", instance.label, instance.n_ab, instance.xi)
    return instance


def _run_config(args: argparse.Namespace) -> RunConfig:
    """Файл конфигурации (если есть), поверх него флаги командной строки."""
    cfg = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    return cfg.with_overrides(
        epsilon=getattr(args, "epsilon", None),
        partition=getattr(args, "n_a", None),
        beta_c=getattr(args, "beta_c", None),
        schedule_bound=getattr(args, "schedule_bound", None),
        shots=getattr(args, "shots", None),
        seed=getattr(args, "seed", None),
        output_dir=getattr(args, "output_dir", None),
        trace=True if getattr(args, "trace", False) else None,
    )


def _run_id(args: argparse.Namespace) -> str:
    return Path(args.instance).stem


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", help="файл задачи: JSON или DIMACS CNF")
    p.add_argument("--dimacs", action="store_true", help="читать файл как DIMACS CNF")
    p.add_argument("--config", help="JSON с RunConfig")
    p.add_argument("--n-a", dest="n_a", type=int, help="явное число переменных регистра A")
    p.add_argument("--beta-c", dest="beta_c", type=float, help="beta_c для автоматического разбиения")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float)
    p.add_argument("--schedule-bound", dest="schedule_bound", choices=SCHEDULE_BOUNDS)
    p.add_argument("--seed", type=int)


# ---------- КОМАНДА generate ----------


def cmd_generate(args: argparse.Namespace) -> int:
    """Случайная k-SAT задача в нативный JSON; печатает xi и beta."""
    instance = generate_random_ksat(args.n, args.clauses, args.k, seed=args.seed)
    save_instance(args.out, instance)
    log.info("Задача сохранена: %s", args.out)
    print(build_instance_text(instance))
    return 0


# ---------- КОМАНДА census ----------


def cmd_census(args: argparse.Namespace) -> int:
    instance = _load_instance(args)
    cfg = _run_config(args)
    partition = resolve_partition(instance, cfg)
    result = census(instance, partition, cap=cfg.enum_cap)

    model = ComplexityModel.for_instance(instance, cfg.beta_c)
    summary: Dict[str, Any] = dict(compare_alpha(model))
    summary["n_a"] = partition.n_a
    if args.model_csv:
        save_model_csv(args.model_csv, model_table(model, MODEL_GRID))

    print(build_census_text(instance, partition.n_a, result, summary))
    return 0


# ---------- КОМАНДА run ----------


def cmd_run(args: argparse.Namespace) -> int:
    """Полный вложенный прогон; код выхода — по статусу отчёта."""
    instance = _load_instance(args)
    cfg = _run_config(args)
    run_id = _run_id(args)
    out_dir = Path(cfg.output_dir)

    log_run_event(cfg.output_dir, run_id, "run_started", label=instance.label)
    report = run_nested(
        instance, cfg, on_event=lambda event, **fields: log_run_event(cfg.output_dir, run_id, event, **fields)
    )
    log_run_event(cfg.output_dir, run_id, "run_done", status=report.status, mass=report.final_solution_mass)

    if "json" in cfg.formats:
        save_report(out_dir / f"{run_id}_report.json", report)
    if "csv" in cfg.formats and report.measurement_histogram:
        save_histogram_csv(out_dir / f"{run_id}_histogram.csv", report, instance)
    for diag in report.stages:
        if diag.trace:
            save_trace_csv(out_dir / f"{run_id}_trace_{diag.stage}.csv", diag.trace)
    log_run_event(cfg.output_dir, run_id, "report_saved", formats=list(cfg.formats))

    print(build_run_text(report, instance))
    if report.exit_code:
        log.warning("Прогон %s завершён со статусом %s", run_id, report.status)
    return report.exit_code


# ---------- КОМАНДА sweep ----------


def cmd_sweep(args: argparse.Namespace) -> int:
    """Сетка точек; упавшие точки помечаются, код выхода всё равно 0."""
    spec = load_sweep_spec(args.spec)
    if args.output_dir:
        spec = replace(spec, config=spec.config.with_overrides(output_dir=args.output_dir))
    result = run_sweep(spec, jobs=args.jobs)

    csv_path = Path(args.csv) if args.csv else Path(spec.config.output_dir) / f"sweep_{spec.axis}.csv"
    save_sweep_csv(csv_path, result)
    if result.failed_count:
        log.warning("Сетка: %d точек с ошибкой", result.failed_count)
    print(build_sweep_text(result))
    return 0


# ---------- КОМАНДА verify ----------


def cmd_verify(args: argparse.Namespace) -> int:
    """Оценки ошибок дискретизации для пар стадий A, B, C против измеренных норм."""
    instance = _load_instance(args)
    cfg = _run_config(args)
    run_id = _run_id(args)
    out_dir = Path(cfg.output_dir)

    partition = resolve_partition(instance, cfg)
    problem = NestedProblem.prepare(instance, partition, cap=cfg.enum_cap)
    if problem.require_census().m_a == 0:
        raise NoPartialSolutionsError("нет ни одного частичного решения на переменных A")
    plan = plan_stages(
        problem,
        cfg.epsilon,
        r_multipliers=(cfg.r_mult_a, cfg.r_mult_b, cfg.r_mult_c),
        schedule_bound=cfg.schedule_bound,
        grid_points=cfg.grid_points,
    )
    u = build_u(problem, plan)

    stages = (
        ("A", stage_a_pair(problem), stage_a_profile(problem, cfg.grid_points), plan.r_a),
        ("B", stage_b_pair(problem), stage_b_profile(problem, cfg.grid_points), plan.r_b),
        ("C", stage_c_pair(problem, u), stage_c_profile(problem, cfg.grid_points), plan.r_c),
    )

    rows: List[tuple] = []
    summary: List[Dict[str, Any]] = []
    for name, (h_i, h_f), profile, r in stages:
        if args.same_hamiltonians:
            h_i = h_f
        schedule = local_schedule(profile, cfg.epsilon, use_bound=cfg.use_bound)
        budget = error_budget(h_i, h_f, schedule, r, seed=cfg.seed)
        rows.append(budget_row(name, budget))
        summary.append({"pair": name, **budget.to_dict()})
        if "csv" in cfg.formats:
            save_profile_csv(out_dir / f"{run_id}_profile_{name}.csv", profile)
            save_schedule_csv(out_dir / f"{run_id}_schedule_{name}.csv", schedule)

    norms = stage_c_norms(problem, u, cap=cfg.diagnostics_cap) if problem.dim <= cfg.diagnostics_cap else None
    if "csv" in cfg.formats:
        save_budget_csv(out_dir / f"{run_id}_budget.csv", rows)
    if "json" in cfg.formats:
        write_json(
            out_dir / f"{run_id}_verify.json",
            {
                "label": instance.label,
                "partition": partition.to_dict(),
                "plan": plan.to_dict(),
                "budgets": summary,
                "stage_c_norms": norms,
                "stage_c_norm_below_one": None if norms is None else norms["h_diff_norm_subspace"] < 1.0,
            },
        )
    log_run_event(cfg.output_dir, run_id, "verify_done", pairs=[s["pair"] for s in summary])

    print(build_verify_text(summary, norms))
    return 0


# ---------- РЕГИСТРАЦИЯ ----------


def register_handlers(subparsers: "argparse._SubParsersAction") -> None:
    """Подкоманды generate, run, sweep, verify, census."""
    p = subparsers.add_parser("generate", help="случайная k-SAT задача")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--clauses", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="куда записать JSON задачи")
    p.set_defaults(handler=cmd_generate)

    p = subparsers.add_parser("run", help="полный вложенный прогон")
    _add_instance_args(p)
    _add_run_args(p)
    p.add_argument("--shots", type=int, help="число выборок измерения (0 — без выборки)")
    p.add_argument("--trace", action="store_true", help="CSV-трасса верности по шагам каждой стадии")
    p.set_defaults(handler=cmd_run)

    p = subparsers.add_parser("sweep", help="сетка прогонов по одной оси")
    p.add_argument("spec", help="JSON с описанием сетки")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="путь CSV (по умолчанию <output>/sweep_<axis>.csv)")
    p.set_defaults(handler=cmd_sweep)

    p = subparsers.add_parser("verify", help="оценки ошибок дискретизации")
    _add_instance_args(p)
    _add_run_args(p)
    p.add_argument(
        "--same-hamiltonians",
        dest="same_hamiltonians",
        action="store_true",
        help="вырожденная проверка H_i = H_f",
    )
    p.set_defaults(handler=cmd_verify)

    p = subparsers.add_parser("census", help="точные счётчики решений для разбиения")
    _add_instance_args(p)
    p.add_argument("--model-csv", dest="model_csv", help="таблица модели сложности в CSV")
    p.set_defaults(handler=cmd_census)
