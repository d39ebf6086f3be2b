from __future__ import annotations

from typing import Any, Dict, Optional, Sequence

from csp import beta_of
from csp_models import CspInstance, SolutionCensus, digits_of
from nested_models import NestedRunReport
from sweep import SweepResult


def _fmt_num(value: Optional[float], digits: int = 6) -> str:
    if value is None:
        return "-"
    try:
        return f"{float(value):.{digits}g}"
    except (TypeError, ValueError):
        return str(value)


def _flag(ok: bool) -> str:
    return "OK" if ok else "FAIL"


def build_instance_text(instance: CspInstance) -> str:
    """Короткая сводка задачи после generate."""
    lines = [
        f"1: {instance.label or '-'}",
        f"2: d={instance.d} \t n={instance.n_ab} \t k={instance.k}",
        f"3: xi={instance.xi} \t beta={beta_of(instance):.4g}",
    ]
    return "\n".join(lines)


def build_census_text(instance: CspInstance, n_a: int, census: SolutionCensus, model: Optional[Dict[str, float]] = None) -> str:
    lines = [
        f"1: {instance.label or '-'} \t n_a={n_a} \t n_b={instance.n_ab - n_a}",
        f"2: M_A={census.m_a} \t M_AB={census.m_ab}",
        f"3: M_A^S={census.m_a_s} \t M_A^NS={census.m_a_ns} \t min M_B/m_A={census.min_extensions}",
    ]
    branches = ", ".join(f"{a}:{m}" for a, m in sorted(census.m_b_given.items()))
    lines.append(f"4: M_B/m_A \t {branches or '-'}")
    if model:
        lines.append(
            f"5: alpha={_fmt_num(model.get('alpha_reduced'))} \t x*={_fmt_num(model.get('alpha_exact'))} "
            f"\t n_a(auto)={model.get('n_a', '-')}"
        )
    return "\n".join(lines)


def build_run_text(report: NestedRunReport, instance: CspInstance) -> str:
    """Сводка прогона: статус, план, верности стадий, главный исход."""
    lines = [
        f"1: {report.label or '-'} \t ({report.status}) \t n_a={report.partition.n_a}",
        f"2: M_A={report.census.m_a} \t M_AB={report.census.m_ab} \t M_A^S={report.census.m_a_s}",
    ]
    if report.plan is None:
        return "\n".join(lines)

    plan = report.plan
    lines.append(
        f"3: T_A={plan.t_a:.3f} \t T_B={plan.t_b:.3f} \t T_C={plan.t_c:.3f} "
        f"\t r=({plan.r_a}, {plan.r_b}, {plan.r_c})"
    )
    lines.append(f"4: F_A={report.fidelity_after_a:.6f} \t F_B={report.fidelity_after_b:.6f}")
    lines.append(f"5: Масса решений \t {report.final_solution_mass:.6f}")

    if report.measurement_histogram:
        best = max(report.measurement_histogram.items(), key=lambda kv: kv[1])
        digits = "".join(str(x) for x in digits_of(best[0], instance.d, instance.n_ab))
        lines.append(f"6: argmax \t {best[0]} ({digits}) \t p={best[1]:.6f}")

    lines.append(f"7: T model \t {report.wall_time_model:.4g} \t scale {report.eq36_scale:.4g}")
    return "\n".join(lines)


def build_verify_text(rows: Sequence[Dict[str, Any]], norms: Optional[Dict[str, float]] = None) -> str:
    """Одна строка на пару стадии плюс проверка ‖H_i − H_f‖ < 1 для стадии C."""
    lines = []
    for i, row in enumerate(rows, start=1):
        lines.append(
            f"{i}: {row['pair']} \t T={_fmt_num(row['total_time'], 4)} r={row['steps']} "
            f"\t piecewise {_fmt_num(row['measured_piecewise'])} <= {_fmt_num(row['piecewise_bound'])} "
            f"{_flag(row['piecewise_ok'])} "
            f"\t trotter {_fmt_num(row['measured_trotter'])} ~ {_fmt_num(row['trotter_bound_scale'])} "
            f"{_flag(row['trotter_ok'])}"
        )
    if norms:
        n = len(lines) + 1
        diff = norms.get("h_diff_norm_subspace")
        lines.append(
            f"{n}: C \t ‖H_i − H_f‖={_fmt_num(diff)} (full {_fmt_num(norms.get('h_diff_norm_full'))}) "
            f"\t < 1 {_flag(diff is not None and diff < 1.0)}"
        )
    return "\n".join(lines)


def build_sweep_text(result: SweepResult) -> str:
    exponent = "-" if result.fit is None else f"{result.fit.exponent:.4f}"
    lines = [
        f"1: ось {result.spec.axis} \t точек {len(result.rows)} \t ошибок {result.failed_count}",
        f"2: fit_exponent \t {exponent}",
    ]
    return "\n".join(lines)
