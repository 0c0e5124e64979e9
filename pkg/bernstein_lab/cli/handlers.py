"""
Обработчики команд CLI. Каждый обработчик получает RunContext, добавляет в него отчеты
и файлы результатов; ошибки LabError превращаются в код завершения манифеста.
"""
import asyncio
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable, Dict, List

import numpy as np
import pytz
from pydantic import BaseModel
from sqlalchemy.exc import SQLAlchemyError

from bernstein_lab import __version__
from bernstein_lab.cli.parser import RunConfig
from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import (ConfigError, DiagnosticFailed, LabError, LedgerError, NoConvergence,
                                           SweepIncomplete)
from bernstein_lab.models.reports import ConditionReport, ManifestEntry, ReportBundle, RunManifest
from bernstein_lab.services import caccioppoli, conditions, density as densities, nitsche, solver
from bernstein_lab.services.data_processing import FileService
from bernstein_lab.services.fields import ClosedFormField, parse_field
from bernstein_lab.services.mesh import build_mesh
from bernstein_lab.services.plotting import plot_dyadic, plot_sweep

Handler = Callable[["RunContext"], None]
HANDLERS: Dict[str, Handler] = {}


@dataclass
class RunContext:
    config: RunConfig
    rng: np.random.Generator
    reports: List[ManifestEntry] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def add(self, operation: str, report: BaseModel | Dict[str, Any]):
        payload = report.model_dump(mode='json', by_alias=True) if isinstance(report, BaseModel) else report
        self.reports.append(ManifestEntry(operation=operation, command=self.config.command, report=payload))

    def check(self, operation: str, report: ConditionReport, required: bool = True):
        """Добавляет отчет проверки; проваленная обязательная проверка дает код завершения 4"""
        self.add(operation, report)
        if required and not report.holds:
            self.failures.append(f"{operation}: {report.hypothesis}")

    def output(self, path: str):
        self.outputs.append(path)

    def write_bundle(self):
        if self.config.out:
            bundle = ReportBundle(command=self.config.command, reports=self.reports)
            self.output(FileService.export_json(bundle, self.config.out))


def density_validate(context: RunContext):
    config = context.config
    density = densities.parse_density(config.density)
    points, directions = densities.hypothesis_grid(config.p_max)
    context.add("validate_ellipticity", densities.validate_ellipticity(density, points, directions))
    context.add("validate_nearly_linear_bound", densities.validate_nearly_linear_bound(density, points, directions))
    context.add("validate_linear_bound", densities.validate_linear_bound(density, points))
    context.add("validate_radial_decay", densities.validate_radial_decay(density, config.mu))
    for growth in ("nearly-linear", "linear"):
        context.add("growth_ratio", densities.growth_ratio(density, growth, points))
    context.check("derivative_check", densities.derivative_check(density, context.rng))
    context.check("radial_consistency", densities.radial_consistency(density, points))
    if density.is_nearly_linear:
        context.add("theta_lower_bound_check", nitsche.theta_lower_bound_check(density))
    context.write_bundle()


def nitsche_classify(context: RunContext):
    config = context.config
    density = densities.parse_density(config.density)
    report = nitsche.classify_divergence(density, config.t_max, config.levels, config.threshold)
    context.add("classify_divergence", report)
    if config.out:
        if os.path.splitext(config.out)[1].lower() == ".json":
            context.output(FileService.export_json(report, config.out))
            stem, _ = os.path.splitext(config.out)
            context.output(FileService.export_dyadic(report, f"{stem}_dyadic.csv"))
        else:
            context.output(FileService.export_dyadic(report, config.out))
    if config.plot:
        context.output(plot_dyadic(report, config.plot))
    if report.classification == "inconclusive":
        context.failures.append(f"classify_divergence: остаток {report.fit_residual:.3g}")


def solve(context: RunContext):
    config = context.config
    density = densities.parse_density(config.density)
    mesh = build_mesh(config.domain, config.h)
    boundary = parse_field(config.boundary, "boundary")
    try:
        solution, report = solver.minimize(density, mesh, boundary, tol=config.tol, max_iters=config.max_iters)
    except NoConvergence as e:
        if e.report is not None:
            context.add("minimize", e.report)
        if config.out and e.best_field is not None:
            context.output(FileService.export_solution(e.best_field, config.out))
        raise
    context.add("minimize", report)
    context.add("affinity_measure", {"affinity": conditions.affinity_measure(solution),
                                     "euler_residual": solver.euler_residual(density, solution)})
    if config.out:
        context.output(FileService.export_solution(solution, config.out))


def _sweep_outputs(context: RunContext, reports):
    config = context.config
    for report in reports:
        context.add(f"R={report.R:g}", report)
    if config.out:
        context.output(FileService.export_sweep(reports, config.out))
    if config.plot:
        context.output(plot_sweep(FileService.sweep_frame(reports), config.plot))


def caccioppoli_measure(context: RunContext):
    config = context.config
    density = densities.parse_density(config.density)
    weight = caccioppoli.parse_weight(config.weight)
    target = parse_field(config.field)
    reports = caccioppoli.measured_constants(
        [caccioppoli.caccioppoli_report(density, target, R, weight) for R in config.R])
    _sweep_outputs(context, reports)


def sweep(context: RunContext):
    config = context.config
    density = densities.parse_density(config.density)
    weight = caccioppoli.parse_weight(config.weight)
    boundary = parse_field(config.field)
    reports = caccioppoli.decay_sweep(density, boundary, config.R, weight, config.h, tol=config.tol,
                                      max_concurrent_tasks=config.threads)
    _sweep_outputs(context, reports)
    failed = [report for report in reports if not report.ok]
    if failed:
        raise SweepIncomplete(f"Решатель не справился на радиусах {[report.R for report in failed]}")


def check_conditions(context: RunContext):
    config = context.config
    target = parse_field(config.field)
    spec = conditions.parse_balance(config.check)
    frame = conditions.parse_frame(config.E1, config.E2)
    frame = None if np.allclose(frame.matrix, np.eye(2)) else frame
    if spec.which == "rho-average":
        report = conditions.check_rho_average(target, spec.rho, config.R, direction=spec.direction, frame=frame)
    else:
        report = conditions.check_balance(target, spec, config.region, frame)
    context.check("check_balance", report)
    context.add("affinity_measure", {"affinity": conditions.affinity_measure(target, config.region)})
    context.write_bundle()


def transform(context: RunContext):
    config = context.config
    frame = conditions.parse_frame(config.E1, config.E2)
    density = densities.parse_density(config.density)
    transformed = conditions.direction_transform(frame, density)
    target = parse_field(config.field)

    # Тождество d_a u~(x) = d_{E_a} u(T x) в случайных точках
    points = context.rng.uniform(-0.5, 0.5, size=(20, 2))
    mapped = points @ frame.matrix.T
    if isinstance(target, ClosedFormField):
        tilde = conditions.transform_field(frame, target)
        lhs = tilde.gradient(points)
        rhs = frame.directional(target.gradient(mapped))
        error = float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))
        holds = error <= 1e-10
        context.check("transform_field", ConditionReport(
            hypothesis="directional-derivative-identity", holds=holds, constant=error,
            witness_point=None if holds else points[0].tolist(), witness_lhs=None if holds else error,
            witness_rhs=None if holds else 1e-10, sample_range=[0.0, float(np.max(np.abs(mapped)))],
            sample_description="20 случайных точек",
        ))

    # Обратная рамка восстанавливает f
    p = context.rng.uniform(-10.0, 10.0, size=(20, 2))
    restored = conditions.direction_transform(frame.inverse(), transformed)
    error = float(np.max(np.abs(restored.eval(p) - density.eval(p)) / np.maximum(1.0, np.abs(density.eval(p)))))
    holds = error <= 1e-10
    context.check("direction_transform", ConditionReport(
        hypothesis="inverse-frame", holds=holds, constant=error,
        witness_point=None if holds else p[0].tolist(), witness_lhs=None if holds else error,
        witness_rhs=None if holds else 1e-10, sample_range=[0.0, 10.0], sample_description="20 случайных точек",
    ))

    # Решение переходит в решение преобразованной задачи
    mesh = build_mesh(config.domain, config.h)
    solution, report = solver.minimize(density, mesh, target, tol=config.tol)
    tilde_solution = conditions.transform_field(frame, solution)
    residual = solver.euler_residual(transformed, tilde_solution)
    bound = 10.0 * config.tol * max(1.0, 1.0 / abs(frame.det))
    holds = residual <= bound
    context.add("minimize", report)
    context.check("euler_residual", ConditionReport(
        hypothesis="transformed-solution", holds=holds, constant=residual,
        witness_lhs=None if holds else residual, witness_rhs=None if holds else bound,
        witness_point=None if holds else [0.0, 0.0],
        sample_range=[0.0, float(np.max(np.linalg.norm(tilde_solution.mesh.nodes, axis=-1)))],
        sample_description=f"{len(mesh.nodes)} узлов",
        details={"gram": frame.gram.tolist(), "det": frame.det},
    ))
    context.write_bundle()


async def save_to_ledger(manifest: RunManifest) -> int:
    from bernstein_lab.core import database
    from bernstein_lab.db.crud import add_run
    try:
        await database.create_tables()
        async with database.async_session() as session:
            run = await add_run(session, manifest)
    finally:
        # Соединения пула привязаны к циклу событий asyncio.run
        await database.engine.dispose()
    return run.id


async def read_ledger(clear: bool = False):
    """
    История запусков из журнала; при clear журнал очищается после чтения.

    :return: Кортеж (список запусков get_runs, сообщение clear_tables или None).
    """
    from bernstein_lab.core import database
    from bernstein_lab.db.crud import clear_tables, get_runs
    try:
        await database.create_tables()
        async with database.async_session() as session:
            runs = await get_runs(session, user_timezone=Config.TIMEZONE)
            message = await clear_tables(session) if clear else None
    finally:
        await database.engine.dispose()
    return runs, message


def ledger(context: RunContext):
    if not Config.DB_NAME:
        raise ConfigError({"DB_NAME": "журнал запусков не настроен"})
    try:
        runs, message = asyncio.run(read_ledger(context.config.clear))
    except (SQLAlchemyError, OSError) as e:
        raise LedgerError(f"Журнал {Config.DB_NAME} недоступен: {e}")
    context.add("get_runs", {"runs": [
        {"id": run_id, "command": command, "started_at": started_at, "exit_status": status, "operations": operations}
        for run_id, command, started_at, status, operations in runs
    ]})
    if message is not None:
        context.add("clear_tables", {"message": message})
    context.write_bundle()


def register_handlers(registry: Dict[str, Handler]):
    """
    Регистрация обработчиков команд
    """
    registry["density-validate"] = density_validate
    registry["nitsche"] = nitsche_classify
    registry["solve"] = solve
    registry["caccioppoli"] = caccioppoli_measure
    registry["conditions"] = check_conditions
    registry["transform"] = transform
    registry["sweep"] = sweep
    registry["ledger"] = ledger


register_handlers(HANDLERS)


def _now() -> str:
    return datetime.now(pytz.timezone(Config.TIMEZONE)).isoformat()


def run(config: RunConfig) -> RunManifest:
    """
    Выполняет команду и собирает манифест.

    Код завершения: 0 - успех, 2 - конфигурация, 3 - решатель, 4 - проваленная диагностика,
    5 - внутренняя ошибка или недоступный журнал запусков.
    """
    started_at = _now()
    context = RunContext(config=config, rng=np.random.default_rng(config.seed))
    exit_status, message = 0, ""
    try:
        HANDLERS[config.command](context)
        if context.failures:
            raise DiagnosticFailed("Проверка не выполнена: " + "; ".join(context.failures))
    except LabError as e:
        exit_status, message = e.exit_code, e.message
        logging.warning(f"{config.command}: {message} (код {exit_status})")
    except Exception as e:
        exit_status, message = 5, f"{type(e).__name__}: {e}"
        logging.exception(f"{config.command}: внутренняя ошибка")

    manifest = RunManifest(
        config=config.model_dump(mode='json'), version=__version__, started_at=started_at,
        finished_at=_now(), reports=context.reports, outputs=context.outputs,
        exit_status=exit_status, message=message,
    )
    if Config.DB_NAME and config.command != "ledger":
        try:
            run_id = asyncio.run(save_to_ledger(manifest))
            logging.info(f"Запуск сохранен в журнал: id={run_id}")
        except (SQLAlchemyError, OSError) as e:
            error = LedgerError(f"Не удалось записать запуск в журнал {Config.DB_NAME}: {e}")
            logging.error(error.message)
            # Ненулевой код команды сохраняется
            update = {"message": "; ".join(filter(None, [manifest.message, error.message]))}
            if manifest.exit_status == 0:
                update["exit_status"] = error.exit_code
            manifest = manifest.model_copy(update=update)
    if config.manifest:
        FileService.export_json(manifest, config.manifest)
    return manifest
