import json
import pytz
from typing import List, Tuple
from datetime import datetime, timezone
from sqlalchemy import delete
from sqlalchemy.future import select
from sqlalchemy.orm import selectinload
from sqlalchemy.ext.asyncio import AsyncSession

from bernstein_lab.models.models import RunRecord, ReportRecord
from bernstein_lab.models.reports import RunManifest


def _parse_time(value: str) -> datetime:
    # Храним наивное время в UTC
    moment = datetime.fromisoformat(value)
    if moment.tzinfo is not None:
        moment = moment.astimezone(timezone.utc).replace(tzinfo=None)
    return moment


async def add_run(session: AsyncSession, manifest: RunManifest) -> RunRecord:
    """
    Асинхронно сохраняет манифест запуска: одна запись RunRecord и по записи ReportRecord на каждый отчет.

    :param session: Асинхронная сессия для взаимодействия с базой данных.
    :param manifest: Манифест завершенного запуска.
    :return: Сохраненный объект RunRecord.
    """
    run = RunRecord(
        command=str(manifest.config.get('command', '')),
        config=json.dumps(manifest.config, sort_keys=True, default=str),
        version=manifest.version,
        started_at=_parse_time(manifest.started_at),
        finished_at=_parse_time(manifest.finished_at),
        exit_status=manifest.exit_status,
        message=manifest.message,
        reports=[ReportRecord(operation=entry.operation, payload=json.dumps(entry.report, default=str))
                 for entry in manifest.reports],
    )
    session.add(run)
    await session.commit()
    await session.refresh(run)
    return run


async def get_runs(session: AsyncSession, user_timezone: str = 'UTC',
                   command: str | None = None) -> List[Tuple[int, str, str, int, List[str]]]:
    """
    Асинхронно извлекает историю запусков.

    :param session: Асинхронная сессия SQLAlchemy.
    :param user_timezone: Часовой пояс для отображения времени, например, 'Europe/Moscow'.
    :param command: Если задано, только запуски этой команды.
    :return: Список кортежей (id, команда, время начала, код завершения, список операций),
             отсортированный по времени начала.
    """
    stmt = select(RunRecord).options(selectinload(RunRecord.reports)).order_by(RunRecord.started_at, RunRecord.id)
    if command:
        stmt = stmt.where(RunRecord.command == command)
    result = await session.execute(stmt)
    runs = result.scalars().all()

    user_tz = pytz.timezone(user_timezone)

    def convert_to_user_timezone(moment: datetime) -> datetime:
        # Наивное время считаем UTC
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        return moment.astimezone(user_tz)

    return [(
        run.id, run.command,
        convert_to_user_timezone(run.started_at).strftime("%d.%m.%Y %H:%M:%S"),
        run.exit_status,
        [report.operation for report in sorted(run.reports, key=lambda x: x.id)],
    ) for run in runs]


async def clear_tables(session: AsyncSession) -> str:
    """
    Удаляет все записи из таблиц ReportRecord и RunRecord.

    :param session: Асинхронная сессия для взаимодействия с базой данных.
    """
    try:
        await session.execute(delete(ReportRecord))
        await session.execute(delete(RunRecord))
        await session.commit()
    except Exception as e:
        await session.rollback()
        return f"Произошла ошибка при удалении записей: {e}"
    return "База данных очищена"
