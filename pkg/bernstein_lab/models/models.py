from datetime import datetime
from sqlalchemy import Integer, String, Text, ForeignKey, DateTime
from sqlalchemy.orm import mapped_column, Mapped, relationship

from bernstein_lab.core.database import Base


class RunRecord(Base):
    """
    Запуск лаборатории: команда, конфигурация и код завершения
    """
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, index=True, autoincrement=True,
        doc="Уникальный идентификатор запуска")
    command: Mapped[str] = mapped_column(String(length=50), nullable=False, index=True, doc="Команда CLI")
    config: Mapped[str] = mapped_column(Text, nullable=False, doc="Конфигурация запуска в JSON")
    version: Mapped[str] = mapped_column(String(length=20), nullable=False, doc="Версия пакета")
    started_at: Mapped[datetime] = mapped_column(DateTime, nullable=False, doc="Начало запуска в UTC")
    finished_at: Mapped[datetime] = mapped_column(DateTime, nullable=False, doc="Окончание запуска в UTC")
    exit_status: Mapped[int] = mapped_column(Integer, nullable=False, doc="Код завершения")
    message: Mapped[str] = mapped_column(Text, nullable=False, default="", doc="Сообщение об ошибке")

    # Связь один-ко-многим с отчетами
    reports: Mapped[list["ReportRecord"]] = relationship("ReportRecord", back_populates="run",
        cascade="all, delete-orphan", doc="Отчеты операций этого запуска")

    def __repr__(self) -> str:
        return f"<RunRecord(id={self.id}, command='{self.command}', exit_status={self.exit_status})>"


class ReportRecord(Base):
    """
    Отчет одной операции запуска
    """
    __tablename__ = "reports"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, index=True, autoincrement=True,
        doc="Уникальный идентификатор отчета")
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("runs.id", ondelete="CASCADE"),
        nullable=False, index=True, doc="ID запуска из таблицы runs")
    operation: Mapped[str] = mapped_column(String(length=100), nullable=False, doc="Имя операции")
    payload: Mapped[str] = mapped_column(Text, nullable=False, doc="Отчет в JSON")

    # Обратная связь с RunRecord
    run: Mapped["RunRecord"] = relationship("RunRecord", back_populates="reports", doc="Запуск")

    def __repr__(self) -> str:
        return f"<ReportRecord(id={self.id}, run_id={self.run_id}, operation='{self.operation}')>"
