"""
Отчеты диагностик. Все отчеты сериализуются в JSON через pydantic.
"""
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class Report(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


class ConditionReport(Report):
    """
    Результат проверки условия (гипотезы о плотности или условия баланса).

    Свидетель (witness_*) присутствует тогда и только тогда, когда условие нарушено.
    """
    hypothesis: str = Field(description="Имя проверяемого условия")
    holds: bool = Field(alias="pass", description="Выполнено ли условие на выборке")
    constant: Optional[float] = Field(default=None, description="Измеренная константа (lambda, Lambda, K, c)")
    witness_point: Optional[List[float]] = Field(default=None, description="Точка нарушения")
    witness_lhs: Optional[float] = None
    witness_rhs: Optional[float] = None
    sample_range: List[float] = Field(default_factory=list, description="Границы выборки")
    sample_description: str = ""
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def witness(self) -> Optional[Tuple[List[float], float, float]]:
        if self.witness_point is None:
            return None
        return self.witness_point, self.witness_lhs, self.witness_rhs


class NitscheReport(Report):
    """Классификация интеграла Ничше по диадическим суммам"""
    density: str
    classification: Literal["diverges", "converges", "inconclusive"]
    dyadic_sums: List[Tuple[int, float]]
    fitted_model: Literal["geometric-decay", "harmonic", "log-harmonic", "constant"]
    fit_residual: float
    model_parameters: Dict[str, float] = Field(default_factory=dict)
    residuals: Dict[str, float] = Field(default_factory=dict)
    t_max: float
    levels: int
    cross_check_ratio: float
    form_discrepancy: bool


class SolveReport(Report):
    """Протокол работы демпфированного метода Ньютона"""
    iterations: int
    energy: float
    residual: float
    backtracks: int
    converged: bool
    gradient_steps: int = 0
    regularization: float = 0.0
    energy_history: List[float] = Field(default_factory=list)
    max_gradient: float = 0.0
    large_gradient_elements: int = 0
    nodes: int = 0
    elements: int = 0


class CaccioppoliReport(Report):
    """Весовые величины Каччопполи для одного радиуса R"""
    R: float
    lhs: float
    rhs: float
    ratio: float
    T1: float
    T2: float
    S: float = 0.0
    weight: str
    resolution: str
    # Наименьшая C, при которой lhs <= C rhs на всех радиусах серии до R включительно
    constant: Optional[float] = None
    solve: Optional[SolveReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ManifestEntry(BaseModel):
    operation: str
    command: str
    report: Dict[str, Any]


class ReportBundle(BaseModel):
    """Отчеты одной команды, записываемые в файл --out"""
    command: str
    reports: List[ManifestEntry] = Field(default_factory=list)


class RunManifest(BaseModel):
    """Манифест запуска: конфигурация, отчеты, файлы и код завершения"""
    config: Dict[str, Any]
    version: str
    started_at: str
    finished_at: str
    reports: List[ManifestEntry] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    exit_status: int = 0
    message: str = ""
