"""
Разбор командной строки и JSON-файла конфигурации в RunConfig.
"""
import argparse
import json
from typing import List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator

from bernstein_lab.core.exceptions import ConfigError

COMMANDS = ("density-validate", "nitsche", "solve", "caccioppoli", "conditions", "transform", "sweep", "ledger")

OPTION_TYPES = {'--h': float, '--tol': float, '--levels': int, '--tmax': float, '--threshold': float,
                '--p-max': float, '--mu': float, '--max-iters': int, '--threads': int}
OPTION_ALIASES = {'--tmax': ('--t-max',)}
OPTION_DESTS = {'--tmax': 't_max'}
FLAGS = ('--clear',)


def _split_numbers(value):
    if isinstance(value, str):
        return [float(item) for item in value.replace(' ', '').split(',') if item]
    return value


class RunConfig(BaseModel):
    """Конфигурация одного запуска; все числовые параметры положительны"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    command: Literal["density-validate", "nitsche", "solve", "caccioppoli", "conditions", "transform", "sweep",
                     "ledger"]
    density: str = "minimal-surface"
    domain: str = "square:L=1"
    h: PositiveFloat = 0.1
    boundary: str = "affine:a=1,b=2,c=0"
    field: str = "log-ridge"
    weight: str = "power:alpha=-0.4"
    R: List[PositiveFloat] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    tol: PositiveFloat = 1e-10
    max_iters: PositiveInt = 100
    levels: PositiveInt = 20
    t_max: Optional[PositiveFloat] = None
    threshold: Optional[PositiveFloat] = None
    p_max: Optional[PositiveFloat] = None
    mu: PositiveFloat = 3.0
    check: str = "power-balance:m=0.5,K=10,dir=1"
    region: str = "disk:R=100"
    E1: List[float] = Field(default_factory=lambda: [1.0, 0.0])
    E2: List[float] = Field(default_factory=lambda: [0.0, 1.0])
    seed: int = 0
    threads: Optional[PositiveInt] = None
    out: Optional[str] = None
    plot: Optional[str] = None
    manifest: Optional[str] = None
    clear: bool = False

    @field_validator('R', 'E1', 'E2', mode='before')
    @classmethod
    def split_numbers(cls, value):
        try:
            return _split_numbers(value)
        except ValueError:
            raise ValueError(f"ожидался список чисел через запятую, получено '{value}'")

    @field_validator('E1', 'E2')
    @classmethod
    def two_components(cls, value):
        if len(value) != 2:
            raise ValueError("вектор должен иметь две компоненты")
        return value

    @field_validator('R')
    @classmethod
    def increasing(cls, value):
        if not value or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("радиусы должны возрастать")
        return value


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError({"argv": message})


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="bernstein-lab", description="Численная лаборатория для div[Df(grad u)] = 0")
    parser.add_argument('--config', help="JSON-файл конфигурации вместо флагов")
    subparsers = parser.add_subparsers(dest='command')

    def add(name: str, help_text: str, *options: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        sub.add_argument('--seed', type=int, help="Зерно случайных выборок")
        sub.add_argument('--out', help="Основной файл результата (CSV или JSON)")
        sub.add_argument('--manifest', help="Файл манифеста запуска (JSON)")
        for option in options:
            if option in FLAGS:
                sub.add_argument(option, action='store_true')
                continue
            dest = OPTION_DESTS.get(option, option.lstrip('-').replace('-', '_'))
            sub.add_argument(option, *OPTION_ALIASES.get(option, ()), dest=dest, type=OPTION_TYPES.get(option, str))
        return sub

    add('density-validate', "Проверка гипотез о плотности", '--density', '--p-max', '--mu')
    add('nitsche', "Критерий Ничше", '--density', '--levels', '--tmax', '--threshold', '--plot')
    add('solve', "Дискретное решение задачи Дирихле", '--density', '--domain', '--h', '--boundary', '--tol',
        '--max-iters')
    add('caccioppoli', "Весовые интегралы Каччопполи для заданного поля", '--density', '--field', '--weight',
        '--R', '--h', '--plot')
    add('conditions', "Условия баланса", '--field', '--check', '--region', '--R', '--E1', '--E2')
    add('transform', "Замена направлений", '--density', '--field', '--E1', '--E2', '--domain', '--h', '--tol')
    add('sweep', "Серия радиусов с решением задачи в B_2R", '--density', '--field', '--weight', '--R', '--h',
        '--tol', '--threads', '--plot')
    add('ledger', "История запусков из журнала", '--clear')
    return parser


def _validate(values: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        errors = {}
        for error in e.errors():
            name = ".".join(str(part) for part in error['loc'] if not isinstance(part, int)) or "config"
            errors.setdefault(name, error['msg'])
        raise ConfigError(errors)


def parse_config(argv: Sequence[str]) -> RunConfig:
    """
    Разбирает аргументы командной строки или JSON-файл конфигурации.

    :param argv: Аргументы без имени программы, например ["nitsche", "--density", "power:s=1.5"]
                 или ["--config", "run.json"].
    :return: Проверенная конфигурация.
    :raises ConfigError: Со списком всех некорректных полей.
    """
    namespace = build_parser().parse_args(list(argv))
    values = {}
    if namespace.config:
        try:
            with open(namespace.config, encoding='utf-8') as f:
                values = json.load(f)
        except FileNotFoundError:
            raise ConfigError({"config": f"Файл не найден: {namespace.config}"})
        except json.JSONDecodeError as e:
            raise ConfigError({"config": f"Некорректный JSON: {e}"})
        if not isinstance(values, dict):
            raise ConfigError({"config": "JSON-конфигурация должна быть объектом"})

    flags = {key: value for key, value in vars(namespace).items() if key != 'config' and value is not None}
    values.update(flags)
    if 'command' not in values:
        raise ConfigError({"command": f"не задана команда, ожидается одна из: {', '.join(COMMANDS)}"})
    return _validate(values)
