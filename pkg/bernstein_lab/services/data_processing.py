import os
from typing import List, Sequence

import pandas as pd
from pydantic import BaseModel

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import ConfigError
from bernstein_lab.models.reports import CaccioppoliReport, NitscheReport
from bernstein_lab.services.fields import DiscreteField
from bernstein_lab.services.mesh import mesh_from_points

SWEEP_COLUMNS = ['R', 'lhs', 'rhs', 'ratio', 'T1', 'T2', 'S']


class FileService:
    @staticmethod
    def prepare(path: str) -> str:
        """Относительные пути отсчитываются от OUTPUT_DIR; каталог создается при необходимости"""
        if not os.path.isabs(path):
            path = os.path.normpath(os.path.join(Config.OUTPUT_DIR, path))
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        return path

    @staticmethod
    def read_table(file_path: str, required_columns: Sequence[str]) -> pd.DataFrame:
        """
        Читает таблицу CSV и проверяет наличие обязательных столбцов.

        :param file_path: Путь к файлу таблицы (поддерживается только CSV).
        :param required_columns: Столбцы, которые должны присутствовать.
        :return: DataFrame с данными файла.
        :raises ConfigError: Если файл не найден, пуст, имеет другой формат или в нем нет нужных столбцов.
        """
        file_ext = os.path.splitext(file_path)[1].lower()
        if file_ext != '.csv':
            raise ConfigError({"file": f"Неподдерживаемый формат файла: {file_ext}. Поддерживается только CSV."})
        try:
            df = pd.read_csv(file_path, float_precision='round_trip')
        except FileNotFoundError:
            raise ConfigError({"file": f"Файл не найден: {file_path}"})
        except pd.errors.EmptyDataError:
            raise ConfigError({"file": "Файл таблицы пуст или содержит некорректные данные"})

        missing_columns = [col for col in required_columns if col not in df.columns]
        if missing_columns:
            raise ConfigError({"file": f"В таблице отсутствуют обязательные столбцы: {', '.join(missing_columns)}"})
        return df

    @staticmethod
    def import_field(file_path: str) -> DiscreteField:
        """
        Читает решение из CSV со столбцами x, y, u и строит кусочно-линейное поле на триангуляции Делоне узлов.
        """
        df = FileService.read_table(file_path, ['x', 'y', 'u'])
        if len(df) < 3:
            raise ConfigError({"file": f"Для триангуляции нужно не меньше трех узлов, в файле {len(df)}"})
        mesh = mesh_from_points(df[['x', 'y']].to_numpy(dtype=float))
        return DiscreteField(mesh, df['u'].to_numpy(dtype=float), name=f"from-file:{os.path.basename(file_path)}")

    @staticmethod
    def export_solution(field: DiscreteField, file_path: str) -> str:
        """Записывает узловые значения решения в CSV со столбцами x, y, u"""
        file_path = FileService.prepare(file_path)
        df = pd.DataFrame({'x': field.mesh.nodes[:, 0], 'y': field.mesh.nodes[:, 1], 'u': field.values})
        df.to_csv(file_path, index=False)
        return file_path

    @staticmethod
    def sweep_frame(reports: List[CaccioppoliReport]) -> pd.DataFrame:
        df = pd.DataFrame([report.model_dump(include=set(SWEEP_COLUMNS)) for report in reports], columns=SWEEP_COLUMNS)
        if any(report.error for report in reports):
            df['error'] = [report.error or '' for report in reports]
        return df

    @staticmethod
    def export_sweep(reports: List[CaccioppoliReport], file_path: str) -> str:
        """Таблица серии радиусов: R, lhs, rhs, ratio, T1, T2, S (и error, если были сбои)"""
        file_path = FileService.prepare(file_path)
        FileService.sweep_frame(reports).to_csv(file_path, index=False)
        return file_path

    @staticmethod
    def export_dyadic(report: NitscheReport, file_path: str) -> str:
        file_path = FileService.prepare(file_path)
        pd.DataFrame(report.dyadic_sums, columns=['k', 'S_k']).to_csv(file_path, index=False)
        return file_path

    @staticmethod
    def export_json(model: BaseModel, file_path: str) -> str:
        file_path = FileService.prepare(file_path)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(model.model_dump_json(by_alias=True, indent=2))
        return file_path
