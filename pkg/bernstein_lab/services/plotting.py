"""
Линейные графики в SVG: величины серии радиусов и диадические суммы Ничше.
"""
import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from bernstein_lab.models.reports import NitscheReport  # noqa: E402
from bernstein_lab.services.data_processing import FileService  # noqa: E402

plt.rcParams['svg.hashsalt'] = 'bernstein-lab'
plt.rcParams['savefig.bbox'] = 'tight'


def _save(fig, file_path: str) -> str:
    file_path = FileService.prepare(file_path)
    fig.savefig(file_path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return file_path


def plot_sweep(df: pd.DataFrame, file_path: str) -> str:
    """T1, T2, lhs и rhs как функции R в логарифмических осях"""
    fig, ax = plt.subplots(figsize=(6, 4))
    for column in ('lhs', 'rhs', 'T1', 'T2'):
        values = df[column].to_numpy(dtype=float)
        mask = np.isfinite(values) & (values > 0)
        if mask.any():
            ax.loglog(df['R'].to_numpy(dtype=float)[mask], values[mask], marker='o', label=column)
    ax.set_xlabel('R')
    ax.set_ylabel('значение')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend()
    return _save(fig, file_path)


def plot_dyadic(report: NitscheReport, file_path: str) -> str:
    """Диадические суммы S_k в полулогарифмических осях"""
    k = np.array([level for level, _ in report.dyadic_sums])
    s = np.array([value for _, value in report.dyadic_sums])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(k, s, marker='o')
    ax.set_xlabel('k')
    ax.set_ylabel('S_k')
    ax.set_title(f'{report.density}: {report.classification} ({report.fitted_model})')
    ax.grid(True, which='both', alpha=0.3)
    return _save(fig, file_path)
