import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    THREADS = int(os.getenv('BERNSTEIN_LAB_THREADS') or os.cpu_count() or 1)
    DB_NAME = os.getenv('DB_NAME', '')
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', '.')
    TIMEZONE = os.getenv('TIMEZONE', 'UTC')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    # Валидаторы гипотез о плотности
    P_MAX = float(os.getenv('P_MAX', '1e6'))
    STABILITY_RTOL = float(os.getenv('STABILITY_RTOL', '0.01'))

    # Квадратура для функций, заданных формулой
    QUAD_RESOLUTION = int(os.getenv('QUAD_RESOLUTION', '1024'))
    QUAD_MAX_RESOLUTION = int(os.getenv('QUAD_MAX_RESOLUTION', '4096'))
    QUAD_RTOL = float(os.getenv('QUAD_RTOL', '1e-6'))

    NITSCHE_THRESHOLD = float(os.getenv('NITSCHE_THRESHOLD', '0.05'))
    LARGE_GRADIENT = float(os.getenv('LARGE_GRADIENT', '10'))
