import os
from dotenv import load_dotenv

# Загружаем .env (локально), в CI это не помешает
load_dotenv()

# Текущая версия пакета, пишется в sidecar-метаданные отчётов
APP_VERSION = "1.4"

# Папка по умолчанию для отчётов, CSV и логов.
# Единственная настройка, которая читается из окружения.
OUTPUT_DIR = os.getenv("NAS_OUTPUT_DIR", "./out")

# ---------- ЛИМИТЫ ----------

# Полный перебор присваиваний в census: d^n_ab <= ENUM_CAP
ENUM_CAP = 2 ** 24

# Плотные матрицы (to_dense, собственные значения)
DENSE_CAP = 2 ** 12

# Плотные пропагаторы для измеренных норм в error_budget
DENSE_NORM_CAP = 2 ** 10

# Векторы состояний без плотных матриц
MATRIX_FREE_CAP = 2 ** 24

# Размерность инвариантного подпространства (маршрут "subspace")
SUBSPACE_CAP = 512

# ---------- ЧИСЛЕННЫЕ ДЕФОЛТЫ ----------

DEFAULT_EPSILON = 0.1
DEFAULT_GRID_POINTS = 1025
DEFAULT_BETA_C = 4.25

# Допуск вырождения основного уровня: E1 > E0 + DEGENERACY_TOL
DEGENERACY_TOL = 1e-9

# r = ceil(multiplier * T) для каждой стадии
DEFAULT_R_MULTIPLIER = 4.0

# Подшаги эталонной эволюции на один дискретный шаг
DEFAULT_SUBSTEP_MULTIPLIER = 64

# Минимальное время стадии, если интеграл расписания вырожден (M = N)
MIN_STAGE_TIME = 1.0

# Число случайных состояний для оценки норм выше DENSE_NORM_CAP
ESTIMATE_BATCH = 32

# Вероятности ниже этого порога не попадают в гистограмму
HISTOGRAM_FLOOR = 1e-15
