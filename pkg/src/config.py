# src/config.py
from zoneinfo import ZoneInfo
import os
from pathlib import Path
from dotenv import load_dotenv

# ----------------- ШЛЯХИ -----------------
BASE_DIR = Path(__file__).parent.parent.absolute()
ENV_PATH = os.path.join(BASE_DIR, ".env")
load_dotenv(ENV_PATH)

LOG_DIR = os.getenv("NEHARI_LOG_DIR") or os.path.join(BASE_DIR, "logs")
LOG_FILE = os.path.join(LOG_DIR, "full_log.log")
LOG_RETENTION_DAYS = 7

# ----------------- НАЛАШТУВАННЯ ЧАСУ -----------------
TIMEZONE = ZoneInfo("Europe/Kyiv")

# -------------------для телеграм------------------
BOT_PREFIX = "NEHARI_SOLVER"

VERSION = "0.3.0"

# ----------------- ЧИСЛОВІ ДОПУСКИ -----------------
GAP_TOL = 1e-8          # власне значення в (-GAP_TOL, GAP_TOL) — щілини немає
ABS_TOL = 1e-10
INNER_TOL = 1e-10       # зупинка внутрішньої максимізації на Ê(w)
INNER_MAX_ITERS = 500
TOL_GRAD = 1e-8
MAX_ITERS = 2000
ORBIT_TOL = 1e-6
MONOTONE_MARGIN = 1e-12

# сітка для аудиту гіпотез про f: 512 логарифмічних точок на знак у [1e-8, 1e4]
AUDIT_U_MIN = 1e-8
AUDIT_U_MAX = 1e4
AUDIT_POINTS = 512
EPSILON_TABLE = (1e-1, 1e-2, 1e-3, 1e-4)
