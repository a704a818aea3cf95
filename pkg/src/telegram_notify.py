import os

import requests

from config import BOT_PREFIX
from utils import get_logger

# .env вже завантажено в config
TOKEN = os.getenv("BOT_TOKEN")
CHAT_ID = os.getenv("ADMIN_CHAT_ID")
API_URL = "https://api.telegram.org/bot{token}/sendMessage"
TIMEOUT = 10

log = get_logger("telegram_notify")


def _post(text: str, silent: bool) -> bool:
    if not TOKEN or not CHAT_ID:
        log("ℹ️ BOT_TOKEN або ADMIN_CHAT_ID не встановлені — сповіщення пропущено")
        return False
    data = {
        "chat_id": CHAT_ID,
        "text": f"<b>{BOT_PREFIX}</b>\n{text}",
        "parse_mode": "HTML",
        "disable_notification": silent,
    }
    requests.post(API_URL.format(token=TOKEN), data=data, timeout=TIMEOUT)
    return True


def send_error(text: str) -> bool:
    try:
        sent = _post(text, silent=False)
        if sent:
            log(f"⚠️ Відправлено помилку: {text}")
        return sent
    except Exception as e:
        log(f"❌ Помилка при відправленні error: {e}")
        return False


def send_message(text: str, silent: bool = False) -> bool:
    try:
        sent = _post(text, silent=silent)
        if sent:
            log(f"Відправлено {'беззвучне ' if silent else ''}повідомлення: {text}")
        return sent
    except Exception as e:
        log(f"❌ Помилка при відправленні повідомлення: {e}")
        return False
