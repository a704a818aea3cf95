import csv
import json
import os
from datetime import datetime, timedelta
from typing import Callable, Iterable, List, Optional, Sequence

import config


def get_logger(tag: str) -> Callable[[str], None]:
    """
    Повертає функцію log(message) з міткою модуля.

    Рядок має вигляд "2026-10-16 12:00:00 [tag] message": друкується і
    дописується у config.LOG_FILE. Помилки запису у файл ігноруються.
    """

    def log(message: str) -> None:
        timestamp = datetime.now(config.TIMEZONE).strftime("%Y-%m-%d %H:%M:%S")
        line = f"{timestamp} [{tag}] {message}"
        print(line)
        try:
            os.makedirs(os.path.dirname(config.LOG_FILE), exist_ok=True)
            with open(config.LOG_FILE, "a", encoding="utf-8") as f:
                f.write(line + "\n")
        except Exception:
            pass

    return log


def clean_log(log_file_path: str, days: int = 7) -> Optional[int]:
    """
    Залишає в лозі лише блоки, новіші за `days` днів.

    Блок починається рядком з timestamp і включає всі наступні рядки без нього
    (traceback тощо). Повертає кількість видалених рядків або None, якщо файла ще немає.
    """
    cutoff_time = datetime.now() - timedelta(days=days)
    kept_lines: List[str] = []
    removed_count = 0
    keep_block = False  # до першого timestamp нічого не зберігаємо

    try:
        with open(log_file_path, "r", encoding="utf-8-sig") as f:
            for line in f:
                try:
                    ts = datetime.strptime(line[:19], "%Y-%m-%d %H:%M:%S")
                    keep_block = ts >= cutoff_time
                except ValueError:
                    if not kept_lines:
                        removed_count += 1
                        continue

                if keep_block:
                    kept_lines.append(line)
                else:
                    removed_count += 1
    except FileNotFoundError:
        return None

    with open(log_file_path, "w", encoding="utf-8") as f:
        f.writelines(kept_lines)
    return removed_count


def write_json(path: str, data: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV за RFC-4180: рядок заголовка обов'язковий, роздільник рядків CRLF."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return path


def write_plot_data(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Колонки для gnuplot: коментар-заголовок і значення через пробіл."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# " + " ".join(header) + "\n")
        for row in rows:
            f.write(" ".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")
    return path


def delete_file(path: str) -> bool:
    """
    Видаляє файл результатів, якщо він існує.

    Returns:
        True якщо файл був видалений, False якщо файла не було
    """
    if os.path.exists(path):
        os.remove(path)
        return True
    return False
