import csv
import json
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# Environment variable to control CLI output mode
# İzin verilen değerler: 'plain' (default), 'json', 'rich'
OUTPUT_MODE_ENV = "IMEX_CLI_OUTPUT"

_console = Console()


def set_output_mode(mode: str) -> None:
    mode = (mode or "").lower().strip()
    if mode in {"plain", "json", "rich"}:
        os.environ[OUTPUT_MODE_ENV] = mode


def get_output_mode() -> str:
    return os.environ.get(OUTPUT_MODE_ENV, "plain").lower()


def format_number(value: Any) -> str:
    """17 anlamlı basamak; tam sayılar ve metinler olduğu gibi."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def to_jsonable(obj: Any) -> Any:
    """numpy türlerini ve NaN/inf değerlerini JSON'a uygun hale getir."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False)


def write_json(path: Union[str, Path], obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def print_table(title: str, columns: List[str], rows: List[Sequence[Any]], payload: Any = None) -> None:
    """Satırları mevcut çıktı moduna göre yazdır.
    - plain: sekmeyle ayrılmış başlık ve satırlar
    - json: payload (verilmemişse satırlardan sözlük listesi)
    - rich: Rich tablosu
    """
    mode = get_output_mode()

    if mode == "json":
        data = payload if payload is not None else [dict(zip(columns, r)) for r in rows]
        print(dumps(data))
    elif mode == "rich":
        table = Table(title=title, show_lines=False, header_style="bold cyan")
        for col in columns:
            table.add_column(col)
        for r in rows:
            table.add_row(*[format_number(v) for v in r])
        _console.print(table)
    else:
        if not rows:
            print(f"{title}: (empty)")
            return
        print("\t".join(columns))
        for r in rows:
            print("\t".join(format_number(v) for v in r))


def print_record(title: str, record: Dict[str, Any]) -> None:
    """Tek bir sonucu (anahtar: değer) yazdır."""
    mode = get_output_mode()

    if mode == "json":
        print(dumps(record))
    elif mode == "rich":
        lines = [f"[bold]{k}:[/] {format_number(v)}" for k, v in record.items() if not isinstance(v, (list, dict))]
        _console.print(Panel.fit("\n".join(lines), title=title, border_style="blue"))
    else:
        for k, v in record.items():
            if not isinstance(v, (list, dict)):
                print(f"{k}: {format_number(v)}")


def print_error(error: BaseException) -> None:
    """Yapılandırılmış hata özeti."""
    mode = get_output_mode()
    payload = {"error": type(error).__name__, "message": str(error)}
    notes = getattr(error, "__notes__", None)
    if notes:
        payload["notes"] = list(notes)

    if mode == "json":
        print(dumps(payload))
    elif mode == "rich":
        body = payload["message"] + ("\n" + "\n".join(notes) if notes else "")
        _console.print(Panel.fit(body, title=f"❌ {payload['error']}", border_style="red"))
    else:
        print(f"Error: {payload['error']}: {payload['message']}")
