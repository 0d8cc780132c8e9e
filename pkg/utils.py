import os
import re
import json
from functools import lru_cache
from typing import Optional, Any, Dict

# Default config file path
CONFIG = os.environ.get("PVKIT_CONFIG", "pvkit.json")

_UNIT_MS = {"d": 86_400_000, "h": 3_600_000, "m": 60_000, "s": 1_000, "ms": 1}


class TimeParser:
    """
    Handles conversion between human-readable durations and simulation ticks (milliseconds).
    """

    def dehumanize(self, text: str | int) -> Optional[int]:
        """
        Converts a human-readable duration (e.g., "1h 30m", "120s", "250ms") into milliseconds.
        A bare number is read as milliseconds.

        Args:
            text (str | int): Duration string to parse.

        Returns:
            int | None: Total milliseconds represented by the string, or None on failure.
        """
        try:

            @lru_cache
            def wrapper(text: str) -> int:
                text = str(text).strip()
                if not text:
                    raise ValueError("Empty duration")
                if text.isdigit():
                    return int(text)
                total = 0
                position = 0
                for match in re.finditer(r"\s*(\d+)\s*(ms|d|h|m|s)", text, re.IGNORECASE):
                    if match.start() != position:
                        raise ValueError(f"Invalid format: '{text}'")
                    total += int(match.group(1)) * _UNIT_MS[match.group(2).lower()]
                    position = match.end()
                if position != len(text) or position == 0:
                    raise ValueError(f"Invalid format: '{text}'")
                return total

            return wrapper(str(text))
        except ValueError:
            return None
        except TypeError:
            return None

    def humanize(self, ticks: Optional[str | int]) -> Optional[str]:
        """
        Converts milliseconds into a human-readable format (e.g., "2m0s").

        Args:
            ticks (int or str): Number of milliseconds.

        Returns:
            str: Human-readable string.
        """
        try:
            remaining = int(ticks)  # type: ignore[arg-type]
            parts = ""
            for unit in ("d", "h", "m", "s"):
                amount, remaining = divmod(remaining, _UNIT_MS[unit])
                if amount:
                    parts += f"{amount}{unit}"
            if remaining or not parts:
                parts += f"{remaining}ms"
            return parts
        except ValueError:
            return None
        except TypeError:
            return None


def hex_dump(data: bytes, width: int = 16, indent: str = "") -> str:
    """
    Renders bytes as offset-prefixed hex rows.

    Args:
        data (bytes): Bytes to render.
        width (int): Bytes per row.
        indent (str): Prefix for every row.

    Returns:
        str: The dump, one row per line (empty string for empty input).
    """
    rows = []
    for offset in range(0, len(data), width):
        chunk = data[offset : offset + width]
        rows.append(f"{indent}{offset:06x}  {chunk.hex(' ')}")
    return "\n".join(rows)


class ConfigManager:
    def __init__(self) -> None:
        pass

    @staticmethod
    def get(config: str, default: Any = "default") -> Any:
        if os.path.exists(CONFIG):
            with open(CONFIG, "r") as f:
                try:
                    config = json.load(f).get(config, default)
                    return config
                except json.JSONDecodeError:
                    return default
        return default

    @staticmethod
    def load_config() -> Dict[str, Any] | Any:
        if not os.path.exists(CONFIG):
            return {}
        with open(CONFIG, "r") as f:
            return json.load(f)

    @staticmethod
    def save_config(data: Dict[str, Any]) -> None:
        config = ConfigManager.load_config()  # Load existing config
        config.update(data)  # Merge new values
        with open(CONFIG, "w") as f:
            json.dump(config, f, indent=4)
