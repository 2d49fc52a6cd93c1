"""Plain-text file formats.

Dataset files hold one 1-based category per line, optionally preceded by a
``# Y=<int>`` header; without it Y is the largest value seen. Pmf files hold
one real per line. Problem and config files are ``key = value`` lines with
``#`` comments; list values are comma separated and may be wrapped in
brackets.
"""

from __future__ import annotations

import re
from pathlib import Path

from .core import ObservationDataset, Pmf
from .errors import InputError

_HEADER = re.compile(r"^#\s*Y\s*=\s*(\d+)\s*$")


def parse_dataset(text: str) -> ObservationDataset:
    num_categories = None
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m and not values:
                num_categories = int(m.group(1))
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise InputError(f"line {lineno}: expected an integer category, got {line!r}") from None
    if not values:
        raise InputError("dataset file contains no observations")
    if num_categories is None:
        num_categories = max(2, max(values))
    return ObservationDataset(tuple(values), num_categories)


def read_dataset(path) -> ObservationDataset:
    return parse_dataset(_read_text(path))


def format_dataset(dataset: ObservationDataset) -> str:
    lines = [f"# Y={dataset.num_categories}"] + [str(v) for v in dataset.values]
    return "\n".join(lines) + "\n"


def write_dataset(dataset: ObservationDataset, path):
    Path(path).write_text(format_dataset(dataset))


def parse_pmf(text: str) -> Pmf:
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise InputError(f"line {lineno}: expected a real number, got {line!r}") from None
    return Pmf.normalized(values, tol=1e-9)


def read_pmf(path) -> Pmf:
    return parse_pmf(_read_text(path))


def parse_keyvalue(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep or not key.strip():
            raise InputError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        out[key.strip().lower()] = value.strip().strip("\"'")
    return out


def read_keyvalue(path) -> dict[str, str]:
    return parse_keyvalue(_read_text(path))


def parse_list(value: str, kind=float) -> list:
    value = value.strip().strip("[]()")
    if not value:
        return []
    try:
        return [kind(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse {value!r} as a list of {kind.__name__}") from None


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
