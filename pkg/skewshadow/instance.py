"""Instance files: one pseudotrajectory, replayable bit for bit.

Format (text, version 1)::

    skewshadow-instance v1 lambda0=<float> lambda1=<float> d=<float>
    <bit> <r_1>
    ...
    <bit> <r_N>

Floats are written with 17 significant digits, which round-trips every
double exactly.
"""

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from skewshadow.model import ModelParams, validate
from skewshadow.utils.exceptions import InstanceFormatError, ParameterError
from skewshadow.walk import PseudoOrbit, WalkPath, make_pseudo_orbit, walk_from_symbols

MAGIC = "skewshadow-instance"
VERSION = "v1"
_HEADER_KEYS = ("lambda0", "lambda1", "d")


@dataclass(frozen=True, eq=False)
class Instance:
    """Parameters, walk and pseudo-orbit read from (or written to) a file."""

    params: ModelParams
    walk: WalkPath
    pseudo: PseudoOrbit

    @property
    def scale(self) -> float:
        return self.pseudo.scale

    @property
    def length(self) -> int:
        return self.walk.length

    @classmethod
    def from_arrays(
        cls, params: ModelParams, bits: Sequence[int], noise: Sequence[float], d: float
    ) -> "Instance":
        walk = walk_from_symbols(params, bits)
        return cls(params=params, walk=walk, pseudo=make_pseudo_orbit(walk, noise, d))


def format_float(value: float) -> str:
    return f"{value:.17g}"


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", suffix=".tmp", dir=path.parent
    )
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def dumps_instance(instance: Instance) -> str:
    params = instance.params
    lines = [
        f"{MAGIC} {VERSION} lambda0={format_float(params.lambda0)} "
        f"lambda1={format_float(params.lambda1)} d={format_float(instance.scale)}"
    ]
    for bit, r in zip(instance.walk.symbols, instance.pseudo.noise):
        lines.append(f"{int(bit)} {format_float(float(r))}")
    return "\n".join(lines) + "\n"


def write_instance(path: Union[str, Path], instance: Instance) -> None:
    atomic_write(path, dumps_instance(instance))


def _parse_header(line: str, path: str) -> Dict[str, float]:
    tokens = line.split()
    if len(tokens) < 2 or tokens[0] != MAGIC:
        raise InstanceFormatError(
            f"expected '{MAGIC} {VERSION}' header", line_number=1, path=path
        )
    if tokens[1] != VERSION:
        raise InstanceFormatError(
            f"unsupported instance version {tokens[1]!r}", line_number=1, path=path
        )

    fields: Dict[str, float] = {}
    for token in tokens[2:]:
        key, sep, raw = token.partition("=")
        if not sep or key not in _HEADER_KEYS or key in fields:
            raise InstanceFormatError(
                f"unexpected header field {token!r}", line_number=1, path=path
            )
        try:
            fields[key] = float(raw)
        except ValueError:
            raise InstanceFormatError(
                f"{key} is not a number: {raw!r}", line_number=1, path=path
            )

    missing = [key for key in _HEADER_KEYS if key not in fields]
    if missing:
        raise InstanceFormatError(
            f"header is missing {', '.join(missing)}", line_number=1, path=path
        )
    return fields


def loads_instance(text: str, path: str = "<string>") -> Instance:
    """Parse instance text.

    Raises:
        InstanceFormatError: with the 1-based line number of the first problem.
    """
    lines = text.splitlines()
    if not lines:
        raise InstanceFormatError("empty instance file", line_number=1, path=path)

    header = _parse_header(lines[0], path)
    try:
        params = validate(header["lambda0"], header["lambda1"])
    except ParameterError as e:
        raise InstanceFormatError(e.message, line_number=1, path=path)
    d = header["d"]
    if not (math.isfinite(d) and d >= 0):
        raise InstanceFormatError(
            f"d must be finite and >= 0, got {d}", line_number=1, path=path
        )

    bits: List[int] = []
    noise: List[float] = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstanceFormatError(
                f"expected '<bit> <r>', got {len(parts)} fields",
                line_number=number,
                path=path,
            )
        if parts[0] not in ("0", "1"):
            raise InstanceFormatError(
                f"bit must be 0 or 1, got {parts[0]!r}", line_number=number, path=path
            )
        try:
            r = float(parts[1])
        except ValueError:
            raise InstanceFormatError(
                f"noise value is not a number: {parts[1]!r}",
                line_number=number,
                path=path,
            )
        if not (math.isfinite(r) and abs(r) <= 1.0):
            raise InstanceFormatError(
                f"noise value {r} outside [-1, 1]", line_number=number, path=path
            )
        bits.append(int(parts[0]))
        noise.append(r)

    return Instance.from_arrays(
        params, np.array(bits, dtype=np.int8), np.array(noise, dtype=float), d
    )


def read_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InstanceFormatError(f"cannot read instance file: {e}", path=str(path))
    return loads_instance(text, str(path))
