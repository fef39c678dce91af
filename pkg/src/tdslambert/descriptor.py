"""Plain-text system descriptors.

One system per file, one ``key = value`` entry per logical line.  Values are
Python literals (numbers, strings, nested lists); a value may continue over
several lines while its brackets are open.  ``#`` starts a comment.

::

    name = "example"
    order = 2
    A = [[0, 1],
         [-1, 0.1]]
    A_d = [[0, 0], [0, 0]]
    B = [[0], [1]]
    h = 0.2

Either ``A_d`` or the pair ``b``, ``c`` (with ``A_d = b c^T``) must be given,
not both.  ``B`` is the optional input matrix used for controller design.
"""

import ast
import io
import math
from dataclasses import dataclass

import numpy as np

from .systems import RankOneDelaySystem, TimeDelaySystem

KEYS = ("name", "order", "A", "A_d", "b", "c", "h", "B")


class DescriptorError(ValueError):
    """Malformed or inconsistent descriptor."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class SystemDescriptor:
    name: str
    order: int
    A: np.ndarray
    h: float
    A_d: np.ndarray = None
    b: np.ndarray = None
    c: np.ndarray = None
    B: np.ndarray = None

    def __post_init__(self):
        n = self.order
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise DescriptorError(f"order must be a positive integer, got {n!r}")
        A = _matrix(self.A, "A", n, n)
        has_ad = self.A_d is not None
        has_bc = self.b is not None or self.c is not None
        if has_ad == has_bc:
            raise DescriptorError("give exactly one of A_d or the pair b, c")
        if has_bc and (self.b is None or self.c is None):
            raise DescriptorError("b and c must be given together")
        try:
            h = float(self.h)
        except (TypeError, ValueError):
            raise DescriptorError(f"h must be a number, got {self.h!r}") from None
        if not (h > 0 and math.isfinite(h)):
            raise DescriptorError(f"h must be positive and finite, got {self.h!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "order", int(n))
        if has_ad:
            object.__setattr__(self, "A_d", _matrix(self.A_d, "A_d", n, n))
        else:
            object.__setattr__(self, "b", _vector(self.b, "b", n))
            object.__setattr__(self, "c", _vector(self.c, "c", n))
        if self.B is not None:
            B = np.asarray(_float_array(self.B, "B"))
            if B.ndim == 1:
                B = B.reshape(-1, 1)
            if B.ndim != 2 or B.shape[0] != n:
                raise DescriptorError(f"B must have {n} rows, got shape {B.shape}")
            object.__setattr__(self, "B", B)

    def __eq__(self, other):
        if not isinstance(other, SystemDescriptor):
            return NotImplemented
        if (self.name, self.order, self.h) != (other.name, other.order, other.h):
            return False
        for key in ("A", "A_d", "b", "c", "B"):
            x, y = getattr(self, key), getattr(other, key)
            if (x is None) != (y is None):
                return False
            if x is not None and (x.shape != y.shape or not np.array_equal(x, y)):
                return False
        return True

    __hash__ = None

    @property
    def delayed(self):
        """The delayed matrix, built from ``b c^T`` when given in factored form."""
        return self.A_d if self.A_d is not None else np.outer(self.b, self.c)

    def system(self):
        """TimeDelaySystem (open loop)."""
        return TimeDelaySystem(self.A, self.delayed, self.h)

    def rank_one(self):
        """RankOneDelaySystem; only for descriptors given by ``b`` and ``c``."""
        if self.b is None:
            raise DescriptorError("descriptor has A_d, not the pair b, c")
        return RankOneDelaySystem(self.A, self.b, self.c, self.h)


def _float_array(value, key):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise DescriptorError(f"{key} is not a numeric array literal") from None
    if not np.all(np.isfinite(arr)):
        raise DescriptorError(f"{key} has non-finite entries")
    return arr


def _matrix(value, key, rows, cols):
    arr = _float_array(value, key)
    if arr.shape != (rows, cols):
        raise DescriptorError(f"{key} must be {rows}x{cols}, got shape {arr.shape}")
    return arr


def _vector(value, key, n):
    arr = _float_array(value, key).reshape(-1)
    if arr.size != n:
        raise DescriptorError(f"{key} must have {n} entries, got {arr.size}")
    return arr


def _logical_lines(text):
    """Yield ``(line_number, key, value_text)`` with bracket continuation."""
    buf, start, depth = "", None, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, delta = _scan(raw)
        if not line.strip() and depth == 0:
            continue
        if depth == 0:
            buf, start = line, lineno
        else:
            buf += " " + line.strip()
        depth += delta
        if depth < 0:
            raise DescriptorError("unbalanced closing bracket", start)
        if depth == 0:
            if "=" not in buf:
                raise DescriptorError(f"expected 'key = value', got {buf.strip()!r}", start)
            key, value = buf.split("=", 1)
            yield start, key.strip(), value.strip()
    if depth:
        raise DescriptorError("unterminated bracket", start)


def _scan(line):
    """Drop a trailing comment; return the rest and its net bracket depth.

    Quoted text is skipped for both purposes.
    """
    quote, escaped, depth = None, False, 0
    for i, ch in enumerate(line):
        if quote:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i], depth
        elif ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
    return line, depth


def loads(text):
    """Parse descriptor text.

    Raises
    ------
    DescriptorError
        On syntax errors, unknown or repeated keys, missing fields or
        inconsistent dimensions.
    """
    fields = {}
    for lineno, key, value in _logical_lines(text):
        if key not in KEYS:
            raise DescriptorError(f"unknown key {key!r}", lineno)
        if key in fields:
            raise DescriptorError(f"repeated key {key!r}", lineno)
        try:
            fields[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            raise DescriptorError(f"cannot parse value of {key!r}: {value!r}", lineno) from None
    for key in ("order", "A", "h"):
        if key not in fields:
            raise DescriptorError(f"missing required key {key!r}")
    fields.setdefault("name", "")
    if not isinstance(fields["name"], str):
        raise DescriptorError("name must be a quoted string")
    return SystemDescriptor(**fields)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _literal(arr):
    return repr(np.asarray(arr, dtype=float).tolist())


def dumps(desc):
    """Descriptor text that `loads` maps back to an equal descriptor."""
    out = io.StringIO()
    out.write(f"name = {desc.name!r}\n")
    out.write(f"order = {desc.order}\n")
    out.write(f"A = {_literal(desc.A)}\n")
    if desc.A_d is not None:
        out.write(f"A_d = {_literal(desc.A_d)}\n")
    else:
        out.write(f"b = {_literal(desc.b)}\n")
        out.write(f"c = {_literal(desc.c)}\n")
    if desc.B is not None:
        out.write(f"B = {_literal(desc.B)}\n")
    out.write(f"h = {desc.h!r}\n")
    return out.getvalue()


def dump(desc, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(desc))
