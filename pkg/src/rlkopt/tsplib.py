"""Parsing and serialization of TSP instances and tours.

Supports the classic TSPLIB95 text format (EUC_2D, CEIL_2D, GEO, ATT and
EXPLICIT weights) plus a small plain-text format for instances with time
windows.  All distances are rounded to 64-bit integers at parse time using
the exact TSPLIB95 rounding rules, so published best-known values are
reproducible bit for bit.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

METRICS = ("EUC_2D", "CEIL_2D", "GEO", "ATT", "EXPLICIT")
_SUPPORTED_WEIGHT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_DIAG_ROW")


class ParseError(ValueError):
    """Raised for malformed instance or tour files.  Carries a line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class RawInstance:
    """A parsed instance: coordinates or an explicit cost matrix.

    Exactly one of `coords` / `matrix` is set, matching `metric`.
    """

    name: str
    dimension: int
    metric: str
    coords: np.ndarray | None = None   # (n, 2) float64
    matrix: np.ndarray | None = None   # (n, n) int64, zero diagonal
    comment: str = ""

    def __post_init__(self):
        if self.dimension < 3:
            raise ParseError(f"dimension must be >= 3, got {self.dimension}")
        if self.metric not in METRICS:
            raise ParseError(f"unsupported metric {self.metric!r}")
        if (self.coords is None) == (self.matrix is None):
            raise ParseError("exactly one of coords/matrix must be present")
        if self.metric == "EXPLICIT":
            if self.matrix is None:
                raise ParseError("EXPLICIT metric requires a matrix")
            n = self.dimension
            if self.matrix.shape != (n, n):
                raise ParseError(f"matrix shape {self.matrix.shape} != ({n}, {n})")
            if np.any(np.diag(self.matrix) != 0):
                raise ParseError("EXPLICIT matrix must have zero diagonal")
        elif self.coords is None or self.coords.shape != (self.dimension, 2):
            raise ParseError("coordinate metrics require n x 2 coords")


@dataclass
class TimeWindowData:
    """Per-city time windows [a_i, b_i] and service times; depot is city 1."""

    windows: np.ndarray            # (n, 2) int64
    service: np.ndarray            # (n,) int64
    depot: int = 1                 # 1-based, fixed

    def __post_init__(self):
        if np.any(self.windows[:, 0] > self.windows[:, 1]):
            raise ParseError("time window with a_i > b_i")
        if np.any(self.service < 0):
            raise ParseError("negative service time")
        d = self.depot - 1
        if not (self.windows[d, 0] <= 0 <= self.windows[d, 1]):
            raise ParseError("depot window must contain time 0")


def _nint(x):
    return int(x + 0.5)


def euc_2d(a, b):
    """TSPLIB EUC_2D: nearest-integer Euclidean distance."""
    return _nint(math.hypot(a[0] - b[0], a[1] - b[1]))


def ceil_2d(a, b):
    return int(math.ceil(math.hypot(a[0] - b[0], a[1] - b[1])))


def _geo_radians(x):
    deg = int(x)
    minutes = x - deg
    return math.pi * (deg + 5.0 * minutes / 3.0) / 180.0


def geo(a, b):
    """TSPLIB GEO: geographical distance in kilometers on an idealized sphere."""
    rrr = 6378.388
    lat_i, lon_i = _geo_radians(a[0]), _geo_radians(a[1])
    lat_j, lon_j = _geo_radians(b[0]), _geo_radians(b[1])
    q1 = math.cos(lon_i - lon_j)
    q2 = math.cos(lat_i - lat_j)
    q3 = math.cos(lat_i + lat_j)
    return int(rrr * math.acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0)


def att(a, b):
    """TSPLIB ATT pseudo-Euclidean distance."""
    r = math.sqrt(((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) / 10.0)
    t = _nint(r)
    return t + 1 if t < r else t


_DIST_FUNCS = {"EUC_2D": euc_2d, "CEIL_2D": ceil_2d, "GEO": geo, "ATT": att}


def distance(metric, a, b):
    """Rounded distance between two coordinate pairs under `metric`."""
    return _DIST_FUNCS[metric](a, b)


def cost_matrix(raw: RawInstance) -> np.ndarray:
    """Full symmetric int64 cost matrix of a parsed instance."""
    n = raw.dimension
    if raw.matrix is not None:
        return raw.matrix
    if raw.metric == "EUC_2D":
        d = raw.coords[:, None, :] - raw.coords[None, :, :]
        m = np.floor(np.hypot(d[..., 0], d[..., 1]) + 0.5).astype(np.int64)
    elif raw.metric == "CEIL_2D":
        d = raw.coords[:, None, :] - raw.coords[None, :, :]
        m = np.ceil(np.hypot(d[..., 0], d[..., 1]) - 1e-9).astype(np.int64)
    else:
        f = _DIST_FUNCS[raw.metric]
        m = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                m[i, j] = m[j, i] = f(raw.coords[i], raw.coords[j])
    np.fill_diagonal(m, 0)
    return m


def _header_value(line):
    return line.split(":", 1)[1].strip() if ":" in line else ""


def parse_tsplib(text: str) -> RawInstance:
    """Parse a TSPLIB95 .tsp file body into a RawInstance."""
    name = ""
    comment_parts = []
    dimension = None
    metric = None
    weight_format = "FULL_MATRIX"
    coords = None
    matrix = None

    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line == "EOF":
            continue
        keyword = line.split(":", 1)[0].strip().upper()
        if keyword == "NAME":
            name = _header_value(line)
        elif keyword == "COMMENT":
            comment_parts.append(_header_value(line))
        elif keyword == "TYPE":
            value = _header_value(line).upper()
            if value not in ("TSP", "ATSP"):
                raise ParseError(f"unsupported TYPE {value!r}", i)
        elif keyword == "DIMENSION":
            try:
                dimension = int(_header_value(line))
            except ValueError:
                raise ParseError("DIMENSION is not an integer", i) from None
        elif keyword == "EDGE_WEIGHT_TYPE":
            metric = _header_value(line).upper()
            if metric not in METRICS:
                raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {metric!r}", i)
        elif keyword == "EDGE_WEIGHT_FORMAT":
            weight_format = _header_value(line).upper()
            if weight_format not in _SUPPORTED_WEIGHT_FORMATS:
                raise ParseError(f"unsupported EDGE_WEIGHT_FORMAT {weight_format!r}", i)
        elif keyword == "NODE_COORD_SECTION":
            if dimension is None:
                raise ParseError("NODE_COORD_SECTION before DIMENSION", i)
            coords = np.zeros((dimension, 2), dtype=np.float64)
            seen = 0
            while i < len(lines) and seen < dimension:
                parts = lines[i].split()
                i += 1
                if not parts:
                    continue
                if len(parts) < 3:
                    raise ParseError("node line needs index and two coordinates", i)
                try:
                    idx = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError:
                    raise ParseError("malformed node coordinate line", i) from None
                if not (1 <= idx <= dimension):
                    raise ParseError(f"node index {idx} out of range", i)
                coords[idx - 1] = (x, y)
                seen += 1
            if seen != dimension:
                raise ParseError(f"expected {dimension} coordinate lines, got {seen}", i)
        elif keyword == "EDGE_WEIGHT_SECTION":
            if dimension is None:
                raise ParseError("EDGE_WEIGHT_SECTION before DIMENSION", i)
            values = []
            while i < len(lines):
                stripped = lines[i].strip()
                if stripped and stripped.split(":", 1)[0].strip().upper() in (
                    "EOF", "DISPLAY_DATA_SECTION", "NODE_COORD_SECTION",
                ):
                    break
                for token in stripped.split():
                    try:
                        values.append(int(float(token)))
                    except ValueError:
                        raise ParseError(f"bad weight token {token!r}", i + 1) from None
                i += 1
            matrix = _weights_to_matrix(values, dimension, weight_format, i)
        elif keyword in ("DISPLAY_DATA_SECTION",):
            while i < len(lines) and lines[i].strip() != "EOF":
                i += 1
        elif keyword in ("DISPLAY_DATA_TYPE", "NODE_COORD_TYPE"):
            pass
        else:
            warnings.warn(f"ignoring unknown TSPLIB keyword {keyword!r}")

    if dimension is None:
        raise ParseError("missing DIMENSION")
    if metric is None:
        metric = "EXPLICIT" if matrix is not None else "EUC_2D"
    if metric == "EXPLICIT":
        if matrix is None:
            raise ParseError("EXPLICIT metric without EDGE_WEIGHT_SECTION")
        coords = None
    else:
        if coords is None:
            raise ParseError("coordinate metric without NODE_COORD_SECTION")
        matrix = None
    return RawInstance(name=name, dimension=dimension, metric=metric,
                       coords=coords, matrix=matrix, comment="; ".join(comment_parts))


def _weights_to_matrix(values, n, weight_format, line):
    m = np.zeros((n, n), dtype=np.int64)
    if weight_format == "FULL_MATRIX":
        if len(values) != n * n:
            raise ParseError(f"FULL_MATRIX expects {n * n} values, got {len(values)}", line)
        m = np.array(values, dtype=np.int64).reshape(n, n)
        m = np.minimum(m, m.T)  # symmetrize defensively; TSPLIB TSP matrices are symmetric
    elif weight_format == "UPPER_ROW":
        expect = n * (n - 1) // 2
        if len(values) != expect:
            raise ParseError(f"UPPER_ROW expects {expect} values, got {len(values)}", line)
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                m[i, j] = m[j, i] = values[k]
                k += 1
    else:  # LOWER_DIAG_ROW
        expect = n * (n + 1) // 2
        if len(values) != expect:
            raise ParseError(f"LOWER_DIAG_ROW expects {expect} values, got {len(values)}", line)
        k = 0
        for i in range(n):
            for j in range(i + 1):
                m[i, j] = m[j, i] = values[k]
                k += 1
    if np.any(np.diag(m) != 0):
        raise ParseError("explicit matrix has nonzero diagonal", line)
    if np.any(m < 0):
        raise ParseError("negative edge weight", line)
    return m


def parse_tsptw(text: str) -> tuple[RawInstance, TimeWindowData]:
    """Parse the plain-text time-window format (documented in the README).

    Layout: optional '#' comment lines; first value n; then n coordinate
    lines "x y" (or n matrix rows of n integers); then n window lines
    "a b [service]".  City 1 is the depot.
    """
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            rows.append((lineno, stripped.split()))

    if not rows:
        raise ParseError("empty time-window instance")
    lineno, head = rows[0]
    try:
        n = int(head[0])
    except ValueError:
        raise ParseError("first value must be the city count", lineno) from None
    if n < 3:
        raise ParseError(f"need at least 3 cities, got {n}", lineno)

    body = rows[1:]
    if len(body) < 2 * n:
        raise ParseError(f"expected {2 * n} data lines after the city count, got {len(body)}")

    # Coordinates vs matrix: matrix rows carry n values, coordinate rows 2.
    is_matrix = len(body[0][1]) == n and n != 2
    if is_matrix:
        matrix = np.zeros((n, n), dtype=np.int64)
        for r in range(n):
            lineno, parts = body[r]
            if len(parts) != n:
                raise ParseError(f"matrix row needs {n} values", lineno)
            matrix[r] = [int(float(v)) for v in parts]
        raw = RawInstance(name="tsptw", dimension=n, metric="EXPLICIT", matrix=matrix)
    else:
        coords = np.zeros((n, 2), dtype=np.float64)
        for r in range(n):
            lineno, parts = body[r]
            if len(parts) < 2:
                raise ParseError("coordinate row needs x and y", lineno)
            coords[r] = (float(parts[0]), float(parts[1]))
        raw = RawInstance(name="tsptw", dimension=n, metric="EUC_2D", coords=coords)

    window_rows = body[n:]
    if len(window_rows) != n:
        raise ParseError(f"expected {n} time-window lines, got {len(window_rows)}")
    windows = np.zeros((n, 2), dtype=np.int64)
    service = np.zeros(n, dtype=np.int64)
    for r in range(n):
        lineno, parts = window_rows[r]
        if len(parts) < 2:
            raise ParseError("time-window row needs a and b", lineno)
        a, b = int(float(parts[0])), int(float(parts[1]))
        if a > b:
            raise ParseError(f"inverted window ({a}, {b}) for city {r + 1}", lineno)
        windows[r] = (a, b)
        if len(parts) >= 3:
            service[r] = int(float(parts[2]))
    return raw, TimeWindowData(windows=windows, service=service)


def write_tour(tour, instance: RawInstance | None = None, comment: str = "") -> str:
    """Serialize a tour as TSPLIB TOUR text (1-based cities, -1 terminated)."""
    order = getattr(tour, "order", tour)
    lines = []
    name = instance.name if instance is not None else "tour"
    lines.append(f"NAME : {name}.tour")
    if comment:
        lines.append(f"COMMENT : {comment}")
    lines.append("TYPE : TOUR")
    lines.append(f"DIMENSION : {len(order)}")
    lines.append("TOUR_SECTION")
    lines.extend(str(int(c) + 1) for c in order)
    lines.append("-1")
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def parse_tour(text: str) -> list[int]:
    """Parse a TSPLIB TOUR file back into a 0-based city list."""
    cities = []
    in_section = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.upper().startswith("TOUR_SECTION"):
            in_section = True
            continue
        if not in_section or not stripped or stripped == "EOF":
            continue
        for token in stripped.split():
            if token == "-1":
                in_section = False
                break
            try:
                cities.append(int(token) - 1)
            except ValueError:
                raise ParseError(f"bad tour token {token!r}", lineno) from None
    if not cities:
        raise ParseError("no TOUR_SECTION cities found")
    return cities
