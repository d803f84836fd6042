"""Deterministic CSV emission: comma separator, LF endings, headers always.

Floats are rendered with python repr (shortest round trip) so reruns of the
same experiment produce byte-identical files.
"""

import hashlib


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain float repr even for numpy scalars
    if isinstance(value, int):
        return str(int(value))
    if isinstance(value, str):
        return value
    # numpy scalars and anything numeric-like
    try:
        i = int(value)
        if i == value:
            return str(i)
    except (TypeError, ValueError):
        pass
    return repr(float(value))


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def read_csv(path):
    """Header list plus rows of strings (no type coercion)."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return [], []
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line]
    return header, rows


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
