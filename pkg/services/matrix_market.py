import io
import logging
from pathlib import Path
from typing import List, TextIO, Union

import numpy as np
import scipy.io
import scipy.sparse as sp

from services.sparse import CsrMatrix, canonical, csr_from_triplets
from utils.exceptions.io import InputOutputException, MatrixMarketException
from utils.exceptions.numerics import SparseFormatException

logger = logging.getLogger(__name__)

BANNER = "%%matrixmarket"
SUPPORTED_FIELDS = {"real", "integer", "pattern"}
SUPPORTED_SYMMETRY = {"general", "symmetric", "skew-symmetric"}

PathLike = Union[str, Path]


def parse_matrix_market(stream: TextIO) -> CsrMatrix:
    """
    Parse an ASCII coordinate Matrix Market stream (1-based indices).

    Symmetric and skew-symmetric files are expanded to their full pattern.

    Raises:
        MatrixMarketException: malformed banner, size line or entry (line-numbered)
    """
    lines = stream.read().splitlines()
    if not lines:
        raise MatrixMarketException("empty file", line_number=1)

    banner = lines[0].split()
    if len(banner) < 5 or banner[0].lower() != BANNER:
        raise MatrixMarketException(
            "expected '%%MatrixMarket matrix coordinate <field> <symmetry>' banner",
            line_number=1,
        )
    obj, fmt, field, symmetry = (token.lower() for token in banner[1:5])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketException(f"unsupported format '{obj} {fmt}'", line_number=1)
    if field not in SUPPORTED_FIELDS:
        raise MatrixMarketException(f"unsupported field '{field}'", line_number=1)
    if symmetry not in SUPPORTED_SYMMETRY:
        raise MatrixMarketException(f"unsupported symmetry '{symmetry}'", line_number=1)

    line_number = 1
    size_line = None
    for line_number in range(2, len(lines) + 1):
        text = lines[line_number - 1].strip()
        if text and not text.startswith("%"):
            size_line = text
            break
    if size_line is None:
        raise MatrixMarketException("missing size line", line_number=len(lines) + 1)
    try:
        n_rows, n_cols, nnz = (int(token) for token in size_line.split())
    except ValueError:
        raise MatrixMarketException(f"expected 'rows cols nnz', got '{size_line}'", line_number=line_number)
    if n_rows < 0 or n_cols < 0 or nnz < 0:
        raise MatrixMarketException("negative dimension in size line", line_number=line_number)

    width = 2 if field == "pattern" else 3
    entries: List[tuple] = []
    for number in range(line_number + 1, len(lines) + 1):
        text = lines[number - 1].strip()
        if not text or text.startswith("%"):
            continue
        tokens = text.split()
        if len(tokens) != width:
            raise MatrixMarketException(f"expected {width} fields, got {len(tokens)}", line_number=number)
        try:
            i, j = int(tokens[0]) - 1, int(tokens[1]) - 1
            value = 1.0 if field == "pattern" else float(tokens[2])
        except ValueError:
            raise MatrixMarketException(f"cannot parse entry '{text}'", line_number=number)
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise MatrixMarketException(f"index ({i + 1}, {j + 1}) outside {n_rows}x{n_cols}", line_number=number)
        entries.append((i, j, value))
        if symmetry != "general" and i != j:
            entries.append((j, i, -value if symmetry == "skew-symmetric" else value))
        if len(entries) > 2 * nnz:
            raise MatrixMarketException(f"more entries than the declared {nnz}", line_number=number)

    if symmetry == "general" and len(entries) != nnz:
        raise MatrixMarketException(f"declared {nnz} entries, found {len(entries)}", line_number=len(lines))

    try:
        return csr_from_triplets(n_rows, n_cols, entries)
    except SparseFormatException as e:
        raise MatrixMarketException(e.message, original_exception=e)


def read_matrix_market(path: PathLike) -> CsrMatrix:
    path = Path(path)
    try:
        with path.open("r") as handle:
            A = parse_matrix_market(handle)
    except OSError as e:
        raise InputOutputException(f"cannot read {path}: {e}", path=path, original_exception=e)
    logger.debug("Read Matrix Market file",
                 extra={"amg_data": {"path": str(path), "shape": list(A.shape), "nnz": int(A.nnz)}})
    return A


def format_matrix_market(A: CsrMatrix, comment: str = "") -> str:
    """Serialize as 'coordinate real general' with round-trip precision"""
    buffer = io.BytesIO()
    scipy.io.mmwrite(buffer, sp.coo_matrix(canonical(A)), comment=comment,
                     field="real", precision=17, symmetry="general")
    return buffer.getvalue().decode("ascii")


def write_matrix_market(path: PathLike, A: CsrMatrix, comment: str = "") -> None:
    path = Path(path)
    try:
        path.write_text(format_matrix_market(A, comment))
    except OSError as e:
        raise InputOutputException(f"cannot write {path}: {e}", path=path, original_exception=e)


def write_vector(path: PathLike, x: np.ndarray) -> None:
    """One value per line at full precision"""
    try:
        np.savetxt(path, np.asarray(x, dtype=np.float64), fmt="%.17g")
    except OSError as e:
        raise InputOutputException(f"cannot write {path}: {e}", path=path, original_exception=e)


def read_vector(path: PathLike) -> np.ndarray:
    try:
        return np.atleast_1d(np.loadtxt(path, dtype=np.float64))
    except (OSError, ValueError) as e:
        raise InputOutputException(f"cannot read vector from {path}: {e}", path=path, original_exception=e)
