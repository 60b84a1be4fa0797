"""Compressed sparse row matrices and Matrix Market coordinate-file I/O.

Only square coordinate-format matrices are supported. Symmetric, hermitian
and skew-symmetric files are expanded to full storage at load time and
duplicate coordinate entries are summed, following the exchange-format
conventions. Matrices are immutable after assembly.
"""

import numpy as np

from . import _kernels

_FIELDS = ("real", "complex", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric", "hermitian", "skew-symmetric")


class MatrixMarketError(ValueError):
    """Parse failure in a Matrix Market file; message carries the line number."""


def _err(lineno, msg):
    raise MatrixMarketError(f"line {lineno}: {msg}")


class SparseMatrix:
    """Square CSR matrix over float64 or complex128 scalars.

    Row pointers are nondecreasing, column indices strictly increasing
    within each row. matvec accumulates in index order, so single-threaded
    runs are reproducible bit for bit.
    """

    def __init__(self, n, row_ptr, col_idx, values, symmetry="general"):
        self.n = int(n)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        dtype = np.complex128 if np.iscomplexobj(values) else np.float64
        self.values = np.ascontiguousarray(values, dtype=dtype)
        self.symmetry = symmetry
        if self.row_ptr.shape[0] != self.n + 1:
            raise ValueError("row_ptr must have length n+1")
        if self.row_ptr[0] != 0 or self.row_ptr[-1] != self.col_idx.shape[0]:
            raise ValueError("row_ptr endpoints inconsistent with nnz")

    @property
    def nnz(self):
        return int(self.col_idx.shape[0])

    @property
    def is_complex(self):
        return self.values.dtype == np.complex128

    @classmethod
    def from_coo(cls, n, rows, cols, vals, symmetry="general"):
        """Assemble from coordinate triplets; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals)
        dtype = np.complex128 if np.iscomplexobj(vals) else np.float64
        vals = vals.astype(dtype)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.empty(rows.size, dtype=bool)
            keep[0] = True
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(keep)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        np.cumsum(row_ptr, out=row_ptr)
        return cls(n, row_ptr, cols, vals, symmetry)

    @classmethod
    def from_dense(cls, arr, tol=0.0):
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("from_dense needs a square 2-d array")
        rows, cols = np.nonzero(np.abs(arr) > tol)
        return cls.from_coo(arr.shape[0], rows, cols, arr[rows, cols])

    def to_dense(self):
        out = np.zeros((self.n, self.n), dtype=self.values.dtype)
        for i in range(self.n):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            out[i, self.col_idx[lo:hi]] = self.values[lo:hi]
        return out

    def matvec(self, x):
        """y = A x, deterministic row-major accumulation."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError(f"vector length {x.shape} does not match n={self.n}")
        dtype = np.result_type(self.values.dtype, x.dtype, np.float64)
        out = np.zeros(self.n, dtype=dtype)
        _kernels.csr_matvec(self.row_ptr, self.col_idx, self.values,
                            x.astype(dtype, copy=False), out)
        return out

    def shifted_matvec(self, sigma, x):
        """y = (A - sigma I) x without forming the shifted matrix."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError(f"vector length {x.shape} does not match n={self.n}")
        y = self.matvec(x)
        if sigma != 0:
            y = y - sigma * x
        return y

    def one_norm(self):
        """Maximum absolute column sum."""
        colsum = np.bincount(self.col_idx, weights=np.abs(self.values),
                             minlength=self.n)
        return float(colsum.max()) if self.n else 0.0

    def row(self, i):
        """(col indices, values) view of row i."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[lo:hi], self.values[lo:hi]


def _parse_header(line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
        _err(1, "malformed header, expected "
                "'%%MatrixMarket matrix coordinate <field> <symmetry>'")
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix":
        _err(1, f"unsupported object {obj!r}, only 'matrix'")
    if fmt != "coordinate":
        _err(1, f"unsupported format {fmt!r}, only 'coordinate' (array rejected)")
    if field not in _FIELDS:
        _err(1, f"unknown field {field!r}")
    if symmetry not in _SYMMETRIES:
        _err(1, f"unknown symmetry {symmetry!r}")
    return field, symmetry


def load_matrix_market(path):
    """Read a coordinate Matrix Market file into a SparseMatrix.

    Symmetric / hermitian / skew-symmetric storage is mirrored to full,
    1-based indices become 0-based, pattern entries get the value 1.0 and
    duplicate entries are summed. Raises MatrixMarketError naming the line
    of the first problem found.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        _err(1, "empty file")
    field, symmetry = _parse_header(lines[0])

    k = 1
    while k < len(lines) and (lines[k].startswith("%") or not lines[k].strip()):
        k += 1
    if k == len(lines):
        _err(len(lines), "missing size line")
    parts = lines[k].split()
    if len(parts) != 3:
        _err(k + 1, f"malformed size line {lines[k]!r}")
    try:
        nrows, ncols, nnz_decl = (int(p) for p in parts)
    except ValueError:
        _err(k + 1, f"malformed size line {lines[k]!r}")
    if nrows != ncols:
        _err(k + 1, f"matrix must be square (got {nrows}x{ncols})")
    n = nrows

    want_vals = 2 if field == "complex" else (0 if field == "pattern" else 1)
    rows, cols, vals = [], [], []
    seen = 0
    for lineno in range(k + 1, len(lines)):
        line = lines[lineno]
        if not line.strip() or line.startswith("%"):
            continue
        seen += 1
        if seen > nnz_decl:
            _err(lineno + 1, f"more than the declared {nnz_decl} entries")
        parts = line.split()
        if len(parts) != 2 + want_vals:
            _err(lineno + 1, f"expected {2 + want_vals} tokens, got {len(parts)}")
        try:
            i = int(parts[0])
            j = int(parts[1])
            if field == "pattern":
                v = 1.0
            elif field == "complex":
                v = complex(float(parts[2]), float(parts[3]))
            else:
                v = float(parts[2])
        except ValueError:
            _err(lineno + 1, f"malformed entry {line!r}")
        if not (1 <= i <= n and 1 <= j <= n):
            _err(lineno + 1, f"index ({i},{j}) out of range for n={n}")
        i -= 1
        j -= 1
        rows.append(i)
        cols.append(j)
        vals.append(v)
        if i != j and symmetry != "general":
            rows.append(j)
            cols.append(i)
            if symmetry == "symmetric":
                vals.append(v)
            elif symmetry == "hermitian":
                vals.append(np.conj(v))
            else:  # skew-symmetric
                vals.append(-v)
    if seen != nnz_decl:
        _err(len(lines), f"declared {nnz_decl} entries but found {seen}")

    if field == "complex":
        vals = np.asarray(vals, dtype=np.complex128)
    else:
        vals = np.asarray(vals, dtype=np.float64)
    return SparseMatrix.from_coo(n, rows, cols, vals, symmetry=symmetry)


def write_matrix_market(A, path):
    """Write full (general) coordinate form; round-trips through the loader."""
    field = "complex" if A.is_complex else "real"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        fh.write(f"{A.n} {A.n} {A.nnz}\n")
        for i in range(A.n):
            cols, vals = A.row(i)
            for j, v in zip(cols, vals):
                if field == "complex":
                    fh.write(f"{i + 1} {j + 1} {v.real:.17g} {v.imag:.17g}\n")
                else:
                    fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
