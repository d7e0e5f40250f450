# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend: fused shard aggregation and contribution math.

Behavioral contract is shared with ``pure``: identical line classification,
identical accumulation order, identical IEEE-754 arithmetic. Tests pin the
two backends against each other.
"""

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_GET_SIZE
from cpython.dict cimport PyDict_GetItem, PyDict_SetItem
from cpython.long cimport PyLong_AsSsize_t
from cpython.ref cimport PyObject
from libc.math cimport log2
from libc.stdlib cimport free, realloc
from libc.string cimport memchr, memcpy, memset

import numpy as np

cdef extern from "Python.h":
    object PyUnicode_DecodeUTF8(const char *s, Py_ssize_t size, const char *errors)

BACKEND_NAME = "compiled"


cdef inline bint _parse_uint(const char *s, Py_ssize_t n, long long *out) nogil:
    # strict non-negative base-10: ASCII digits only, at most 18 of them
    cdef long long v = 0
    cdef Py_ssize_t i
    cdef unsigned char c
    if n == 0 or n > 18:
        return False
    for i in range(n):
        c = <unsigned char> s[i]
        if c < 48 or c > 57:
            return False
        v = v * 10 + (c - 48)
    out[0] = v
    return True


cdef inline bint _pos_tagged(const unsigned char *s, Py_ssize_t n) nogil:
    # matches the regex pair: search("_[A-Z]+$") or match("^_[A-Z]+_$")
    cdef Py_ssize_t i, run
    if n >= 3 and s[n - 1] == 95:
        i = n - 2
        run = 0
        while i >= 1 and 65 <= s[i] <= 90:
            i -= 1
            run += 1
        return run >= 1 and i == 0 and s[0] == 95
    i = n - 1
    run = 0
    while i >= 0 and 65 <= s[i] <= 90:
        i -= 1
        run += 1
    return run >= 1 and i >= 0 and s[i] == 95


cdef inline bint _year_token(const unsigned char *s, Py_ssize_t n,
                             long long lo, long long hi) nogil:
    cdef long long v = 0
    cdef Py_ssize_t i
    if n != 4:
        return False
    for i in range(4):
        if s[i] < 48 or s[i] > 57:
            return False
        v = v * 10 + (s[i] - 48)
    return lo <= v <= hi


cdef class ShardAggregator:
    """Fused parse + filter + aggregate pass over shard byte streams."""

    cdef public long long lines, kept, filtered, malformed
    cdef public int year_min, year_max, n_decades
    cdef long long year_lo_bound, year_hi_bound
    cdef long long ytok_lo, ytok_hi
    cdef bint exclude_pos_tagged, exclude_year_tokens
    cdef object _custom
    cdef object _inv_obj
    cdef double[::1] _inv
    cdef dict _index
    cdef double *_buf
    cdef Py_ssize_t _cap, _count

    def __cinit__(self, *args, **kwargs):
        self._buf = NULL
        self._cap = 0
        self._count = 0

    def __dealloc__(self):
        if self._buf != NULL:
            free(self._buf)
            self._buf = NULL

    def __init__(
        self,
        int year_min,
        int year_max,
        inv_totals,
        *,
        int year_lo_bound=1500,
        int year_hi_bound=2100,
        bint exclude_pos_tagged=True,
        bint exclude_year_tokens=False,
        year_token_range=(1500, 2099),
        custom_exclusions=(),
    ):
        if year_min % 10 != 0 or (year_max - year_min + 1) % 10 != 0:
            raise ValueError("aggregation span must cover whole decades")
        self.year_min = year_min
        self.year_max = year_max
        self.n_decades = (year_max - year_min + 1) // 10
        inv = np.ascontiguousarray(inv_totals, dtype=np.float64)
        if inv.shape != (year_max - year_min + 1,):
            raise ValueError("inv_totals must have one entry per year of the span")
        self._inv_obj = inv
        self._inv = inv
        self.year_lo_bound = year_lo_bound
        self.year_hi_bound = year_hi_bound
        self.exclude_pos_tagged = exclude_pos_tagged
        self.exclude_year_tokens = exclude_year_tokens
        self.ytok_lo, self.ytok_hi = year_token_range
        custom = frozenset(custom_exclusions)
        self._custom = custom if custom else None
        self._index = {}
        self.lines = 0
        self.kept = 0
        self.filtered = 0
        self.malformed = 0

    cdef int _grow(self) except -1:
        cdef Py_ssize_t new_cap = self._cap * 2 if self._cap else 1024
        cdef double *nb = <double *> realloc(
            self._buf, new_cap * self.n_decades * sizeof(double))
        if nb == NULL:
            raise MemoryError()
        self._buf = nb
        self._cap = new_cap
        return 0

    cdef int _line(self, const char *p, Py_ssize_t n) except -1:
        cdef const char *t1
        cdef const char *t2
        cdef const char *t3
        cdef Py_ssize_t tok_len, f1_len, f2_len, f3_len, offset, idx
        cdef long long year, mc, vc
        cdef object tok
        cdef PyObject *item

        self.lines += 1
        if n > 0 and p[n - 1] == 13:
            n -= 1
        t1 = <const char *> memchr(p, 9, n)
        if t1 == NULL:
            self.malformed += 1
            return 0
        tok_len = t1 - p
        t2 = <const char *> memchr(t1 + 1, 9, n - tok_len - 1)
        if t2 == NULL:
            self.malformed += 1
            return 0
        f1_len = t2 - (t1 + 1)
        t3 = <const char *> memchr(t2 + 1, 9, (p + n) - (t2 + 1))
        if t3 == NULL:
            self.malformed += 1
            return 0
        f2_len = t3 - (t2 + 1)
        if memchr(t3 + 1, 9, (p + n) - (t3 + 1)) != NULL:
            self.malformed += 1
            return 0
        f3_len = (p + n) - (t3 + 1)

        if tok_len == 0:
            self.malformed += 1
            return 0
        if (not _parse_uint(t1 + 1, f1_len, &year)
                or not _parse_uint(t2 + 1, f2_len, &mc)
                or not _parse_uint(t3 + 1, f3_len, &vc)):
            self.malformed += 1
            return 0
        if vc > mc or year < self.year_lo_bound or year > self.year_hi_bound:
            self.malformed += 1
            return 0
        try:
            tok = PyUnicode_DecodeUTF8(p, tok_len, NULL)
        except UnicodeDecodeError:
            self.malformed += 1
            return 0
        if self.exclude_pos_tagged and _pos_tagged(<const unsigned char *> p, tok_len):
            self.filtered += 1
            return 0
        if self._custom is not None and tok in self._custom:
            self.filtered += 1
            return 0
        if self.exclude_year_tokens and _year_token(
                <const unsigned char *> p, tok_len, self.ytok_lo, self.ytok_hi):
            self.filtered += 1
            return 0
        if year < self.year_min or year > self.year_max:
            self.filtered += 1
            return 0

        item = PyDict_GetItem(self._index, tok)
        if item is NULL:
            idx = self._count
            if idx == self._cap:
                self._grow()
            memset(self._buf + idx * self.n_decades, 0,
                   self.n_decades * sizeof(double))
            PyDict_SetItem(self._index, tok, idx)
            self._count += 1
        else:
            idx = PyLong_AsSsize_t(<object> item)
        offset = year - self.year_min
        self._buf[idx * self.n_decades + offset / 10] += (<double> mc) * self._inv[offset]
        self.kept += 1
        return 0

    cdef bytes _scan(self, bytes data):
        cdef const char *base = PyBytes_AS_STRING(data)
        cdef Py_ssize_t n = PyBytes_GET_SIZE(data)
        cdef Py_ssize_t start = 0
        cdef const char *nl
        while start < n:
            nl = <const char *> memchr(base + start, 10, n - start)
            if nl == NULL:
                break
            self._line(base + start, nl - (base + start))
            start = (nl - base) + 1
        if start < n:
            return data[start:]
        return b""

    def consume(self, fileobj, Py_ssize_t chunk_size=8388608):
        """Read one shard stream to EOF, updating sums and counters."""
        cdef bytes tail = b""
        cdef bytes chunk, data
        while True:
            chunk = fileobj.read(chunk_size)
            if not chunk:
                break
            if tail:
                data = tail + chunk
            else:
                data = chunk
            tail = self._scan(data)
        if tail:
            self._line(PyBytes_AS_STRING(tail), PyBytes_GET_SIZE(tail))

    def result(self):
        """Tokens in first-seen order plus their per-decade sum matrix."""
        cdef list tokens = [None] * self._count
        for tok, idx in self._index.items():
            tokens[idx] = tok
        arr = np.empty((self._count, self.n_decades), dtype=np.float64)
        cdef double[:, ::1] mv = arr
        if self._count:
            memcpy(&mv[0, 0], self._buf,
                   self._count * self.n_decades * sizeof(double))
        return tokens, arr


def contribution_values(p, q, out=None):
    """Elementwise divergence contribution of aligned probability vectors."""
    p_arr = np.ascontiguousarray(p, dtype=np.float64)
    q_arr = np.ascontiguousarray(q, dtype=np.float64)
    if p_arr.ndim != 1 or p_arr.shape != q_arr.shape:
        raise ValueError("p and q must be 1-d arrays of equal length")
    out_arr = np.empty_like(p_arr) if out is None else out
    cdef double[::1] pv = p_arr
    cdef double[::1] qv = q_arr
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i, n = pv.shape[0]
    cdef double pp, qq, m, r, s, acc
    with nogil:
        for i in range(n):
            pp = pv[i]
            qq = qv[i]
            m = 0.5 * (pp + qq)
            if m <= 0.0:
                ov[i] = 0.0
                continue
            r = pp / m
            acc = 0.0
            if r > 0.0:
                acc += r * log2(r)
            s = 2.0 - r
            if s > 0.0:
                acc += s * log2(s)
            ov[i] = m * (0.5 * acc)
    return out_arr
