# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled state-vector kernels.

Mirrors ``qsdc3._corepy`` operation for operation (same arithmetic, same
order) so both backends walk identical trajectories from the same random
stream.  Keep the two files in sync.
"""

from libc.math cimport sqrt

ctypedef double complex dcomplex

DEF MAX_AMPS = 16


cdef inline double _abs2(dcomplex a) noexcept nogil:
    return a.real * a.real + a.imag * a.imag


cdef int _unpack(object amps, dcomplex* buf) except -1:
    cdef Py_ssize_t n = len(amps)
    cdef Py_ssize_t i
    if n > MAX_AMPS:
        raise ValueError("amplitude vector too long")
    for i in range(n):
        buf[i] = amps[i]
    return <int> n


cdef tuple _pack(dcomplex* buf, int n):
    cdef list out = [None] * n
    cdef int i
    for i in range(n):
        out[i] = buf[i]
    return tuple(out)


def norm_sq(amps):
    cdef dcomplex buf[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    cdef double total = 0.0
    cdef int i
    for i in range(n):
        total += _abs2(buf[i])
    return total


def apply_1q(amps, int pos, int op):
    """Apply identity (op=0), bit flip (op=1) or phase flip (op=2) at pos."""
    cdef dcomplex buf[MAX_AMPS]
    cdef dcomplex out[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    cdef int stride = n >> (pos + 1)
    cdef int i
    if op == 0:
        return _pack(buf, n)
    for i in range(n):
        out[i] = buf[i]
    if op == 1:
        for i in range(n):
            if not i & stride:
                out[i] = buf[i | stride]
                out[i | stride] = buf[i]
    elif op == 2:
        for i in range(n):
            if i & stride:
                out[i] = -buf[i]
    else:
        raise ValueError("unknown single-qubit op code %r" % (op,))
    return _pack(out, n)


def prob_zero(amps, int pos, int basis):
    """Probability of outcome 0 when measuring qubit pos (basis 0=Z, 1=X)."""
    cdef dcomplex buf[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    cdef int stride = n >> (pos + 1)
    cdef double total = 0.0
    cdef dcomplex c
    cdef int i
    if basis == 0:
        for i in range(n):
            if not i & stride:
                total += _abs2(buf[i])
    else:
        for i in range(n):
            if not i & stride:
                c = buf[i] + buf[i | stride]
                total += 0.5 * _abs2(c)
    return total


def collapse(amps, int pos, int basis, int outcome):
    """Project qubit pos onto the given outcome and renormalize."""
    cdef dcomplex buf[MAX_AMPS]
    cdef dcomplex out[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    cdef int stride = n >> (pos + 1)
    cdef int want
    cdef double sign, p, scale
    cdef dcomplex c
    cdef int i
    for i in range(n):
        out[i] = 0
    if basis == 0:
        want = stride if outcome else 0
        for i in range(n):
            if (i & stride) == want:
                out[i] = buf[i]
    else:
        sign = -1.0 if outcome else 1.0
        for i in range(n):
            if not i & stride:
                c = 0.5 * (buf[i] + sign * buf[i | stride])
                out[i] = c
                out[i | stride] = sign * c
    p = 0.0
    for i in range(n):
        p += _abs2(out[i])
    if p <= 1e-300:
        raise ValueError("cannot collapse onto a zero-probability outcome")
    scale = 1.0 / sqrt(p)
    for i in range(n):
        out[i] = out[i] * scale
    return _pack(out, n)


def bell_probs(amps):
    """Squared overlaps with the four entangled basis states, ordered by
    label (flip, phase): (0,0), (0,1), (1,0), (1,1)."""
    if len(amps) != 4:
        raise ValueError("entangled-basis overlaps need a 4-amplitude state")
    cdef dcomplex buf[MAX_AMPS]
    _unpack(amps, buf)
    cdef dcomplex c
    cdef double p00, p01, p10, p11
    c = buf[1] + buf[2]
    p00 = 0.5 * _abs2(c)
    c = buf[2] - buf[1]
    p01 = 0.5 * _abs2(c)
    c = buf[0] + buf[3]
    p10 = 0.5 * _abs2(c)
    c = buf[0] - buf[3]
    p11 = 0.5 * _abs2(c)
    return (p00, p01, p10, p11)


def attach_ancilla(amps, int transit_pos, alpha, beta):
    """Extend the register with a two-level probe coupled to the transit
    qubit; the probe becomes the new least significant qubit."""
    cdef dcomplex buf[MAX_AMPS]
    cdef dcomplex out[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    if 2 * n > MAX_AMPS:
        raise ValueError("amplitude vector too long")
    cdef dcomplex a_coeff = alpha
    cdef dcomplex b_coeff = beta
    cdef int stride = n >> (transit_pos + 1)
    cdef int i
    for i in range(2 * n):
        out[i] = 0
    for i in range(n):
        out[i << 1] = a_coeff * buf[i]
        out[((i ^ stride) << 1) | 1] = b_coeff * buf[i]
    return _pack(out, 2 * n)


def discard_qubit(amps, int pos, int bit):
    """Drop a qubit already collapsed to |bit> (its other branch is empty)."""
    cdef dcomplex buf[MAX_AMPS]
    cdef dcomplex out[MAX_AMPS]
    cdef int n = _unpack(amps, buf)
    cdef int stride = n >> (pos + 1)
    cdef int want = stride if bit else 0
    cdef int i, m
    m = 0
    for i in range(n):
        if (i & stride) == want:
            out[m] = buf[i]
            m += 1
    return _pack(out, m)
