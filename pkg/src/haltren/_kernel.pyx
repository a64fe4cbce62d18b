# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: the register-machine run loop and the exhaustive cut scan.

Results are bit-identical to ``haltren._pykernel``.
"""

from libc.stdlib cimport malloc, realloc, free, calloc
from libc.string cimport memcpy, memcmp
from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil

cdef enum:
    NO_JUMP = -(1 << 30)
    MAX_SIZE = 62

cdef int64_t VALUE_LIMIT = (<int64_t>1) << 62


cdef inline int64_t _contrib(int64_t v) noexcept nogil:
    if v == 0:
        return 0
    return 1 + (64 - __builtin_clzll(<unsigned long long>v))


cdef inline uint64_t _hash(const int64_t* c, int w) noexcept nogil:
    cdef uint64_t h = 1469598103934665603ULL
    cdef int i
    for i in range(w):
        h ^= <uint64_t>c[i]
        h *= 1099511628211ULL
        h ^= h >> 29
    return h


cdef struct Seen:
    int64_t* buf      # config snapshots, ``w`` words each, indexed by step
    int64_t ncfg
    int64_t capcfg
    int64_t* slots    # 0 = empty, otherwise step + 1
    uint64_t mask
    int w


cdef int _seen_init(Seen* st, int w) noexcept nogil:
    st.w = w
    st.ncfg = 0
    st.capcfg = 1024
    st.buf = <int64_t*>malloc(st.capcfg * w * sizeof(int64_t))
    st.mask = 2047
    st.slots = <int64_t*>calloc(st.mask + 1, sizeof(int64_t))
    if st.buf == NULL or st.slots == NULL:
        return -1
    return 0


cdef void _seen_free(Seen* st) noexcept nogil:
    if st.buf != NULL:
        free(st.buf)
        st.buf = NULL
    if st.slots != NULL:
        free(st.slots)
        st.slots = NULL


cdef int _seen_grow(Seen* st) noexcept nogil:
    cdef uint64_t newmask = st.mask * 2 + 1
    cdef int64_t* ns = <int64_t*>calloc(newmask + 1, sizeof(int64_t))
    cdef int64_t k
    cdef uint64_t h
    if ns == NULL:
        return -1
    for k in range(st.ncfg):
        h = _hash(st.buf + k * st.w, st.w) & newmask
        while ns[h] != 0:
            h = (h + 1) & newmask
        ns[h] = k + 1
    free(st.slots)
    st.slots = ns
    st.mask = newmask
    return 0


cdef int64_t _seen_lookup_insert(Seen* st, const int64_t* cfg, int64_t step) noexcept nogil:
    """Return the step of an identical stored config, -1 if newly inserted, -2 on OOM."""
    cdef uint64_t h
    cdef int64_t idx
    cdef int64_t* nb
    cdef size_t nbytes = st.w * sizeof(int64_t)
    h = _hash(cfg, st.w) & st.mask
    while st.slots[h] != 0:
        idx = st.slots[h] - 1
        if memcmp(st.buf + idx * st.w, cfg, nbytes) == 0:
            return idx
        h = (h + 1) & st.mask
    if st.ncfg == st.capcfg:
        nb = <int64_t*>realloc(st.buf, 2 * st.capcfg * nbytes)
        if nb == NULL:
            return -2
        st.buf = nb
        st.capcfg *= 2
    memcpy(st.buf + st.ncfg * st.w, cfg, nbytes)
    st.slots[h] = st.ncfg + 1
    st.ncfg += 1
    if <uint64_t>(2 * st.ncfg) > st.mask:
        if _seen_grow(st) != 0:
            return -2
    return -1


def run_compiled(ops, regs, targets, int nregs, x, step_budget, space_budget):
    """Run a lowered program; see ``_pykernel.run_compiled`` for the contract."""
    if x < 0 or x + step_budget >= VALUE_LIMIT or step_budget >= VALUE_LIMIT:
        raise OverflowError("values exceed the compiled kernel's word size")
    cdef int size = len(ops)
    cdef int w = nregs + 1
    cdef int* cops = <int*>malloc((size + 1) * sizeof(int))
    cdef int* cregs = <int*>malloc((size + 1) * sizeof(int))
    cdef int* ctgt = <int*>malloc((size + 1) * sizeof(int))
    cdef int64_t* cfg = <int64_t*>calloc(w, sizeof(int64_t))
    cdef int64_t* r
    cdef Seen st
    st.buf = NULL
    st.slots = NULL
    cdef int i
    for i in range(size):
        cops[i] = ops[i]
        cregs[i] = regs[i]
        ctgt[i] = targets[i]
    r = cfg + 1
    r[0] = x
    cdef int64_t budget = step_budget
    cdef int64_t space = space_budget if space_budget < VALUE_LIMIT else VALUE_LIMIT
    cdef int64_t fp = _contrib(r[0])
    cdef int64_t t = 0, m = 0, s = 0, v, prev = -1
    cdef int pc = 0, op, status = 0
    cdef bint detecting = fp <= space
    if detecting:
        if _seen_init(&st, w) != 0:
            _seen_free(&st)
            raise MemoryError()
        cfg[0] = 0
        _seen_lookup_insert(&st, cfg, 0)
    with nogil:
        while pc != size:
            if t >= budget:
                status = 2
                break
            op = cops[pc]
            if op == 0:
                i = cregs[pc]
                v = r[i]
                r[i] = v + 1
                fp += _contrib(v + 1) - _contrib(v)
                pc += 1
            elif op == 1:
                i = cregs[pc]
                v = r[i]
                if v != 0:
                    r[i] = v - 1
                    fp += _contrib(v - 1) - _contrib(v)
                pc += 1
            elif op == 2:
                if r[cregs[pc]] == 0:
                    pc = ctgt[pc]
                else:
                    pc += 1
            else:
                pc = ctgt[pc]
            t += 1
            if fp > m:
                m = fp
            s += fp
            if detecting:
                if fp > space:
                    detecting = False
                    _seen_free(&st)
                else:
                    cfg[0] = pc
                    prev = _seen_lookup_insert(&st, cfg, t)
                    if prev == -2:
                        status = -1
                        break
                    if prev >= 0:
                        status = 1
                        break
    _seen_free(&st)
    regs_out = tuple([r[i] for i in range(nregs)])
    value = r[0]
    free(cops)
    free(cregs)
    free(ctgt)
    free(cfg)
    if status == -1:
        raise MemoryError()
    if status == 1:
        return 1, 0, t, m, s, prev, t - prev, regs_out
    if status == 2:
        return 2, 0, t, m, s, -1, 0, regs_out
    return 0, value, t, m, s, -1, 0, regs_out


cdef uint64_t _cut_mask(const int* off, int a, int b) noexcept nogil:
    cdef uint64_t mask = 0
    cdef int c, j, tgt
    cdef bint ok
    for c in range(a, b + 1):
        ok = True
        for j in range(a, b):
            if off[j] == NO_JUMP:
                continue
            tgt = j + off[j]
            if (j < c and c < tgt) or (tgt < c and c <= j):
                ok = False
                break
        if ok:
            mask |= (<uint64_t>1) << (c - a)
    return mask


cdef bint _coherent(const int* off, int n) noexcept nogil:
    cdef uint64_t full = _cut_mask(off, 0, n)
    cdef uint64_t below
    cdef int i
    if (full & 1) == 0 or ((full >> n) & 1) == 0:
        return False
    for i in range(n + 1):
        if ((full >> i) & 1) == 0:
            continue
        below = full & (((<uint64_t>1) << (i + 1)) - 1)
        if _cut_mask(off, 0, i) != below:
            return False
        if _cut_mask(off, i, n) != (full >> i):
            return False
    return True


def scan_skeletons(int max_size, int registers, int max_offset):
    """Exhaustive literal scan; see ``_pykernel.scan_skeletons``."""
    if max_size > MAX_SIZE:
        raise ValueError("max_size too large for the compiled scan")
    cdef int base = 2 * max_offset + 2
    cdef int n, pos, d, k, carry, rep
    cdef int* letters
    cdef int* nletters
    cdef int* idx
    cdef int off[MAX_SIZE]
    cdef int64_t code
    cdef long long total = 0, violations = 0
    counts = {}
    cdef int width = 2 * registers + (2 * max_offset + 1) * (registers + 1)
    letters = <int*>malloc((max_size + 1) * width * sizeof(int))
    nletters = <int*>malloc((max_size + 1) * sizeof(int))
    idx = <int*>malloc((max_size + 1) * sizeof(int))
    # per-size class counts accumulate in a C array indexed by skeleton code
    cdef int64_t ncodes
    cdef long long* classes
    try:
        for n in range(max_size + 1):
            for pos in range(n):
                k = 0
                for d in range(2 * registers):
                    letters[pos * width + k] = NO_JUMP
                    k += 1
                for d in range(-max_offset, max_offset + 1):
                    if 0 <= pos + d <= n:
                        for rep in range(registers + 1):
                            letters[pos * width + k] = d
                            k += 1
                nletters[pos] = k
                idx[pos] = 0
            ncodes = 1
            for pos in range(n):
                ncodes *= base
            classes = <long long*>calloc(ncodes, sizeof(long long))
            if classes == NULL:
                raise MemoryError()
            with nogil:
                while True:
                    code = 0
                    for pos in range(n):
                        off[pos] = letters[pos * width + idx[pos]]
                        if off[pos] == NO_JUMP:
                            code = code * base
                        else:
                            code = code * base + 1 + off[pos] + max_offset
                    total += 1
                    if not _coherent(off, n):
                        violations += 1
                    classes[code] += 1
                    # odometer, last position fastest
                    pos = n - 1
                    carry = 1
                    while pos >= 0 and carry:
                        idx[pos] += 1
                        if idx[pos] == nletters[pos]:
                            idx[pos] = 0
                            pos -= 1
                        else:
                            carry = 0
                    if carry:
                        break
            for code in range(ncodes):
                if classes[code]:
                    counts[(n, code)] = classes[code]
            free(classes)
    finally:
        free(letters)
        free(nletters)
        free(idx)
    return total, violations, counts
