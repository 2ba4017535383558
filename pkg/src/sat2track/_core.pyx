# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled search core: breadth-first completability search and the
certificate replay fold.

Mirror of `sat2track._pycore`; the two must stay behaviorally identical.
Action codes: traversal of link L is 2*L (forward) or 2*L+1 (reverse); a plain
respawn is -1; a targeted respawn to pad P is -2-P.
"""
from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

ctypedef long long i64

SOLVED = 0
EXHAUSTED = 1
OVER_LIMIT = 2

cdef int _PAD_BITS = 22
cdef int _MASK_BITS = 20


def solve(
    int n_pads,
    int start,
    int finish,
    i64 full_mask,
    int[:] move_start,
    int[:] move_to,
    long long[:] move_code,
    int[:] pad_cp,
    int policy,
    int[:] cp_start,
    int[:] cp_pads,
    long long max_states,
):
    """Shortest action sequence completing the track, or a failure status.

    Returns (status, codes); successor order matches the pure core exactly.
    """
    cdef bint track_touch = policy != 0
    cdef unordered_map[i64, pair[i64, i64]] parent
    cdef vector[i64] queue
    cdef i64 key, nkey, start_key, mask, nmask, code
    cdef int pad, to, touch, ntouch, cp, idx, target
    cdef size_t head = 0
    cdef i64 pad_mask = (<i64>1 << _PAD_BITS) - 1
    cdef i64 coll_mask = (<i64>1 << _MASK_BITS) - 1

    if start == finish and full_mask == 0:
        return SOLVED, []

    start_key = _key(start, 0, -1)
    parent[start_key] = pair[i64, i64](-1, 0)
    queue.push_back(start_key)
    while head < queue.size():
        key = queue[head]
        head += 1
        pad = <int>(key & pad_mask)
        mask = (key >> _PAD_BITS) & coll_mask
        touch = <int>((key >> (_PAD_BITS + _MASK_BITS)) - 1)
        for idx in range(move_start[pad], move_start[pad + 1]):
            to = move_to[idx]
            cp = pad_cp[to]
            if cp >= 0:
                nmask = mask | (<i64>1 << cp)
                ntouch = to if track_touch else -1
            else:
                nmask = mask
                ntouch = touch
            nkey = _key(to, nmask, ntouch)
            if parent.count(nkey) == 0:
                parent[nkey] = pair[i64, i64](key, move_code[idx])
                if to == finish and nmask == full_mask:
                    return SOLVED, _reconstruct(parent, nkey, start_key)
                if <i64>parent.size() > max_states:
                    return OVER_LIMIT, []
                queue.push_back(nkey)
        if touch >= 0:
            # Respawn targets are touch pads, never the finish, so respawn
            # successors cannot complete the track.
            if policy == 1:
                nkey = _key(touch, mask, touch)
                if parent.count(nkey) == 0:
                    parent[nkey] = pair[i64, i64](key, -1)
                    if <i64>parent.size() > max_states:
                        return OVER_LIMIT, []
                    queue.push_back(nkey)
            elif policy == 2:
                cp = pad_cp[touch]
                for idx in range(cp_start[cp], cp_start[cp + 1]):
                    target = cp_pads[idx]
                    nkey = _key(target, mask, touch)
                    if parent.count(nkey) == 0:
                        parent[nkey] = pair[i64, i64](key, -2 - target)
                        if <i64>parent.size() > max_states:
                            return OVER_LIMIT, []
                        queue.push_back(nkey)
    return EXHAUSTED, []


def run_actions(
    int n_pads,
    int n_links,
    int[:] link_src,
    int[:] link_dst,
    signed char[:] link_two_way,
    int[:] pad_cp,
    int start,
    int policy,
    long long[:] codes,
):
    """Replay an action-code sequence from the start pad.

    Returns (valid, first_illegal, end_pad, end_mask, consumed).
    """
    cdef int pad = start
    cdef i64 mask = 0
    cdef int touch = -1
    cdef int link, target
    cdef i64 code
    cdef Py_ssize_t i, n = codes.shape[0]
    for i in range(n):
        code = codes[i]
        if code >= 0:
            link = <int>(code >> 1)
            if link >= n_links:
                return False, i, pad, mask, i
            if code & 1:
                if link_two_way[link] == 0 or link_dst[link] != pad:
                    return False, i, pad, mask, i
                pad = link_src[link]
            else:
                if link_src[link] != pad:
                    return False, i, pad, mask, i
                pad = link_dst[link]
            if pad_cp[pad] >= 0:
                mask |= <i64>1 << pad_cp[pad]
                touch = pad
        elif code == -1:
            if policy == 0 or touch < 0:
                return False, i, pad, mask, i
            pad = touch
        else:
            target = <int>(-code - 2)
            if target < 0 or target >= n_pads or policy == 0 or touch < 0:
                return False, i, pad, mask, i
            if policy == 1 and target != touch:
                return False, i, pad, mask, i
            if policy == 2 and (pad_cp[target] < 0 or pad_cp[target] != pad_cp[touch]):
                return False, i, pad, mask, i
            pad = target
    return True, -1, pad, mask, n


cdef inline i64 _key(int pad, i64 mask, int touch):
    return pad | (mask << _PAD_BITS) | ((<i64>(touch + 1)) << (_PAD_BITS + _MASK_BITS))


cdef list _reconstruct(unordered_map[i64, pair[i64, i64]] & parent, i64 key, i64 start_key):
    cdef list codes = []
    cdef pair[i64, i64] entry
    while key != start_key:
        entry = parent[key]
        key = entry.first
        codes.append(entry.second)
    codes.reverse()
    return codes
