"""Pure-Python search core: breadth-first completability search and the
certificate replay fold.

This is the fallback twin of the compiled extension `sat2track._core`; both
implement the same action-code protocol and must stay byte-for-byte equivalent
in observable behavior. Action codes: a traversal of link L is 2*L (forward)
or 2*L+1 (reverse); a plain respawn is -1; a targeted respawn to pad P is
-2-P. State keys pack (pad, collected mask, last touch) into one integer with
the same field widths as the compiled core.
"""
from __future__ import annotations

SOLVED = 0
EXHAUSTED = 1
OVER_LIMIT = 2

_PAD_BITS = 22
_MASK_BITS = 20


def solve(
    n_pads,
    start,
    finish,
    full_mask,
    move_start,
    move_to,
    move_code,
    pad_cp,
    policy,
    cp_start,
    cp_pads,
    max_states,
):
    """Shortest action sequence completing the track, or a failure status.

    Returns (status, codes). Successors are generated in canonical order
    (traversals by ascending code, then respawns by ascending target), so the
    result is the deterministic lexicographically-first shortest certificate.
    """
    # Coerce to plain ints: numpy scalars would overflow the 42-bit shifts
    # in _key and the per-checkpoint mask bits.
    start = int(start)
    finish = int(finish)
    full_mask = int(full_mask)
    move_start = [int(v) for v in move_start]
    move_to = [int(v) for v in move_to]
    move_code = [int(v) for v in move_code]
    pad_cp = [int(v) for v in pad_cp]
    cp_start = [int(v) for v in cp_start]
    cp_pads = [int(v) for v in cp_pads]
    track_touch = policy != 0

    if start == finish and full_mask == 0:
        return SOLVED, []

    start_key = _key(start, 0, -1)
    parent: dict[int, tuple[int, int]] = {start_key: (-1, 0)}
    queue = [start_key]
    head = 0
    while head < len(queue):
        key = queue[head]
        head += 1
        pad = key & ((1 << _PAD_BITS) - 1)
        mask = (key >> _PAD_BITS) & ((1 << _MASK_BITS) - 1)
        touch = (key >> (_PAD_BITS + _MASK_BITS)) - 1
        for idx in range(move_start[pad], move_start[pad + 1]):
            to = move_to[idx]
            cp = pad_cp[to]
            if cp >= 0:
                nmask = mask | (1 << cp)
                ntouch = to if track_touch else -1
            else:
                nmask = mask
                ntouch = touch
            nkey = _key(to, nmask, ntouch)
            if nkey not in parent:
                parent[nkey] = (key, move_code[idx])
                if to == finish and nmask == full_mask:
                    return SOLVED, _reconstruct(parent, nkey, start_key)
                if len(parent) > max_states:
                    return OVER_LIMIT, []
                queue.append(nkey)
        if touch >= 0:
            # Respawn targets are touch pads, never the finish, so respawn
            # successors cannot complete the track.
            if policy == 1:
                nkey = _key(touch, mask, touch)
                if nkey not in parent:
                    parent[nkey] = (key, -1)
                    if len(parent) > max_states:
                        return OVER_LIMIT, []
                    queue.append(nkey)
            elif policy == 2:
                cp = pad_cp[touch]
                for idx in range(cp_start[cp], cp_start[cp + 1]):
                    target = cp_pads[idx]
                    nkey = _key(target, mask, touch)
                    if nkey not in parent:
                        parent[nkey] = (key, -2 - target)
                        if len(parent) > max_states:
                            return OVER_LIMIT, []
                        queue.append(nkey)
    return EXHAUSTED, []


def run_actions(n_pads, n_links, link_src, link_dst, link_two_way, pad_cp, start, policy, codes):
    """Replay an action-code sequence from the start pad.

    Returns (valid, first_illegal, end_pad, end_mask, consumed). On the first
    illegal action the replay stops with the state reached so far.
    """
    link_src = [int(v) for v in link_src]
    link_dst = [int(v) for v in link_dst]
    link_two_way = [int(v) for v in link_two_way]
    pad_cp = [int(v) for v in pad_cp]
    pad = int(start)
    mask = 0
    touch = -1
    for i, code in enumerate(codes):
        code = int(code)
        if code >= 0:
            link = code >> 1
            if link >= n_links:
                return False, i, pad, mask, i
            if code & 1:
                if not link_two_way[link] or link_dst[link] != pad:
                    return False, i, pad, mask, i
                pad = link_src[link]
            else:
                if link_src[link] != pad:
                    return False, i, pad, mask, i
                pad = link_dst[link]
            if pad_cp[pad] >= 0:
                mask |= 1 << pad_cp[pad]
                touch = pad
        elif code == -1:
            if policy == 0 or touch < 0:
                return False, i, pad, mask, i
            pad = touch
        else:
            target = -code - 2
            if target < 0 or target >= n_pads or policy == 0 or touch < 0:
                return False, i, pad, mask, i
            if policy == 1 and target != touch:
                return False, i, pad, mask, i
            if policy == 2 and (pad_cp[target] < 0 or pad_cp[target] != pad_cp[touch]):
                return False, i, pad, mask, i
            pad = target
    return True, -1, pad, mask, len(codes)


def _key(pad, mask, touch):
    return pad | (mask << _PAD_BITS) | ((touch + 1) << (_PAD_BITS + _MASK_BITS))


def _reconstruct(parent, key, start_key):
    codes = []
    while key != start_key:
        key, code = parent[key]
        codes.append(code)
    codes.reverse()
    return codes
