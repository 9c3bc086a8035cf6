"""Compiled inner loops for the staged multiplicity engine.

The unloading cascade performs hundreds of millions of unit-amplitude
batches on large graphs, far beyond what interpreted code sustains.  The
kernel below performs the same batched unloading as
:mod:`amsreg.proximity` on a CSR encoding of the active graph.  Unloading
is confluent - every order of legal steps reaches the same consistent
fixed point - so the kernel is free to process vertices in stack order
instead of the smallest-index order used when a trace is recorded; the
endpoint is identical.  It is only used when no trace is requested and
every value fits comfortably in 64-bit integers.

numba is optional: when it is missing the callers silently stay on the
pure-Python path.
"""

from __future__ import annotations

try:
    import numpy as _np
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @_njit(cache=True)
    def step_and_unload(
        j0, do_step, ms, rho, chf, chs, chl, paf, pas, pal, max_batches
    ):
        """One unit unloading step at ``j0`` (when ``do_step``) followed by
        a full drive back to consistency, seeded from the touched vertices.

        ``ch*``/``pa*`` are CSR arrays of the active children/parents.
        Returns the number of batches, or -1 when ``max_batches`` is hit.
        """
        n = ms.shape[0]
        stack = _np.empty(n, _np.int64)
        queued = _np.zeros(n, _np.uint8)
        top = 0
        if do_step:
            ms[j0] += 1
            rho[j0] += 1
            for ip in range(pas[j0], pas[j0] + pal[j0]):
                rho[paf[ip]] -= 1
            for ic in range(chs[j0], chs[j0] + chl[j0]):
                c = chf[ic]
                ms[c] -= 1
                rho[c] -= 1
                rho[j0] += 1
                for ip in range(pas[c], pas[c] + pal[c]):
                    p = paf[ip]
                    if p != j0:
                        rho[p] += 1
            if rho[j0] < 0:
                stack[top] = j0
                queued[j0] = 1
                top += 1
            for ip in range(pas[j0], pas[j0] + pal[j0]):
                p = paf[ip]
                if rho[p] < 0 and queued[p] == 0:
                    stack[top] = p
                    queued[p] = 1
                    top += 1
            for ic in range(chs[j0], chs[j0] + chl[j0]):
                c = chf[ic]
                if rho[c] < 0 and queued[c] == 0:
                    stack[top] = c
                    queued[c] = 1
                    top += 1
        else:
            for j in range(n):
                if rho[j] < 0:
                    stack[top] = j
                    queued[j] = 1
                    top += 1

        batches = 0
        while top > 0:
            top -= 1
            j = stack[top]
            queued[j] = 0
            if rho[j] >= 0:
                continue
            batches += 1
            if batches > max_batches:
                return -1
            delta = 1 + chl[j]
            t = (-rho[j] + delta - 1) // delta
            ms[j] += t
            rho[j] += t * delta
            for ip in range(pas[j], pas[j] + pal[j]):
                p = paf[ip]
                rho[p] -= t
                if rho[p] < 0 and queued[p] == 0:
                    stack[top] = p
                    queued[p] = 1
                    top += 1
            for ic in range(chs[j], chs[j] + chl[j]):
                c = chf[ic]
                ms[c] -= t
                rho[c] -= t
                if rho[c] < 0 and queued[c] == 0:
                    stack[top] = c
                    queued[c] = 1
                    top += 1
                for ip in range(pas[c], pas[c] + pal[c]):
                    p = paf[ip]
                    if p != j:
                        rho[p] += t
        return batches
