"""Re-expression of a series over a shifted normal-ordering kernel.

Changing the two-point kernel underneath the normal ordering maps each
generator to a finite combination of generators of the target basis.
The sum runs over sets of disjoint leg pairs of a single generator
(its own traces may contract into themselves), each pair contributing
``hbar`` times a difference-kernel symbol whose numeric meaning is

    F  =  (target kernel) - (source kernel).

Single-trace self-contractions make the exponent negative (for example
a two-leg trace closing onto itself produces two pure loops against
one pair), so the output is Laurent in eps.  Such terms are kept and
the result is flagged ``negative-eps`` rather than rejected.
"""

from __future__ import annotations

from .coeffring import Coefficient, KernelSymbol, Monomial
from .observables import Generator, Mode, Series
from .ribbon import EnumerationStats, analyze, enumerate_pairings, legs_of, result_generator


def _pair_symbol(gen: Generator, pair, symbol: str, mode: Mode) -> KernelSymbol:
    if mode.kind == "matrix":
        return KernelSymbol(symbol)
    u, v = pair
    su = gen.traces[u.trace].slots[u.slot]
    sv = gen.traces[v.trace].slots[v.slot]
    refs = sorted([(su.label, su.conjugated), (sv.label, sv.conjugated)])
    # difference kernels are symmetric, so a sorted argument order is canonical
    return KernelSymbol(symbol, tuple(refs))


def transport(series: Series, *, symbol: str = "F", negate: bool = False,
              max_eps_degree: int | None = None) -> Series:
    """Expand ``series`` over the kernel-shifted basis.

    ``negate`` flips the sign of every pair factor, which is the
    inverse shift; transporting with ``F`` and then with ``-F`` is the
    identity.
    """
    mode = series.mode
    out = []
    flags = set(series.flags)
    for gen, coeff in series.terms:
        stats = EnumerationStats()
        for pairing in enumerate_pairings(legs_of(gen, 0),
                                          max_eps_degree=max_eps_degree,
                                          stats=stats):
            report = analyze(pairing, gen, None, mode)
            if report.weight_zero:
                continue
            if max_eps_degree is not None and report.exponent > max_eps_degree:
                flags.add("truncated")
                continue
            if report.exponent < 0:
                flags.add("negative-eps")
            kernels: dict[KernelSymbol, int] = {}
            for pair in report.pairs:
                sym = _pair_symbol(gen, pair, symbol, mode)
                kernels[sym] = kernels.get(sym, 0) + 1
            mono = Monomial(eps_half=report.exponent_half_units,
                            hbar=report.pair_count,
                            s=report.s_exponents,
                            kernels=tuple(kernels.items()))
            value = -1 if (negate and report.pair_count % 2) else 1
            out.append((result_generator(report),
                        coeff * Coefficient.monomial(mono, value)))
        if stats.pruned_branches:
            flags.add("truncated")
    return Series.build(mode, out, flags)


def transport_roundtrip_check(series: Series, *, symbol: str = "F") -> Series:
    """Shift out and back; the returned difference must be zero."""
    there = transport(series, symbol=symbol)
    back = transport(there, symbol=symbol, negate=True)
    return back - series
