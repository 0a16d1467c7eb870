"""Exact algebra of a single interval exchange map.

Builds the symmetric 4-interval map with lengths (0.14, 0.4, 0.1, 0.36),
inspects its translation vector, finds its saddle connections and its orbit
of periodic intervals, and decomposes a reversible-but-not-symmetric map
into symmetric-part o swap.  Everything here runs in exact rational
arithmetic.
"""

from fractions import Fraction as Fr

from iexmaps import (
    Iem,
    Lengths,
    Permutation,
    compose,
    invert,
    is_reversible,
    orbit_intervals,
    periodic_intervals,
    saddle_connections,
    swap_decompose,
)

F = Iem(Permutation.reversing(4), Lengths(["7/50", "2/5", "1/10", "9/25"]))
print("map:", F)
print("translation vector:", [str(w) for w in F.omega])
print("symmetric (order-reversing)?", F.is_symmetric())

# the interval is treated as a circle; evaluation is exact
x = Fr(0)
print("\norbit of 0:", end=" ")
for _ in range(5):
    x = F.evaluate(x)
    print(str(x), end=" ")
print()

# saddle connections bound every periodic interval
print("\nsaddle connections up to m = 5:")
for c in saddle_connections(F, 5):
    a, b = c.labels(F.d)
    print(f"  {c.side:>5}: ({a},{b},{c.m})")

print("\nperiodic intervals up to period 3:")
for p in periodic_intervals(F, 3):
    print(f"  period {p.period}, itinerary {p.itinerary}, reflection offset {p.symmetric_partner_offset}")
    for l, r in orbit_intervals(F, p):
        print(f"    [{l}, {r})  midpoint {(l + r) / 2}")

# composing with the inverse collapses to the identity 1-IEM
print("\nF o F^-1 =", compose(F, invert(F)))

# a reversible map that is not symmetric: symmetric part o swap
lengths = Lengths(["1/5", "3/10", "3/10", "1/5"])
W = Iem(Permutation([4, 2, 3, 1]), lengths)  # swaps the equal outer pair
G = compose(Iem(Permutation.reversing(4), lengths), W, merge=False)
print("\nG symmetric?", G.is_symmetric(), " reversible?", is_reversible(G))
sym, swap = swap_decompose(G)
print("decomposition: symmetric part", sym.perm.final_order, "swap", swap.final_order)
