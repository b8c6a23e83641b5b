"""Integer partitions, interlacing relations and counting measures.

Partitions are stored as tuples of positive integers without trailing
zeros; the logical length N is passed explicitly wherever zero-padding
matters.
"""

from fractions import Fraction
from itertools import count


def normalize(parts):
    """Canonical form: tuple with trailing zeros stripped."""
    parts = tuple(int(p) for p in parts)
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ValueError("parts must be non-increasing: %r" % (parts,))
    if parts and parts[-1] < 0:
        raise ValueError("parts must be non-negative: %r" % (parts,))
    n = len(parts)
    while n and parts[n - 1] == 0:
        n -= 1
    return parts[:n]


def part(lam, i):
    """i-th part (1-based) with implicit zero padding."""
    return lam[i - 1] if 1 <= i <= len(lam) else 0


def size(lam):
    return sum(lam)


def length(lam):
    """Number of nonzero parts."""
    return len(lam)


def conjugate(lam):
    """Reflect the Young diagram along the main diagonal."""
    if not lam:
        return ()
    out = [0] * lam[0]
    for p in lam:
        for i in range(p):
            out[i] += 1
    return tuple(out)


def interlaces(mu, lam):
    """True iff lam_1 >= mu_1 >= lam_2 >= mu_2 >= ... (lam/mu a horizontal strip)."""
    n = max(len(mu), len(lam))
    for i in range(1, n + 1):
        if not (part(lam, i) >= part(mu, i) >= part(lam, i + 1)):
            return False
    return True


def interlaces_conjugate(mu, lam):
    """True iff conjugate(mu) interlaces conjugate(lam), i.e. 0 <= lam_i - mu_i <= 1."""
    n = max(len(mu), len(lam))
    return all(0 <= part(lam, i) - part(mu, i) <= 1 for i in range(1, n + 1))


def contains(mu, lam):
    """True iff mu_i <= lam_i for all i."""
    return all(part(mu, i) <= part(lam, i) for i in range(1, len(mu) + 1))


def shifted_coordinates(lam, N):
    """The strictly decreasing sequence (lam_i + N - i) for i = 1..N."""
    if len(lam) > N:
        raise ValueError("partition has %d parts, only N=%d slots" % (len(lam), N))
    return tuple(part(lam, i) + N - i for i in range(1, N + 1))


class CountingMeasure:
    """Empirical measure of the N rescaled coordinates (lam_i + N - i)/N, mass 1/N each."""

    def __init__(self, atoms):
        self.atoms = tuple(sorted(atoms, reverse=True))

    @property
    def mass(self):
        return Fraction(len(self.atoms), len(self.atoms)) if self.atoms else Fraction(0)

    def moment(self, k):
        if not self.atoms:
            raise ValueError("empty measure")
        return Fraction(sum(a ** k for a in self.atoms), 1) / len(self.atoms)

    def psi1(self):
        return self.moment(1)

    def psi2(self):
        return self.moment(2)


def counting_measure(lam, N):
    coords = shifted_coordinates(lam, N)
    return CountingMeasure(Fraction(c, N) for c in coords)


# ---------------------------------------------------------------------------
# enumeration utilities (brute-force oracles downstream)

def partitions_of_size(n):
    """All partitions of n, largest part first."""
    def rec(rest, maxpart):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, maxpart), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail
    return rec(n, n if n else 0)


def partitions_up_to_size(n):
    for m in range(n + 1):
        yield from partitions_of_size(m)


def partitions_in_box(max_part, max_len):
    """All partitions with first part <= max_part and at most max_len parts."""
    def rec(maxpart, slots):
        yield ()
        if slots == 0:
            return
        for first in range(maxpart, 0, -1):
            for tail in rec(first, slots - 1):
                yield (first,) + tail
    return rec(max_part, max_len)


def horizontal_strips_below(lam):
    """All mu with mu interlaced below lam (mu ≺ lam)."""
    n = len(lam)
    def rec(i):
        if i > n:
            yield ()
            return
        lo, hi = part(lam, i + 1), lam[i - 1]
        for v in range(hi, lo - 1, -1):
            for tail in rec(i + 1):
                yield (v,) + tail
    for mu in rec(1):
        yield normalize(mu)


def horizontal_strips_above(lam, max_part, max_len):
    """All mu ≻ lam within the given box."""
    n = len(lam)
    if n > max_len:
        return
    def rec(i, prev):
        # mu_i ranges in [lam_i, min(lam_{i-1}, prev-bounds)]
        if i > max_len:
            yield ()
            return
        lo = part(lam, i)
        hi = min(part(lam, i - 1) if i > 1 else max_part, max_part)
        if i > n and lo == 0:
            # rows beyond lam: mu_i in [0, lam_{i-1}]; allow stopping
            hi = min(hi, prev)
            for v in range(hi, -1, -1):
                if v == 0:
                    yield ()
                else:
                    for tail in rec(i + 1, v):
                        yield (v,) + tail
            return
        hi = min(hi, prev)
        for v in range(hi, lo - 1, -1):
            for tail in rec(i + 1, v):
                yield (v,) + tail
    bigcap = max(max_part, lam[0] if lam else 0)
    for mu in rec(1, bigcap):
        if len(mu) <= max_len and interlaces(lam, mu):
            yield normalize(mu)


def vertical_strips_below(lam):
    """All mu with conjugate(mu) ≺ conjugate(lam), i.e. lam/mu a vertical strip."""
    for muc in horizontal_strips_below(conjugate(lam)):
        yield conjugate(muc)


def vertical_strips_above(lam, max_part, max_len):
    """All mu with conjugate(mu) ≻ conjugate(lam) within the box."""
    for muc in horizontal_strips_above(conjugate(lam), max_len, max_part):
        yield conjugate(muc)


# ---------------------------------------------------------------------------
# text form used by config files and CSV output

def format_partition(lam):
    return "(" + ",".join(str(p) for p in lam) + ")"


def parse_partition(text):
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError("partition text must look like (3,1,1) or (): %r" % text)
    inner = text[1:-1].strip()
    if not inner:
        return ()
    return normalize(int(t) for t in inner.split(","))
