"""Classical number-representation kernel.

Factoradics (mixed-radix digit strings with digit j in 0..j), the
combinatorial number system (ranking/unranking of fixed-weight bit
strings), the left-to-right conversion from a factoradic to a weight-k
bit string, its randomized inverse, and the birthday-style lower bound
on the distinct-index probability used by the Dicke filtering step.

Digit order is most-significant-first: a length-n factoradic is
``(y_{n-1}, ..., y_0)``.  Bit strings are tuples with bit n-1 leftmost.
"""
from __future__ import annotations

import math
from typing import Sequence, Tuple

Bits = Tuple[int, ...]


def _check_factoradic(digits: Sequence[int]) -> None:
    n = len(digits)
    for pos, d in enumerate(digits):
        j = n - 1 - pos
        if not 0 <= d <= j:
            raise ValueError(f"digit {d} at weight {j} outside 0..{j}")


def factoradic_to_int(digits: Sequence[int]) -> int:
    """Evaluate sum of y_j * j! for digits given most-significant-first."""
    _check_factoradic(digits)
    n = len(digits)
    return sum(d * math.factorial(n - 1 - pos) for pos, d in enumerate(digits))


def int_to_factoradic(m: int, n: int) -> Bits:
    if not 0 <= m < math.factorial(n):
        raise ValueError(f"{m} not in [0, {n}!)")
    digits = []
    for j in range(n - 1, -1, -1):
        f = math.factorial(j)
        digits.append(m // f)
        m %= f
    return tuple(digits)


def all_factoradics(n: int):
    """Yield every n-factoradic, most-significant-first."""
    for m in range(math.factorial(n)):
        yield int_to_factoradic(m, n)


def comb_to_int(positions: Sequence[int]) -> int:
    """Rank of the strictly-decreasing index sequence (c_k, ..., c_1)."""
    k = len(positions)
    for i in range(k - 1):
        if positions[i] <= positions[i + 1]:
            raise ValueError("index sequence must be strictly decreasing")
    if k and positions[-1] < 0:
        raise ValueError("indices must be nonnegative")
    return sum(math.comb(c, k - i) for i, c in enumerate(positions))


def int_to_comb(m: int, k: int, n: int) -> Bits:
    """Unrank m into the decreasing sequence (c_k, ..., c_1) with c_k < n.

    The ones of the m-th lexicographically-smallest weight-k n-bit string
    sit exactly at these positions (bit n-1 leftmost).
    """
    if not 0 <= m < math.comb(n, k):
        raise ValueError(f"{m} not in [0, C({n},{k}))")
    positions = []
    for i in range(k, 0, -1):
        # greedy: biggest c with C(c, i) <= m
        c = i - 1
        while math.comb(c + 1, i) <= m:
            c += 1
        positions.append(c)
        m -= math.comb(c, i)
    return tuple(positions)


def positions_to_bits(positions: Sequence[int], n: int) -> Bits:
    bits = [0] * n
    for p in positions:
        bits[n - 1 - p] = 1
    return tuple(bits)


def bits_to_positions(bits: Sequence[int]) -> Bits:
    n = len(bits)
    return tuple(n - 1 - i for i, b in enumerate(bits) if b)


def fac_to_comb(digits: Sequence[int], k: int) -> Bits:
    """Map a factoradic to a weight-k bit string, scanning left to right.

    Bit n-j is set iff the digit at that position is smaller than the
    number of ones still owed.
    """
    _check_factoradic(digits)
    n = len(digits)
    if not 0 <= k <= n:
        raise ValueError("weight out of range")
    out = []
    h = 0  # ones emitted so far
    for d in digits:
        bit = 1 if d < k - h else 0
        out.append(bit)
        h += bit
    return tuple(out)


def comb_to_fac(bits: Sequence[int], z: Sequence[int], o: Sequence[int]) -> Bits:
    """Rebuild a factoradic from a weight-k bit string and fresh digits.

    ``z`` is an (n-k)-factoradic, ``o`` a k-factoradic; over all (z, o)
    the output ranges over exactly the k!(n-k)! preimages of ``bits``
    under :func:`fac_to_comb`.
    """
    n = len(bits)
    k = sum(bits)
    if len(z) != n - k or len(o) != k:
        raise ValueError("auxiliary factoradic lengths must be n-k and k")
    _check_factoradic(z)
    _check_factoradic(o)
    digits = []
    ones = zeros = 0
    for bit in bits:
        if bit:
            # i-th one (left to right) consumes digit O_{k-1-i}; its range
            # 0..k-ones-1 is exactly the digit values that emit a 1 here.
            digits.append(o[ones])
            ones += 1
        else:
            # i-th zero consumes digit Z_{n-k-1-i}, shifted past the 1-band.
            digits.append(k - ones + z[zeros])
            zeros += 1
    return tuple(digits)


def fac_decompose(digits: Sequence[int], k: int) -> Tuple[Bits, Bits, Bits]:
    """Invert :func:`comb_to_fac`: split y into (bits, Z, O)."""
    _check_factoradic(digits)
    n = len(digits)
    bits = fac_to_comb(digits, k)
    z = [0] * (n - k)
    o = [0] * k
    ones = zeros = 0
    for pos, bit in enumerate(bits):
        d = digits[pos]
        if bit:
            o[ones] = d
            ones += 1
        else:
            z[zeros] = d - (k - ones)
            zeros += 1
    _check_factoradic(z)
    _check_factoradic(o)
    return bits, tuple(z), tuple(o)


def birthday_bound_check(n: int, k: int) -> Tuple[float, float, bool]:
    """Compare n!/(n^k (n-k)!) against exp(-2k^2/n) in log space."""
    if k >= n / 2:
        raise ValueError("requires k < n/2")
    log_lhs = sum(math.log((n - i) / n) for i in range(k))
    lhs = math.exp(log_lhs)
    rhs = math.exp(-2.0 * k * k / n)
    # strict for k >= 1; k = 0 is the degenerate 1 >= 1 case
    return lhs, rhs, log_lhs >= (-2.0 * k * k / n)


def distinct_index_probability(n: int, k: int) -> float:
    """Probability that k independent uniform draws from n values differ."""
    p = 1.0
    for i in range(k):
        p *= (n - i) / n
    return p
