"""
Optional multiprecision coefficients.

Coefficients are Python ``complex`` by default.  Inside
:func:`working_precision` they may be ``gmpy2.mpc`` numbers; every arithmetic
kernel keeps whatever type it receives, and scalar weights are passed as
exact :class:`fractions.Fraction` values so that no double rounding enters a
multiprecision computation.
"""
from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from numbers import Number

import gmpy2

MP_TYPES = (type(gmpy2.mpc(0)), type(gmpy2.mpfr(0)), type(gmpy2.mpq(0)))


def is_mp(c) -> bool:
    return isinstance(c, MP_TYPES)


def to_mp(c):
    """Exact conversion of a double (or rational) into the current precision."""
    if isinstance(c, Fraction):
        return gmpy2.mpc(gmpy2.mpq(c.numerator, c.denominator))
    return gmpy2.mpc(complex(c)) if not is_mp(c) else gmpy2.mpc(c)


def to_complex(c) -> complex:
    return complex(c)


def scalar_like(w, sample):
    """``w`` as a scalar suitable for multiplying coefficients of ``sample``'s type.

    Fractions stay exact for multiprecision coefficients and become doubles
    otherwise.
    """
    if isinstance(w, Fraction):
        return w if is_mp(sample) else complex(w.numerator / w.denominator)
    if is_mp(w):
        return w
    if isinstance(w, Number) or hasattr(w, "__complex__"):
        return complex(w)
    raise TypeError(f"unsupported scalar {w!r}")


def is_scalar(w) -> bool:
    return isinstance(w, (Number, Fraction)) or is_mp(w) or hasattr(w, "__complex__")


@contextmanager
def working_precision(bits: int):
    """Set the gmpy2 working precision (in bits) for the enclosed block."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield
