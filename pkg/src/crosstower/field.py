"""Exact coefficient fields: GF(p) for a prime p, and the rationals.

All arithmetic is exact.  Prime-field scalars are Python ints in [0, p);
rational scalars are `fractions.Fraction`.  Matrices (see `matrix.py`) store
prime-field entries in float64 numpy arrays, which is exact as long as every
intermediate value stays below 2**53; the field descriptor centralizes the
bounds that make that safe.
"""

from __future__ import annotations

from fractions import Fraction


DEFAULT_PRIME = 32003


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """Descriptor for the coefficient field of a computation.

    kind == "prime": GF(p), entries normalized to [0, p).
    kind == "rational": Fraction arithmetic with arbitrary precision.
    """

    __slots__ = ("kind", "p")

    def __init__(self, kind: str, p: int | None = None):
        if kind == "prime":
            if p is None or not _is_prime(p):
                raise ValueError(f"prime field needs a prime modulus, got {p}")
            # float64 matmul must stay exact: inner-dim * (p-1)^2 < 2**53.
            if p >= 1 << 20:
                raise ValueError("modulus too large for exact float64 products")
        elif kind == "rational":
            p = None
        else:
            raise ValueError(f"unknown field kind {kind!r}")
        self.kind = kind
        self.p = p

    # -- scalar helpers -------------------------------------------------

    def normalize(self, x):
        if self.kind == "prime":
            return int(x) % self.p
        return Fraction(x)

    def zero(self):
        return 0 if self.kind == "prime" else Fraction(0)

    def one(self):
        return 1 if self.kind == "prime" else Fraction(1)

    def inv(self, x):
        if self.kind == "prime":
            x = int(x) % self.p
            if x == 0:
                raise ZeroDivisionError("inverse of 0")
            return pow(x, self.p - 2, self.p)
        x = Fraction(x)
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / x

    def characteristic(self) -> int:
        return self.p if self.kind == "prime" else 0

    # -- serialization ---------------------------------------------------

    def scalar_to_str(self, x) -> str:
        if self.kind == "prime":
            return str(int(x) % self.p)
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    def scalar_from_str(self, s: str):
        if self.kind == "prime":
            return int(s) % self.p
        return Fraction(s)

    def to_json(self) -> dict:
        return {"kind": self.kind} if self.kind == "rational" else {"kind": "prime", "p": self.p}

    @staticmethod
    def from_json(obj: dict) -> "Field":
        return Field(obj["kind"], obj.get("p"))

    def __eq__(self, other):
        return isinstance(other, Field) and self.kind == other.kind and self.p == other.p

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "Q" if self.kind == "rational" else f"GF({self.p})"


def prime_field(p: int = DEFAULT_PRIME) -> Field:
    return Field("prime", p)


def rational_field() -> Field:
    return Field("rational")


def field_from_flag(flag: str) -> Field:
    """Parse a CLI-style field flag: "rational" or a prime modulus."""
    if flag == "rational":
        return rational_field()
    return prime_field(int(flag))
