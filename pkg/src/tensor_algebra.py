"""
Truncated tensor algebra over a word alphabet, stored sparsely.

Two conventions are supported:

* ``sums``: one-dimensional iterated-sums symbols. A letter n stands for the
  power symbol [1^n] and a word's degree is the sum of its letters.
* ``integrals``: the alphabet {1..d}; a word's degree is its length.

Coefficients are whatever numeric type the caller supplies (int, float,
Fraction); the product never converts them.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Mapping, Sequence, Tuple

from category import Category, UNIT, scalar_equal
from utils.errors import AlphabetMismatch, ValidationError

Word = Tuple[int, ...]

SUMS = "sums"
INTEGRALS = "integrals"
MAX_FACTORIAL_LEVEL = 20


def degree(word: Word, alphabet: str) -> int:
    return sum(word) if alphabet == SUMS else len(word)


@dataclass(frozen=True)
class TensorElement:
    """A truncated tensor-series: coefficients on words of degree <= level."""
    level: int
    alphabet: str = SUMS
    dim: int = 1
    terms: Mapping[Word, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.level < 1:
            raise ValidationError(f"truncation level must be >= 1, got {self.level}")
        for word in self.terms:
            if degree(word, self.alphabet) > self.level:
                raise ValidationError(
                    f"word {word} has degree above the truncation level {self.level}"
                )

    @classmethod
    def unit(cls, level: int, alphabet: str = SUMS, dim: int = 1) -> "TensorElement":
        return cls(level, alphabet, dim, {(): 1})

    @property
    def signature(self) -> Tuple[int, str, int]:
        return (self.level, self.alphabet, self.dim)

    def __getitem__(self, word: Sequence[int]) -> Any:
        return self.terms.get(tuple(word), 0)

    def __iter__(self) -> Iterator[Word]:
        return iter(sorted(self.terms, key=lambda w: (degree(w, self.alphabet), w)))

    def level_part(self, k: int) -> Dict[Word, Any]:
        """Homogeneous part of degree k."""
        return {w: c for w, c in self.terms.items() if degree(w, self.alphabet) == k}


def tensor_mul(u: TensorElement, v: TensorElement) -> TensorElement:
    """
    Concatenation product: c_w = sum over splittings w = w1·w2 of u(w1)·v(w2),
    dropping words above the truncation level.
    """
    if u.signature != v.signature:
        raise AlphabetMismatch(u.signature, v.signature)

    alphabet, level = u.alphabet, u.level
    out: Dict[Word, Any] = {}
    v_items = [(w, c, degree(w, alphabet)) for w, c in v.terms.items()]
    for w1, c1 in u.terms.items():
        d1 = degree(w1, alphabet)
        for w2, c2, d2 in v_items:
            if d1 + d2 > level:
                continue
            word = w1 + w2
            out[word] = out.get(word, 0) + c1 * c2
    return TensorElement(level, alphabet, u.dim, out)


def tensor_exp(increment: Sequence[Any], level: int) -> TensorElement:
    """
    Truncated exponential of a level-one element over the alphabet {1..d}:
    sum over j <= level of increment^{⊗j} / j!.
    """
    if level > MAX_FACTORIAL_LEVEL:
        raise ValidationError(
            f"truncation level {level} exceeds {MAX_FACTORIAL_LEVEL} for iterated integrals"
        )
    dim = len(increment)
    terms: Dict[Word, Any] = {(): 1}
    for j in range(1, level + 1):
        factorial = math.factorial(j)
        for letters in itertools.product(range(1, dim + 1), repeat=j):
            coef = math.prod(increment[a - 1] for a in letters)
            terms[letters] = coef / factorial
    return TensorElement(level, INTEGRALS, dim, terms)


def power_series_cell(x: Any, level: int) -> TensorElement:
    """Iterated-sums cell: the sum over n <= level of x^n [1^n]."""
    terms: Dict[Word, Any] = {(): 1}
    for n in range(1, level + 1):
        terms[(n,)] = x ** n
    return TensorElement(level, SUMS, 1, terms)


class TensorAlgebraCategory(Category):
    """Delooping of the truncated tensor algebra under tensor_mul."""

    def __init__(
        self, level: int, alphabet: str = SUMS, dim: int = 1, rel: float = 1e-10, abs_tol: float = 1e-12
    ):
        self.level = level
        self.alphabet = alphabet
        self.dim = dim
        self.name = f"tensor-{alphabet}"
        self._coef_equal = scalar_equal(rel=rel, abs_tol=abs_tol)

    def src(self, morphism: TensorElement) -> str:
        return UNIT

    def tgt(self, morphism: TensorElement) -> str:
        return UNIT

    def identity(self, obj: Any = UNIT) -> TensorElement:
        return TensorElement.unit(self.level, self.alphabet, self.dim)

    def compose(self, f: TensorElement, g: TensorElement) -> TensorElement:
        return tensor_mul(f, g)

    def equal(self, f: TensorElement, g: TensorElement) -> bool:
        if f.signature != g.signature:
            return False
        words = set(f.terms) | set(g.terms)
        return all(self._coef_equal(f[w], g[w]) for w in words)

    def with_tolerance(self, rel: float, abs_tol: float) -> "TensorAlgebraCategory":
        return TensorAlgebraCategory(self.level, self.alphabet, self.dim, rel, abs_tol)
