"""
Binary spacing words over the alphabet {S, L}.

Fibonacci and other Sturmian words drive the aperiodic line spacing of
bigrids and Ammann bar families; the zigzag counterexample words show what
goes wrong when runs of equal gaps grow without bound.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import InvalidParams
from .models import GOLDEN_RATIO

logger = logging.getLogger(__name__)

SHORT = "S"
LONG = "L"
SILVER_RATIO = 1 + math.sqrt(2)

_FIBONACCI_SUBSTITUTION = str.maketrans({LONG: "LS", SHORT: "L"})
_OCTONACCI_SUBSTITUTION = str.maketrans({LONG: "LLS", SHORT: "L"})
_SWAP = str.maketrans({LONG: SHORT, SHORT: LONG})


@dataclass(frozen=True)
class SpacingWord:
    """A finite word over {S, L} together with the geometric length of each symbol."""
    symbols: str
    len_s: float = 1.0
    len_l: float = GOLDEN_RATIO

    def __post_init__(self):
        stray = set(self.symbols) - {SHORT, LONG}
        if stray:
            raise InvalidParams(f"spacing word contains symbols other than S/L: {sorted(stray)}")
        if not (self.len_s > 0 and self.len_l > 0):
            raise InvalidParams(f"symbol lengths must be positive, got S={self.len_s}, L={self.len_l}")

    @classmethod
    def from_string(cls, text: str, len_s: float = 1.0, len_l: float = GOLDEN_RATIO) -> "SpacingWord":
        return cls(text.strip().upper(), len_s, len_l)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols

    def __add__(self, other: "SpacingWord") -> "SpacingWord":
        return SpacingWord(self.symbols + other.symbols, self.len_s, self.len_l)

    def lengths(self) -> np.ndarray:
        """Geometric length of every symbol, in order."""
        codes = np.frombuffer(self.symbols.encode("ascii"), dtype=np.uint8)
        return np.where(codes == ord(SHORT), self.len_s, self.len_l).astype(float)

    def total_length(self) -> float:
        return float(self.lengths().sum())

    def swapped(self) -> "SpacingWord":
        return SpacingWord(self.symbols.translate(_SWAP), self.len_s, self.len_l)

    def reversed(self) -> "SpacingWord":
        return SpacingWord(self.symbols[::-1], self.len_s, self.len_l)

    def is_palindrome(self) -> bool:
        return self.symbols == self.symbols[::-1]


WordLike = Union[SpacingWord, str]


def _symbols(w: WordLike) -> str:
    return w.symbols if isinstance(w, SpacingWord) else w


def fibonacci_word(k: int, len_s: float = 1.0, len_l: float = GOLDEN_RATIO) -> SpacingWord:
    """Apply σ(L)=LS, σ(S)=L k times to the word L."""
    if k < 0:
        raise InvalidParams(f"Fibonacci level must be non-negative, got {k}")
    word = LONG
    for _ in range(k):
        word = word.translate(_FIBONACCI_SUBSTITUTION)
    return SpacingWord(word, len_s, len_l)


def octonacci_word(k: int, len_s: float = 1.0, len_l: float = SILVER_RATIO) -> SpacingWord:
    """Apply σ(L)=LLS, σ(S)=L k times to the word L."""
    if k < 0:
        raise InvalidParams(f"Octonacci level must be non-negative, got {k}")
    word = LONG
    for _ in range(k):
        word = word.translate(_OCTONACCI_SUBSTITUTION)
    return SpacingWord(word, len_s, len_l)


def thue_morse_word(k: int, len_s: float = 1.0, len_l: float = GOLDEN_RATIO) -> SpacingWord:
    """
    Thue-Morse prefix of length 2**k with 0 -> L and 1 -> S.

    Not balanced: factors such as LL and SS coexist, so C4 guarantees do not
    carry over to grids spaced by this word.
    """
    if k < 0:
        raise InvalidParams(f"Thue-Morse level must be non-negative, got {k}")
    n = np.arange(2 ** k, dtype=np.int64)
    parity = np.zeros_like(n)
    bits = n.copy()
    while bits.any():
        parity ^= bits & 1
        bits >>= 1
    return SpacingWord("".join(SHORT if p else LONG for p in parity), len_s, len_l)


def mechanical_word(slope: float, intercept: float, start: int, length: int,
                    len_s: float = 1.0, len_l: float = GOLDEN_RATIO) -> SpacingWord:
    """
    Sturmian word of the given slope: the symbol at position n is L exactly
    when floor((n+1)*slope + intercept) exceeds floor(n*slope + intercept).
    """
    if not 0 < slope < 1:
        raise InvalidParams(f"mechanical word slope must lie in (0, 1), got {slope}")
    if length < 0:
        raise InvalidParams(f"word length must be non-negative, got {length}")
    n = np.arange(start, start + length, dtype=float)
    steps = np.floor((n + 1) * slope + intercept) - np.floor(n * slope + intercept)
    return SpacingWord("".join(LONG if s else SHORT for s in steps), len_s, len_l)


def fibonacci_grid(beta: float, start: int, length: int,
                   len_s: float = 1.0, len_l: float = GOLDEN_RATIO) -> SpacingWord:
    """Gaps n = start .. start+length-1 of the Fibonacci grid with phase beta."""
    return mechanical_word(1 / GOLDEN_RATIO, beta, start, length, len_s, len_l)


def hamming_weight(w: WordLike) -> int:
    """Number of S symbols."""
    return _symbols(w).count(SHORT)


def is_balanced(w: WordLike, max_factor_len: int) -> bool:
    """
    True when, for every factor length up to max_factor_len, the Hamming
    weights of all factors of that length differ by at most one.
    """
    symbols = _symbols(w)
    if max_factor_len < 1:
        raise InvalidParams(f"max_factor_len must be positive, got {max_factor_len}")
    if max_factor_len > len(symbols):
        logger.debug(f"Clamping factor length {max_factor_len} to word length {len(symbols)}")
        max_factor_len = len(symbols)
    if not symbols:
        return True

    is_short = np.frombuffer(symbols.encode("ascii"), dtype=np.uint8) == ord(SHORT)
    prefix = np.concatenate(([0], np.cumsum(is_short, dtype=np.int64)))
    for m in range(1, max_factor_len + 1):
        weights = prefix[m:] - prefix[:-m]
        if weights.max() - weights.min() > 1:
            return False
    return True


def counterexample_words(m: int, len_s: float = 1.0,
                         len_l: float = GOLDEN_RATIO) -> Tuple[SpacingWord, SpacingWord]:
    """
    Symmetric truncations of the zigzag words W_A and W_B.

    W_A has centre LL flanked on both sides by alternating runs of lengths
    4, 16, ..., 4**m, the run next to the centre being S. W_B swaps S and L.
    """
    if m < 0:
        raise InvalidParams(f"counterexample level must be non-negative, got {m}")
    runs = [(SHORT if i % 2 else LONG) * 4 ** i for i in range(1, m + 1)]
    right = "".join(runs)
    word_a = SpacingWord(right[::-1] + LONG + LONG + right, len_s, len_l)
    return word_a, word_a.swapped()
