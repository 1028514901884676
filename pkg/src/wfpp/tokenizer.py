"""Caption tokenization: lowercased words, punctuation as standalone tokens."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from wfpp import kernel


@dataclass(frozen=True)
class TokenizerConfig:
    """Immutable tokenization rules; hashed into every frequency table.

    placeholder_atoms lists literal strings (e.g. "<person>") emitted as
    single tokens instead of being split at punctuation.
    """

    lowercase: bool = True
    split_punctuation: bool = True
    max_tokens: int | None = None
    placeholder_atoms: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.max_tokens is not None and self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        object.__setattr__(self, "placeholder_atoms", tuple(self.placeholder_atoms))

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "split_punctuation": self.split_punctuation,
            "max_tokens": self.max_tokens,
            "placeholder_atoms": list(self.placeholder_atoms),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        return cls(
            lowercase=d.get("lowercase", True),
            split_punctuation=d.get("split_punctuation", True),
            max_tokens=d.get("max_tokens"),
            placeholder_atoms=tuple(d.get("placeholder_atoms", ())),
        )

    def digest(self) -> str:
        """Stable hash of the config, recorded by artifacts built with it."""
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def kernel_atoms(self) -> tuple[str, ...]:
        """Atoms as matched by the kernel: lowercased if the config lowercases,
        longest first so overlapping atoms resolve deterministically."""
        atoms = self.placeholder_atoms
        if self.lowercase:
            atoms = tuple(a.lower() for a in atoms)
        return tuple(sorted(atoms, key=lambda a: (-len(a), a)))

    def kernel_args(self) -> tuple:
        max_tokens = -1 if self.max_tokens is None else self.max_tokens
        return (self.lowercase, self.split_punctuation, self.kernel_atoms(), max_tokens)


def tokenize(caption: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Deterministically split a caption into word tokens."""
    return kernel.tokenize(caption, *config.kernel_args())
