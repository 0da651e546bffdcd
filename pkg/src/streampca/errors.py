"""Exception types shared across the package."""

from __future__ import annotations


class StreamPCAError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(StreamPCAError, ValueError):
    """An argument violates a documented precondition."""


class RankDeficiencyError(StreamPCAError):
    """QR factorization met a numerically rank-deficient column.

    The offending zero-based column index is stored in ``column``.
    """

    def __init__(self, column: int, message: str | None = None):
        self.column = int(column)
        if message is None:
            message = f"rank-deficient input: column {self.column} is numerically dependent"
        super().__init__(message)


class DegenerateBlockError(StreamPCAError):
    """A block power update produced a rank-deficient accumulator.

    ``block_index`` is the one-based index of the block that failed.
    """

    def __init__(self, block_index: int, column: int):
        self.block_index = int(block_index)
        self.column = int(column)
        super().__init__(
            f"degenerate block {self.block_index}: accumulator column {self.column} "
            "is numerically rank-deficient"
        )


class InfiniteAngleError(StreamPCAError):
    """tan of a principal angle is unbounded because the angle is 90 degrees."""


class ParseError(StreamPCAError):
    """A data file violates its documented format.

    ``line`` is the one-based line number where parsing failed.
    """

    def __init__(self, line: int, message: str):
        self.line = int(line)
        super().__init__(f"line {self.line}: {message}")


class ConfigError(StreamPCAError):
    """An experiment configuration is malformed.

    ``path`` locates the offending field, e.g. ``algorithms[2].c``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
