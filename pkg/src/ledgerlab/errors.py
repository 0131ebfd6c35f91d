"""Exception types shared across the ledgerlab modules."""


class LedgerLabError(Exception):
    """Base class for every error raised by ledgerlab."""


class AppendToInvalidChain(LedgerLabError):
    pass


class OutOfRange(LedgerLabError, IndexError):
    pass


class DuplicateRecordId(LedgerLabError, ValueError):
    pass


class BadSaltLength(LedgerLabError, ValueError):
    pass


class BadTheta(LedgerLabError, ValueError):
    pass


class BadPrior(LedgerLabError, ValueError):
    pass


class BadK(LedgerLabError, ValueError):
    pass


class IncompleteTranscript(LedgerLabError):
    pass


class NoSurvivor(LedgerLabError):
    pass


class ConfigError(LedgerLabError, ValueError):
    pass


class ParseError(LedgerLabError):
    """A ledger file line could not be decoded."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WitnessFailed(LedgerLabError):
    """One conjunct of the immutable-but-untrusted witness did not hold.

    ``leg`` is one of ``"immutable"``, ``"naive_trusted"`` or
    ``"informed_trusted"``; ``witness`` carries the measured values.
    """

    def __init__(self, leg: str, witness, detail: str = ""):
        self.leg = leg
        self.witness = witness
        self.detail = detail
        msg = f"witness failed on {leg}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
