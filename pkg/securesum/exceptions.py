class SecureSumError(Exception):
    """Base class for every error raised by the securesum library."""


class ConfigurationError(SecureSumError, ValueError):
    """A protocol or experiment configuration violates a precondition."""


class TooFewPartiesError(ConfigurationError):
    def __init__(self, n, minimum):
        self.n = n
        self.minimum = minimum
        super().__init__(f"too few parties: n={n}, the protocol needs at least {minimum}")


class NonPrimeModulusError(ConfigurationError):
    def __init__(self, modulus):
        self.modulus = modulus
        super().__init__(f"modulus {modulus} is not prime; linear inference needs a field")


class UnknownPartyError(SecureSumError, LookupError):
    def __init__(self, party):
        self.party = party
        super().__init__(f"unknown party P{party}")


class MalformedTranscriptError(SecureSumError, ValueError):
    """A transcript breaks its structural invariants or cannot be parsed."""


class InconsistentViewError(SecureSumError):
    """The equations of a coalition view contradict each other."""


class ProtocolStateError(SecureSumError):
    """A party received a message it cannot accept in its current state."""
