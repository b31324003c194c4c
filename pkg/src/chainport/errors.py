"""Exception types raised by the simulator."""


class ChainportError(Exception):
    pass


class ConfigError(ChainportError, ValueError):
    """Invalid protocol specification or run configuration."""


class SizeLimitError(ChainportError):
    """Requested system exceeds the dense simulation limits of a mode."""


class NoPauliCorrection(ChainportError):
    """No per-site Pauli correction maps a branch onto the cyclic target.

    Carries the offending difference vector and the best overlap any Pauli
    label vector achieved, so callers can report how far off the search was.
    """

    def __init__(self, d, best_overlap, best_labels=None):
        self.d = tuple(d)
        self.best_overlap = float(best_overlap)
        self.best_labels = best_labels
        super().__init__(
            f"no per-site Pauli correction for d={list(self.d)}; "
            f"best channel overlap {self.best_overlap:.12g}"
            + (f" with labels {best_labels}" if best_labels else "")
        )


class ValidationFailure(ChainportError):
    def __init__(self, d, input_label, fidelity):
        self.d = tuple(d)
        self.input_label = input_label
        self.fidelity = float(fidelity)
        super().__init__(
            f"corrected fidelity {self.fidelity:.12g} for d={list(self.d)}, input {input_label}"
        )
