"""Exception types raised across the toolkit."""


class AldkitError(Exception):
    pass


class SchemaError(AldkitError, ValueError):
    """Malformed input: wrong shape, bad JSON, out-of-range index."""


class AsymmetryError(SchemaError):
    pass


class TriangleViolation(SchemaError):
    def __init__(self, i: int, j: int, k: int, dij: float, via: float):
        self.triple = (i, j, k)
        super().__init__(f"d({i},{j})={dij} > d({i},{k})+d({k},{j})={via}")


class DiscretenessViolation(SchemaError):
    def __init__(self, i: int, j: int, dij: float, c: float):
        self.pair = (i, j)
        super().__init__(f"d({i},{j})={dij} is below the discreteness constant {c}")


class DisconnectedGraph(SchemaError):
    pass


class NotACover(SchemaError):
    pass


class InfiniteDepth(AldkitError):
    """A cover member is the whole space, so its boundary distance is infinite."""


class DegenerateWitness(AldkitError):
    """A witness function has zero norm and the variation ratio is undefined."""


class HypothesisFailed(AldkitError):
    pass


class InfeasiblePool(AldkitError):
    pass


class MonotonicityError(AldkitError, ValueError):
    pass


class ThresholdNotFound(AldkitError):
    pass


class SizeOverflow(AldkitError):
    pass


class SpecMismatch(AldkitError, ValueError):
    """A generator was asked for a cover that does not fit the space's shape."""
