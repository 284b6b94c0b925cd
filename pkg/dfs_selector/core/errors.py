from __future__ import annotations


class DfsError(Exception):
    exit_code = 1


class UsageError(DfsError):
    exit_code = 2


class InvalidConfig(UsageError):
    pass


class InvalidSpec(UsageError):
    pass


class InvalidK(UsageError):
    pass


class InputError(DfsError):
    exit_code = 3


class ParseError(InputError):
    def __init__(self, message: str, *, line: int | None = None, column: int | str | None = None) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")
        self.line = line
        self.column = column


class MissingLabelColumn(InputError):
    pass


class NonNumericValue(ParseError):
    pass


class NonAscendingIndex(ParseError):
    pass


class DataError(DfsError):
    exit_code = 4


class InvalidDataset(DataError):
    pass


class DegenerateClass(DataError):
    pass


class ConstantFeature(DataError):
    def __init__(self, feature_id: int) -> None:
        super().__init__(f"feature {feature_id} is constant; its correlation is undefined")
        self.feature_id = feature_id


class ZeroVariance(DataError):
    pass


class ZeroVector(DataError):
    pass


class NumericalError(DfsError):
    exit_code = 5


class NotPositiveDefinite(NumericalError):
    pass


class DimensionMismatch(NumericalError):
    pass


class SingularWithinScatter(NumericalError):
    pass


class NumericalInstability(NumericalError):
    pass
