class FairtuneError(Exception):
    pass


class ConfigurationError(FairtuneError):
    pass


class ShapeError(FairtuneError):
    pass


class PreconditionError(FairtuneError):
    pass


class TemplateError(ConfigurationError):
    pass


class EmptySelectionError(ConfigurationError):
    """Raised when a selective mask picks no parameter group"""
    def __init__(self, k):
        self.k = k
        super().__init__(
            f"top-{k} intersection selected no parameter group, "\
            f"raise k"
        )


class ParseError(FairtuneError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class InsufficientPoolError(FairtuneError):
    def __init__(self, cell, needed, available):
        self.cell = cell
        self.needed = needed
        self.available = available
        super().__init__(
            f"synthetic pool has {available} examples in cell "\
            f"(y={cell[0]}, s={cell[1]}), {needed} needed"
        )


class UndefinedStratumError(FairtuneError):
    def __init__(self, s, y):
        self.s = s
        self.y = y
        super().__init__(
            f"stratum (s={s}, y={y}) is empty, metric undefined"
        )
