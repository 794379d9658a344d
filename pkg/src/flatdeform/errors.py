"""Exception types shared across the package."""


class FlatDeformError(Exception):
    """Base class."""


class NotDivisible(FlatDeformError, ArithmeticError):
    pass


class CheckFailed(FlatDeformError):
    """An identity did not hold; carries the first offending term."""

    def __init__(self, name, detail="", qexp=None, exps=None, lhs=None, rhs=None, **witness):
        self.name = name
        self.detail = detail
        self.witness = witness
        self.qexp = qexp
        self.exps = exps
        self.lhs = lhs
        self.rhs = rhs
        where = ""
        if qexp is not None:
            where = f" at q^{qexp} z^{tuple(exps) if exps is not None else ()}"
            if lhs is not None or rhs is not None:
                where += f": {lhs} != {rhs}"
        super().__init__(f"{name} failed{where}{(' - ' + detail) if detail else ''}")

    def counterexample(self):
        if self.qexp is None:
            return dict(self.witness) or None
        return {"q_exp": self.qexp, "z_exp": list(self.exps) if self.exps is not None else None,
                "lhs": str(self.lhs), "rhs": str(self.rhs)}


class NotSymmetric(FlatDeformError, ValueError):
    pass


class NotAntisymmetric(FlatDeformError, ValueError):
    pass


class SemicontinuityViolation(FlatDeformError):
    pass


class UnknownFamily(FlatDeformError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class WindowEscape(FlatDeformError):
    pass


class EmptySystem(FlatDeformError, ValueError):
    pass


class SpecParseError(FlatDeformError, ValueError):
    def __init__(self, message, text="", pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos} in {text!r}"
        super().__init__(message)
