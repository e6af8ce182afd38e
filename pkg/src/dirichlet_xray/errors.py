"""Exception types shared across the package."""


class DirichletXrayError(Exception):
    pass


class FactorizationBoundError(DirichletXrayError):
    def __init__(self, n: int, bound: int):
        super().__init__(f"cannot factor {n}: beyond configured bound {bound}")
        self.n = n
        self.bound = bound


class VanishingFactor(DirichletXrayError):
    def __init__(self, p: int, s: complex):
        super().__init__(f"Euler factor at p={p} vanishes at s={s}")
        self.p = p
        self.s = s


class SpecParseError(DirichletXrayError, ValueError):
    pass


class PoleAtOne(DirichletXrayError):
    def __init__(self, s: complex):
        super().__init__(f"pole at s=1 (s={s})")
        self.s = s


class PoleInsideCircle(DirichletXrayError):
    pass


class NoFunctionalEquation(DirichletXrayError):
    pass


class BoundaryZero(DirichletXrayError):
    pass


class PoleInRegion(DirichletXrayError):
    pass


class NewtonDiverged(DirichletXrayError):
    def __init__(self, message: str, cell=None):
        super().__init__(message)
        self.cell = cell


class CollapsedToIdentity(DirichletXrayError):
    pass


class NoRootOnSegment(DirichletXrayError):
    pass


class SeedNotOnCurve(DirichletXrayError):
    pass
