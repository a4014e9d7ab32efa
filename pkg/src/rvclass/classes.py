"""Names of the asymptotic classes and the membership vocabulary."""

import enum

RV = "RV"
SV = "SV"
ORV = "O-RV"
M = "M"
M_INF = "M_inf"
M_MINUS_INF = "M_minus_inf"

CLASSES = (RV, SV, ORV, M, M_INF, M_MINUS_INF)


class Membership(str, enum.Enum):
    IN = "in"
    OUT = "out"
    INCONCLUSIVE = "inconclusive"
    # ground-truth only: nothing is asserted
    UNKNOWN = "unknown"
