"""p-adic higher Green's functions at real multiplication points."""
from greens.errors import GreensError
from greens.padic import QuadExtScalar, QuadField
from greens.quadforms import QuadForm, RMDivisor

__all__ = ["GreensError", "QuadExtScalar", "QuadField", "QuadForm", "RMDivisor"]
