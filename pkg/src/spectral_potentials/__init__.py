"""Numerical laboratory for potential operators of Jacobi and Fourier-Bessel expansions."""

from .specfun import (
    BesselOrder,
    DomainError,
    JacobiParams,
    NumericalError,
    ParameterError,
    Setting,
    SettingKind,
)

__all__ = [
    "BesselOrder",
    "DomainError",
    "JacobiParams",
    "NumericalError",
    "ParameterError",
    "Setting",
    "SettingKind",
]
