"""Semidefinite converse bounds for classical communication over quantum channels."""

from .bounds import (
    BoundResult,
    DomainError,
    SolverFailure,
    activated_ns,
    beta_of,
    c_beta,
    dh_epsilon,
    metaconverse_vbeta,
    mw_bound,
    ns_oneshot,
)
from .channel import ChannelSpec, ChoiMatrix, erasure_channel, noiseless_channel
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundResult",
    "ChannelSpec",
    "ChoiMatrix",
    "DomainError",
    "SolverFailure",
    "activated_ns",
    "beta_of",
    "c_beta",
    "dh_epsilon",
    "erasure_channel",
    "metaconverse_vbeta",
    "mw_bound",
    "noiseless_channel",
    "ns_oneshot",
]
