"""Translation-invariant networks on the integer lattice."""

from ._tinet import (
    Divergence,
    Grid,
    HamiltonianSpec,
    InvalidArgument,
    ModelFile,
    Network,
    PreconditionViolation,
    ResolventSingular,
    Stencil,
    TinetError,
    actuated,
    chain,
    check_dissipative,
    check_negative_imaginary,
    check_passive,
    check_positive_real,
    dispersion,
    load_model,
    longwave,
    parse_model,
    phase_velocity,
    phonon_wave_check,
    pinned,
    plate,
    set_threads,
    simulate,
    storage_margin,
    threads,
)

__all__ = [name for name in dir() if not name.startswith("_")]
