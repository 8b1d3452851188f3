from ._csmci import (
    Error,
    Graph,
    IsingModel,
    __version__,
    csmci_estimate,
    exact_ml,
    learn,
    mci_estimate,
    presets,
    run_experiment,
    smci_estimate,
)

__all__ = [
    "Error",
    "Graph",
    "IsingModel",
    "csmci_estimate",
    "exact_ml",
    "learn",
    "mci_estimate",
    "presets",
    "run_experiment",
    "smci_estimate",
]
