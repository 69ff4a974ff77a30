"""Desk-scale quantum metric experiments on Bunce-Deddens inductive sequences."""

from .bunce_deddens import (
    NotInImageError,
    StageElement,
    SupernaturalSequence,
    alpha,
    alpha_inverse,
    cond_expectation,
    lip_L,
    lip_S,
    random_element,
    stage_constants,
    trace_tau,
)
from .config import ConfigError, ExperimentConfig, load_config
from .ou_core import (
    DeskQMSpace,
    KantorovichParams,
    StateFunctional,
    finite_commutative_space,
    kantorovich,
    kantorovich_exact_finite,
    stage_space,
    state_net,
)
from .periodic import GridParams, PeriodicMatrixFunction, make_U_sigma, make_unitary_U, sup_norm
from .threads import Thread, check_thread_compat, embed_psi, thread_S0
from .tunnels import (
    BoundReport,
    Bridge,
    Tunnel,
    baire_distance,
    baire_lipschitz_check,
    bridge_length_estimate,
    distq_chain_bound,
    evident_tunnel,
    modified_lipnorm_bilip,
    modified_lipnorm_cond_exp,
    tunnel_extent_estimate,
)

__version__ = "0.1.0"
