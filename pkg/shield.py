"""Theta-shields over robust reach-avoid scores and the policies and MDPs they restrict."""

import logging

import numpy as np

from models import InvalidInputError, Mdp, RobustReachAvoidTable, Shield, TabularPolicy

logger = logging.getLogger(__name__)


def build_shield(scores: RobustReachAvoidTable, theta: float, kappa: float, mdp: Mdp) -> Shield:
    """Allow actions whose robust score exceeds 1 - theta.

    A state with no such action is relaxed: it allows every action within
    kappa of its best score, so the allowed set is never empty.
    """
    if not 0.0 <= theta <= 1.0 or not 0.0 <= kappa <= 1.0:
        raise InvalidInputError(f"theta and kappa must lie in [0, 1], got {theta}, {kappa}")
    q = np.asarray(scores.q, dtype=float)
    available = mdp.available
    if q.shape != available.shape:
        raise InvalidInputError("scores do not match the MDP shape")

    safe = available & (q > 1.0 - theta)
    relaxed = ~safe.any(axis=1)
    best = np.where(available, q, -np.inf).max(axis=1, keepdims=True)
    band = available & (q >= best - kappa)
    allowed = np.where(relaxed[:, None], band, safe)

    relaxed_states = frozenset(int(s) for s in np.flatnonzero(relaxed))
    boundary = mdp.target_mask | mdp.unsafe_mask
    interior = int((relaxed & ~boundary).sum())
    if interior:
        logger.warning(f"Shield relaxed {interior} states without a theta-safe action (kappa={kappa})")
    logger.debug(f"Shield allows {int(allowed.sum())} of {int(available.sum())} state-action pairs")

    return Shield(
        allowed=allowed,
        available=available,
        scores=q,
        theta=theta,
        kappa=kappa,
        relaxed_states=relaxed_states,
    )


def is_theta_safe_policy(policy: TabularPolicy, shield: Shield) -> bool:
    """Whether the policy only ever takes shield-allowed actions."""
    if policy.probs.shape != shield.allowed.shape:
        raise InvalidInputError("policy and shield shapes differ")
    return bool(np.all((policy.probs <= 0.0) | shield.allowed))


def shield_baseline(baseline: TabularPolicy, shield: Shield) -> TabularPolicy:
    """Move the probability of disallowed actions equally onto the allowed ones."""
    if baseline.probs.shape != shield.allowed.shape:
        raise InvalidInputError("baseline and shield shapes differ")
    allowed = shield.allowed
    probs = baseline.probs
    unsafe_mass = np.where(allowed, 0.0, probs).sum(axis=1, keepdims=True)
    share = unsafe_mass / allowed.sum(axis=1, keepdims=True)
    return TabularPolicy(probs=np.where(allowed, probs + share, 0.0))


def shield_mdp(mdp: Mdp, shield: Shield) -> Mdp:
    """The same MDP with A(s) replaced by the shield's allowed actions."""
    if shield.allowed.shape != mdp.available.shape:
        raise InvalidInputError("shield does not match the MDP shape")
    return mdp.replace(available=shield.allowed & mdp.available)
