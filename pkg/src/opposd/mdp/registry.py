"""
opposd.mdp.registry — Environment discovery.

Environments come from three sources:

1. Built-ins (``cartpole``, ``hard_example``)
2. entry_points in the ``opposd.envs`` group (third-party packages)
3. Runtime register (for testing)

Names of the form ``tabular:<file.json>`` load a tabular MDP file and
wrap it in a TabularEnv; they never go through the registry.

A factory is called with keyword options (``horizon``, ``gamma``) and
returns an environment.
"""

from __future__ import annotations

import logging
from typing import Any, Callable

from opposd.mdp.env import Env, TabularEnv
from opposd.mdp.tabular import MdpError, load_mdp

logger = logging.getLogger(__name__)

EnvFactory = Callable[..., Env]

TABULAR_PREFIX = "tabular:"

# Runtime registry
_registry: dict[str, EnvFactory] = {}
_discovered = False


def _cartpole(horizon: int | None = None, gamma: float | None = None) -> Env:
    from opposd.mdp.cartpole import CartPoleEnv

    return CartPoleEnv(horizon=horizon or 200, gamma=1.0 if gamma is None else gamma)


def _hard_example(horizon: int | None = None, gamma: float | None = None) -> Env:
    from opposd.mdp.hard_example import HardExample

    ex = HardExample()
    if horizon is not None and horizon != ex.mdp.horizon:
        logger.warning("hard_example has a fixed horizon of %d; ignoring %d",
                       ex.mdp.horizon, horizon)
    if gamma is not None and gamma != ex.mdp.gamma:
        logger.warning("hard_example is undiscounted; ignoring gamma=%s", gamma)
    return TabularEnv(ex.mdp, name="hard_example", behavior=ex.behavior)


BUILTIN_ENVS: dict[str, EnvFactory] = {
    "cartpole": _cartpole,
    "hard_example": _hard_example,
}


def _discover_envs() -> None:
    """Load built-ins, then entry points (which may override them)."""
    global _discovered
    if _discovered:
        return
    _discovered = True

    for name, factory in BUILTIN_ENVS.items():
        _registry.setdefault(name, factory)

    try:
        from importlib.metadata import entry_points
        for ep in entry_points(group="opposd.envs"):
            try:
                _registry[ep.name] = ep.load()
            except Exception as e:
                logger.warning("Could not load environment '%s': %s", ep.name, e)
    except Exception as e:
        logger.debug("Entry point discovery failed: %s", e)


def register_env(name: str, factory: EnvFactory) -> None:
    """Manually register an environment factory (for testing/dev)."""
    _registry[name] = factory


def get_env_factory(name: str) -> EnvFactory | None:
    _discover_envs()
    return _registry.get(name)


def make_env(name: str, **options: Any) -> Env:
    """Create an environment by name or ``tabular:<file>``."""
    if name.startswith(TABULAR_PREFIX):
        path = name[len(TABULAR_PREFIX):]
        mdp, behavior = load_mdp(path)
        if options.get("horizon") is not None:
            mdp.horizon = int(options["horizon"])
        if options.get("gamma") is not None:
            mdp.gamma = float(options["gamma"])
        return TabularEnv(mdp, name=name, behavior=behavior)

    factory = get_env_factory(name)
    if factory is None:
        known = ", ".join(sorted(list_envs()))
        raise MdpError(f"Unknown environment '{name}' (known: {known}, tabular:<file>)")
    return factory(**options)


def list_envs() -> dict[str, EnvFactory]:
    """Return all registered environments."""
    _discover_envs()
    return dict(_registry)


def reset_registry() -> None:
    """Reset the registry. For testing."""
    global _discovered
    _registry.clear()
    _discovered = False
