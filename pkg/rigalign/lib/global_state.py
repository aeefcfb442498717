import json
import os
from typing import Any


ENV_KEY = "RIGALIGN_GLOBAL_STATE"


def load(env_key: str | None = None) -> dict:
    try:
        return json.loads(os.environ[env_key or ENV_KEY])
    except KeyError:
        return dict()


def save(state: dict, env_key: str | None = None) -> None:
    os.environ[env_key or ENV_KEY] = json.dumps(state, sort_keys=True)


def set(name: str, value: Any, **kwargs) -> None:
    state = load(**kwargs)
    state[name] = value
    save(state, **kwargs)


def get(*args, **kwargs) -> Any:
    return load(**kwargs).get(*args)


def clear(env_key: str | None = None) -> None:
    os.environ.pop(env_key or ENV_KEY, None)
