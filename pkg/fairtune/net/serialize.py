import json
from pathlib import Path

import numpy as np

from fairtune.errors import FairtuneError
from fairtune.net.arch import ModelArch
from fairtune.net.model import GroupRole, Model, ParameterGroup


FORMAT = "fairtune-model"
VERSION = 1


def model_to_dict(model):
    return {
        "format": FORMAT,
        "version": VERSION,
        "arch": model.arch.to_dict(),
        "seed": int(model.seed),
        "groups": [
            {
                "group_id": group.group_id,
                "layer_index": group.layer_index,
                "role": group.role.value,
                "block_id": group.block_id,
                "shape": list(group.values.shape),
                "values": group.values.ravel().tolist(),
            }
            for group in model.groups
        ],
    }


def model_from_dict(data):
    if data.get("format") != FORMAT:
        raise FairtuneError(f"not a {FORMAT} container")
    groups = [
        ParameterGroup(
            group_id=entry["group_id"],
            layer_index=entry["layer_index"],
            role=GroupRole(entry["role"]),
            block_id=entry["block_id"],
            values=np.array(entry["values"], dtype=np.float64).reshape(
                entry["shape"]
            ),
        )
        for entry in sorted(data["groups"], key=lambda e: e["group_id"])
    ]
    return Model(
        arch=ModelArch.from_dict(data["arch"]),
        groups=tuple(groups),
        seed=data["seed"],
    )


def dumps_model(model):
    ## repr-based floats round-trip bit-exactly
    return json.dumps(model_to_dict(model), sort_keys=True)


def save_model(model, path):
    path = Path(path)
    try:
        path.write_text(dumps_model(model), encoding="utf-8")
    except OSError as err:
        raise FairtuneError(f"cannot write model to {path}: {err}") from err
    return path


def load_model(path):
    path = Path(path)
    try:
        return model_from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as err:
        raise FairtuneError(f"cannot read model from {path}: {err}") from err
