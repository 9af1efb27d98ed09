import json
from pathlib import Path

from fairtune.errors import FairtuneError
from fairtune.masks.selection import Provenance, SelectionMask


def mask_to_dict(mask):
    return {
        "provenance": mask.provenance.value,
        "k": mask.k,
        "groups": [[group, flag] for group, flag in enumerate(mask.selected)],
    }


def mask_from_dict(data):
    groups = sorted(data["groups"], key=lambda entry: entry[0])
    if [entry[0] for entry in groups] != list(range(len(groups))):
        raise FairtuneError("mask group ids must be 0..G-1")
    return SelectionMask(
        selected=[bool(entry[1]) for entry in groups],
        provenance=Provenance(data["provenance"]),
        k=data.get("k"),
    )


def save_mask(mask, path):
    path = Path(path)
    try:
        path.write_text(json.dumps(mask_to_dict(mask), sort_keys=True), encoding="utf-8")
    except OSError as err:
        raise FairtuneError(f"cannot write mask to {path}: {err}") from err
    return path


def load_mask(path):
    path = Path(path)
    try:
        return mask_from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError) as err:
        raise FairtuneError(f"cannot read mask from {path}: {err}") from err
