import logging
from enum import Enum

import numpy as np

from fairtune.data.dataset import CELLS, cell_counts, concat_datasets
from fairtune.errors import InsufficientPoolError, PreconditionError


logger = logging.getLogger("fairtune")


class ComposeMode(str, Enum):
    SUPPLEMENTATION = "supplementation"
    REPAIRING = "repairing"


def repair_deficits(d_r):
    counts = cell_counts(d_r)
    ceiling = max(counts.values())
    return {cell: ceiling - counts[cell] for cell in CELLS}


def compose_training_set(mode, d_r, synthetic_pool):
    """
    supplementation: D_R followed by the whole synthetic pool.
    repairing: D_R followed by the first pool examples of every deficit
    cell, enough to lift each cell to the largest cell count.
    """
    mode = ComposeMode(mode)
    if len(d_r) == 0 or len(synthetic_pool) == 0:
        raise PreconditionError("composition needs non-empty datasets")
    if mode is ComposeMode.SUPPLEMENTATION:
        return concat_datasets(d_r, synthetic_pool)

    picks = []
    for cell, deficit in repair_deficits(d_r).items():
        if deficit == 0:
            continue
        available = synthetic_pool.cell_indices(cell)
        if len(available) < deficit:
            raise InsufficientPoolError(cell, deficit, len(available))
        picks.append(available[:deficit])
        logger.debug(f"repairing cell {cell} with {deficit} synthetic examples")
    if not picks:
        return d_r
    return concat_datasets(d_r, synthetic_pool.take(np.sort(np.concatenate(picks))))
