from fairtune.masks.scores import (
    Criterion,
    Rankings,
    SensitivityScores,
    rank_scores,
    sensitivity_scores,
)
from fairtune.masks.selection import (
    Provenance,
    SelectionMask,
    StructuralSelector,
    SelectorKind,
    all_mask,
    freeze_block,
    k_from_fraction,
    linear_probe,
    mask_layer_distribution,
    none_mask,
    random_mask,
    select_topk_intersection,
    selected_parameter_fraction,
    smg_mask,
    structural_mask,
    update_block,
)
from fairtune.masks.serialize import load_mask, save_mask
