from fairtune.data.dataset import (
    CELLS,
    DOMAINS,
    Dataset,
    Domain,
    Example,
    balanced_split,
    cell_counts,
    concat_datasets,
    is_balanced,
    subsample_real,
)
from fairtune.data.simulator import (
    DomainSpec,
    default_real_spec,
    default_synthetic_shift,
    generate_balanced_dataset,
    generate_domain_dataset,
    generate_test_set,
    generate_triplet,
    synthetic_spec,
)
from fairtune.data.compose import ComposeMode, compose_training_set
from fairtune.data.csv_io import CsvSchema, load_csv_dataset, write_csv_dataset
from fairtune.data.prompts import (
    PromptInstruction,
    assemble_instruction,
    celeba_instruction,
    plain_prompt,
    utkface_instruction,
)
