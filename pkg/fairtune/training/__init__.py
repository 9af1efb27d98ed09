from fairtune.training.config import (
    FINETUNE_STRATEGIES,
    RunRecord,
    Strategy,
    TrainConfig,
    save_record,
    scaled_batch_size,
)
from fairtune.training.trainer import (
    finetune,
    full_finetune,
    pretrain,
    selective_finetune,
    train_epochs,
)
from fairtune.training.strategies import (
    ExperimentData,
    StrategyConfigs,
    run_strategy,
    search_learning_rate,
    selection_snapshots,
    strategy_mask,
)
