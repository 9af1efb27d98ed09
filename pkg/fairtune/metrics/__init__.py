from fairtune.metrics.fairness import (
    CELL_FIELDS,
    METRICS,
    RECORD_FIELDS,
    FairnessReport,
    GroupStats,
    aggregate_reports,
    confusion_by_group,
    equalized_odds_rate_gaps,
    error_set,
    evaluate,
    fairness_report,
)
from fairtune.metrics.jtt import estimate_bias_ratio
