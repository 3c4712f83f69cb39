"""Split conformal prediction with epistemic uncertainty from the implied credal set.

The consonant conformal transducer induces a plausibility measure over
labels; MMI-TV and MMI-pi measure the gap between its upper and lower
probabilities.
"""

from .imprecise import (
    PlausibilityMeasure,
    UncertaintyReport,
    ihdr,
    lower_prob,
    mmi_pi,
    mmi_pi_integral,
    mmi_regression,
    mmi_regression_profile,
    mmi_tv,
    report,
    upper_prob,
)
from .scores import RegressionPrediction, ScoreKind, ScoreSpec
from .transducer import (
    CalibrationSet,
    PredictionSet,
    PValueProfile,
    calibrate,
    conformal_pvalue,
    enforce_consonance,
    prediction_set,
    profile,
    quantile,
)

__version__ = "0.1.0"
