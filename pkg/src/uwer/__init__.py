"""Continual MIMO CSI prediction with uncertainty-weighted experience replay.

Subpackages:
    mathcore  seeded RNG, Bessel J0, PSD matrix roots, basic statistics
    channel   non-stationary correlated-fading CSI stream generator
    model     stacked LSTM predictor with MC-dropout uncertainty
    replay    uncertainty-prioritized bounded replay memory
    trainer   streaming continual-training loop and forgetting metrics
    metrics   NMSE, calibration and distribution summaries (CSV emitters)
    report    matplotlib figure rendering for the report path
    cli       gen / train / eval / ablate command-line entry points
"""

__version__ = "0.1.0"
