"""Locally adaptive interpretable regression (LoAIR) in numpy."""

from .data import (Dataset, Normalizer, apply_normalizer, fit_normalizer, load_csv, save_csv, split,
                   synth_locally_varying)
from .errors import (ConfigError, DataError, DomainError, FeatureLookupError, InsufficientDataError,
                     LoairError, NumericError, ParseError, ShapeError, SingularityError)
from .gaussian import probit, probit_derivative, std_normal_cdf, std_normal_pdf
from .meta_net import MetaNet, NetLayout, build_meta_net, init_network
from .model import (CoefficientTrace, TrainConfig, TrainedLoair, adapted_coefficients, explain,
                    load_model, loair_predict, loss_and_gradient, predict, save_model, train)
from .montecarlo import SimResult, simulate_error_surface
from .ols import (OlsFit, confidence_interval, design_matrix, expand_quadratic, fit_dataset, ols_fit,
                  ols_predict, regression_metrics)

__version__ = "0.1.0"
