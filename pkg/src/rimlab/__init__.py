"""FMCW radar interference mitigation laboratory: synthetic beat-signal
datasets, a complex-valued fully convolutional recovery network trained
with a sparsity-regularized loss on time-frequency spectrograms, and
SINR-based evaluation against classical zeroing baselines."""

from .config import PRESETS, RunConfig, load_run_config
from .cvnn import (ArchitectureSpec, ComplexConvLayer, ComplexTensor4,
                   CvFcnModel, adam_step, backward, complex_conv2d,
                   count_parameters, crelu, forward, init_model)
from .errors import (ConfigError, DataError, FileFormatError, NumericError,
                     RimlabError, ShapeMismatchError)
from .evaluate import (CfarConfig, EvalReport, cfar_detect, evaluate_method,
                       oracle_mask, sinr_db, write_report_csv, zero_and_score)
from .loss import LossConfig, l21_norm, loss_gradient, loss_value
from .pipeline import (ChunkBatch, SplitConfig, denormalize_chunks, integrate,
                       make_training_pairs, run_inference, split)
from .radar import (C_LIGHT, InterferenceParams, RadarConfig, SceneRanges,
                    SceneSpec, SweepSignal, TargetParams, calibrate_and_mix,
                    generate_dataset, interference_support, sample_scene,
                    synthesize_clean, synthesize_interference, synthesize_scene)
from .storage import (read_checkpoint, read_dataset, spectrogram_to_image,
                      write_checkpoint, write_dataset, write_pgm)
from .timefreq import (Spectrogram, StftConfig, denormalize, istft, normalize,
                       range_profile, stft)
from .training import TrainResult, train_model

__version__ = "0.1.0"
