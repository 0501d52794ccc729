"""Event-camera simulation, AER serialization, blur synthesis, analytic
double-integral deblurring, and AWGN channel transport."""

from .aer import CodecError, decode_stream, encode_stream
from .blur import BlurryImage, synthesize_blur
from .channel import (ChannelConfig, TransmissionBudget, awgn, cbr,
                      noise_variance, power_normalize, split_and_merge)
from .edi import (DeblurConfig, estimate_threshold, exposure_sample_times,
                  latent_at_midpoint, latent_at_time, reblur)
from .etns import TensorFormatError, load_tensor, read_tensor, save_tensor, write_tensor
from .events import (Event, EventStream, FrameSequence, SimulatorConfig,
                     accumulate, accumulate_maps, simulate_events)
from .metrics import MetricReport, psnr, ssim
from .voxel import EventTensor, boundary_times, voxelize

__version__ = "0.1.0"
