//! Audio I/O and frame-level DSP for singing voice corpora: WAV read/write,
//! windowed-sinc resampling, score-aligned segmentation, STFT, mel features
//! and YIN fundamental-frequency tracking.

pub mod buffer;
pub mod f0;
pub mod frame;
pub mod mel;
pub mod resample;
pub mod segment;
pub mod stft;
pub mod wav;

pub use buffer::{AudioBuffer, BufferError};
pub use f0::{extract_f0, F0Params, F0Track};
pub use frame::{read_frame_file, write_frame_file, FrameError, FrameKind, FrameMatrix};
pub use mel::{
    dct_reconstruct, hz_to_mel, mel_cepstrum, mel_filter_centers, mel_filterbank,
    mel_spectrogram, mel_to_hz, LOG_FLOOR,
};
pub use resample::{resample, ResampleError};
pub use segment::{segment, Segment, SegmentError, SegmentPolicy};
pub use stft::{frame_spectrum_full, stft_magnitude, FeatureError, FrameParams};
pub use wav::{read_wav, write_wav, BitDepth, WavError};
