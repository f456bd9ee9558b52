//! Independent oracles: a direct O(N^2) DFT checked against the FFT path,
//! and partition/linearity properties for segmentation and resampling.

use muskit_dsp::{
    frame_spectrum_full, resample, segment, stft_magnitude, AudioBuffer, FrameParams,
    SegmentPolicy,
};
use muskit_score::{score_duration, NoteEvent, Score};
use proptest::prelude::*;

/// Textbook DFT, kept deliberately independent of the rustfft path.
fn direct_dft_magnitude(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    (0..n)
        .map(|k| {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for (j, &x) in signal.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
                re += x * phase.cos();
                im += x * phase.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

#[test]
fn stft_matches_direct_dft_oracle() {
    let params = FrameParams {
        n_fft: 256,
        win_length: 256,
        hop_length: 64,
        fmax_hz: 11000.0,
        ..FrameParams::default()
    };
    // deterministic wideband signal
    let samples: Vec<f64> = (0..2048)
        .map(|i| {
            let t = i as f64;
            0.4 * (0.013 * t).sin() + 0.3 * (0.071 * t).sin() + 0.2 * (0.29 * t).cos()
        })
        .collect();
    let buf = AudioBuffer::new(samples, 24000);
    let mag = stft_magnitude(&buf, &params).unwrap();

    for t in [0, 3, 9] {
        let (windowed, _) = frame_spectrum_full(&buf, &params, t).unwrap();
        let oracle = direct_dft_magnitude(&windowed);
        let row = mag.row(t);
        for k in 0..row.len() {
            assert!(
                (row[k] - oracle[k]).abs() <= 1e-9 * (1.0 + oracle[k]),
                "frame {t} bin {k}: fft {} vs dft {}",
                row[k],
                oracle[k]
            );
        }
    }
}

#[test]
fn impulse_frame_flat_spectrum_via_oracle() {
    let params = FrameParams::default();
    let mut samples = vec![0.0; 24000];
    samples[3 * params.hop_length] = 1.0;
    let buf = AudioBuffer::new(samples, 24000);

    let (windowed, _) = frame_spectrum_full(&buf, &params, 3).unwrap();
    let oracle = direct_dft_magnitude(&windowed);
    let mag = stft_magnitude(&buf, &params).unwrap();
    let row = mag.row(3);
    for (k, &v) in row.iter().enumerate() {
        assert!((v - oracle[k]).abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-9, "bin {k} not flat: {v}");
    }
}

fn note_walk(seed: u64, n_events: usize) -> Score {
    // deterministic melody with rests, spanning a few seconds
    let mut state = seed | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let mut events = Vec::new();
    let mut t = 0.0f64;
    for i in 0..n_events {
        let dur = 0.2 + (next() % 800) as f64 / 1000.0;
        if i % 5 == 4 {
            events.push(NoteEvent::rest(t, dur));
        } else {
            let pitch = 55 + (next() % 24) as u8;
            events.push(NoteEvent::note("la", pitch, t, dur));
        }
        t += dur;
    }
    Score::new(events, 120.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn segmentation_partitions_samples_and_score(seed in 1u64..5000, n in 4usize..40) {
        let score = note_walk(seed, n);
        let total = score_duration(&score);
        let rate = 8000u32;
        let samples = (total * rate as f64).round() as usize;
        let buffer = AudioBuffer::new(vec![0.05; samples], rate);
        let segs = segment(&score, &buffer, &SegmentPolicy::default()).unwrap();

        let sample_sum: usize = segs.iter().map(|(_, a)| a.len()).sum();
        prop_assert_eq!(sample_sum, samples);

        let span_sum: f64 = segs.iter().map(|(s, _)| score_duration(s)).sum();
        prop_assert!((span_sum - total).abs() < 1e-6);

        for (s, _) in &segs {
            prop_assert!(s.validate().is_ok());
            if let Some(first) = s.events.first() {
                prop_assert!(first.onset_sec.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn resampler_is_linear(scale in -1.0f64..1.0) {
        let base: Vec<f64> = (0..2000)
            .map(|i| (2.0 * std::f64::consts::PI * 997.0 * i as f64 / 48000.0).sin())
            .collect();
        let x = AudioBuffer::new(base.clone(), 48000);
        let scaled = AudioBuffer::new(base.iter().map(|v| v * scale).collect(), 48000);
        let y1 = resample(&scaled, 24000).unwrap();
        let y2 = resample(&x, 24000).unwrap();
        for (a, b) in y1.samples.iter().zip(y2.samples.iter()) {
            let expected = b * scale;
            prop_assert!((a - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }
}
