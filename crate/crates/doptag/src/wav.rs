//! Minimal RIFF/WAVE reader and writer: PCM16, mono.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a RIFF/WAVE file")]
    NotWave,
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("truncated chunk: {0}")]
    Truncated(&'static str),
}

/// Write mono PCM16 samples. Input is clamped to [-1, 1] and scaled to i16.
pub fn write_wav(path: &Path, samples: &[f64], rate: u32) -> Result<(), WavError> {
    let mut w = BufWriter::new(File::create(path)?);
    let data_len = (samples.len() * 2) as u32;
    w.write_all(b"RIFF")?;
    w.write_all(&(36 + data_len).to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&16u32.to_le_bytes())?;
    w.write_all(&1u16.to_le_bytes())?; // PCM
    w.write_all(&1u16.to_le_bytes())?; // mono
    w.write_all(&rate.to_le_bytes())?;
    w.write_all(&(rate * 2).to_le_bytes())?; // byte rate
    w.write_all(&2u16.to_le_bytes())?; // block align
    w.write_all(&16u16.to_le_bytes())?; // bits per sample
    w.write_all(b"data")?;
    w.write_all(&data_len.to_le_bytes())?;
    for &s in samples {
        let q = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        w.write_all(&q.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a mono PCM16 file back into floats in [-1, 1].
pub fn read_wav(path: &Path) -> Result<(Vec<f64>, u32), WavError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 12];
    r.read_exact(&mut head).map_err(|_| WavError::NotWave)?;
    if &head[0..4] != b"RIFF" || &head[8..12] != b"WAVE" {
        return Err(WavError::NotWave);
    }
    let mut rate: Option<u32> = None;
    loop {
        let mut chunk = [0u8; 8];
        if r.read_exact(&mut chunk).is_err() {
            return Err(WavError::Truncated("no data chunk"));
        }
        let id = &chunk[0..4];
        let len = u32::from_le_bytes(chunk[4..8].try_into().unwrap()) as usize;
        if id == b"fmt " {
            let mut body = vec![0u8; len];
            r.read_exact(&mut body)
                .map_err(|_| WavError::Truncated("fmt"))?;
            if len < 16 {
                return Err(WavError::Truncated("fmt"));
            }
            let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
            let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
            let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
            if format != 1 || channels != 1 || bits != 16 {
                return Err(WavError::Unsupported(format!(
                    "format {format}, {channels} ch, {bits} bit; need PCM16 mono"
                )));
            }
            rate = Some(u32::from_le_bytes(body[4..8].try_into().unwrap()));
        } else if id == b"data" {
            let rate = rate.ok_or(WavError::Truncated("data before fmt"))?;
            let mut body = vec![0u8; len];
            r.read_exact(&mut body)
                .map_err(|_| WavError::Truncated("data"))?;
            let samples = body
                .chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32767.0)
                .collect();
            return Ok((samples, rate));
        } else {
            // skip unknown chunk (word-aligned)
            let skip = len + (len & 1);
            std::io::copy(&mut r.by_ref().take(skip as u64), &mut std::io::sink())?;
        }
    }
}
