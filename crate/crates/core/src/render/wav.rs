use std::fs::File;
use std::io::{self, BufWriter, Cursor, Seek, Write};
use std::path::Path;

/// Volts that map to digital full scale.
pub const WAV_FULL_SCALE_VOLTS: f64 = 10.0;

/// Quantizes one sample; the flag is set when it had to be clipped.
pub fn quantize(volts: f64) -> (i16, bool) {
    let x = (volts / WAV_FULL_SCALE_VOLTS * 32767.0).round();
    if x > 32767.0 {
        (32767, true)
    } else if x < -32767.0 {
        (-32767, true)
    } else {
        (x as i16, false)
    }
}

fn hound_err(e: hound::Error) -> io::Error {
    match e {
        hound::Error::IoError(e) => e,
        other => io::Error::other(other),
    }
}

/// Writes interleaved 16-bit PCM. Returns the number of clipped samples.
pub fn encode_wav<W: Write + Seek>(channels: &[Vec<f64>], sample_rate: u32, sink: W) -> io::Result<u64> {
    assert!(matches!(channels.len(), 1 | 2), "mono or stereo only");
    let frames = channels[0].len();
    assert!(channels.iter().all(|c| c.len() == frames), "channel lengths differ");
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::new(sink, spec).map_err(hound_err)?;
    let mut clipped = 0;
    {
        let mut i16_writer = writer.get_i16_writer(frames as u32 * channels.len() as u32);
        for i in 0..frames {
            for c in channels {
                let (q, clip) = quantize(c[i]);
                clipped += u64::from(clip);
                i16_writer.write_sample(q);
            }
        }
        i16_writer.flush().map_err(hound_err)?;
    }
    writer.finalize().map_err(hound_err)?;
    Ok(clipped)
}

pub fn wav_bytes(channels: &[Vec<f64>], sample_rate: u32) -> (Vec<u8>, u64) {
    let mut cursor = Cursor::new(Vec::new());
    let clipped = encode_wav(channels, sample_rate, &mut cursor).expect("in-memory write");
    (cursor.into_inner(), clipped)
}

/// Writes a WAV file. Returns the clip count.
pub fn write_wav(channels: &[Vec<f64>], sample_rate: u32, path: &Path) -> io::Result<u64> {
    let file = BufWriter::new(File::create(path)?);
    encode_wav(channels, sample_rate, file)
}
