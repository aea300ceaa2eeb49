//! Sequence framing shared by `sample` output and `dimension`/`deficiency` input.
//!
//! ASCII: one sequence per line of `0`/`1` characters. Packed: repeated frames
//! of an 8-byte little-endian bit count followed by the bits, MSB first.

use smb_core::BinaryWord;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum InputFormat {
    /// ASCII when every byte is `0`, `1` or whitespace, packed otherwise.
    #[default]
    Auto,
    Ascii,
    Packed,
}

pub fn write_packed(out: &mut Vec<u8>, x: &BinaryWord) {
    out.extend_from_slice(&(x.len() as u64).to_le_bytes());
    out.extend_from_slice(&x.to_packed());
}

fn read_packed(mut bytes: &[u8]) -> Result<Vec<BinaryWord>, CliError> {
    let mut seqs = Vec::new();
    while !bytes.is_empty() {
        let Some((header, rest)) = bytes.split_first_chunk::<8>() else {
            return Err(CliError::InvalidArgument(
                "packed input ends inside a length header".into(),
            ));
        };
        let len = u64::from_le_bytes(*header);
        let n_bytes = len.div_ceil(8);
        if n_bytes > rest.len() as u64 {
            return Err(CliError::InvalidArgument(format!(
                "packed frame declares {len} bits but only {} bytes remain",
                rest.len()
            )));
        }
        let (body, rest) = rest.split_at(n_bytes as usize);
        let x = BinaryWord::from_packed(body, len as usize)
            .ok_or_else(|| CliError::InvalidArgument(format!("packed frame of {len} bits is malformed")))?;
        seqs.push(x);
        bytes = rest;
    }
    Ok(seqs)
}

fn read_ascii(bytes: &[u8]) -> Result<Vec<BinaryWord>, CliError> {
    let mut seqs = Vec::new();
    for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let mut bits = Vec::with_capacity(line.len());
        for &b in line {
            match b {
                b'0' | b'1' => bits.push(b - b'0'),
                b' ' | b'\t' | b'\r' => {}
                other => {
                    return Err(CliError::InvalidArgument(format!(
                        "line {}: unexpected byte {other:#04x}",
                        i + 1
                    )))
                }
            }
        }
        if !bits.is_empty() {
            seqs.push(BinaryWord::from_bits(bits));
        }
    }
    Ok(seqs)
}

pub fn read_sequences(bytes: &[u8], format: InputFormat) -> Result<Vec<BinaryWord>, CliError> {
    match format {
        InputFormat::Ascii => read_ascii(bytes),
        InputFormat::Packed => read_packed(bytes),
        InputFormat::Auto => {
            if bytes
                .iter()
                .all(|b| matches!(b, b'0' | b'1' | b'\n' | b'\r' | b' ' | b'\t'))
            {
                read_ascii(bytes)
            } else {
                read_packed(bytes)
            }
        }
    }
}
