//! Token stream files.
//!
//! Binary: `ABTK`, version byte `1`, token count as u32 LE, then u16 LE ids.
//! Text: one decimal id per line; `#` starts a comment; blank lines ignored.

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ABTK";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 9;

pub fn write_binary(tokens: &[u16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 2 * tokens.len());
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(tokens.len() as u32).to_le_bytes());
    for t in tokens {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

pub fn read_binary(bytes: &[u8]) -> Result<Vec<u16>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "binary stream header needs {HEADER_LEN} bytes, found {}",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing ABTK magic".into()));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            bytes[4]
        )));
    }
    let count = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() < 2 * count {
        return Err(Error::UnexpectedEnd {
            position: body.len() / 2,
            expected: format!("{count} tokens declared in the header"),
        });
    }
    if body.len() != 2 * count {
        return Err(Error::Format(format!(
            "header declares {count} tokens but body holds {} bytes",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect())
}

pub fn write_text(tokens: &[u16]) -> String {
    let mut s = String::with_capacity(tokens.len() * 5);
    for t in tokens {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}

pub fn read_text(text: &str) -> Result<Vec<u16>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let id = body.parse::<u16>().map_err(|_| {
            Error::Format(format!("line {}: expected a token id, found {body:?}", n + 1))
        })?;
        out.push(id);
    }
    Ok(out)
}

/// Reads either format, choosing binary when the magic is present.
pub fn read_tokens(bytes: &[u8]) -> Result<Vec<u16>> {
    if bytes.starts_with(MAGIC) {
        return read_binary(bytes);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::Format("neither an ABTK stream nor UTF-8 text".into()))?;
    read_text(text)
}
