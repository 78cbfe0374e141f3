//! Truth-table file formats.
//!
//! * TT1 (text): header line `tt1 n=<n>`, then `2^n` characters `0`/`1`
//!   where character `b` is row `b`; line breaks inside the body are ignored
//!   and a trailing newline is optional.
//! * TTB (binary): the 8-byte magic `BFANTTB1`, one byte `n`, then
//!   `ceil(2^n / 8)` bytes with row `b` at bit `b % 8` of byte `b / 8`.

use crate::cube::{check_dim, BooleanFunction};
use crate::error::{Error, Result};

pub const TTB_MAGIC: &[u8; 8] = b"BFANTTB1";

pub fn write_tt1(f: &BooleanFunction) -> String {
    let mut s = String::with_capacity(f.len() + 16);
    s.push_str(&format!("tt1 n={}\n", f.n()));
    for b in 0..f.len() {
        s.push(if f.get(b) { '1' } else { '0' });
    }
    s.push('\n');
    s
}

pub fn parse_tt1(text: &str, cap: u32) -> Result<BooleanFunction> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("").trim_end_matches('\r');
    let n = parse_header(header)?;
    check_dim(n, cap)?;
    let len = 1usize << n;
    let mut bits = Vec::with_capacity(len);
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        for ch in line.trim_end_matches('\r').chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unexpected character {other:?}"),
                    })
                }
            }
            if bits.len() > len {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("more than {len} rows"),
                });
            }
        }
    }
    if bits.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: bits.len(),
        });
    }
    BooleanFunction::from_truth_table_with_cap(&bits, n, cap)
}

fn parse_header(header: &str) -> Result<u32> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let rest = header
        .strip_prefix("tt1 n=")
        .ok_or_else(|| bad("expected header `tt1 n=<n>`"))?;
    rest.trim()
        .parse::<u32>()
        .map_err(|_| bad("dimension is not a non-negative integer"))
}

pub fn write_ttb(f: &BooleanFunction) -> Vec<u8> {
    let nbytes = f.len().div_ceil(8);
    let mut out = Vec::with_capacity(9 + nbytes);
    out.extend_from_slice(TTB_MAGIC);
    out.push(f.n() as u8);
    let bytes = f.words().iter().flat_map(|w| w.to_le_bytes());
    out.extend(bytes.take(nbytes));
    out
}

pub fn parse_ttb(data: &[u8], cap: u32) -> Result<BooleanFunction> {
    if data.len() < 9 || &data[..8] != TTB_MAGIC {
        return Err(Error::Parse {
            line: 1,
            msg: "missing BFANTTB1 magic".into(),
        });
    }
    let n = data[8] as u32;
    check_dim(n, cap)?;
    let nbytes = (1usize << n).div_ceil(8);
    let body = &data[9..];
    if body.len() != nbytes {
        return Err(Error::LengthMismatch {
            expected: nbytes,
            got: body.len(),
        });
    }
    let words = body
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect();
    BooleanFunction::from_words(n, words)
}

/// Detects the format from the leading bytes.
pub fn parse_any(data: &[u8], cap: u32) -> Result<BooleanFunction> {
    if data.starts_with(TTB_MAGIC) {
        return parse_ttb(data, cap);
    }
    let text = std::str::from_utf8(data).map_err(|_| Error::Parse {
        line: 1,
        msg: "input is neither TTB nor UTF-8 text".into(),
    })?;
    parse_tt1(text, cap)
}
