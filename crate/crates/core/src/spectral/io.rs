//! Plain-text exchange formats.
//!
//! Spectrum: two or three columns `f, S[, sigma]`, comma or whitespace
//! separated, `#` comment lines. Trajectory: `t, Re a, Im a, Re b, Im b`.

use std::io::{BufRead, Write};

use super::Spectrum;
use crate::error::{Error, Result};

/// Parses a spectrum. A descending or shuffled grid is sorted; the flag in
/// the return value reports it.
pub fn read_spectrum<R: BufRead>(reader: R) -> Result<(Spectrum, bool)> {
    let (mut f, mut s, mut sig) = (Vec::new(), Vec::new(), Vec::new());
    let mut columns = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|t| t.parse::<f64>()).collect();
        let row = match parsed {
            Ok(r) => r,
            // a single non-numeric header row is tolerated
            Err(_) if f.is_empty() && columns.is_none() => {
                columns = Some(0);
                continue;
            }
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
        };
        if !(2..=3).contains(&row.len()) {
            return Err(Error::Parse(format!("line {}: expected 2 or 3 columns, got {}", lineno + 1, row.len())));
        }
        match columns {
            Some(c) if c != 0 && c != row.len() => {
                return Err(Error::Parse(format!("line {}: inconsistent column count", lineno + 1)))
            }
            _ => columns = Some(row.len()),
        }
        f.push(row[0]);
        s.push(row[1]);
        if row.len() == 3 {
            sig.push(row[2]);
        }
    }
    if f.len() < 2 {
        return Err(Error::Parse("spectrum needs at least two rows".into()));
    }
    let sigma = (!sig.is_empty()).then_some(sig);
    let (spec, moved) = Spectrum::sorted(f, s, sigma)?;
    if moved {
        log::warn!("spectrum grid was not increasing; rows were sorted by frequency");
    }
    Ok((spec, moved))
}

pub fn write_spectrum<W: Write>(mut w: W, s: &Spectrum) -> std::io::Result<()> {
    match &s.sigma {
        Some(sig) => {
            writeln!(w, "# f,S,sigma")?;
            for i in 0..s.len() {
                writeln!(w, "{:e},{:e},{:e}", s.freq[i], s.values[i], sig[i])?;
            }
        }
        None => {
            writeln!(w, "# f,S")?;
            for i in 0..s.len() {
                writeln!(w, "{:e},{:e}", s.freq[i], s.values[i])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comment_two_columns() {
        let text = "# f S\n-1.0, 0.5\n0.0, 1.0\n1.0 0.5\n";
        let (s, moved) = read_spectrum(text.as_bytes()).unwrap();
        assert!(!moved);
        assert_eq!(s.freq, vec![-1.0, 0.0, 1.0]);
        assert!(s.sigma.is_none());
    }

    #[test]
    fn three_columns_and_resort() {
        let text = "f,S,sigma\n2,1,0.1\n1,2,0.2\n";
        let (s, moved) = read_spectrum(text.as_bytes()).unwrap();
        assert!(moved);
        assert_eq!(s.values, vec![2.0, 1.0]);
        assert_eq!(s.sigma, Some(vec![0.2, 0.1]));
    }

    #[test]
    fn malformed_rows() {
        assert!(read_spectrum("1,2\n3,x\n".as_bytes()).is_err());
        assert!(read_spectrum("1,2\n3,4,5\n".as_bytes()).is_err());
        assert!(read_spectrum("1,2,3,4\n".as_bytes()).is_err());
        assert!(read_spectrum("1,2\n1,3\n".as_bytes()).is_err());
    }

    #[test]
    fn round_trip() {
        let s = Spectrum::new(vec![0.1, 0.2], vec![3.0, 4.5], Some(vec![0.5, 0.25])).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &s).unwrap();
        let (back, _) = read_spectrum(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
