//! Text syntax for grids and ranges on the command line.

use anyhow::{bail, ensure, Context, Result};

fn round12(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e12).round() / 1e12
    } else {
        x
    }
}

fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().with_context(|| format!("`{s}` is not a number"))
}

/// `start:stop:step` (inclusive stop) or a comma-separated list.
/// Values are rounded to 12 decimals so `0.1:2.0:0.1` yields `0.3`, not
/// `0.30000000000000004`.
pub fn temperatures(arg: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = arg.split(':').collect();
    let out = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            ensure!(
                start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start,
                "temperature range `{arg}` needs finite start <= stop and a positive step"
            );
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| round12(start + step * i as f64)).collect()
        }
        [_] => arg.split(',').map(|v| number(v).map(round12)).collect::<Result<Vec<_>>>()?,
        _ => bail!("temperatures must be `start:stop:step` or a comma-separated list, got `{arg}`"),
    };
    ensure!(!out.is_empty(), "empty temperature grid");
    Ok(out)
}

fn power_of_two(s: &str) -> Result<u32> {
    let s = s.trim();
    let e = s.strip_prefix("2^").with_context(|| format!("`{s}` is not of the form 2^a"))?;
    let e: u32 = e.parse().with_context(|| format!("bad exponent in `{s}`"))?;
    ensure!((1..usize::BITS).contains(&e), "exponent in `{s}` out of range");
    Ok(e)
}

/// Comma-separated sizes, or `2^a..2^b` for every power of two in between.
pub fn sizes(arg: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = arg.split_once("..") {
        let (lo, hi) = (power_of_two(lo)?, power_of_two(hi)?);
        ensure!(lo <= hi, "size range `{arg}` is empty");
        return Ok((lo..=hi).map(|e| 1usize << e).collect());
    }
    arg.split(',')
        .map(|v| {
            let v = v.trim();
            match v.strip_prefix("2^") {
                Some(_) => Ok(1usize << power_of_two(v)?),
                None => v.parse().with_context(|| format!("`{v}` is not a size")),
            }
        })
        .collect()
}

/// `lo:hi`, or a single value pinning both ends.
pub fn range(arg: &str) -> Result<(f64, f64)> {
    let (lo, hi) = match arg.split_once(':') {
        Some((lo, hi)) => (number(lo)?, number(hi)?),
        None => {
            let v = number(arg)?;
            (v, v)
        }
    };
    ensure!(lo.is_finite() && hi.is_finite() && lo <= hi, "range `{arg}` must be finite with lo <= hi");
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_ranges_are_inclusive_and_rounded() {
        let t = temperatures("0.1:2.0:0.1").unwrap();
        assert_eq!(t.len(), 20);
        assert_eq!(t[2], 0.3);
        assert_eq!(*t.last().unwrap(), 2.0);
        assert_eq!(temperatures("0.5, 1,inf").unwrap(), vec![0.5, 1.0, f64::INFINITY]);
        assert!(temperatures("1:0:0.1").is_err());
        assert!(temperatures("0:1:0").is_err());
        assert!(temperatures("a:b").is_err());
    }

    #[test]
    fn size_shorthands() {
        assert_eq!(sizes("16,64,256").unwrap(), vec![16, 64, 256]);
        assert_eq!(sizes("2^4..2^7").unwrap(), vec![16, 32, 64, 128]);
        assert_eq!(sizes("2^5,100").unwrap(), vec![32, 100]);
        assert!(sizes("2^7..2^4").is_err());
        assert!(sizes("x").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(range("0.5:1.5").unwrap(), (0.5, 1.5));
        assert_eq!(range("2").unwrap(), (2.0, 2.0));
        assert!(range("2:1").is_err());
        assert!(range("1:").is_err());
        assert!(range("inf:1").is_err());
    }
}
