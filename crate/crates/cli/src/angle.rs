//! Angles as decimals or rational multiples of pi (`pi/2`, `-3pi/4`, `2*pi/3`).

use std::f64::consts::PI;

pub fn parse_angle(raw: &str) -> Result<f64, String> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let Some(at) = s.find("pi") else {
        return parse_finite(&s).map_err(|_| format!("invalid angle {raw:?}"));
    };
    let bad = || format!("invalid angle {raw:?}; expected a decimal or a token like pi/2, -3pi/4, 2*pi/3");
    let head = s[..at].trim_end_matches('*');
    let tail = &s[at + 2..];
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_finite(h).map_err(|_| bad())?,
    };
    let den = match tail {
        "" => 1.0,
        t => match t.strip_prefix('/') {
            Some(d) => parse_finite(d).map_err(|_| bad())?,
            None => return Err(bad()),
        },
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(PI * coeff / den)
}

pub fn parse_finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("invalid number {s:?}")),
    }
}
