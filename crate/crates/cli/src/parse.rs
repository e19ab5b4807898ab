//! Parsers for inline numbers, points and matrices.

use num_complex::Complex64;

use curvlab_core::linalg::RealMatrix;
use curvlab_core::metric::Point;

use crate::CliError;

fn bad(what: &str, s: &str) -> CliError {
    CliError::Usage(format!("cannot parse {what} `{s}`"))
}

/// `a`, `bi`, `a+bi`, `a-bi`, `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad("complex number", s));
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad("complex number", s));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad("complex number", s))?;
    let im: f64 = im.parse().map_err(|_| bad("complex number", s))?;
    Ok(Complex64::new(re, im))
}

pub fn parse_point(s: &str) -> Result<Point, CliError> {
    let coords = s.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?;
    let p = Point::new(coords);
    if !p.is_finite() {
        return Err(bad("point", s));
    }
    Ok(p)
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("vector", s)))
        .collect()
}

/// JSON rows or CSV with rows separated by `;` or newlines.
pub fn parse_matrix(s: &str) -> Result<RealMatrix, CliError> {
    let t = s.trim();
    let rows: Vec<Vec<f64>> = if t.starts_with('[') {
        serde_json::from_str(t).map_err(|e| CliError::Usage(format!("cannot parse matrix JSON: {e}")))?
    } else {
        t.split([';', '\n']).filter(|r| !r.trim().is_empty()).map(parse_real_list).collect::<Result<_, _>>()?
    };
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("matrix must be square and non-empty, got `{s}`")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(bad("matrix", s));
    }
    Ok(RealMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
