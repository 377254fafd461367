//! Text forms of numbers, atoms and polynomials accepted on the command line.

use anyhow::{anyhow, bail, Context, Result};
use dbr_core::tuples::CirclePoint;
use dbr_core::{Complex64, Poly};

/// Plain real or Cartesian complex: `2`, `-0.5`, `1+2i`, `3e-2-i`, `i`.
pub fn complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        bail!("empty number");
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        let re = t
            .parse::<f64>()
            .with_context(|| format!("cannot parse `{s}` as a number"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    // split before the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re.is_empty() {
        0.0
    } else {
        re.parse::<f64>()
            .with_context(|| format!("bad real part in `{s}`"))?
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x
            .parse::<f64>()
            .with_context(|| format!("bad imaginary part in `{s}`"))?,
    };
    let z = Complex64::new(re, im);
    if !(z.re.is_finite() && z.im.is_finite()) {
        bail!("`{s}` is not finite");
    }
    Ok(z)
}

/// An atom: Cartesian, polar `r@theta` (radians) or `zeta:n:k`.
pub fn atom(s: &str) -> Result<Complex64> {
    Ok(match point_form(s)? {
        Form::Root(n, k) => CirclePoint::<f64>::root_of_unity(n, k)?.value(),
        Form::Value(z) => z,
    })
}

/// A point of the unit circle for tuple commands; `±1`, `±i` and
/// `zeta:n:k` stay exact.
pub fn circle_point(s: &str) -> Result<CirclePoint<f64>> {
    match point_form(s)? {
        Form::Root(n, k) => Ok(CirclePoint::root_of_unity(n, k)?),
        Form::Value(z) => {
            let quarter = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
                .iter()
                .position(|&(re, im)| z == Complex64::new(re, im));
            match quarter {
                Some(k) => Ok(CirclePoint::root_of_unity(4, k as u32)?),
                None => CirclePoint::point(z).map_err(|e| anyhow!("{e}")),
            }
        }
    }
}

enum Form {
    Root(u32, u32),
    Value(Complex64),
}

fn point_form(s: &str) -> Result<Form> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("zeta:") {
        let (n, k) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("expected zeta:n:k, got `{s}`"))?;
        let n: u32 = n.parse().with_context(|| format!("bad order in `{s}`"))?;
        let k: u32 = k.parse().with_context(|| format!("bad index in `{s}`"))?;
        if n == 0 {
            bail!("root of unity of order 0 in `{s}`");
        }
        return Ok(Form::Root(n, k));
    }
    if let Some((r, theta)) = s.split_once('@') {
        let r: f64 = r.parse().with_context(|| format!("bad modulus in `{s}`"))?;
        let theta: f64 = theta
            .parse()
            .with_context(|| format!("bad angle in `{s}`"))?;
        if !(r >= 0.0 && r.is_finite() && theta.is_finite()) {
            bail!("bad polar atom `{s}`");
        }
        return Ok(Form::Value(Complex64::from_polar(r, theta)));
    }
    complex(s).map(Form::Value)
}

/// Comma-separated list.
pub fn list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(|x| item(x.trim())).collect()
}

/// Coefficients ascending in degree.
pub fn poly(s: &str) -> Result<Poly> {
    Ok(Poly::new(list(s, complex)?))
}

/// Several polynomials separated by `;`.
pub fn polys(s: &str) -> Result<Vec<Poly>> {
    s.split(';').map(poly).collect()
}

pub fn weights(s: &str) -> Result<Vec<f64>> {
    list(s, |x| {
        let w: f64 = x.parse().with_context(|| format!("bad weight `{x}`"))?;
        if !(w > 0.0 && w.is_finite()) {
            bail!("weights must be positive, got `{x}`");
        }
        Ok(w)
    })
}
