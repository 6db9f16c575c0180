//! Parsing of domains, points and number lists given on the command line.

use std::path::Path;

use catlin_core::polynomial::PolynomialJson;
use catlin_core::{Error, ModelDomain, Point, Tangent, WirtingerPolynomial};
use num_complex::Complex64;

/// Why a command-line value was rejected.
#[derive(Debug)]
pub enum InputError {
    /// The domain could not be read or constructed.
    Domain(String),
    /// Any other malformed argument.
    Param(String),
}

fn reals(text: &str, count: usize, what: &str) -> Result<Vec<f64>, InputError> {
    let vals = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| InputError::Param(format!("{what} '{text}': {e}")))?;
    if vals.len() != count {
        return Err(InputError::Param(format!(
            "{what} '{text}' needs {count} comma-separated reals, got {}",
            vals.len()
        )));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(InputError::Param(format!("{what} '{text}' has non-finite entries")));
    }
    Ok(vals)
}

/// `"z_re,z_im,w_re,w_im"`.
pub fn point(text: &str) -> Result<Point, InputError> {
    let v = reals(text, 4, "point")?;
    Ok(Point::from_reals(v[0], v[1], v[2], v[3]))
}

/// `"x_re,x_im,y_re,y_im"`.
pub fn tangent(text: &str) -> Result<Tangent, InputError> {
    let v = reals(text, 4, "tangent")?;
    Ok(Tangent::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
}

/// `"re,im"`.
pub fn complex(text: &str) -> Result<Complex64, InputError> {
    let v = reals(text, 2, "complex number")?;
    Ok(Complex64::new(v[0], v[1]))
}

/// Comma-separated reals of any length.
pub fn list(text: &str) -> Result<Vec<f64>, InputError> {
    let n = text.split(',').count();
    reals(text, n, "list")
}

fn domain_error(e: Error) -> InputError {
    InputError::Domain(e.to_string())
}

fn polynomial_from_json(text: &str) -> Result<WirtingerPolynomial, InputError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| InputError::Domain(format!("domain JSON: {e}")))?;
    let inner = value.get("polynomial").cloned().unwrap_or(value);
    let raw: PolynomialJson =
        serde_json::from_value(inner).map_err(|e| InputError::Domain(format!("domain JSON: {e}")))?;
    WirtingerPolynomial::try_from(raw).map_err(domain_error)
}

/// Accepts `thullen:<p>`, inline JSON (starting with `{`), or a path to a
/// JSON file. JSON may be `{"terms": [...]}` or `{"polynomial": {"terms": [...]}}`.
/// Without a spec the Siegel domain `|z|²` is used.
pub fn domain(spec: Option<&str>) -> Result<ModelDomain, InputError> {
    let Some(spec) = spec.map(str::trim) else {
        return Ok(ModelDomain::thullen(1));
    };
    let poly = if let Some(p) = spec.strip_prefix("thullen:") {
        let p: u32 = p
            .parse()
            .map_err(|e| InputError::Domain(format!("thullen exponent '{p}': {e}")))?;
        if p == 0 {
            return Err(InputError::Domain("thullen exponent must be at least 1".into()));
        }
        WirtingerPolynomial::thullen(p)
    } else if spec.starts_with('{') {
        polynomial_from_json(spec)?
    } else {
        let text = std::fs::read_to_string(Path::new(spec))
            .map_err(|e| InputError::Domain(format!("cannot read domain file '{spec}': {e}")))?;
        polynomial_from_json(&text)?
    };
    ModelDomain::new(poly).map_err(domain_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_lists() {
        assert_eq!(point("0,0,-1,0").unwrap(), Point::from_reals(0.0, 0.0, -1.0, 0.0));
        assert!(point("0,0,-1").is_err());
        assert!(point("0,0,x,1").is_err());
        assert_eq!(list("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(complex("1,nan").is_err());
    }

    #[test]
    fn parses_domain_forms() {
        assert_eq!(domain(None).unwrap(), ModelDomain::thullen(1));
        assert_eq!(domain(Some("thullen:2")).unwrap(), ModelDomain::thullen(2));
        let inline = r#"{"terms":[{"j":1,"k":1,"re":1.0,"im":0.0}]}"#;
        assert_eq!(domain(Some(inline)).unwrap(), ModelDomain::thullen(1));
        let wrapped = r#"{"polynomial":{"terms":[{"j":2,"k":2,"re":1.0,"im":0.0}]}}"#;
        assert_eq!(domain(Some(wrapped)).unwrap(), ModelDomain::thullen(2));
        assert!(matches!(domain(Some("thullen:0")), Err(InputError::Domain(_))));
        let harmonic = r#"{"terms":[{"j":1,"k":0,"re":1.0,"im":0.0},{"j":0,"k":1,"re":1.0,"im":0.0}]}"#;
        assert!(matches!(domain(Some(harmonic)), Err(InputError::Domain(_))));
        assert!(matches!(domain(Some("/nonexistent/domain.json")), Err(InputError::Domain(_))));
    }
}
