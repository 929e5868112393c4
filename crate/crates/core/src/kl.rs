use crate::error::{Error, Result};

/// KL divergence between Bernoulli(p) and Bernoulli(q), in nats.
///
/// Uses 0·ln 0 = 0, so `p` may sit on the boundary. A boundary `q` that
/// differs from `p` gives [`Error::InfiniteDivergence`].
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "Bernoulli parameters must lie in [0, 1], got p = {p}, q = {q}"
        )));
    }
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Err(Error::InfiniteDivergence { p, q });
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    Ok((term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0))
}
