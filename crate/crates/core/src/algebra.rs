//! Paired proximity/distance algebras.
//!
//! A proximity graph is closed with a fuzzy conjunction (T-norm) and
//! disjunction (T-conorm); a distance graph with a TD-norm `g` that composes
//! the two legs of a path and a TD-conorm `f` that picks among paths. The map
//! `phi: [0, 1] → [0, ∞]` links the two sides, and the four operations must
//! commute with it:
//!
//! ```text
//! g(x, y) = phi(conj(phi⁻¹(x), phi⁻¹(y)))
//! f(x, y) = phi(disj(phi⁻¹(x), phi⁻¹(y)))
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait DualAlgebra: Send + Sync {
    fn name(&self) -> &str;

    /// T-norm on `[0, 1]`.
    fn conjunction(&self, a: f64, b: f64) -> f64;

    /// T-conorm on `[0, 1]`.
    fn disjunction(&self, a: f64, b: f64) -> f64;

    /// Path composition on `[0, ∞]` (`g`).
    fn td_norm(&self, x: f64, y: f64) -> f64;

    /// Path selection on `[0, ∞]` (`f`).
    fn td_conorm(&self, x: f64, y: f64) -> f64;

    /// Proximity to distance.
    fn phi(&self, p: f64) -> f64;

    /// Distance to proximity.
    fn phi_inv(&self, d: f64) -> f64;

    /// True when `f = min` and `g = +`, i.e. the distance closure is all-pairs
    /// shortest paths and can use the dedicated kernels.
    fn is_metric(&self) -> bool {
        false
    }
}

/// `d = 1/p − 1`.
#[inline]
pub fn reciprocal_phi(p: f64) -> f64 {
    1.0 / p - 1.0
}

/// `p = 1/(d + 1)`.
#[inline]
pub fn reciprocal_phi_inv(d: f64) -> f64 {
    1.0 / (d + 1.0)
}

/// Hamacher product `ab / (a + b − ab)`, with `0` when either side is `0`.
#[inline]
pub fn hamacher_product(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else if a == 1.0 {
        b
    } else if b == 1.0 {
        a
    } else {
        a * b / (a + b - a * b)
    }
}

/// `∨ = max`, `∧ = Hamacher product`, `f = min`, `g = +`, `φ(p) = 1/p − 1`.
/// The distance closure is the metric closure (shortest paths).
#[derive(Debug, Clone, Copy, Default)]
pub struct Metric;

impl DualAlgebra for Metric {
    fn name(&self) -> &str {
        "metric"
    }
    fn conjunction(&self, a: f64, b: f64) -> f64 {
        hamacher_product(a, b)
    }
    fn disjunction(&self, a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn td_norm(&self, x: f64, y: f64) -> f64 {
        x + y
    }
    fn td_conorm(&self, x: f64, y: f64) -> f64 {
        x.min(y)
    }
    fn phi(&self, p: f64) -> f64 {
        reciprocal_phi(p)
    }
    fn phi_inv(&self, d: f64) -> f64 {
        reciprocal_phi_inv(d)
    }
    fn is_metric(&self) -> bool {
        true
    }
}

/// `∨ = max`, `∧ = min`; on the distance side `f = min`, `g = max`
/// (minimax paths, the ultrametric closure).
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxMin;

impl DualAlgebra for MaxMin {
    fn name(&self) -> &str {
        "max-min"
    }
    fn conjunction(&self, a: f64, b: f64) -> f64 {
        a.min(b)
    }
    fn disjunction(&self, a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn td_norm(&self, x: f64, y: f64) -> f64 {
        x.max(y)
    }
    fn td_conorm(&self, x: f64, y: f64) -> f64 {
        x.min(y)
    }
    fn phi(&self, p: f64) -> f64 {
        reciprocal_phi(p)
    }
    fn phi_inv(&self, d: f64) -> f64 {
        reciprocal_phi_inv(d)
    }
}

type BinOp = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type UnOp = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied algebra. Construct with [`CustomAlgebra::new`], which checks
/// the commuting equations on a sample grid.
#[derive(Clone)]
pub struct CustomAlgebra {
    name: String,
    conjunction: BinOp,
    disjunction: BinOp,
    td_norm: BinOp,
    td_conorm: BinOp,
    phi: UnOp,
    phi_inv: UnOp,
}

impl fmt::Debug for CustomAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomAlgebra")
            .field("name", &self.name)
            .finish()
    }
}

pub struct CustomAlgebraParts<C, D, G, F, P, Q> {
    pub conjunction: C,
    pub disjunction: D,
    pub td_norm: G,
    pub td_conorm: F,
    pub phi: P,
    pub phi_inv: Q,
}

impl CustomAlgebra {
    pub fn new<C, D, G, F, P, Q>(
        name: impl Into<String>,
        parts: CustomAlgebraParts<C, D, G, F, P, Q>,
    ) -> Result<Self>
    where
        C: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let algebra = CustomAlgebra {
            name: name.into(),
            conjunction: Arc::new(parts.conjunction),
            disjunction: Arc::new(parts.disjunction),
            td_norm: Arc::new(parts.td_norm),
            td_conorm: Arc::new(parts.td_conorm),
            phi: Arc::new(parts.phi),
            phi_inv: Arc::new(parts.phi_inv),
        };
        check_commutation(&algebra, 1e-9)?;
        Ok(algebra)
    }
}

impl DualAlgebra for CustomAlgebra {
    fn name(&self) -> &str {
        &self.name
    }
    fn conjunction(&self, a: f64, b: f64) -> f64 {
        (self.conjunction)(a, b)
    }
    fn disjunction(&self, a: f64, b: f64) -> f64 {
        (self.disjunction)(a, b)
    }
    fn td_norm(&self, x: f64, y: f64) -> f64 {
        (self.td_norm)(x, y)
    }
    fn td_conorm(&self, x: f64, y: f64) -> f64 {
        (self.td_conorm)(x, y)
    }
    fn phi(&self, p: f64) -> f64 {
        (self.phi)(p)
    }
    fn phi_inv(&self, d: f64) -> f64 {
        (self.phi_inv)(d)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Samples the four commuting equations plus the boundary conditions of `phi`
/// on a grid of proximities in `(0, 1]`, with relative tolerance `tol`.
pub fn check_commutation(algebra: &dyn DualAlgebra, tol: f64) -> Result<()> {
    let err = |what: String| Err(Error::Algebra(format!("{}: {what}", algebra.name())));
    if !close(algebra.phi(1.0), 0.0, tol) {
        return err(format!("phi(1) = {}", algebra.phi(1.0)));
    }
    if algebra.phi(0.0) != f64::INFINITY {
        return err(format!("phi(0) = {}, expected infinity", algebra.phi(0.0)));
    }
    let grid: Vec<f64> = (1..=24)
        .map(|k| k as f64 / 24.0)
        .chain([1e-3, 0.999])
        .collect();
    for &a in &grid {
        if !close(algebra.phi_inv(algebra.phi(a)), a, tol) {
            return err(format!("phi_inv(phi({a})) != {a}"));
        }
        for &b in &grid {
            let (x, y) = (algebra.phi(a), algebra.phi(b));
            let g = algebra.td_norm(x, y);
            let g_iso = algebra.phi(algebra.conjunction(a, b));
            if !close(g, g_iso, tol) {
                return err(format!("g({x}, {y}) = {g}, expected {g_iso}"));
            }
            let f = algebra.td_conorm(x, y);
            let f_iso = algebra.phi(algebra.disjunction(a, b));
            if !close(f, f_iso, tol) {
                return err(format!("f({x}, {y}) = {f}, expected {f_iso}"));
            }
            let conj = algebra.conjunction(a, b);
            let conj_iso = algebra.phi_inv(algebra.td_norm(x, y));
            if !close(conj, conj_iso, tol) {
                return err(format!("conj({a}, {b}) = {conj}, expected {conj_iso}"));
            }
            let disj = algebra.disjunction(a, b);
            let disj_iso = algebra.phi_inv(algebra.td_conorm(x, y));
            if !close(disj, disj_iso, tol) {
                return err(format!("disj({a}, {b}) = {disj}, expected {disj_iso}"));
            }
        }
    }
    Ok(())
}

/// Named algebras selectable from configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraChoice {
    #[default]
    Metric,
    MaxMin,
}

impl AlgebraChoice {
    pub fn algebra(self) -> &'static dyn DualAlgebra {
        match self {
            AlgebraChoice::Metric => &Metric,
            AlgebraChoice::MaxMin => &MaxMin,
        }
    }
}

impl FromStr for AlgebraChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric" => Ok(AlgebraChoice::Metric),
            "max-min" | "maxmin" => Ok(AlgebraChoice::MaxMin),
            other => Err(Error::InvalidParameter(format!(
                "unknown algebra {other:?}"
            ))),
        }
    }
}

impl fmt::Display for AlgebraChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algebra().name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(reciprocal_phi(1.0), 0.0);
        assert_eq!(reciprocal_phi(0.5), 1.0);
        assert!((reciprocal_phi(1.0 / 3.0) - 2.0).abs() < 1e-15);
        assert_eq!(reciprocal_phi(0.0), f64::INFINITY);
        assert_eq!(reciprocal_phi_inv(3.0), 0.25);
        assert_eq!(reciprocal_phi_inv(f64::INFINITY), 0.0);
    }

    #[test]
    fn named_algebras_commute() {
        check_commutation(&Metric, 1e-9).unwrap();
        check_commutation(&MaxMin, 1e-9).unwrap();
    }

    #[test]
    fn hamacher_edges() {
        assert_eq!(hamacher_product(0.0, 0.0), 0.0);
        assert_eq!(hamacher_product(1.0, 0.3), 0.3);
        assert_eq!(hamacher_product(0.5, 0.5), 1.0 / 3.0);
    }

    #[test]
    fn mismatched_custom_algebra_is_rejected() {
        // product t-norm is not isomorphic to + under 1/p - 1
        let res = CustomAlgebra::new(
            "bad",
            CustomAlgebraParts {
                conjunction: |a: f64, b: f64| a * b,
                disjunction: f64::max,
                td_norm: |x: f64, y: f64| x + y,
                td_conorm: f64::min,
                phi: reciprocal_phi,
                phi_inv: reciprocal_phi_inv,
            },
        );
        assert!(matches!(res, Err(Error::Algebra(_))));
    }

    #[test]
    fn custom_algebra_with_log_map() {
        // phi(p) = -ln p turns the product t-norm into addition.
        let alg = CustomAlgebra::new(
            "product",
            CustomAlgebraParts {
                conjunction: |a: f64, b: f64| a * b,
                disjunction: f64::max,
                td_norm: |x: f64, y: f64| x + y,
                td_conorm: f64::min,
                phi: |p: f64| -p.ln(),
                phi_inv: |d: f64| (-d).exp(),
            },
        )
        .unwrap();
        assert_eq!(alg.name(), "product");
        assert!(!alg.is_metric());
    }

    #[test]
    fn choice_parsing() {
        assert_eq!(
            "metric".parse::<AlgebraChoice>().unwrap(),
            AlgebraChoice::Metric
        );
        assert_eq!(
            "max-min".parse::<AlgebraChoice>().unwrap(),
            AlgebraChoice::MaxMin
        );
        assert!("ultra".parse::<AlgebraChoice>().is_err());
    }
}
