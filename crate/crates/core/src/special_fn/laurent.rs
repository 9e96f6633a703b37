//! Leading-order arithmetic in a formal perturbation ε.
//!
//! Some weights are products of theta factors where numerator and denominator
//! vanish together at integer spins. Shifting the integer arguments by ε and
//! keeping only the leading coefficient of each factor evaluates such ratios
//! as their limit ε → 0.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use super::{theta1, theta1_prime, EllipticContext};
use crate::error::{Error, Result};

/// Distance to a theta zero below which a factor is treated as vanishing.
pub const ZERO_TOL: f64 = 1e-10;

/// Order assigned to a factor that vanishes identically in ε.
const EXACT_ZERO_ORDER: i32 = 1 << 16;

/// An argument `value + slope·ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lin {
    pub value: C64,
    pub slope: C64,
}

impl Lin {
    pub fn constant(value: C64) -> Self {
        Self { value, slope: C64::new(0.0, 0.0) }
    }

    /// `value + ε`.
    pub fn perturbed(value: C64) -> Self {
        Self { value, slope: C64::new(1.0, 0.0) }
    }
}

impl From<C64> for Lin {
    fn from(value: C64) -> Self {
        Lin::constant(value)
    }
}

impl From<f64> for Lin {
    fn from(value: f64) -> Self {
        Lin::constant(C64::new(value, 0.0))
    }
}

impl Add for Lin {
    type Output = Lin;
    fn add(self, o: Lin) -> Lin {
        Lin { value: self.value + o.value, slope: self.slope + o.slope }
    }
}

impl Sub for Lin {
    type Output = Lin;
    fn sub(self, o: Lin) -> Lin {
        Lin { value: self.value - o.value, slope: self.slope - o.slope }
    }
}

impl Add<C64> for Lin {
    type Output = Lin;
    fn add(self, o: C64) -> Lin {
        Lin { value: self.value + o, slope: self.slope }
    }
}

impl Sub<C64> for Lin {
    type Output = Lin;
    fn sub(self, o: C64) -> Lin {
        Lin { value: self.value - o, slope: self.slope }
    }
}

impl Add<f64> for Lin {
    type Output = Lin;
    fn add(self, o: f64) -> Lin {
        Lin { value: self.value + o, slope: self.slope }
    }
}

impl Sub<f64> for Lin {
    type Output = Lin;
    fn sub(self, o: f64) -> Lin {
        Lin { value: self.value - o, slope: self.slope }
    }
}

impl Mul<C64> for Lin {
    type Output = Lin;
    fn mul(self, o: C64) -> Lin {
        Lin { value: self.value * o, slope: self.slope * o }
    }
}

impl Mul<f64> for Lin {
    type Output = Lin;
    fn mul(self, o: f64) -> Lin {
        Lin { value: self.value * o, slope: self.slope * o }
    }
}

impl Mul<Lin> for C64 {
    type Output = Lin;
    fn mul(self, o: Lin) -> Lin {
        o * self
    }
}

impl Mul<Lin> for f64 {
    type Output = Lin;
    fn mul(self, o: Lin) -> Lin {
        o * self
    }
}

impl Neg for Lin {
    type Output = Lin;
    fn neg(self) -> Lin {
        Lin { value: -self.value, slope: -self.slope }
    }
}

/// A quantity `value·ε^order` known only through its leading term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lead {
    pub value: C64,
    pub order: i32,
}

impl Lead {
    pub fn one() -> Self {
        Self { value: C64::new(1.0, 0.0), order: 0 }
    }

    pub fn constant(value: C64) -> Self {
        Self { value, order: 0 }
    }

    /// The ε → 0 limit: zero for positive order, a pole for negative order.
    pub fn limit(self) -> Result<C64> {
        match self.order {
            o if o > 0 => Ok(C64::new(0.0, 0.0)),
            0 => {
                if self.value.is_finite() {
                    Ok(self.value)
                } else {
                    Err(Error::Pole("non-finite value".into()))
                }
            }
            o => Err(Error::Pole(format!("leading term has order {o} in the perturbation"))),
        }
    }
}

impl Mul for Lead {
    type Output = Lead;
    fn mul(self, o: Lead) -> Lead {
        Lead { value: self.value * o.value, order: self.order + o.order }
    }
}

impl Div for Lead {
    type Output = Lead;
    fn div(self, o: Lead) -> Lead {
        Lead { value: self.value / o.value, order: self.order - o.order }
    }
}

/// Sum keeping only the terms of minimal order.
pub fn sum_leading(terms: &[Lead]) -> Lead {
    let Some(order) = terms.iter().map(|t| t.order).min() else {
        return Lead { value: C64::new(0.0, 0.0), order: EXACT_ZERO_ORDER };
    };
    let value = terms.iter().filter(|t| t.order == order).map(|t| t.value).sum();
    Lead { value, order }
}

/// Leading term of f(u).
pub fn theta_lead(u: Lin, ctx: &EllipticContext) -> Result<Lead> {
    let n = (u.value.im / ctx.tau.im).round();
    let m = (u.value - n * ctx.tau).re.round();
    let zero = m + n * ctx.tau;
    if (u.value - zero).norm() < ZERO_TOL {
        if u.slope.norm() == 0.0 {
            return Ok(Lead { value: C64::new(1.0, 0.0), order: EXACT_ZERO_ORDER });
        }
        return Ok(Lead { value: theta1_prime(zero, ctx)? * u.slope, order: 1 });
    }
    Ok(Lead::constant(theta1(u.value, ctx)?))
}

/// Leading term of the elliptic Pochhammer [a]_k.
pub fn epoch_lead(a: Lin, k: i64, ctx: &EllipticContext) -> Result<Lead> {
    let step = 2.0 * ctx.eta;
    let mut r = Lead::one();
    if k >= 0 {
        for j in 0..k {
            r = r * theta_lead(a - step * j as f64, ctx)?;
        }
    } else {
        for j in 1..=-k {
            r = r / theta_lead(a + step * j as f64, ctx)?;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EllipticContext {
        EllipticContext::new(C64::new(0.2, 1.1), C64::new(0.0913, 0.0)).unwrap()
    }

    #[test]
    fn removable_ratio_has_finite_limit() {
        let c = ctx();
        // f(2ε)/f(ε) → 2
        let num = theta_lead(Lin::perturbed(C64::new(0.0, 0.0)) * 2.0, &c).unwrap();
        let den = theta_lead(Lin::perturbed(C64::new(0.0, 0.0)), &c).unwrap();
        assert!(((num / den).limit().unwrap() - 2.0).norm() < 1e-14);
    }

    #[test]
    fn exact_zero_in_denominator_is_a_pole() {
        let c = ctx();
        let z = theta_lead(Lin::constant(C64::new(1.0, 0.0)), &c).unwrap();
        assert!((Lead::one() / z).limit().unwrap_err().is_pole());
        assert_eq!(z.limit().unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn leading_sum_drops_higher_orders() {
        let a = Lead { value: C64::new(2.0, 0.0), order: 0 };
        let b = Lead { value: C64::new(5.0, 0.0), order: 1 };
        assert_eq!(sum_leading(&[a, b]).limit().unwrap(), C64::new(2.0, 0.0));
    }
}
