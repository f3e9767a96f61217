use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerValue {
    pub series: f64,
    pub closed: f64,
    /// `|series − closed| / |closed|`.
    pub relative_gap: f64,
}

/// `(1−ρ²)^{−1/2}·exp((2ρxy − ρ²(x² + y²))/(2(1−ρ²)))`.
pub fn mehler_closed_form(rho: f64, x: f64, y: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("Mehler kernel needs |rho| < 1, got {rho}")));
    }
    let one_minus = 1.0 - rho * rho;
    let exponent = (2.0 * rho * x * y - rho * rho * (x * x + y * y)) / (2.0 * one_minus);
    Ok(exponent.exp() / one_minus.sqrt())
}

/// `Σ_{k=0}^{kmax} ρ^k He_k(x) He_k(y)` next to the closed form.
///
/// For negative ρ and large `|x|` the kernel is many orders of magnitude
/// smaller than the individual terms, so the recurrence and the sum run in
/// double-double arithmetic.
pub fn mehler_sum(rho: f64, x: f64, y: f64, kmax: usize) -> Result<MehlerValue> {
    let closed = mehler_closed_form(rho, x, y)?;
    if kmax == 0 {
        return Err(Error::domain("kmax must be at least 1"));
    }
    let (x, y) = (Dd::from(x), Dd::from(y));
    let (mut hx_prev, mut hy_prev) = (Dd::from(1.0), Dd::from(1.0));
    let (mut hx, mut hy) = (x, y);
    let mut power = Dd::from(rho);
    let mut series = Dd::from(1.0) + power * hx * hy;
    for k in 1..kmax {
        let sk = Dd::sqrt_int(k as u64);
        let sk1 = Dd::sqrt_int(k as u64 + 1);
        let nx = (x * hx - sk * hx_prev) / sk1;
        let ny = (y * hy - sk * hy_prev) / sk1;
        (hx_prev, hx) = (hx, nx);
        (hy_prev, hy) = (hy, ny);
        power = power * Dd::from(rho);
        series = series + power * hx * hy;
    }
    let series = series.hi + series.lo;
    if !(closed.is_finite() && closed > 0.0 && series.is_finite()) {
        return Err(Error::Numeric(format!(
            "Mehler kernel at rho={rho}, x={}, y={} is not representable (closed={closed}, series={series})",
            x.hi, y.hi
        )));
    }
    Ok(MehlerValue {
        series,
        closed,
        relative_gap: (series - closed).abs() / closed.abs(),
    })
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    fn sqrt_int(k: u64) -> Dd {
        let kf = k as f64;
        let s = kf.sqrt();
        let residual = (-s).mul_add(s, kf);
        quick_two_sum(s, residual / (2.0 * s))
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}
