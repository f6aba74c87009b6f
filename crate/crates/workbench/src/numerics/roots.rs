use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root not converged after {0} iterations")]
    MaxIterations(usize),
    #[error("non-finite function value at x = {0}")]
    NonFinite(f64),
}

/// An interval over which `f` changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Result<Self, RootError> {
        let (f_lo, f_hi) = (f(lo), f(hi));
        let b = RootBracket { lo, hi, f_lo, f_hi };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<(), RootError> {
        if !self.f_lo.is_finite() {
            return Err(RootError::NonFinite(self.lo));
        }
        if !self.f_hi.is_finite() {
            return Err(RootError::NonFinite(self.hi));
        }
        if !(self.lo < self.hi) || self.f_lo * self.f_hi > 0.0 {
            return Err(RootError::NoSignChange {
                lo: self.lo,
                hi: self.hi,
                f_lo: self.f_lo,
                f_hi: self.f_hi,
            });
        }
        Ok(())
    }
}

const MAX_ITER: usize = 200;

/// Brent's method: inverse quadratic interpolation with a bisection
/// fallback. Terminates when the bracket is narrower than `tol` (plus a
/// few ulps of the root) or when `f` hits zero exactly.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    bracket: RootBracket,
    tol: f64,
) -> Result<f64, RootError> {
    bracket.check()?;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite(b));
        }
    }
    Err(RootError::MaxIterations(MAX_ITER))
}

/// Sample `f` on `steps + 1` evenly spaced points of `[lo, hi]` and return
/// every adjacent pair whose values are finite and of opposite sign (or
/// touch zero). Non-finite samples break the chain so poles never pair up.
pub fn scan_sign_changes(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Vec<RootBracket> {
    let h = (hi - lo) / steps as f64;
    let xs: Vec<f64> = (0..=steps).map(|i| if i == steps { hi } else { lo + h * i as f64 }).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    sign_change_brackets(&xs, &fs)
}

/// Bracket extraction over pre-computed samples, same rules as
/// [`scan_sign_changes`].
pub fn sign_change_brackets(xs: &[f64], fs: &[f64]) -> Vec<RootBracket> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (i, (&x, &fx)) in xs.iter().zip(fs).enumerate() {
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((xp, fp)) = prev {
            // a zero landing exactly on a sample is claimed by the interval on its left
            if fp * fx < 0.0 || (fx == 0.0 && fp != 0.0) || (i == 1 && fp == 0.0) {
                out.push(RootBracket { lo: xp, hi: x, f_lo: fp, f_hi: fx });
            }
        }
        prev = Some((x, fx));
    }
    out
}
