/// Exact sum of finite `f64` values in a fixed-point register covering the
/// whole double range.
///
/// The register holds `sum * 2^1074` as signed base-`2^32` digits in `i64`
/// limbs, so addition is integer addition: associative, commutative and
/// independent of how the inputs were partitioned. Rounding happens once,
/// in [`value`](Self::value), as a function of the exact total only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSum {
    limbs: [i64; LIMBS],
    pending: u32,
}

const LIMBS: usize = 70;
const DIGIT: u32 = 32;
const MASK: i64 = (1 << DIGIT) - 1;
/// Unnormalized additions a limb tolerates before carries must be released.
const SLACK: u32 = 1 << 29;

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self { limbs: [0; LIMBS], pending: 0 }
    }

    /// Adds a finite value; non-finite input is a caller bug.
    pub fn add(&mut self, x: f64) {
        debug_assert!(x.is_finite());
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, shift) = if exp == 0 { (frac, 0) } else { (frac | (1u64 << 52), exp - 1) };
        let limb = (shift / DIGIT as i64) as usize;
        let wide = (mant as u128) << (shift % DIGIT as i64);
        let sign = if x < 0.0 { -1 } else { 1 };
        for k in 0..3 {
            let digit = ((wide >> (DIGIT * k as u32)) as i64) & MASK;
            if digit != 0 {
                self.limbs[limb + k] += sign * digit;
            }
        }
        self.pending += 1;
        if self.pending >= SLACK {
            self.normalize();
        }
    }

    pub fn merge(&mut self, other: &ExactSum) {
        self.normalize();
        let mut other = other.clone();
        other.normalize();
        for (a, b) in self.limbs.iter_mut().zip(other.limbs) {
            *a += b;
        }
        self.pending = 1;
        self.normalize();
    }

    /// Releases carries so every limb but the last lies in `[0, 2^32)`.
    fn normalize(&mut self) {
        let mut carry = 0i64;
        for limb in self.limbs.iter_mut().take(LIMBS - 1) {
            let v = *limb + carry;
            *limb = v & MASK;
            carry = v >> DIGIT;
        }
        self.limbs[LIMBS - 1] += carry;
        self.pending = 0;
    }

    /// The total rounded to `f64`; a pure function of the exact sum.
    pub fn value(&self) -> f64 {
        let mut work = self.clone();
        work.normalize();
        let negative = work.limbs[LIMBS - 1] < 0;
        if negative {
            // Two's complement negation in base 2^32.
            let mut carry = 1i64;
            for limb in work.limbs.iter_mut().take(LIMBS - 1) {
                let v = (!*limb & MASK) + carry;
                *limb = v & MASK;
                carry = v >> DIGIT;
            }
            work.limbs[LIMBS - 1] = -work.limbs[LIMBS - 1] - 1 + carry;
        }
        let Some(top) = work.limbs.iter().rposition(|&l| l != 0) else {
            return 0.0;
        };
        // Three digits hold at least 65 significant bits; a sticky bit below
        // them keeps the single rounding of the u128 conversion correct.
        let low = top.saturating_sub(2);
        let mut wide = 0u128;
        for k in (low..=top).rev() {
            wide = (wide << DIGIT) | work.limbs[k] as u128;
        }
        if work.limbs[..low].iter().any(|&l| l != 0) {
            wide |= 1;
        }
        let magnitude = scale(wide as f64, low);
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn scale(x: f64, limb: usize) -> f64 {
    let e = (limb as i32) * DIGIT as i32 - 1074;
    // Split the power to stay inside the normal range.
    x * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}
