//! Scalar abstract domains: abstract booleans, abstract Z4 and abstract
//! complex numbers in log-polar form.
//!
//! Finite-domain elements are bit-pattern encoded (indicator bit k set iff
//! value k is present) and their binary operations go through lookup tables
//! built once at startup by enumerating members.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::interval::Interval;

/// Subset of {0,1}; the empty set is bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbstractBool(u8);

/// Subset of Z4; the empty set is bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbstractZ4(u8);

fn lift_table<const N: usize>(op: impl Fn(u8, u8) -> u8) -> Vec<Vec<u8>> {
    let size = 1usize << N;
    let mut table = vec![vec![0u8; size]; size];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, out) in row.iter_mut().enumerate() {
            let mut acc = 0u8;
            for x in 0..N as u8 {
                if a >> x & 1 == 0 {
                    continue;
                }
                for y in 0..N as u8 {
                    if b >> y & 1 == 1 {
                        acc |= 1 << op(x, y);
                    }
                }
            }
            *out = acc;
        }
    }
    table
}

struct BoolTables {
    add: Vec<Vec<u8>>,
    mul: Vec<Vec<u8>>,
}

struct Z4Tables {
    add: Vec<Vec<u8>>,
    sub: Vec<Vec<u8>>,
    mul: Vec<Vec<u8>>,
}

static BOOL_TABLES: Lazy<BoolTables> = Lazy::new(|| BoolTables {
    add: lift_table::<2>(|x, y| (x + y) % 2),
    mul: lift_table::<2>(|x, y| x * y % 2),
});

static Z4_TABLES: Lazy<Z4Tables> = Lazy::new(|| Z4Tables {
    add: lift_table::<4>(|x, y| (x + y) % 4),
    sub: lift_table::<4>(|x, y| (4 + x - y) % 4),
    mul: lift_table::<4>(|x, y| x * y % 4),
});

#[allow(clippy::should_implement_trait)]
impl AbstractBool {
    pub const BOTTOM: AbstractBool = AbstractBool(0b00);
    pub const ZERO: AbstractBool = AbstractBool(0b01);
    pub const ONE: AbstractBool = AbstractBool(0b10);
    pub const BOTH: AbstractBool = AbstractBool(0b11);

    pub fn from_bit(bit: u8) -> AbstractBool {
        AbstractBool(1 << (bit % 2))
    }

    pub fn from_encoding(bits: u8) -> AbstractBool {
        assert!(bits < 4);
        AbstractBool(bits)
    }

    pub fn encoding(self) -> u8 {
        self.0
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, bit: u8) -> bool {
        self.0 >> (bit % 2) & 1 == 1
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn members(self) -> impl Iterator<Item = u8> {
        (0..2u8).filter(move |&b| self.contains(b))
    }

    pub fn add(self, other: AbstractBool) -> AbstractBool {
        AbstractBool(BOOL_TABLES.add[self.0 as usize][other.0 as usize])
    }

    pub fn mul(self, other: AbstractBool) -> AbstractBool {
        AbstractBool(BOOL_TABLES.mul[self.0 as usize][other.0 as usize])
    }

    pub fn join(self, other: AbstractBool) -> AbstractBool {
        AbstractBool(self.0 | other.0)
    }
}

#[allow(clippy::should_implement_trait)]
impl AbstractZ4 {
    pub const BOTTOM: AbstractZ4 = AbstractZ4(0);
    pub const ZERO: AbstractZ4 = AbstractZ4(0b0001);

    pub fn from_value(v: u8) -> AbstractZ4 {
        AbstractZ4(1 << (v % 4))
    }

    pub fn from_encoding(bits: u8) -> AbstractZ4 {
        assert!(bits < 16);
        AbstractZ4(bits)
    }

    /// Embed an abstract boolean, mapping 0 to 0 and 1 to 1.
    pub fn from_bool(b: AbstractBool) -> AbstractZ4 {
        AbstractZ4(b.encoding())
    }

    pub fn encoding(self) -> u8 {
        self.0
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: u8) -> bool {
        self.0 >> (v % 4) & 1 == 1
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn members(self) -> impl Iterator<Item = u8> {
        (0..4u8).filter(move |&v| self.contains(v))
    }

    pub fn add(self, other: AbstractZ4) -> AbstractZ4 {
        AbstractZ4(Z4_TABLES.add[self.0 as usize][other.0 as usize])
    }

    pub fn sub(self, other: AbstractZ4) -> AbstractZ4 {
        AbstractZ4(Z4_TABLES.sub[self.0 as usize][other.0 as usize])
    }

    pub fn mul(self, other: AbstractZ4) -> AbstractZ4 {
        AbstractZ4(Z4_TABLES.mul[self.0 as usize][other.0 as usize])
    }

    pub fn join(self, other: AbstractZ4) -> AbstractZ4 {
        AbstractZ4(self.0 | other.0)
    }

    /// Image of doubling, used to turn sign bits into i-exponents.
    pub fn doubled(self) -> AbstractZ4 {
        AbstractZ4::from_value(2).mul(self)
    }
}

/// Set of possible residues in Z4, possibly including the marker for
/// "no candidate product exists".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueSet {
    residues: AbstractZ4,
    no_product: bool,
}

impl ResidueSet {
    pub fn from_z4(residues: AbstractZ4) -> ResidueSet {
        ResidueSet { residues, no_product: false }
    }

    pub fn from_value(v: u8) -> ResidueSet {
        ResidueSet::from_z4(AbstractZ4::from_value(v))
    }

    pub fn no_product() -> ResidueSet {
        ResidueSet { residues: AbstractZ4::BOTTOM, no_product: true }
    }

    pub fn top() -> ResidueSet {
        ResidueSet { residues: AbstractZ4::from_encoding(0b1111), no_product: true }
    }

    pub fn with_no_product(self) -> ResidueSet {
        ResidueSet { no_product: true, ..self }
    }

    pub fn residues(&self) -> AbstractZ4 {
        self.residues
    }

    pub fn contains_no_product(&self) -> bool {
        self.no_product
    }

    pub fn contains_zero(&self) -> bool {
        self.residues.contains(0)
    }

    /// Only the residue 0 is possible: membership in the signed generator
    /// group holds for every concretization.
    pub fn definitely_zero(&self) -> bool {
        !self.no_product && self.residues == AbstractZ4::ZERO
    }

    /// The residue 0 is impossible: membership fails for every concretization.
    pub fn definitely_nonzero(&self) -> bool {
        !self.contains_zero()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_bottom() && !self.no_product
    }
}

/// Abstract complex number e^(r + phi*i) with interval log-magnitude r and
/// interval phase phi. The exact zero is log-magnitude [-inf, -inf].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstractComplex {
    pub log_mag: Interval,
    pub phase: Interval,
}

/// Extra widening for constructors that chain several libm calls.
const FROM_COMPLEX_ULPS: u32 = 4;

impl AbstractComplex {
    pub fn one() -> AbstractComplex {
        AbstractComplex { log_mag: Interval::ZERO, phase: Interval::ZERO }
    }

    pub fn zero() -> AbstractComplex {
        AbstractComplex {
            log_mag: Interval::point(f64::NEG_INFINITY),
            phase: Interval::ZERO,
        }
    }

    /// Smallest box containing the given concrete value. The phase is
    /// canonicalized to (-pi, pi].
    pub fn from_complex(c: Complex64) -> AbstractComplex {
        if c.norm() == 0.0 {
            return AbstractComplex::zero();
        }
        if c.im == 0.0 && c.re == 1.0 {
            return AbstractComplex::one();
        }
        if c.im == 0.0 && c.re == -1.0 {
            return AbstractComplex { log_mag: Interval::ZERO, phase: Interval::point(std::f64::consts::PI) };
        }
        let mut arg = c.arg();
        if arg == -std::f64::consts::PI {
            arg = std::f64::consts::PI;
        }
        AbstractComplex {
            log_mag: Interval::point_widened(c.norm().ln(), FROM_COMPLEX_ULPS),
            phase: Interval::point_widened(arg, FROM_COMPLEX_ULPS),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag.lo == f64::NEG_INFINITY && self.log_mag.hi == f64::NEG_INFINITY
    }

    pub fn is_bottom(&self) -> bool {
        self.log_mag.is_empty() || self.phase.is_empty()
    }

    pub fn mul(&self, other: &AbstractComplex) -> AbstractComplex {
        if self.is_bottom() || other.is_bottom() {
            return AbstractComplex { log_mag: Interval::BOTTOM, phase: Interval::BOTTOM };
        }
        if self.is_zero() || other.is_zero() {
            return AbstractComplex::zero();
        }
        AbstractComplex {
            log_mag: self.log_mag.add(&other.log_mag),
            phase: self.phase.add(&other.phase),
        }
    }

    pub fn conj(&self) -> AbstractComplex {
        if self.is_zero() {
            return *self;
        }
        AbstractComplex { log_mag: self.log_mag, phase: self.phase.neg() }
    }

    pub fn join(&self, other: &AbstractComplex) -> AbstractComplex {
        if self.is_bottom() {
            return *other;
        }
        if other.is_bottom() {
            return *self;
        }
        if self.is_zero() && other.is_zero() {
            return AbstractComplex::zero();
        }
        AbstractComplex {
            log_mag: self.log_mag.join(&other.log_mag),
            phase: self.phase.join(&other.phase),
        }
    }

    /// Interval of possible real parts: exp(r) * cos(phi).
    pub fn re(&self) -> Interval {
        if self.is_bottom() {
            return Interval::BOTTOM;
        }
        if self.is_zero() {
            return Interval::ZERO;
        }
        self.log_mag.exp().mul(&self.phase.cos())
    }

    /// Join over i^v for each residue; the no-product marker contributes the
    /// exact zero. Phases land in (-pi, pi].
    pub fn i_power(rs: ResidueSet) -> AbstractComplex {
        assert!(!rs.is_empty(), "empty residue set");
        let mut acc: Option<AbstractComplex> = None;
        let mut join = |c: AbstractComplex| {
            acc = Some(match acc {
                None => c,
                Some(prev) => prev.join(&c),
            });
        };
        for v in rs.residues().members() {
            let phase = match v {
                0 => 0.0,
                1 => std::f64::consts::FRAC_PI_2,
                2 => std::f64::consts::PI,
                _ => -std::f64::consts::FRAC_PI_2,
            };
            join(AbstractComplex {
                log_mag: Interval::ZERO,
                phase: Interval::point(phase),
            });
        }
        if rs.contains_no_product() {
            join(AbstractComplex::zero());
        }
        acc.expect("nonempty residue set")
    }

    /// Membership test for a concrete value given in log-polar form, treating
    /// phases as equal modulo 2*pi.
    pub fn contains_polar(&self, log_mag: f64, phase: f64) -> bool {
        if log_mag == f64::NEG_INFINITY {
            return self.log_mag.contains(f64::NEG_INFINITY);
        }
        if !self.log_mag.contains(log_mag) {
            return false;
        }
        let tau = 2.0 * std::f64::consts::PI;
        let k0 = ((self.phase.lo - phase) / tau).floor() as i64;
        (k0 - 1..=k0 + 2).any(|k| self.phase.contains(phase + k as f64 * tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ab(bits: u8) -> AbstractBool {
        AbstractBool::from_encoding(bits)
    }

    fn az(bits: u8) -> AbstractZ4 {
        AbstractZ4::from_encoding(bits)
    }

    #[test]
    fn bool_add_examples() {
        assert_eq!(AbstractBool::BOTTOM.add(AbstractBool::ZERO), AbstractBool::BOTTOM);
        assert_eq!(AbstractBool::BOTH.add(AbstractBool::ONE), AbstractBool::BOTH);
        assert_eq!(AbstractBool::ONE.join(AbstractBool::ZERO), AbstractBool::BOTH);
        assert_eq!(AbstractBool::ONE.add(AbstractBool::ONE), AbstractBool::ZERO);
    }

    #[test]
    fn z4_arithmetic_examples() {
        // {0,3} + {1} = {1,0}
        assert_eq!(az(0b1001).add(az(0b0010)), az(0b0011));
        // {2} - {0,1} = {2,1}
        assert_eq!(az(0b0100).sub(az(0b0011)), az(0b0110));
        assert_eq!(AbstractZ4::from_bool(AbstractBool::BOTH), az(0b0011));
        assert_eq!(ab(0b11), AbstractBool::BOTH);
    }

    #[test]
    fn finite_domain_ops_are_image_of_members() {
        for a in 0..16u8 {
            for b in 0..16u8 {
                let az_a = az(a);
                let az_b = az(b);
                for (op, f) in [
                    (az_a.add(az_b), (|x: u8, y: u8| (x + y) % 4) as fn(u8, u8) -> u8),
                    (az_a.sub(az_b), |x, y| (4 + x - y) % 4),
                    (az_a.mul(az_b), |x, y| x * y % 4),
                ] {
                    let mut expect = AbstractZ4::BOTTOM;
                    for x in az_a.members() {
                        for y in az_b.members() {
                            expect = expect.join(AbstractZ4::from_value(f(x, y)));
                        }
                    }
                    assert_eq!(op, expect);
                }
            }
        }
    }

    #[test]
    fn complex_one_is_neutral() {
        let d = AbstractComplex {
            log_mag: Interval::point(-1.0),
            phase: Interval::point(2.0),
        };
        assert_eq!(AbstractComplex::one().mul(&d), d);
    }

    #[test]
    fn zero_absorbs_products() {
        let d = AbstractComplex::from_complex(Complex64::new(0.3, -0.7));
        assert!(AbstractComplex::zero().mul(&d).is_zero());
        assert_eq!(AbstractComplex::zero().re(), Interval::ZERO);
    }

    #[test]
    fn t_coefficient_self_product() {
        // d1 * 1 * d1^* with d1 = cos(pi/8) e^{i pi/8}
        let d1 = Complex64::from_polar((PI / 8.0).cos(), PI / 8.0);
        let a = AbstractComplex::from_complex(d1);
        let c1 = a.mul(&AbstractComplex::one()).mul(&a.conj());
        let expected = (PI / 8.0).cos().powi(2).ln();
        assert!((c1.log_mag.lo - expected).abs() <= 1e-12);
        assert!((c1.log_mag.hi - expected).abs() <= 1e-12);
        assert!(c1.phase.contains(0.0) && c1.phase.width() <= 1e-12);
    }

    #[test]
    fn join_with_zero_extends_magnitude_down() {
        let j = AbstractComplex::zero().join(&AbstractComplex::one());
        assert_eq!(j.log_mag, Interval::new(f64::NEG_INFINITY, 0.0));
        assert_eq!(j.phase, Interval::ZERO);
        let one = AbstractComplex::one();
        assert_eq!(one.join(&one), one);
    }

    #[test]
    fn i_power_examples() {
        assert_eq!(AbstractComplex::i_power(ResidueSet::from_value(0)), AbstractComplex::one());
        assert!(AbstractComplex::i_power(ResidueSet::no_product()).is_zero());
        let mixed = AbstractComplex::i_power(ResidueSet::from_value(0).with_no_product());
        assert_eq!(mixed.log_mag, Interval::new(f64::NEG_INFINITY, 0.0));
        assert_eq!(mixed.phase, Interval::ZERO);
        let i_only = AbstractComplex::i_power(ResidueSet::from_value(1));
        assert_eq!(i_only.phase, Interval::point(FRAC_PI_2));
        let minus_i = AbstractComplex::i_power(ResidueSet::from_value(3));
        assert_eq!(minus_i.phase, Interval::point(-FRAC_PI_2));
    }

    #[test]
    fn i_power_agrees_with_sign_transformer() {
        // i^(2b) is the complex abstraction of (-1)^b
        for bits in 1..4u8 {
            let b = ab(bits);
            let doubled = AbstractZ4::from_bool(b).doubled();
            let via_pow = AbstractComplex::i_power(ResidueSet::from_z4(doubled));
            let mut expect: Option<AbstractComplex> = None;
            for v in b.members() {
                let c = AbstractComplex::from_complex(Complex64::new(if v == 0 { 1.0 } else { -1.0 }, 0.0));
                expect = Some(match expect {
                    None => c,
                    Some(p) => p.join(&c),
                });
            }
            let expect = expect.unwrap();
            // boxes agree up to constructor widening
            assert!((via_pow.phase.lo - expect.phase.lo).abs() <= 1e-12);
            assert!((via_pow.phase.hi - expect.phase.hi).abs() <= 1e-12);
            assert!((via_pow.log_mag.lo - expect.log_mag.lo).abs() <= 1e-12);
        }
    }

    fn random_box(rng: &mut ChaCha8Rng) -> AbstractComplex {
        if rng.random_bool(0.1) {
            return AbstractComplex::zero();
        }
        let r1: f64 = rng.random_range(-5.0..2.0);
        let r2: f64 = rng.random_range(-5.0..2.0);
        let p1: f64 = rng.random_range(-PI..PI);
        let p2: f64 = rng.random_range(-PI..PI);
        AbstractComplex {
            log_mag: Interval::new(r1.min(r2), if rng.random_bool(0.15) { f64::NEG_INFINITY } else { r1.max(r2) }.max(r1.min(r2))),
            phase: Interval::new(p1.min(p2), p1.max(p2)),
        }
    }

    fn sample_polar(rng: &mut ChaCha8Rng, c: &AbstractComplex) -> (f64, f64) {
        if c.is_zero() {
            return (f64::NEG_INFINITY, 0.0);
        }
        let lo = c.log_mag.lo.max(-50.0);
        let r = if rng.random_bool(0.2) && c.log_mag.lo == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lo + (c.log_mag.hi - lo) * rng.random::<f64>()
        };
        let phi = c.phase.lo + c.phase.width() * rng.random::<f64>();
        (r, phi)
    }

    #[test]
    fn complex_transformers_contain_sampled_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10_000 {
            let a = random_box(&mut rng);
            let b = random_box(&mut rng);
            let (ra, pa) = sample_polar(&mut rng, &a);
            let (rb, pb) = sample_polar(&mut rng, &b);
            // concrete product in log-polar form adds components
            let prod = a.mul(&b);
            let (rp, pp) = if ra == f64::NEG_INFINITY || rb == f64::NEG_INFINITY {
                (f64::NEG_INFINITY, 0.0)
            } else {
                (ra + rb, pa + pb)
            };
            assert!(prod.contains_polar(rp, pp), "mul containment");
            let j = a.join(&b);
            assert!(j.contains_polar(ra, pa) && j.contains_polar(rb, pb), "join containment");
            let re = a.re();
            let concrete_re = if ra == f64::NEG_INFINITY { 0.0 } else { ra.exp() * pa.cos() };
            assert!(re.contains(concrete_re), "re containment {re} vs {concrete_re}");
        }
    }
}
