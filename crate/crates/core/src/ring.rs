//! Exact arithmetic in S-integer rings `O_K[1/m]`, where `K` is the rational
//! field or a quadratic field and `m` is a product of rational primes.
//!
//! An element is stored as `(x + y*w) / den` with `w = sqrt(d)` or
//! `w = (1 + sqrt(d)) / 2`. The denominator is a positive product of inverted
//! primes and the triple is kept in lowest terms, `gcd(x, y, den) = 1`, so
//! structural equality is ring equality.
//!
//! A nonzero element `a` is a unit exactly when its norm has numerator and
//! denominator built from inverted primes only: then `conj(a) / N(a)` lies in
//! the ring and is the inverse.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rational,
    /// `Q(sqrt d)`; with `half` the order is `Z[(1 + sqrt d)/2]` (needs `d = 1 mod 4`).
    Quadratic { d: i64, half: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingSpec {
    kind: FieldKind,
    /// Sorted, distinct rational primes.
    inverted_primes: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_squarefree(d: i64) -> bool {
    let n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl RingSpec {
    pub fn rational(primes: &[u64]) -> Result<Self> {
        Self::new(FieldKind::Rational, primes)
    }

    pub fn quadratic(d: i64, half: bool, primes: &[u64]) -> Result<Self> {
        Self::new(FieldKind::Quadratic { d, half }, primes)
    }

    pub fn new(kind: FieldKind, primes: &[u64]) -> Result<Self> {
        if let FieldKind::Quadratic { d, half } = kind {
            if d == 0 || d == 1 || !is_squarefree(d) {
                return Err(Error::Unsupported(format!("d = {d} must be squarefree and not 0 or 1")));
            }
            if half && d.rem_euclid(4) != 1 {
                return Err(Error::Unsupported(format!("half basis needs d = 1 mod 4, got {d}")));
            }
        }
        let mut inverted_primes = primes.to_vec();
        inverted_primes.sort_unstable();
        inverted_primes.dedup();
        if let Some(&p) = inverted_primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::Unsupported(format!("{p} is not prime")));
        }
        Ok(RingSpec { kind, inverted_primes })
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn inverted_primes(&self) -> &[u64] {
        &self.inverted_primes
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            FieldKind::Rational => 1,
            FieldKind::Quadratic { .. } => 2,
        }
    }

    pub fn has_real_embedding(&self) -> bool {
        match self.kind {
            FieldKind::Rational => true,
            FieldKind::Quadratic { d, .. } => d > 0,
        }
    }

    pub fn is_real_quadratic(&self) -> bool {
        matches!(self.kind, FieldKind::Quadratic { d, .. } if d > 0)
    }

    /// Infinite unit group: some prime is inverted or the field is real quadratic.
    pub fn is_admissible(&self) -> bool {
        !self.inverted_primes.is_empty() || self.is_real_quadratic()
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q")?;
        if let FieldKind::Quadratic { d, half } = self.kind {
            if half {
                write!(f, "(sqrt {d}; half)")?;
            } else {
                write!(f, "(sqrt {d})")?;
            }
        }
        if !self.inverted_primes.is_empty() {
            let m: u128 = self.inverted_primes.iter().map(|&p| p as u128).product();
            write!(f, "[1/{m}]")?;
        }
        Ok(())
    }
}

/// Byte cursor shared by the text parsers.
pub(crate) struct Cursor<'a> {
    pub(crate) s: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(s: &'a str) -> Self {
        Cursor { s: s.as_bytes(), pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", c as char)))
        }
    }

    pub(crate) fn expect_word(&mut self, w: &str) -> Result<()> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(w.as_bytes()) {
            self.pos += w.len();
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{w}'")))
        }
    }

    pub(crate) fn int(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(Error::parse(start, "expected integer"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| Error::parse(start, "bad integer"))
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.s.len()
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(Error::parse(self.pos, "trailing input"))
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// `Q`, `Q[1/6]`, `Q(sqrt 2)`, `Q(sqrt 5; half)[1/3]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Cursor::new(s);
        c.expect(b'Q')?;
        let mut kind = FieldKind::Rational;
        if c.eat(b'(') {
            c.expect_word("sqrt")?;
            let pos = c.pos;
            let d = c.int()?.to_i64().ok_or_else(|| Error::parse(pos, "d out of range"))?;
            let mut half = false;
            if c.eat(b';') {
                c.expect_word("half")?;
                half = true;
            }
            c.expect(b')')?;
            kind = FieldKind::Quadratic { d, half };
        }
        let mut primes = Vec::new();
        if c.eat(b'[') {
            c.expect(b'1')?;
            c.expect(b'/')?;
            let pos = c.pos;
            let m = c.int()?.to_u64().filter(|&m| m >= 2).ok_or_else(|| Error::parse(pos, "bad inverted integer"))?;
            primes = prime_factors(m);
            c.expect(b']')?;
        }
        c.finish()?;
        RingSpec::new(kind, &primes)
    }
}

/// `(x + y*w) / den` in lowest terms; see the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    x: BigInt,
    y: BigInt,
    den: BigInt,
}

impl RingElement {
    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one() && self.y.is_zero() && self.den.is_one()
    }

    /// Larger of the absolute coefficient values and the denominator.
    pub fn height(&self) -> BigInt {
        self.x.abs().max(self.y.abs()).max(self.den.clone())
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.y.is_zero(), self.den.is_one()) {
            (true, true) => write!(f, "{}", self.x),
            (true, false) => write!(f, "{}/{}", self.x, self.den),
            (false, true) => write!(f, "{}+{}*w", self.x, self.y),
            (false, false) => write!(f, "({}+{}*w)/{}", self.x, self.y, self.den),
        }
    }
}

/// Raw parse of the element grammar into `(x, y, den)`, not yet reduced.
pub(crate) fn parse_raw_element(c: &mut Cursor) -> Result<(BigInt, BigInt, BigInt)> {
    c.skip_ws();
    if c.eat(b'(') {
        let x = c.int()?;
        c.expect(b'+')?;
        let y = c.int()?;
        c.expect(b'*')?;
        c.expect(b'w')?;
        c.expect(b')')?;
        c.expect(b'/')?;
        let den = c.int()?;
        return Ok((x, y, den));
    }
    let x = c.int()?;
    if c.eat(b'/') {
        let den = c.int()?;
        return Ok((x, BigInt::zero(), den));
    }
    let save = c.pos;
    if c.eat(b'+') {
        let y = c.int()?;
        c.expect(b'*')?;
        c.expect(b'w')?;
        return Ok((x, y, BigInt::one()));
    }
    c.pos = save;
    Ok((x, BigInt::zero(), BigInt::one()))
}

/// A concrete S-integer ring with its cached unit data.
#[derive(Clone, Debug)]
pub struct Ring {
    spec: RingSpec,
    primes: Vec<BigInt>,
    /// `w^2 = c0 + c1*w`.
    c0: BigInt,
    c1: BigInt,
    fundamental_unit: Option<RingElement>,
    torsion: Vec<RingElement>,
}

fn isqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// `|n| = p^e` for some `e >= 0`. Checked against the power predicted by
/// the bit length, so no division by a large power is needed.
fn is_power_of(n: &BigInt, p: &BigInt) -> bool {
    let n = n.abs();
    if n.is_one() {
        return true;
    }
    let lp = p.to_f64().expect("prime fits in f64").log2();
    let est = ((n.bits() as f64 - 0.5) / lp).round() as i64;
    for e in [est - 1, est, est + 1] {
        if e >= 1 && e <= u32::MAX as i64 && Pow::pow(p, e as u32) == n {
            return true;
        }
    }
    false
}

/// `(min(v_p(n), cap), n / p^that)` for `n != 0`. Divides by `p, p^2, p^4,
/// ...` while that succeeds, then back down, so the cost follows the
/// valuation rather than the size of `n`.
fn strip(n: &BigInt, p: &BigInt, cap: u64) -> (u64, BigInt) {
    if cap == 0 || !(n % p).is_zero() {
        return (0, n.clone());
    }
    let mut n = n / p;
    let mut k = 1u64;
    let mut powers = vec![p.clone()];
    loop {
        let step = 1u64 << powers.len();
        if powers.len() >= 63 || k + step > cap {
            break;
        }
        let last = powers.last().expect("non-empty");
        if last.bits() * 2 > n.bits() + 1 {
            break;
        }
        let sq = last * last;
        let (q, r) = n.div_rem(&sq);
        if !r.is_zero() {
            break;
        }
        n = q;
        k += step;
        powers.push(sq);
    }
    for (i, pw) in powers.iter().enumerate().rev() {
        let step = 1u64 << i;
        if k + step > cap {
            continue;
        }
        let (q, r) = n.div_rem(pw);
        if r.is_zero() {
            n = q;
            k += step;
        }
    }
    (k, n)
}

impl Ring {
    pub fn new(spec: RingSpec) -> Self {
        let (c0, c1) = match spec.kind {
            FieldKind::Rational => (BigInt::zero(), BigInt::zero()),
            FieldKind::Quadratic { d, half: false } => (BigInt::from(d), BigInt::zero()),
            FieldKind::Quadratic { d, half: true } => (BigInt::from((d - 1) / 4), BigInt::one()),
        };
        let primes = spec.inverted_primes.iter().map(|&p| BigInt::from(p)).collect();
        let mut ring = Ring { spec, primes, c0, c1, fundamental_unit: None, torsion: Vec::new() };
        ring.torsion = ring.compute_torsion();
        if ring.spec.is_real_quadratic() {
            ring.fundamental_unit = Some(ring.compute_fundamental_unit());
        }
        ring
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Ok(Ring::new(spec.parse()?))
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    /// `(c0, c1)` with `w^2 = c0 + c1*w`.
    pub(crate) fn omega_square(&self) -> (&BigInt, &BigInt) {
        (&self.c0, &self.c1)
    }

    pub fn is_rational(&self) -> bool {
        self.spec.kind == FieldKind::Rational
    }

    pub fn zero(&self) -> RingElement {
        RingElement { x: BigInt::zero(), y: BigInt::zero(), den: BigInt::one() }
    }

    pub fn one(&self) -> RingElement {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> RingElement {
        RingElement { x: BigInt::from(n), y: BigInt::zero(), den: BigInt::one() }
    }

    pub fn from_bigint(&self, n: BigInt) -> RingElement {
        RingElement { x: n, y: BigInt::zero(), den: BigInt::one() }
    }

    /// `w`, the second basis element.
    pub fn omega(&self) -> Result<RingElement> {
        self.element(BigInt::zero(), BigInt::one(), BigInt::one())
    }

    /// Checked constructor for `(x + y*w)/den`.
    pub fn element(&self, x: BigInt, y: BigInt, den: BigInt) -> Result<RingElement> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() && !y.is_zero() {
            return Err(Error::NotInRing { ring: self.spec.to_string(), detail: "w is not defined over Q".into() });
        }
        self.reduce_checked(x, y, den).ok_or_else(|| Error::NotInRing {
            ring: self.spec.to_string(),
            detail: "denominator has a prime that is not inverted".into(),
        })
    }

    pub fn element_i64(&self, x: i64, y: i64, den: i64) -> Result<RingElement> {
        self.element(x.into(), y.into(), den.into())
    }

    pub fn parse_element(&self, s: &str) -> Result<RingElement> {
        let mut c = Cursor::new(s);
        let (x, y, den) = parse_raw_element(&mut c)?;
        c.finish()?;
        self.element(x, y, den)
    }

    /// Lowest terms for a denominator already known to be a product of
    /// inverted primes. Only primes dividing both coordinates are touched, so
    /// a huge prime-power denominator costs nothing in the usual case.
    fn reduce(&self, mut x: BigInt, mut y: BigInt, mut den: BigInt) -> RingElement {
        if den.is_negative() {
            x = -x;
            y = -y;
            den = -den;
        }
        if x.is_zero() && y.is_zero() {
            return RingElement { x, y, den: BigInt::one() };
        }
        if den.is_one() {
            return RingElement { x, y, den };
        }
        for p in &self.primes {
            if !(&x % p).is_zero() || !(&y % p).is_zero() || !(&den % p).is_zero() {
                continue;
            }
            let mut k = if x.is_zero() { u64::MAX } else { strip(&x, p, u64::MAX).0 };
            if !y.is_zero() {
                k = strip(&y, p, k).0;
            }
            k = strip(&den, p, k).0;
            let pk = Pow::pow(p, k as u32);
            x /= &pk;
            y /= &pk;
            den /= &pk;
        }
        RingElement { x, y, den }
    }

    /// Lowest terms for an arbitrary denominator, `None` when the result is
    /// not in the ring.
    fn reduce_checked(&self, x: BigInt, y: BigInt, den: BigInt) -> Option<RingElement> {
        let s = self.smooth_free(&den.abs());
        if s.is_one() {
            return Some(self.reduce(x, y, den));
        }
        // the prime-to-m part of the denominator has to cancel completely
        let (x, rx) = x.div_rem(&s);
        let (y, ry) = y.div_rem(&s);
        if !rx.is_zero() || !ry.is_zero() {
            return None;
        }
        Some(self.reduce(x, y, den / s))
    }

    /// `n` with every inverted prime divided out.
    pub fn smooth_free(&self, n: &BigInt) -> BigInt {
        if n.is_zero() {
            return n.clone();
        }
        let mut n = n.clone();
        for p in &self.primes {
            if !(&n % p).is_zero() {
                continue;
            }
            if is_power_of(&n, p) {
                return if n.is_negative() { -BigInt::one() } else { BigInt::one() };
            }
            n = strip(&n, p, u64::MAX).1;
        }
        n
    }

    pub fn is_smooth(&self, n: &BigInt) -> bool {
        !n.is_zero() && self.smooth_free(&n.abs()).is_one()
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        if a.den == b.den {
            return self.reduce(&a.x + &b.x, &a.y + &b.y, a.den.clone());
        }
        self.reduce(&a.x * &b.den + &b.x * &a.den, &a.y * &b.den + &b.y * &a.den, &a.den * &b.den)
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        RingElement { x: -&a.x, y: -&a.y, den: a.den.clone() }
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.add(a, &self.neg(b))
    }

    fn mul_coords(&self, (x1, y1): (&BigInt, &BigInt), (x2, y2): (&BigInt, &BigInt)) -> (BigInt, BigInt) {
        if y1.is_zero() {
            return (x1 * x2, x1 * y2);
        }
        if y2.is_zero() {
            return (x1 * x2, y1 * x2);
        }
        let yy = y1 * y2;
        let mut x = x1 * x2 + &yy * &self.c0;
        let mut y = x1 * y2 + x2 * y1;
        if !self.c1.is_zero() {
            y += &yy * &self.c1;
        }
        if x.is_zero() {
            x = BigInt::zero();
        }
        (x, y)
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let (x, y) = self.mul_coords((&a.x, &a.y), (&b.x, &b.y));
        self.reduce(x, y, &a.den * &b.den)
    }

    pub fn mul_int(&self, a: &RingElement, n: &BigInt) -> RingElement {
        self.reduce(&a.x * n, &a.y * n, a.den.clone())
    }

    /// Galois conjugate; the identity on the rational kind.
    pub fn conj(&self, a: &RingElement) -> RingElement {
        if self.is_rational() {
            return a.clone();
        }
        RingElement { x: &a.x + &self.c1 * &a.y, y: -&a.y, den: a.den.clone() }
    }

    /// Norm of the numerator `x + y*w`, an integer.
    pub(crate) fn numerator_norm(&self, x: &BigInt, y: &BigInt) -> BigInt {
        if self.is_rational() {
            return x.clone();
        }
        let mut n = x * x - &self.c0 * y * y;
        if !self.c1.is_zero() {
            n += &self.c1 * x * y;
        }
        n
    }

    /// Field norm down to Q; for the rational kind this is the element itself.
    pub fn norm(&self, a: &RingElement) -> BigRational {
        let n = self.numerator_norm(&a.x, &a.y);
        let d = if self.is_rational() { a.den.clone() } else { &a.den * &a.den };
        BigRational::new(n, d)
    }

    /// Index of the ideal `aO` in `O`: `|N(a)|` with inverted primes removed, 0 for `a = 0`.
    pub fn ideal_norm(&self, a: &RingElement) -> BigInt {
        self.smooth_free(&self.numerator_norm(&a.x, &a.y).abs())
    }

    pub fn is_unit(&self, a: &RingElement) -> bool {
        !a.is_zero() && self.ideal_norm(a).is_one()
    }

    /// `a / b` when it lies in the ring.
    pub fn exact_div(&self, a: &RingElement, b: &RingElement) -> Result<Option<RingElement>> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if a.is_zero() {
            return Ok(Some(self.zero()));
        }
        // a/b = (xa + ya w) conj(xb + yb w) db / (da N(xb + yb w))
        let (x, y, n) = if self.is_rational() {
            (&a.x * &b.den, BigInt::zero(), b.x.clone())
        } else {
            let cb = self.conj(&RingElement { x: b.x.clone(), y: b.y.clone(), den: BigInt::one() });
            let (x, y) = self.mul_coords((&a.x, &a.y), (&cb.x, &cb.y));
            (x * &b.den, y * &b.den, self.numerator_norm(&b.x, &b.y))
        };
        // only the prime-to-m part s of the norm can fail to cancel
        let s = self.smooth_free(&n).abs();
        let (x, y) = if s.is_one() {
            (x, y)
        } else {
            let (x, rx) = x.div_rem(&s);
            let (y, ry) = y.div_rem(&s);
            if !rx.is_zero() || !ry.is_zero() {
                return Ok(None);
            }
            (x, y)
        };
        Ok(Some(self.reduce(x, y, &a.den * (n / s))))
    }

    /// `a / b` for a divisor known to divide; panics otherwise.
    pub(crate) fn div_known(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.exact_div(a, b).ok().flatten().expect("exact division by a known divisor")
    }

    /// Inverse of a unit, `None` for non-units.
    pub fn unit_inverse(&self, u: &RingElement) -> Option<RingElement> {
        if !self.is_unit(u) {
            return None;
        }
        self.exact_div(&self.one(), u).ok().flatten()
    }

    /// `a^e`; negative exponents need `a` to be a unit.
    pub fn pow(&self, a: &RingElement, e: i64) -> Option<RingElement> {
        let base = if e < 0 { self.unit_inverse(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = self.one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            n >>= 1;
            if n > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        Some(acc)
    }

    /// Nearest integer to `num/den` (`den > 0`), ties rounded up.
    pub(crate) fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
        let n: BigInt = num * 2 + den;
        n.div_floor(&(den * 2))
    }

    /// Quotient `a/b` in `K`, as exact rational coordinates `(X + Y*w)/D` with `D > 0`.
    pub(crate) fn field_quotient(&self, a: &RingElement, b: &RingElement) -> (BigInt, BigInt, BigInt) {
        if self.is_rational() {
            let mut num = &a.x * &b.den;
            let mut den = &a.den * &b.x;
            if den.is_negative() {
                num = -num;
                den = -den;
            }
            return (num, BigInt::zero(), den);
        }
        let cb = self.conj(&RingElement { x: b.x.clone(), y: b.y.clone(), den: BigInt::one() });
        let (x, y) = self.mul_coords((&a.x, &a.y), (&cb.x, &cb.y));
        let mut x = x * &b.den;
        let mut y = y * &b.den;
        let mut den = &a.den * self.numerator_norm(&b.x, &b.y);
        if den.is_negative() {
            x = -x;
            y = -y;
            den = -den;
        }
        (x, y, den)
    }

    /// The minimal unit `> 1` (first real embedding) of a real quadratic order.
    pub fn fundamental_unit(&self) -> Result<RingElement> {
        self.fundamental_unit
            .clone()
            .ok_or_else(|| Error::Unsupported(format!("{} has no fundamental unit (not real quadratic)", self.spec)))
    }

    /// Roots of unity in the ring, starting `1, -1`.
    pub fn torsion(&self) -> &[RingElement] {
        &self.torsion
    }

    /// Free generators of the unit group used by the searches: the fundamental
    /// unit when present, then each inverted prime. Together with the torsion
    /// they generate a finite-index subgroup of the units.
    pub fn unit_generators(&self) -> Vec<RingElement> {
        let mut gens: Vec<RingElement> = self.fundamental_unit.iter().cloned().collect();
        gens.extend(self.primes.iter().map(|p| self.from_bigint(p.clone())));
        gens
    }

    fn compute_torsion(&self) -> Vec<RingElement> {
        let mut out = vec![self.int(1), self.int(-1)];
        if let FieldKind::Quadratic { d, .. } = self.spec.kind {
            if d < 0 {
                for x in -2i64..=2 {
                    for y in -2i64..=2 {
                        let (x, y) = (BigInt::from(x), BigInt::from(y));
                        if !y.is_zero() && self.numerator_norm(&x, &y).is_one() {
                            out.push(RingElement { x, y, den: BigInt::one() });
                        }
                    }
                }
            }
        }
        out
    }

    fn compute_fundamental_unit(&self) -> RingElement {
        let FieldKind::Quadratic { d, half } = self.spec.kind else { unreachable!() };
        let dd = BigInt::from(d);
        // continued fraction of sqrt(d) gives the unit of Z[sqrt d]
        let a0 = dd.sqrt();
        let (mut m, mut q, mut a) = (BigInt::zero(), BigInt::one(), a0.clone());
        let (mut h1, mut h) = (BigInt::one(), a0.clone());
        let (mut k1, mut k) = (BigInt::zero(), BigInt::one());
        loop {
            let n = &h * &h - &dd * &k * &k;
            if n.abs().is_one() {
                break;
            }
            m = &q * &a - &m;
            q = (&dd - &m * &m) / &q;
            a = (&a0 + &m) / &q;
            let hn = &a * &h + &h1;
            h1 = std::mem::replace(&mut h, hn);
            let kn = &a * &k + &k1;
            k1 = std::mem::replace(&mut k, kn);
        }
        if !half {
            return RingElement { x: h, y: k, den: BigInt::one() };
        }
        // (x + y sqrt d)/2 with x^2 - d y^2 = +-4; the smallest y > 0 wins,
        // and y = 2k always succeeds.
        let limit = &k * 2;
        let mut y = BigInt::one();
        while y <= limit {
            let dy2 = &dd * &y * &y;
            let mut best: Option<BigInt> = None;
            for s in [-4i32, 4] {
                if let Some(x) = isqrt_exact(&(&dy2 + s)) {
                    if x.is_positive() && (&x - &y).is_even() && best.as_ref().is_none_or(|b| &x < b) {
                        best = Some(x);
                    }
                }
            }
            if let Some(x) = best {
                // x + y sqrt d = (x - y) + 2y w
                return RingElement { x: (&x - &y) / 2, y, den: BigInt::one() };
            }
            y += 1;
        }
        unreachable!("Z[sqrt d] unit always lifts")
    }

    /// Exponent vectors in `[-bound, bound]^n`, ordered by max-abs, then by the
    /// per-coordinate order `0, 1, -1, 2, -2, ...`.
    pub(crate) fn exponent_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
        let axis: Vec<i64> = std::iter::once(0).chain((1..=bound).flat_map(|e| [e, -e])).collect();
        let mut out: Vec<Vec<i64>> = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| {
                    axis.iter().map(move |&e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        out.sort_by_key(|v| v.iter().map(|e| e.abs()).max().unwrap_or(0));
        out
    }

    /// Distinct units: `t * prod g_i^{e_i}` for torsion `t`, generators `g_i`
    /// and `|e_i| <= exp_bound`, followed by any further units among the
    /// integral elements `x + y*w` with `|x|, |y| <= height_bound`.
    ///
    /// This list is not the whole unit group; a unit missing here is "not
    /// found", not "does not exist".
    pub fn unit_candidates(&self, exp_bound: u32, height_bound: u32) -> Vec<RingElement> {
        let gens = self.unit_generators();
        let bound = exp_bound as i64;
        let powers: Vec<Vec<(i64, RingElement)>> = gens
            .iter()
            .map(|g| (-bound..=bound).map(|e| (e, self.pow(g, e).expect("generator is a unit"))).collect())
            .collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for v in Self::exponent_vectors(gens.len(), bound) {
            let mut base = self.one();
            for (i, &e) in v.iter().enumerate() {
                base = self.mul(&base, &powers[i][(e + bound) as usize].1);
            }
            for t in &self.torsion {
                let u = self.mul(t, &base);
                if seen.insert(u.clone()) {
                    out.push(u);
                }
            }
        }
        let h = height_bound as i64;
        let ys: Vec<i64> = if self.is_rational() { vec![0] } else { (-h..=h).collect() };
        let mut sweep = Vec::new();
        for x in -h..=h {
            for &y in &ys {
                sweep.push((x.abs().max(y.abs()), x, y));
            }
        }
        sweep.sort_unstable();
        for (_, x, y) in sweep {
            let e = RingElement { x: x.into(), y: y.into(), den: BigInt::one() };
            if self.is_unit(&e) && seen.insert(e.clone()) {
                out.push(e);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(r: &Ring, s: &str) -> RingElement {
        r.parse_element(s).unwrap()
    }

    #[test]
    fn add_examples() {
        let q = Ring::parse("Q").unwrap();
        assert_eq!(q.add(&q.one(), &q.zero()), q.one());
        let r3 = Ring::parse("Q[1/3]").unwrap();
        let s = r3.add(&el(&r3, "1/3"), &el(&r3, "2/3"));
        assert_eq!(s, r3.one());
        assert!(s.den().is_one());
        let r2 = Ring::parse("Q(sqrt 2)").unwrap();
        assert_eq!(r2.add(&el(&r2, "1+1*w"), &el(&r2, "1+-1*w")), r2.int(2));
    }

    #[test]
    fn mul_examples() {
        let r2 = Ring::parse("Q(sqrt 2)").unwrap();
        assert_eq!(r2.mul(&el(&r2, "1+1*w"), &el(&r2, "-1+1*w")), r2.one());
        let w = r2.omega().unwrap();
        assert_eq!(r2.mul(&w, &w), r2.int(2));
        let h = Ring::parse("Q[1/2]").unwrap();
        assert_eq!(h.mul(&h.int(2), &el(&h, "1/2")), h.one());
        let g = Ring::parse("Q(sqrt 5; half)").unwrap();
        let w = g.omega().unwrap();
        // w^2 = w + 1 for the golden ratio
        assert_eq!(g.mul(&w, &w), g.add(&w, &g.one()));
    }

    #[test]
    fn norm_examples() {
        let r2 = Ring::parse("Q(sqrt 2)").unwrap();
        assert_eq!(r2.norm(&el(&r2, "1+1*w")), BigRational::from_integer((-1).into()));
        let q = Ring::parse("Q").unwrap();
        assert_eq!(q.norm(&q.int(5)), BigRational::from_integer(5.into()));
        assert!(q.norm(&q.zero()).is_zero());
        let h = Ring::parse("Q(sqrt 5; half)[1/2]").unwrap();
        // N((1+w)/2) = N(1+w)/4 = (1 + 1 - 1)/4
        assert_eq!(h.norm(&el(&h, "(1+1*w)/2")), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn exact_div_examples() {
        let r3 = Ring::parse("Q[1/3]").unwrap();
        let n = r3.sub(&r3.int(7), &r3.int(27));
        assert_eq!(r3.exact_div(&n, &r3.int(5)).unwrap(), Some(r3.int(-4)));
        let z = Ring::parse("Q").unwrap();
        assert_eq!(z.exact_div(&z.int(5), &z.int(2)).unwrap(), None);
        let r2 = Ring::parse("Q(sqrt 2)[1/7]").unwrap();
        let a = el(&r2, "(3+5*w)/49");
        assert_eq!(r2.exact_div(&a, &r2.one()).unwrap(), Some(a.clone()));
        assert!(matches!(r2.exact_div(&a, &r2.zero()), Err(Error::DivisionByZero)));
        // (1+w) does not divide 3 in Z[sqrt 2], but 1+w is a unit
        assert!(r2.exact_div(&r2.int(3), &el(&r2, "1+1*w")).unwrap().is_some());
        // 1+2w has norm -7, a unit once 7 is inverted; 1+3w has norm -17
        assert!(r2.is_unit(&el(&r2, "1+2*w")));
        assert!(r2.exact_div(&r2.int(3), &el(&r2, "1+3*w")).unwrap().is_none());
    }

    #[test]
    fn is_unit_examples() {
        let r6 = Ring::parse("Q[1/6]").unwrap();
        assert!(r6.is_unit(&r6.int(4)));
        assert!(!r6.is_unit(&r6.int(5)));
        assert!(!r6.is_unit(&r6.zero()));
        let r2 = Ring::parse("Q(sqrt 2)").unwrap();
        assert!(r2.is_unit(&el(&r2, "1+1*w")));
        let z = Ring::parse("Q").unwrap();
        assert!(!z.is_unit(&z.int(2)));
        // 2+i has norm 5: a unit once 5 is inverted
        let gi = Ring::parse("Q(sqrt -1)[1/5]").unwrap();
        assert!(gi.is_unit(&el(&gi, "2+1*w")));
    }

    /// Smallest unit above 1 among `x + y*w` with small coefficients, by brute force.
    fn sweep_fundamental(r: &Ring, bound: i64) -> RingElement {
        let FieldKind::Quadratic { d, half } = *r.spec().kind() else { panic!() };
        let sd = (d as f64).sqrt();
        let w = if half { (1.0 + sd) / 2.0 } else { sd };
        let mut best: Option<(f64, RingElement)> = None;
        for x in -bound..=bound {
            for y in -bound..=bound {
                let e = r.element_i64(x, y, 1).unwrap();
                let v = x as f64 + y as f64 * w;
                if r.is_unit(&e) && v > 1.0 + 1e-9 && best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, e));
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn fundamental_unit_examples() {
        for (spec, expect) in [("Q(sqrt 2)", "1+1*w"), ("Q(sqrt 5; half)", "0+1*w"), ("Q(sqrt 3)", "2+1*w")] {
            let r = Ring::parse(spec).unwrap();
            let eps = r.fundamental_unit().unwrap();
            assert_eq!(eps, sweep_fundamental(&r, 10), "{spec}");
            assert_eq!(eps.to_string(), expect);
        }
        // (1+sqrt 5)/2 = w in the half basis
        let r = Ring::parse("Q(sqrt 13; half)").unwrap();
        assert_eq!(r.fundamental_unit().unwrap(), sweep_fundamental(&r, 10));
        let r = Ring::parse("Q(sqrt 61; half)").unwrap();
        // (39 + 5 sqrt 61)/2 = 17 + 5w
        assert_eq!(r.fundamental_unit().unwrap().to_string(), "17+5*w");
        assert!(Ring::parse("Q[1/5]").unwrap().fundamental_unit().is_err());
        assert!(Ring::parse("Q(sqrt -1)").unwrap().fundamental_unit().is_err());
    }

    #[test]
    fn unit_candidate_sets() {
        let r3 = Ring::parse("Q[1/3]").unwrap();
        let got: HashSet<String> = r3.unit_candidates(3, 0).iter().map(|u| u.to_string()).collect();
        let want: HashSet<String> =
            ["1", "-1", "3", "-3", "9", "-9", "27", "-27", "1/3", "-1/3", "1/9", "-1/9", "1/27", "-1/27"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        assert_eq!(got, want);
        let z = Ring::parse("Q").unwrap();
        let got: Vec<String> = z.unit_candidates(5, 10).iter().map(|u| u.to_string()).collect();
        assert_eq!(got, ["1", "-1"]);
        let r2 = Ring::parse("Q(sqrt 2)").unwrap();
        let got: HashSet<String> = r2.unit_candidates(1, 0).iter().map(|u| u.to_string()).collect();
        for s in ["1", "-1", "1+1*w", "-1+-1*w", "-1+1*w", "1+-1*w"] {
            assert!(got.contains(s), "{s}");
        }
        for u in r2.unit_candidates(2, 3) {
            assert!(r2.is_unit(&u));
        }
        let gi = Ring::parse("Q(sqrt -1)[1/5]").unwrap();
        let got: HashSet<String> = gi.unit_candidates(0, 2).iter().map(|u| u.to_string()).collect();
        assert!(got.contains("0+1*w") && got.contains("2+1*w"));
    }

    #[test]
    fn spec_parse_and_print() {
        for s in ["Q", "Q[1/6]", "Q(sqrt 2)", "Q(sqrt 5; half)[1/3]", "Q(sqrt -1)[1/3]"] {
            let spec: RingSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let spec: RingSpec = "Q[1/12]".parse().unwrap();
        assert_eq!(spec.inverted_primes(), &[2, 3]);
        assert!("Q(sqrt 4)".parse::<RingSpec>().is_err());
        assert!("Q(sqrt 3; half)".parse::<RingSpec>().is_err());
        match "Q(sqr 2)".parse::<RingSpec>() {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(!"Q".parse::<RingSpec>().unwrap().is_admissible());
        assert!("Q(sqrt 2)".parse::<RingSpec>().unwrap().is_admissible());
        assert!(!"Q(sqrt -1)".parse::<RingSpec>().unwrap().is_admissible());
    }

    #[test]
    fn element_syntax() {
        let r = Ring::parse("Q(sqrt 5; half)[1/6]").unwrap();
        for s in ["0", "-7", "5/6", "3+-2*w", "(1+1*w)/2", "(-1+5*w)/36", "0+1*w"] {
            assert_eq!(el(&r, s).to_string(), s);
        }
        assert_eq!(el(&r, "2/6").to_string(), "1/3");
        assert_eq!(el(&r, "(2+4*w)/4").to_string(), "(1+2*w)/2");
        assert!(matches!(r.parse_element("1/5"), Err(Error::NotInRing { .. })));
        assert!(matches!(r.parse_element("1/0"), Err(Error::DivisionByZero)));
        assert!(matches!(r.parse_element("1+2*x"), Err(Error::Parse { pos: 4, .. })));
        let q = Ring::parse("Q").unwrap();
        assert!(q.parse_element("1+1*w").is_err());
    }

    fn arb_elem(spec: &'static str) -> impl Strategy<Value = RingElement> {
        let r = Ring::parse(spec).unwrap();
        let quad = !r.is_rational();
        let dens: Vec<i64> = std::iter::once(1).chain(r.spec().inverted_primes().iter().map(|&p| p as i64)).collect();
        (-60i64..60, -60i64..60, 0..dens.len(), 0u32..3).prop_map(move |(x, y, di, e)| {
            let y = if quad { y } else { 0 };
            r.element_i64(x, y, dens[di].pow(e)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_elem("Q(sqrt 5; half)[1/6]"), b in arb_elem("Q(sqrt 5; half)[1/6]"), c in arb_elem("Q(sqrt 5; half)[1/6]")) {
            let r = Ring::parse("Q(sqrt 5; half)[1/6]").unwrap();
            prop_assert_eq!(r.add(&a, &b), r.add(&b, &a));
            prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
            prop_assert_eq!(r.add(&r.add(&a, &b), &c), r.add(&a, &r.add(&b, &c)));
            prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
            prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
            prop_assert_eq!(r.norm(&r.mul(&a, &b)), r.norm(&a) * r.norm(&b));
        }

        #[test]
        fn norm_multiplicative_imaginary(a in arb_elem("Q(sqrt -7)[1/2]"), b in arb_elem("Q(sqrt -7)[1/2]")) {
            let r = Ring::parse("Q(sqrt -7)[1/2]").unwrap();
            prop_assert_eq!(r.norm(&r.mul(&a, &b)), r.norm(&a) * r.norm(&b));
        }

        #[test]
        fn units_invert(a in arb_elem("Q(sqrt 2)[1/7]")) {
            let r = Ring::parse("Q(sqrt 2)[1/7]").unwrap();
            if r.is_unit(&a) {
                let inv = r.exact_div(&r.one(), &a).unwrap().unwrap();
                prop_assert_eq!(r.mul(&a, &inv), r.one());
            }
        }

        #[test]
        fn exact_div_inverts_mul(a in arb_elem("Q(sqrt 3)[1/2]"), b in arb_elem("Q(sqrt 3)[1/2]")) {
            let r = Ring::parse("Q(sqrt 3)[1/2]").unwrap();
            prop_assume!(!b.is_zero());
            prop_assert_eq!(r.exact_div(&r.mul(&a, &b), &b).unwrap(), Some(a));
        }

        #[test]
        fn print_parse_roundtrip(a in arb_elem("Q(sqrt -3; half)[1/10]")) {
            let r = Ring::parse("Q(sqrt -3; half)[1/10]").unwrap();
            prop_assert_eq!(r.parse_element(&a.to_string()).unwrap(), a);
        }
    }
}
