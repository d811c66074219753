//! Exact rational coordinates and the geometric predicates built on them.
//!
//! Coordinates read from ASCII decimal input are kept as exact rationals so
//! that barycenters and crossing predicates never suffer rounding. A floating
//! mirror is derived only for output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rat = BigRational;

/// A point with exact rational coordinates.
pub type Point = [Rat; 3];

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn point_i64(x: i64, y: i64, z: i64) -> Point {
    [rat_i64(x), rat_i64(y), rat_i64(z)]
}

pub fn point_to_f64(p: &Point) -> [f64; 3] {
    [
        p[0].to_f64().unwrap_or(f64::NAN),
        p[1].to_f64().unwrap_or(f64::NAN),
        p[2].to_f64().unwrap_or(f64::NAN),
    ]
}

/// Parse a decimal number, optionally in scientific notation, into an exact
/// rational. `"-1.25e-2"` becomes `-125/10000`.
pub fn parse_decimal(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0i64),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().ok()?
    };
    for b in frac_part.bytes() {
        numer = numer * 10 + (b - b'0');
    }
    numer *= sign;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Some(if shift >= 0 {
        Rat::from_integer(numer * ten.pow(shift as u32))
    } else {
        Rat::new(numer, ten.pow((-shift) as u32))
    })
}

/// Render a rational as a decimal string, exactly when the denominator is of
/// the form 2^a 5^b, otherwise via the shortest f64 representation.
pub fn decimal_string(r: &Rat) -> String {
    let r = r.reduced();
    let mut denom = r.denom().clone();
    let mut pow2 = 0u32;
    let mut pow5 = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&denom % &two).is_zero() {
        denom /= &two;
        pow2 += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        pow5 += 1;
    }
    if denom != BigInt::from(1) {
        return format!("{}", r.to_f64().unwrap_or(f64::NAN));
    }
    // scale to denominator 10^k with k = max(pow2, pow5)
    let k = pow2.max(pow5);
    let scale = two.pow(k - pow2) * five.pow(k - pow5);
    let scaled = r.numer() * &scale;
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if k == 0 {
        out.push_str(&digits);
        return out;
    }
    let k = k as usize;
    if digits.len() > k {
        out.push_str(&digits[..digits.len() - k]);
        out.push('.');
        out.push_str(&digits[digits.len() - k..]);
    } else {
        out.push_str("0.");
        for _ in 0..k - digits.len() {
            out.push('0');
        }
        out.push_str(&digits);
    }
    // trim trailing zeros but keep at least one fractional digit
    while out.ends_with('0') && !out.ends_with(".0") {
        out.pop();
    }
    out
}

pub fn barycenter(points: &[&Point]) -> Point {
    let n = rat_i64(points.len() as i64);
    let mut acc = point_i64(0, 0, 0);
    for p in points {
        for (slot, coord) in acc.iter_mut().zip(p.iter()) {
            *slot += coord;
        }
    }
    for slot in &mut acc {
        *slot /= n.clone();
    }
    acc
}

pub fn points_equal(a: &Point, b: &Point) -> bool {
    a[0] == b[0] && a[1] == b[1] && a[2] == b[2]
}

/// Sign of the 2D orientation determinant of (b - a) and (c - a), using the
/// first two coordinates of the points.
pub fn orient2d_sign(a: &Point, b: &Point, c: &Point) -> i32 {
    let det = (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0]);
    sign_of(&det)
}

fn min_max<'a>(a: &'a Rat, b: &'a Rat) -> (&'a Rat, &'a Rat) {
    if a <= b { (a, b) } else { (b, a) }
}

fn sign_of(x: &Rat) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Result of intersecting the xy-projections of two segments.
pub enum Crossing {
    /// Projections do not intersect.
    None,
    /// Projections intersect properly; carries the segment parameters and the
    /// sign of the direction determinant.
    Proper { t: Rat, u: Rat, turn: i32 },
    /// An endpoint lies on the other segment's line: the projection direction
    /// is inadmissible.
    Degenerate,
}

/// Proper-crossing test for the xy-projections of segments `p1p2` and `q1q2`.
pub fn segment_crossing(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> Crossing {
    // strictly separated bounding intervals cannot cross; this also settles
    // segment pairs that share a 3D line (collinear in every projection)
    for axis in 0..2 {
        let (pl, ph) = min_max(&p1[axis], &p2[axis]);
        let (ql, qh) = min_max(&q1[axis], &q2[axis]);
        if ph < ql || qh < pl {
            return Crossing::None;
        }
    }
    let d1 = orient2d_sign(p1, p2, q1);
    let d2 = orient2d_sign(p1, p2, q2);
    let d3 = orient2d_sign(q1, q2, p1);
    let d4 = orient2d_sign(q1, q2, p2);
    if d1 == 0 || d2 == 0 || d3 == 0 || d4 == 0 {
        // Touching or collinear projections: ask for a new direction unless
        // one of the carrier lines strictly separates the segments.
        if d1 == d2 && d1 != 0 {
            return Crossing::None;
        }
        if d3 == d4 && d3 != 0 {
            return Crossing::None;
        }
        return Crossing::Degenerate;
    }
    if d1 != d2 && d3 != d4 {
        // parameters of the intersection point on each segment
        let px = &p2[0] - &p1[0];
        let py = &p2[1] - &p1[1];
        let qx = &q2[0] - &q1[0];
        let qy = &q2[1] - &q1[1];
        let denom = &px * &qy - &py * &qx;
        debug_assert!(!denom.is_zero());
        let rx = &q1[0] - &p1[0];
        let ry = &q1[1] - &p1[1];
        let t = (&rx * &qy - &ry * &qx) / denom.clone();
        let u = (&rx * &py - &ry * &px) / denom.clone();
        Crossing::Proper {
            t,
            u,
            turn: sign_of(&denom),
        }
    } else {
        Crossing::None
    }
}

/// Height (third coordinate) of the point at parameter `t` along `p1p2`.
pub fn height_at(p1: &Point, p2: &Point, t: &Rat) -> Rat {
    &p1[2] + t * (&p2[2] - &p1[2])
}
