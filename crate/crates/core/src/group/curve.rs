// SPDX-License-Identifier: Apache-2.0

//! Short-Weierstrass curves y^2 = x^3 - 3x + b over prime fields, cofactor 1.

use std::fmt;
use std::sync::OnceLock;

use super::field::{Fe, MontField};
use super::uint::U256;

/// Affine point or the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffinePoint {
    pub(crate) x: Fe,
    pub(crate) y: Fe,
    pub(crate) infinity: bool,
}

impl AffinePoint {
    pub(crate) fn infinity(field: &MontField) -> Self {
        AffinePoint {
            x: field.zero(),
            y: field.zero(),
            infinity: true,
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.infinity
    }
}

impl fmt::Debug for AffinePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.infinity {
            write!(f, "Point(inf)")
        } else {
            // Montgomery-form limbs; stable within a process.
            write!(f, "Point({:?}, {:?})", self.x.0, self.y.0)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Jacobian {
    x: Fe,
    y: Fe,
    z: Fe,
}

const TABLE_WINDOWS: usize = 64;

pub struct Curve {
    pub(crate) name: &'static str,
    pub(crate) field: MontField,
    b: Fe,
    three: Fe,
    pub(crate) generator: AffinePoint,
    pub(crate) order: U256,
    /// `base_table[i][j] = j * 16^i * G` for the fixed-base comb.
    base_table: OnceLock<Vec<[AffinePoint; 16]>>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve").field("name", &self.name).finish()
    }
}

impl Curve {
    fn new(name: &'static str, p: &str, b: &str, gx: &str, gy: &str, n: &str) -> Self {
        let field = MontField::new(U256::from_hex(p));
        let b = field.from_uint(&U256::from_hex(b)).expect("b < p");
        let gx = field.from_uint(&U256::from_hex(gx)).expect("gx < p");
        let gy = field.from_uint(&U256::from_hex(gy)).expect("gy < p");
        let three = field.from_u64(3);
        let curve = Curve {
            name,
            b,
            three,
            generator: AffinePoint {
                x: gx,
                y: gy,
                infinity: false,
            },
            order: U256::from_hex(n),
            field,
            base_table: OnceLock::new(),
        };
        assert!(curve.is_on_curve(&curve.generator));
        curve
    }

    pub(crate) fn p160() -> &'static Curve {
        static CURVE: OnceLock<Curve> = OnceLock::new();
        CURVE.get_or_init(|| {
            Curve::new(
                "secp160r1",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF",
                "1C97BEFC54BD7A8B65ACF89F81D4D4ADC565FA45",
                "4A96B5688EF573284664698968C38BB913CBFC82",
                "23A628553168947D59DCC912042351377AC5FB32",
                "0100000000000000000001F4C8F927AED3CA752257",
            )
        })
    }

    pub(crate) fn p192() -> &'static Curve {
        static CURVE: OnceLock<Curve> = OnceLock::new();
        CURVE.get_or_init(|| {
            Curve::new(
                "secp192r1",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFFFFFFFFFFFF",
                "64210519E59C80E70FA7E9AB72243049FEB8DEECC146B9B1",
                "188DA80EB03090F67CBF20EB43A18800F4FF0AFD82FF1012",
                "07192B95FFC8DA78631011ED6B24CDD573F977A11E794811",
                "FFFFFFFFFFFFFFFFFFFFFFFF99DEF836146BC9B1B4D22831",
            )
        })
    }

    pub(crate) fn p224() -> &'static Curve {
        static CURVE: OnceLock<Curve> = OnceLock::new();
        CURVE.get_or_init(|| {
            Curve::new(
                "secp224r1",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF000000000000000000000001",
                "B4050A850C04B3ABF54132565044B0B7D7BFD8BA270B39432355FFB4",
                "B70E0CBD6BB4BF7F321390B94A03C1D356C21122343280D6115C1D21",
                "BD376388B5F723FB4C22DFE6CD4375A05A07476444D5819985007E34",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFF16A2E0B8F03E13DD29455C5C2A3D",
            )
        })
    }

    pub(crate) fn p256() -> &'static Curve {
        static CURVE: OnceLock<Curve> = OnceLock::new();
        CURVE.get_or_init(|| {
            Curve::new(
                "secp256r1",
                "FFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF",
                "5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B",
                "6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296",
                "4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5",
                "FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551",
            )
        })
    }

    /// x^3 - 3x + b
    fn rhs(&self, x: &Fe) -> Fe {
        let f = &self.field;
        let x3 = f.mul(&f.square(x), x);
        let t = f.sub(&x3, &f.mul(&self.three, x));
        f.add(&t, &self.b)
    }

    pub(crate) fn is_on_curve(&self, p: &AffinePoint) -> bool {
        if p.infinity {
            return true;
        }
        self.field.square(&p.y) == self.rhs(&p.x)
    }

    pub(crate) fn identity(&self) -> AffinePoint {
        AffinePoint::infinity(&self.field)
    }

    fn to_jacobian(&self, p: &AffinePoint) -> Jacobian {
        if p.infinity {
            Jacobian {
                x: self.field.one(),
                y: self.field.one(),
                z: self.field.zero(),
            }
        } else {
            Jacobian {
                x: p.x,
                y: p.y,
                z: self.field.one(),
            }
        }
    }

    fn jacobian_infinity(&self) -> Jacobian {
        Jacobian {
            x: self.field.one(),
            y: self.field.one(),
            z: self.field.zero(),
        }
    }

    fn to_affine(&self, p: &Jacobian) -> AffinePoint {
        if self.field.is_zero(&p.z) {
            return self.identity();
        }
        let zinv = self.field.invert(&p.z);
        self.to_affine_with_inverse(p, &zinv)
    }

    fn to_affine_with_inverse(&self, p: &Jacobian, zinv: &Fe) -> AffinePoint {
        let f = &self.field;
        let zinv2 = f.square(zinv);
        let zinv3 = f.mul(&zinv2, zinv);
        AffinePoint {
            x: f.mul(&p.x, &zinv2),
            y: f.mul(&p.y, &zinv3),
            infinity: false,
        }
    }

    fn batch_to_affine(&self, points: &[Jacobian]) -> Vec<AffinePoint> {
        let mut zs: Vec<Fe> = points.iter().map(|p| p.z).collect();
        self.field.batch_invert(&mut zs);
        points
            .iter()
            .zip(zs)
            .map(|(p, zinv)| {
                if self.field.is_zero(&p.z) {
                    self.identity()
                } else {
                    self.to_affine_with_inverse(p, &zinv)
                }
            })
            .collect()
    }

    /// dbl-2001-b, a = -3.
    fn double(&self, p: &Jacobian) -> Jacobian {
        let f = &self.field;
        if f.is_zero(&p.z) || f.is_zero(&p.y) {
            return self.jacobian_infinity();
        }
        let delta = f.square(&p.z);
        let gamma = f.square(&p.y);
        let beta = f.mul(&p.x, &gamma);
        let alpha = f.mul(
            &self.three,
            &f.mul(&f.sub(&p.x, &delta), &f.add(&p.x, &delta)),
        );
        let beta4 = f.double(&f.double(&beta));
        let x3 = f.sub(&f.square(&alpha), &f.double(&beta4));
        let yz = f.add(&p.y, &p.z);
        let z3 = f.sub(&f.sub(&f.square(&yz), &gamma), &delta);
        let gamma2 = f.square(&gamma);
        let gamma2_8 = f.double(&f.double(&f.double(&gamma2)));
        let y3 = f.sub(&f.mul(&alpha, &f.sub(&beta4, &x3)), &gamma2_8);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn add(&self, p: &Jacobian, q: &Jacobian) -> Jacobian {
        let f = &self.field;
        if f.is_zero(&p.z) {
            return *q;
        }
        if f.is_zero(&q.z) {
            return *p;
        }
        let z1z1 = f.square(&p.z);
        let z2z2 = f.square(&q.z);
        let u1 = f.mul(&p.x, &z2z2);
        let u2 = f.mul(&q.x, &z1z1);
        let s1 = f.mul(&f.mul(&p.y, &q.z), &z2z2);
        let s2 = f.mul(&f.mul(&q.y, &p.z), &z1z1);
        let h = f.sub(&u2, &u1);
        let r = f.sub(&s2, &s1);
        if f.is_zero(&h) {
            return if f.is_zero(&r) {
                self.double(p)
            } else {
                self.jacobian_infinity()
            };
        }
        let h2 = f.square(&h);
        let h3 = f.mul(&h2, &h);
        let u1h2 = f.mul(&u1, &h2);
        let x3 = f.sub(&f.sub(&f.square(&r), &h3), &f.double(&u1h2));
        let y3 = f.sub(&f.mul(&r, &f.sub(&u1h2, &x3)), &f.mul(&s1, &h3));
        let z3 = f.mul(&f.mul(&p.z, &q.z), &h);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn add_affine(&self, p: &Jacobian, q: &AffinePoint) -> Jacobian {
        let f = &self.field;
        if q.infinity {
            return *p;
        }
        if f.is_zero(&p.z) {
            return self.to_jacobian(q);
        }
        let z1z1 = f.square(&p.z);
        let u2 = f.mul(&q.x, &z1z1);
        let s2 = f.mul(&f.mul(&q.y, &p.z), &z1z1);
        let h = f.sub(&u2, &p.x);
        let r = f.sub(&s2, &p.y);
        if f.is_zero(&h) {
            return if f.is_zero(&r) {
                self.double(p)
            } else {
                self.jacobian_infinity()
            };
        }
        let h2 = f.square(&h);
        let h3 = f.mul(&h2, &h);
        let u1h2 = f.mul(&p.x, &h2);
        let x3 = f.sub(&f.sub(&f.square(&r), &h3), &f.double(&u1h2));
        let y3 = f.sub(&f.mul(&r, &f.sub(&u1h2, &x3)), &f.mul(&p.y, &h3));
        let z3 = f.mul(&p.z, &h);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    pub(crate) fn add_points(&self, p: &AffinePoint, q: &AffinePoint) -> AffinePoint {
        self.to_affine(&self.add_affine(&self.to_jacobian(p), q))
    }

    pub(crate) fn negate(&self, p: &AffinePoint) -> AffinePoint {
        if p.infinity {
            return *p;
        }
        AffinePoint {
            x: p.x,
            y: self.field.neg(&p.y),
            infinity: false,
        }
    }

    pub(crate) fn sum<'a>(&self, points: impl IntoIterator<Item = &'a AffinePoint>) -> AffinePoint {
        let acc = points
            .into_iter()
            .fold(self.jacobian_infinity(), |acc, p| self.add_affine(&acc, p));
        self.to_affine(&acc)
    }

    /// Variable-base multiplication with a fixed 4-bit window.
    pub(crate) fn mul(&self, p: &AffinePoint, k: &U256) -> AffinePoint {
        if p.infinity || k.is_zero() {
            return self.identity();
        }
        let mut table = [self.jacobian_infinity(); 16];
        table[1] = self.to_jacobian(p);
        for i in 2..16 {
            table[i] = self.add_affine(&table[i - 1], p);
        }
        let table = self.batch_to_affine(&table);
        let windows = k.bits().div_ceil(4);
        let mut acc = self.jacobian_infinity();
        for w in (0..windows).rev() {
            for _ in 0..4 {
                acc = self.double(&acc);
            }
            let digit = k.nibble(w);
            if digit != 0 {
                acc = self.add_affine(&acc, &table[digit]);
            }
        }
        self.to_affine(&acc)
    }

    fn base_table(&self) -> &[[AffinePoint; 16]] {
        self.base_table.get_or_init(|| self.comb_table(&self.generator))
    }

    /// `table[i][j] = j * 16^i * p`, enough rows to cover the group order.
    pub(crate) fn comb_table(&self, p: &AffinePoint) -> Vec<[AffinePoint; 16]> {
        let rows = self.order.bits().div_ceil(4).min(TABLE_WINDOWS);
        let mut points = Vec::with_capacity(rows * 16);
        let mut base = self.to_jacobian(p);
        for _ in 0..rows {
            points.push(self.jacobian_infinity());
            points.push(base);
            for _ in 2..16 {
                let next = self.add(&points[points.len() - 1], &base);
                points.push(next);
            }
            for _ in 0..4 {
                base = self.double(&base);
            }
        }
        self.batch_to_affine(&points)
            .chunks_exact(16)
            .map(|row| row.try_into().expect("16 entries"))
            .collect()
    }

    /// Multiplication using a table from [`Curve::comb_table`]; only mixed additions.
    pub(crate) fn comb_mul(&self, table: &[[AffinePoint; 16]], k: &U256) -> AffinePoint {
        let mut acc = self.jacobian_infinity();
        for (i, row) in table.iter().enumerate() {
            let digit = k.nibble(i);
            if digit != 0 {
                acc = self.add_affine(&acc, &row[digit]);
            }
        }
        self.to_affine(&acc)
    }

    /// k * G using the precomputed comb.
    pub(crate) fn mul_generator(&self, k: &U256) -> AffinePoint {
        self.comb_mul(self.base_table(), k)
    }

    /// Recovers y from x and its parity bit.
    pub(crate) fn lift_x(&self, x: &Fe, odd: bool) -> Option<AffinePoint> {
        let f = &self.field;
        let y = f.sqrt(&self.rhs(x))?;
        let y = if f.is_odd(&y) == odd { y } else { f.neg(&y) };
        if f.is_odd(&y) != odd {
            // y == 0 and an odd parity was requested
            return None;
        }
        Some(AffinePoint {
            x: *x,
            y,
            infinity: false,
        })
    }
}
