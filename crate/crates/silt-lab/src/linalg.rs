//! Exact dense linear algebra over the rationals or a prime field.
//!
//! All homology is computed piecewise on small matrices; no floating point
//! anywhere. Prime-field arithmetic reuses the rational scalar type with
//! entries kept as canonical integer representatives.

use crate::ring::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Field operations parameterized by an optional prime characteristic.
#[derive(Clone, Copy, Debug)]
pub struct FieldOps {
    modulus: Option<u64>,
}

impl FieldOps {
    pub fn new(field: Field) -> FieldOps {
        FieldOps {
            modulus: match field {
                Field::Q => None,
                Field::Fp(p) => Some(p as u64),
            },
        }
    }

    /// Canonical representative: for `F_p`, the integer `a·b⁻¹ mod p`.
    pub fn canon(&self, x: &Rat) -> Rat {
        match self.modulus {
            None => x.clone(),
            Some(p) => {
                let p = BigInt::from(p);
                let num = x.numer().mod_floor_big(&p);
                let den = x.denom().mod_floor_big(&p);
                let den_inv = mod_inverse(&den, &p).expect("denominator invertible mod p");
                let v = (num * den_inv).mod_floor_big(&p);
                BigRational::from_integer(v)
            }
        }
    }

    pub fn is_zero(&self, x: &Rat) -> bool {
        self.canon(x).is_zero()
    }

    pub fn add(&self, a: &Rat, b: &Rat) -> Rat {
        self.canon(&(a + b))
    }

    pub fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        self.canon(&(a - b))
    }

    pub fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        self.canon(&(a * b))
    }

    pub fn inv(&self, a: &Rat) -> Rat {
        match self.modulus {
            None => BigRational::one() / a,
            Some(p) => {
                let p = BigInt::from(p);
                let v = self.canon(a);
                let inv = mod_inverse(v.numer(), &p).expect("nonzero element invertible");
                BigRational::from_integer(inv.mod_floor_big(&p))
            }
        }
    }
}

trait ModFloor {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    // extended Euclid
    let (mut r0, mut r1) = (p.clone(), a.mod_floor_big(p));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_one() {
        Some(t0.mod_floor_big(p))
    } else {
        None
    }
}

/// Dense row-major matrix of exact scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Rat, f: &FieldOps) {
        let cur = self.get(r, c).clone();
        self.set(r, c, f.add(&cur, v));
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn apply(&self, v: &[Rat], f: &FieldOps) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = Rat::zero();
                for c in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.get(r, c), &v[c]));
                }
                acc
            })
            .collect()
    }

    pub fn rank(&self, f: &FieldOps) -> usize {
        self.rref(f).1.len()
    }

    /// Reduced row echelon form and the pivot column indices.
    pub fn rref(&self, f: &FieldOps) -> (Mat, Vec<usize>) {
        let mut m = Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f.canon(x)).collect(),
        };
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !f.is_zero(m.get(r, col))) else {
                continue;
            };
            for c in 0..m.cols {
                m.data.swap(row * m.cols + c, pr * m.cols + c);
            }
            let inv = f.inv(m.get(row, col));
            for c in col..m.cols {
                let v = f.mul(m.get(row, c), &inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !f.is_zero(m.get(r, col)) {
                    let factor = m.get(r, col).clone();
                    for c in col..m.cols {
                        let v = f.sub(m.get(r, c), &f.mul(&factor, m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    /// Basis of the null space, as vectors of length `cols`.
    pub fn kernel_basis(&self, f: &FieldOps) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref(f);
        let mut basis = Vec::new();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        for &fc in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[fc] = Rat::one();
            for (prow, &pc) in pivots.iter().enumerate() {
                v[pc] = f.sub(&Rat::zero(), r.get(prow, fc));
            }
            basis.push(v);
        }
        basis
    }
}

/// Dimension of `span(extra) / span(base)`, together with representatives
/// from `extra` completing a basis of `base`'s span.
pub fn quotient_representatives(
    base: &[Vec<Rat>],
    extra: &[Vec<Rat>],
    dim: usize,
    f: &FieldOps,
) -> Vec<Vec<Rat>> {
    let mut cols: Vec<Vec<Rat>> = base.to_vec();
    let mut reps = Vec::new();
    let mut cur_rank = stack_rank(&cols, dim, f);
    for v in extra {
        cols.push(v.clone());
        let r = stack_rank(&cols, dim, f);
        if r > cur_rank {
            cur_rank = r;
            reps.push(v.clone());
        } else {
            cols.pop();
        }
    }
    reps
}

fn stack_rank(cols: &[Vec<Rat>], dim: usize, f: &FieldOps) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let mut m = Mat::zeros(dim, cols.len());
    for (c, v) in cols.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            m.set(r, c, x.clone());
        }
    }
    m.rank(f)
}
