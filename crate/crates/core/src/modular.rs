//! Reduced evaluation paths for word-sized moduli. These make large-range
//! sweeps affordable; [`crate::exact`] stays the ground truth.
//!
//! There is no modular division anywhere in this module. Dividing a
//! residue by `i!` is only valid when `i!` is invertible mod `n`, which
//! fails for composite moduli, so every factorial quotient is realized as
//! a product of consecutive integers, reduced term by term.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

/// Exclusive upper bound on moduli. Word-sized moduli keep every product
/// inside `u128` and sums free of `u64` overflow.
pub const MAX_MODULUS: u64 = 1 << 63;

/// A value reduced modulo a fixed word-sized modulus `m >= 2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    pub r: u64,
    pub m: u64,
}

impl Residue {
    pub fn new(r: u64, m: u64) -> Residue {
        assert!((2..MAX_MODULUS).contains(&m), "modulus out of range: {m}");
        Residue { r: r % m, m }
    }

    pub fn is_zero(self) -> bool {
        self.r == 0
    }

    /// Multiply by a plain integer scalar.
    pub fn scale(self, c: u64) -> Residue {
        Residue::new(mulmod(self.r, c % self.m, self.m), self.m)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        assert_eq!(self.m, rhs.m, "residue arithmetic requires equal moduli");
        Residue::new((self.r + rhs.r) % self.m, self.m)
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        assert_eq!(self.m, rhs.m, "residue arithmetic requires equal moduli");
        Residue::new((self.r + self.m - rhs.r) % self.m, self.m)
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        assert_eq!(self.m, rhs.m, "residue arithmetic requires equal moduli");
        Residue::new(mulmod(self.r, rhs.r, self.m), self.m)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.r, self.m)
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

/// `base^exp mod m` by binary exponentiation.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut base = base % m;
    let mut acc = 1 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn check_modulus(m: u64) -> Result<()> {
    if !(2..MAX_MODULUS).contains(&m) {
        return Err(Error::Domain(format!(
            "modulus must satisfy 2 <= m < 2^63, got {m}"
        )));
    }
    Ok(())
}

/// `(prod_{j=lo}^{hi} j) mod m`; an empty range (`lo > hi`) gives 1. A
/// simple loop: range lengths in the kernels below are under `n`, and a
/// product that reaches 0 stays 0.
pub fn range_product_mod(lo: u64, hi: u64, m: u64) -> Residue {
    let mut acc = 1 % m;
    if lo <= hi {
        for j in lo..=hi {
            acc = mulmod(acc, j % m, m);
            if acc == 0 {
                break;
            }
        }
    }
    Residue::new(acc, m)
}

/// `S_k(n) mod n` via modular exponentiation per term.
pub fn power_sum_mod(k: u64, n: u64) -> Result<Residue> {
    check_modulus(n)?;
    let mut acc = Residue::new(0, n);
    for j in 1..n {
        acc = acc + Residue::new(pow_mod(j, k, n), n);
    }
    Ok(acc)
}

/// `S_{n-1}(n) mod n`, the Giuga congruence's left-hand side. Cost is
/// `O(n log n)` word operations.
pub fn giuga_residue(n: u64) -> Result<Residue> {
    power_sum_mod(n.wrapping_sub(1), n)
}

/// `(1 + (n-1)!) mod n` by an incremental product.
pub fn wilson_residue(n: u64) -> Result<Residue> {
    check_modulus(n)?;
    let mut acc = 1 % n;
    for j in 2..n {
        acc = mulmod(acc, j, n);
        if acc == 0 {
            break;
        }
    }
    Ok(Residue::new(acc + 1, n))
}

/// `H_k(n) mod n` through the core-part reduction: the terms with
/// `i > k` all contain a factor divisible by `n`, so only the first `k`
/// survive:
///
/// ```text
/// H_k(n) = 1 + sum_{i=1}^{k} (n+i-1-k)!/i! * i^k   (mod n)
/// ```
///
/// Cost is `O(k(n-k) + k log k)` word operations per call. Each quotient
/// is its own fresh range product; reusing the previous one would need a
/// division, which composite moduli do not allow.
//
// TODO: a product-tree kernel for the range products would push
// all-valid-k sweeps past the current n ~ 400 ceiling.
pub fn h_mod(k: u64, n: u64) -> Result<Residue> {
    check_modulus(n)?;
    if k == 0 || k > n - 1 {
        return Err(Error::Domain(format!(
            "h_mod: need 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let mut acc = Residue::new(1, n);
    for i in 1..=k {
        let quotient = range_product_mod(i + 1, n + i - 1 - k, n);
        acc = acc + quotient.scale(pow_mod(i, k, n));
    }
    Ok(acc)
}

/// `H_k(n) mod n` as the literal full sum over `i = 1..n-1`. Costs
/// `O(n(n-k))` and exists only to validate [`h_mod`]'s reduction; sweeps
/// never use it.
pub fn h_mod_full(k: u64, n: u64) -> Result<Residue> {
    check_modulus(n)?;
    if k == 0 || k > n - 1 {
        return Err(Error::Domain(format!(
            "h_mod_full: need 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let mut acc = Residue::new(1, n);
    for i in 1..n {
        let quotient = range_product_mod(i + 1, n + i - 1 - k, n);
        acc = acc + quotient.scale(pow_mod(i, k, n));
    }
    Ok(acc)
}

/// `U_k(n) mod n` via range products, `O(k(n-k))` word operations.
pub fn u_mod(k: u64, n: u64) -> Result<Residue> {
    check_modulus(n)?;
    if k == 0 || n < 3 || k > n - 2 {
        return Err(Error::Domain(format!(
            "u_mod: need 1 <= k <= n-2, got k={k}, n={n}"
        )));
    }
    let mut acc = Residue::new(0, n);
    for i in 1..=k + 1 {
        let quotient = range_product_mod(i + 1, n + i - 2 - k, n);
        acc = acc + quotient.scale(pow_mod(i, k, n));
    }
    Ok(acc)
}
