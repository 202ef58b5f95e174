//! Definition-literal, arbitrary-precision evaluation of the family
//! functions. Everything here is the ground-truth oracle for the modular
//! kernels in [`crate::modular`]: no residue shortcuts, no floating point.
//!
//! Index arguments (`n`, `k`, `i`) are machine words; the values they
//! produce are arbitrary precision.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::{Mutex, OnceLock};

use crate::{Error, Result};

/// Factorials up to this argument are served from a shared cache; sweeps
/// reuse small factorials heavily. The cache never changes results.
const FACTORIAL_CACHE_MAX: u64 = 512;

fn factorial_cache() -> &'static Mutex<Vec<BigUint>> {
    static CACHE: OnceLock<Mutex<Vec<BigUint>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![BigUint::one()]))
}

/// `m!` with `0! = 1`.
pub fn factorial(m: u64) -> BigUint {
    if m <= FACTORIAL_CACHE_MAX {
        let mut cache = factorial_cache().lock().unwrap();
        while (cache.len() as u64) <= m {
            let next = cache.last().unwrap() * cache.len() as u64;
            cache.push(next);
        }
        return cache[m as usize].clone();
    }
    let mut acc = factorial(FACTORIAL_CACHE_MAX);
    for j in FACTORIAL_CACHE_MAX + 1..=m {
        acc *= j;
    }
    acc
}

/// Product of the integers in `lo..=hi`; an empty range gives 1.
pub fn range_product(lo: u64, hi: u64) -> BigUint {
    let mut acc = BigUint::one();
    if lo > hi {
        return acc;
    }
    for j in lo..=hi {
        acc *= j;
    }
    acc
}

/// Exact quotient `a / b`; panics if `b` does not divide `a`. Every
/// division in this module goes through here so a nonzero remainder can
/// never pass silently.
pub(crate) fn exact_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    assert!(r.is_zero(), "exact_div: {b} does not divide {a}");
    q
}

/// Binomial coefficient `C(n, k)`. Small arguments reuse the factorial
/// cache; larger ones use the multiplicative form, whose stepwise
/// divisions are always exact.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n <= FACTORIAL_CACHE_MAX {
        return exact_div(&factorial(n), &(factorial(k) * factorial(n - k)));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = exact_div(&(acc * (n - k + i)), &BigUint::from(i));
    }
    acc
}

fn exponent(k: u64) -> u32 {
    u32::try_from(k).expect("exponent does not fit u32; exact powers this large are unrepresentable anyway")
}

/// `value^exp` as a big integer.
pub fn power(value: u64, exp: u64) -> BigUint {
    BigUint::from(value).pow(exponent(exp))
}

/// The factorial quotient `(n+i-1-k)! / i!`, computed as the product of
/// the consecutive integers `i+1 ..= n+i-1-k` rather than as a ratio of
/// two full factorials, which keeps intermediates small. The range is
/// empty exactly when `k = n-1`, giving 1.
pub fn falling_quotient(n: u64, i: u64, k: u64) -> Result<BigUint> {
    if n < 2 || k == 0 || k > n - 1 || i == 0 || i > n - 1 {
        return Err(Error::Domain(format!(
            "falling_quotient: need 1 <= k <= n-1 and 1 <= i <= n-1, got n={n}, i={i}, k={k}"
        )));
    }
    Ok(range_product(i + 1, n + i - 1 - k))
}

/// Power sum `S_k(n) = sum_{j=1}^{n-1} j^k`; empty (0) for `n <= 1`.
pub fn power_sum(k: u64, n: u64) -> BigUint {
    let k32 = exponent(k);
    let mut acc = BigUint::zero();
    for j in 1..n {
        acc += BigUint::from(j).pow(k32);
    }
    acc
}

/// Wilson value `1 + (n-1)!`. Divisibility by `n` characterizes primes.
pub fn f_wilson(n: u64) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::Domain(format!("f_wilson: need n >= 2, got {n}")));
    }
    Ok(BigUint::one() + factorial(n - 1))
}

/// Giuga value `1 + S_{n-1}(n)`. Divisibility by `n` holds for every
/// prime; that it holds only for primes is the conjecture under test.
pub fn f_giuga(n: u64) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::Domain(format!("f_giuga: need n >= 2, got {n}")));
    }
    Ok(BigUint::one() + power_sum(n - 1, n))
}

/// Family member `H_k(n) = 1 + sum_{i=1}^{n-1} (n+i-1-k)!/i! * i^k` for
/// `1 <= k <= n-1`, and 0 for out-of-range `k` (the family's own
/// convention keeps the function total).
pub fn h(k: u64, n: u64) -> BigUint {
    if n < 2 || k == 0 || k > n - 1 {
        return BigUint::zero();
    }
    let k32 = exponent(k);
    let mut acc = BigUint::one();
    for i in 1..n {
        acc += range_product(i + 1, n + i - 1 - k) * BigUint::from(i).pow(k32);
    }
    acc
}

/// Step sum `U_k(n) = sum_{i=1}^{k+1} (n+i-2-k)!/i! * i^k` for
/// `1 <= k <= n-2`, and 0 otherwise. Controls the passage from `H_k` to
/// `H_{k+1}` modulo `n`.
pub fn u(k: u64, n: u64) -> BigUint {
    if n < 3 || k == 0 || k > n - 2 {
        return BigUint::zero();
    }
    let k32 = exponent(k);
    let mut acc = BigUint::zero();
    for i in 1..=k + 1 {
        acc += range_product(i + 1, n + i - 2 - k) * BigUint::from(i).pow(k32);
    }
    acc
}

/// Signed pair sum
/// `V_k = sum_{i=1}^{k} [ (-1)^(i-1) C(k+1,i) i^k + (-1)^k C(k,i) k^i ]`.
/// Evaluated in signed arbitrary precision throughout: this is a global
/// integer identity, not a residue statement.
pub fn v(k: u64) -> BigInt {
    let k32 = exponent(k);
    let mut acc = BigInt::zero();
    for i in 1..=k {
        let first = BigInt::from(binomial(k + 1, i) * BigUint::from(i).pow(k32));
        let second = BigInt::from(binomial(k, i) * power(k, i));
        acc += if i % 2 == 1 { first } else { -first };
        acc += if k.is_multiple_of(2) { second } else { -second };
    }
    acc
}

/// `sum_{i=0}^{k} C(k,i) k^i`, which the binomial theorem forces to equal
/// `(k+1)^k`.
pub fn binomial_power_sum(k: u64) -> BigUint {
    let mut acc = BigUint::zero();
    for i in 0..=k {
        acc += binomial(k, i) * power(k, i);
    }
    acc
}

/// `sum_{i=0}^{k+1} (-1)^i C(k+1,i) i^k`, the order-(k+1) forward
/// difference of `j^k`, hence 0 for every `k >= 1`.
pub fn alternating_power_sum(k: u64) -> BigInt {
    let k32 = exponent(k);
    let mut acc = BigInt::zero();
    for i in 0..=k + 1 {
        let term = BigInt::from(binomial(k + 1, i) * BigUint::from(i).pow(k32));
        acc += if i % 2 == 0 { term } else { -term };
    }
    acc
}

/// Iterated forward difference: given `order + 1` consecutive samples
/// `f(j), f(j+1), ..., f(j+order)`, returns
/// `Delta^order f(j) = sum_{i=0}^{order} (-1)^i C(order,i) f(j+order-i)`.
pub fn iterated_forward_difference(order: usize, samples: &[BigInt]) -> Result<BigInt> {
    if samples.len() != order + 1 {
        return Err(Error::Domain(format!(
            "iterated_forward_difference: order {} needs {} samples, got {}",
            order,
            order + 1,
            samples.len()
        )));
    }
    let mut acc = BigInt::zero();
    for i in 0..=order {
        let term = BigInt::from(binomial(order as u64, i as u64)) * &samples[order - i];
        acc += if i % 2 == 0 { term } else { -term };
    }
    Ok(acc)
}

/// Reduce an exact value to a machine-word residue.
pub fn mod_u64(value: &BigUint, m: u64) -> u64 {
    (value % m).to_u64().expect("residue fits u64")
}
