//! Ground-truth primality for characterization claims.
//!
//! Deliberately self-contained: nothing in here touches the exact or
//! modular kernels, so the oracle shares no code with the congruences it
//! is used to judge. Below a small table limit primality is a sieve
//! lookup; above it a strong-pseudoprime test with a fixed witness set
//! that is deterministic for the whole `u64` range.

use crate::{Error, Result};

/// Largest sieve limit accepted by [`PrimeTable::up_to`]; a bit per
/// integer keeps this at 256 MiB.
pub const MAX_SIEVE_LIMIT: u64 = 1 << 31;

const SMALL_TABLE_LIMIT: u64 = 1 << 16;

/// Witnesses making the strong-pseudoprime test deterministic for all
/// n < 3.3 * 10^24, which covers u64 (Sorenson and Webster's published
/// set of the first twelve primes).
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Bitset of prime membership over `[0, limit]`.
pub struct PrimeTable {
    limit: u64,
    words: Vec<u64>,
}

impl PrimeTable {
    /// Sieve of Eratosthenes up to `limit` inclusive.
    pub fn up_to(limit: u64) -> Result<PrimeTable> {
        if limit < 2 {
            return Err(Error::Domain(format!(
                "prime table needs limit >= 2, got {limit}"
            )));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::SieveBudget {
                limit,
                max: MAX_SIEVE_LIMIT,
            });
        }
        fn clear(words: &mut [u64], i: u64) {
            words[(i / 64) as usize] &= !(1u64 << (i % 64));
        }
        let n_bits = (limit + 1) as usize;
        let mut words = vec![u64::MAX; n_bits.div_ceil(64)];
        clear(&mut words, 0);
        clear(&mut words, 1);
        let mut p = 2u64;
        while p * p <= limit {
            if words[(p / 64) as usize] >> (p % 64) & 1 == 1 {
                let mut multiple = p * p;
                while multiple <= limit {
                    clear(&mut words, multiple);
                    multiple += p;
                }
            }
            p += 1;
        }
        // mask off the bits beyond `limit` in the last word
        let tail = n_bits % 64;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(PrimeTable { limit, words })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Membership lookup; `n` must not exceed the table limit.
    pub fn contains(&self, n: u64) -> bool {
        assert!(n <= self.limit, "prime table lookup {n} beyond limit {}", self.limit);
        self.words[(n / 64) as usize] >> (n % 64) & 1 == 1
    }

    /// Number of primes in the table.
    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&n| self.contains(n))
    }
}

fn small_table() -> &'static PrimeTable {
    static TABLE: std::sync::OnceLock<PrimeTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| PrimeTable::up_to(SMALL_TABLE_LIMIT).expect("small table fits budget"))
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_pseudoprime_test(n: u64) -> bool {
    // n odd, n > 2 here
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for w in WITNESSES {
        let a = w % n;
        if a == 0 {
            continue;
        }
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality for any `u64`.
pub fn is_prime(n: u64) -> bool {
    if n <= small_table().limit() {
        return n >= 2 && small_table().contains(n);
    }
    if n.is_multiple_of(2) {
        return false;
    }
    strong_pseudoprime_test(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(3));
        assert!(!is_prime(4));
    }

    #[test]
    fn fermat_pseudoprimes_rejected() {
        // 341 = 11 * 31 passes the base-2 Fermat test but is composite.
        assert!(!is_prime(341));
        // Carmichael numbers
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_prime(n), "{n}");
        }
        // strong pseudoprime to bases 2,3,5,7
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn large_known_values() {
        assert!(is_prime(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(is_prime(18_446_744_073_709_551_557)); // largest prime below 2^64
        assert!(!is_prime(u64::MAX));
        assert!(!is_prime(2_305_843_009_213_693_951 - 2));
    }

    #[test]
    fn table_examples() {
        let t = PrimeTable::up_to(10).unwrap();
        let primes: Vec<u64> = t.iter().collect();
        assert_eq!(primes, vec![2, 3, 5, 7]);

        let t100 = PrimeTable::up_to(100).unwrap();
        assert_eq!(t100.count(), 25);

        let t2 = PrimeTable::up_to(2).unwrap();
        assert_eq!(t2.iter().collect::<Vec<_>>(), vec![2]);

        assert!(PrimeTable::up_to(1).is_err());
        assert!(PrimeTable::up_to(MAX_SIEVE_LIMIT + 1).is_err());
    }

    #[test]
    fn agreement_with_sieve_to_one_million() {
        let table = PrimeTable::up_to(1_000_000).unwrap();
        for n in 0..=1_000_000u64 {
            if n >= 2 {
                assert_eq!(is_prime(n), table.contains(n), "n={n}");
            }
        }
    }

    #[test]
    fn agreement_above_small_table_boundary() {
        let table = PrimeTable::up_to(1 << 17).unwrap();
        for n in (1 << 16) - 64..=(1 << 16) + 4096u64 {
            assert_eq!(is_prime(n), table.contains(n), "n={n}");
        }
    }
}
